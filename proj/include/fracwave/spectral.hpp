#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "fracwave/mittag_leffler.hpp"
#include "fracwave/noise.hpp"
#include "fracwave/orders.hpp"

namespace fracwave {

/// lambda_k = k^2 pi^2, the k-th Dirichlet eigenvalue of -d^2/dx^2 on (0,1).
double dirichlet_eigenvalue(std::size_t k);

/// e_k(x) = sqrt(2) sin(k pi x).
double eval_e_k(std::size_t k, double x);

/// Coefficients (u, e_k) for k = 1..size(); entry k lives at index k-1.
struct SineCoeffs {
  Eigen::VectorXd values;

  SineCoeffs() = default;
  explicit SineCoeffs(std::size_t modes) : values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(modes))) {}
  explicit SineCoeffs(Eigen::VectorXd v) : values(std::move(v)) {}

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// Coefficient of mode k (1-based).
  double operator[](std::size_t k) const { return values(static_cast<Eigen::Index>(k - 1)); }
  double& operator[](std::size_t k) { return values(static_cast<Eigen::Index>(k - 1)); }
  /// Point evaluation of the truncated expansion.
  double evaluate(double x) const;
};

/// Sine coefficients of v1(x) = -4x^2 + 4x.
SineCoeffs coeffs_v1(std::size_t modes);
/// Sine coefficients of v2(x) = x.
SineCoeffs coeffs_v2(std::size_t modes);
/// Unit vector for e_j.
SineCoeffs coeffs_mode(std::size_t modes, std::size_t j);

/// |u|_q = sqrt(sum lambda_k^q u_k^2).
double sobolev_norm(const SineCoeffs& u, double q);

/// u(t) for zero forcing: E_{a,1}(-lambda_k^b t^a) v1_k + t E_{a,2}(-lambda_k^b t^a) v2_k.
SineCoeffs homogeneous_solution(const FracOrders& orders, const SineCoeffs& v1, const SineCoeffs& v2,
                                double t);

/// How the time integral of the S-kernel against the noise is evaluated.
enum class ConvolutionRule {
  /// Piecewise-constant noise on each cell, kernel integrated exactly via
  /// its antiderivative G_k(tau) = tau^a E_{a,a+1}(-lambda_k^b tau^a).
  kExactIntegration,
  /// Left-point Ito sum S_k(t - t_i) sigma_k(t_i) dW_{k,i} (reference rule).
  kLeftRectangle,
};

/// Deterministic weights W(k, i) such that the k-th coefficient of the
/// stochastic convolution at t = t_index * dt equals
/// sum_{i < t_index} W(k, i) * increment(k, i).
///
/// Building the table is the expensive part (one Mittag-Leffler evaluation
/// per entry); apply() is a row-wise dot product, so a single table serves
/// every trajectory on the same grid.
class ConvolutionWeights {
 public:
  /// Uses sigma_k^n from `noise` for kExactIntegration and sigma_k (no
  /// cutoff) for kLeftRectangle, matching the regularized solution and the
  /// reference solution respectively.
  ConvolutionWeights(const FracOrders& orders, const NoiseSpec& noise, std::size_t modes, double dt,
                     std::size_t t_index, ConvolutionRule rule);

  /// Throws GridError if the paths have a different step or too few modes
  /// or cells.
  SineCoeffs apply(const NoisePaths& paths) const;

  std::size_t modes() const { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t cells() const { return static_cast<std::size_t>(weights_.cols()); }
  double dt() const { return dt_; }
  double time() const { return dt_ * static_cast<double>(cells()); }
  ConvolutionRule rule() const { return rule_; }
  const NoisePaths::Matrix& weights() const { return weights_; }

 private:
  NoisePaths::Matrix weights_;
  double dt_;
  ConvolutionRule rule_;
};

/// Stochastic convolution of the regularized problem at t = t_index * dt,
/// with the kernel integrated exactly over each noise cell.
SineCoeffs stochastic_convolution_exact(const FracOrders& orders, const NoiseSpec& noise,
                                        const NoisePaths& paths, std::size_t t_index);

/// Reference solution at t: homogeneous part plus the left-point Ito sum over
/// the fine grid of `paths`. Throws GridError if t is not a grid node.
SineCoeffs reference_solution(const FracOrders& orders, const SineCoeffs& v1, const SineCoeffs& v2,
                              const NoiseSpec& noise, const NoisePaths& paths, double t);

/// Grid index of t on a uniform grid with step dt; throws GridError when t is
/// not a node (relative tolerance 1e-9).
std::size_t grid_index(double t, double dt);

}  // namespace fracwave
