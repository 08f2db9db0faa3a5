#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>

#include "fracwave/noise.hpp"
#include "fracwave/orders.hpp"
#include "fracwave/spectral.hpp"

namespace fracwave {

/// Uniform mesh of (0,1) with N interior nodes x_j = j h, h = 1/(N+1).
/// Hat function phi_j (1-based) peaks at x_j and vanishes at 0 and 1.
class FemMesh {
 public:
  explicit FemMesh(std::size_t n_interior);
  /// Mesh with h = 1/m; throws GridError unless 1/h is an integer >= 2.
  static FemMesh from_h(double h);

  std::size_t n_interior() const { return n_; }
  double h() const { return 1.0 / static_cast<double>(n_ + 1); }
  /// Node x_j for j = 1..N.
  double node(std::size_t j) const;
  /// Period of k -> (phi_i, e_k) in k: 2(N+1).
  std::size_t period() const { return 2 * (n_ + 1); }

 private:
  std::size_t n_;
};

/// (phi_i, e_k) = sqrt(2) * 2 (1 - cos(k pi h)) / (h k^2 pi^2) * sin(k pi x_i).
/// Angles are reduced modulo 2 pi in integer arithmetic first, so the value
/// stays accurate for very large k.
double phi_sin_inner(const FemMesh& mesh, std::size_t i, std::size_t k);

/// Rows k = 1..modes (row k-1), columns i = 1..N: (phi_i, e_k).
Eigen::MatrixXd phi_sin_matrix(const FemMesh& mesh, std::size_t modes);

/// Consistent mass matrix (h/6) [1, 4, 1].
Eigen::MatrixXd mass_matrix(const FemMesh& mesh);

struct StiffnessOptions {
  /// Number of sine modes summed explicitly.
  std::size_t k_trunc = 1'000'000;
  /// Adds an Euler-Maclaurin estimate of the modes beyond k_trunc.
  bool tail_correction = true;
};

/// A_ij = sum_k lambda_k^beta (phi_i, e_k)(phi_j, e_k).
///
/// The summand factors as k^(2 beta - 4) times a function of k mod 2(N+1),
/// so the k-sum collapses to 2(N+1) compensated power sums, each taken in
/// descending k. The result is exactly symmetric.
Eigen::MatrixXd fractional_stiffness(const FemMesh& mesh, double beta,
                                     const StiffnessOptions& options = {});

/// Eigenpairs of the discrete fractional Laplacian: A c = lambda M c.
/// Immutable after construction; safe to share across threads.
class DiscreteSpectrum {
 public:
  DiscreteSpectrum(const FemMesh& mesh, double beta, const StiffnessOptions& options = {});

  const FemMesh& mesh() const { return mesh_; }
  double beta() const { return beta_; }
  const StiffnessOptions& options() const { return options_; }
  std::size_t size() const { return mesh_.n_interior(); }

  /// lambda_j^{h,beta}, ascending (entry j-1 holds mode j).
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Column j-1 holds the nodal values of e_j^h; M-orthonormal, each column
  /// signed so that its largest-magnitude entry is positive.
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  const Eigen::MatrixXd& mass() const { return mass_; }
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }

  /// Solves M x = b.
  Eigen::VectorXd solve_mass(const Eigen::VectorXd& b) const { return mass_llt_.solve(b); }

 private:
  FemMesh mesh_;
  double beta_;
  StiffnessOptions options_;
  Eigen::MatrixXd mass_;
  Eigen::MatrixXd stiffness_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::LLT<Eigen::MatrixXd> mass_llt_;
};

DiscreteSpectrum discrete_spectrum(const FemMesh& mesh, double beta,
                                   const StiffnessOptions& options = {});

/// lambda_j^{h,beta} recomputed as sum_{k <= k_trunc} lambda_k^beta (e_j^h, e_k)^2
/// by direct summation over k.
Eigen::VectorXd series_eigenvalues(const DiscreteSpectrum& spectrum, std::size_t k_trunc);

/// Q_kj = (e_k, e_j^h) for k = 1..modes (row k-1) and j = 1..N (column j-1).
/// Row k holds the discrete-eigen coefficients of P_h e_k.
Eigen::MatrixXd mode_coupling(const DiscreteSpectrum& spectrum, std::size_t modes);

/// A function in V_h, held either as nodal values or as coefficients
/// c_j = (u, e_j^h).
class FemField {
 public:
  enum class Basis { kNodal, kEigen };

  FemField() = default;
  static FemField nodal(Eigen::VectorXd values) { return FemField(Basis::kNodal, std::move(values)); }
  static FemField eigen(Eigen::VectorXd values) { return FemField(Basis::kEigen, std::move(values)); }

  Basis basis() const { return basis_; }
  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  /// c = C^T M u.
  FemField to_eigen(const DiscreteSpectrum& spectrum) const;
  /// u = C c.
  FemField to_nodal(const DiscreteSpectrum& spectrum) const;

 private:
  FemField(Basis b, Eigen::VectorXd v) : basis_(b), values_(std::move(v)) {}
  void check_size(const DiscreteSpectrum& spectrum) const;

  Basis basis_ = Basis::kNodal;
  Eigen::VectorXd values_;
};

/// L2 projection P_h: solves M c = b with b_i = sum_k data_k (phi_i, e_k).
FemField project_L2(const DiscreteSpectrum& spectrum, const SineCoeffs& data);

/// Ritz projection R_h for the fractional form: solves A c = b with
/// b_i = sum_k lambda_k^beta data_k (phi_i, e_k).
FemField project_ritz(const DiscreteSpectrum& spectrum, const SineCoeffs& data, double beta);

/// Homogeneous part of the discrete solution, in eigen coefficients:
/// E_{a,1}(-lambda_j t^a) v1_j + t E_{a,2}(-lambda_j t^a) v2_j.
FemField fem_homogeneous(const FracOrders& orders, const DiscreteSpectrum& spectrum,
                         const FemField& v1h, const FemField& v2h, double t);

/// Discrete stochastic convolution at t = t_index * dt, precomputed for one
/// grid so that apply() costs one matrix product per trajectory. Each noise
/// cell contributes sigma_k^n(t_i) (increment_ki / dt) (P_h e_k)_j
/// [G_j(t - t_i) - G_j(t - t_{i+1})], G_j(tau) = tau^a E_{a,a+1}(-lambda_j tau^a).
class FemConvolution {
 public:
  FemConvolution(const FracOrders& orders, const DiscreteSpectrum& spectrum, const NoiseSpec& noise,
                 std::size_t modes, double dt, std::size_t t_index);

  /// Eigen coefficients of the convolution. Throws GridError on a step or
  /// shape mismatch.
  Eigen::VectorXd apply(const NoisePaths& paths) const;

  std::size_t modes() const { return static_cast<std::size_t>(coupling_.rows()); }
  std::size_t cells() const { return static_cast<std::size_t>(kernel_.cols()); }
  double dt() const { return dt_; }
  const Eigen::MatrixXd& coupling() const { return coupling_; }
  const Eigen::MatrixXd& scaled_sigma() const { return sigma_; }
  const Eigen::MatrixXd& kernel_increments() const { return kernel_; }

 private:
  Eigen::MatrixXd coupling_;  // modes x N, (e_k, e_j^h)
  Eigen::MatrixXd sigma_;     // modes x cells, sigma_k^n(t_i) / dt
  Eigen::MatrixXd kernel_;    // N x cells, G_j(t - t_i) - G_j(t - t_{i+1})
  double dt_;
};

/// u_n^h(t) in eigen coefficients. v1h and v2h may use either basis.
/// Throws GridError if t is not a node of the noise grid.
FemField fem_solution(const FracOrders& orders, const DiscreteSpectrum& spectrum, const FemField& v1h,
                      const FemField& v2h, const NoiseSpec& noise, const NoisePaths& paths, double t);

/// |u|_{p,h} = sqrt(sum_j (lambda_j^{h,beta})^(p/beta) c_j^2).
double discrete_norm(const DiscreteSpectrum& spectrum, const FemField& u, double p);

/// ||u_spec - u_fem|| in L2(0,1), with the truncated sine series on one side
/// and a V_h function on the other, using exact cross inner products.
/// Slightly negative squared distances from rounding clamp to zero; larger
/// negative values throw ConvergenceError.
double l2_error_cross(const SineCoeffs& u_spec, const FemField& u_fem, const DiscreteSpectrum& spectrum);

/// Same, with the coupling matrix for u_spec.size() modes supplied.
double l2_error_cross(const SineCoeffs& u_spec, const Eigen::VectorXd& c_fem,
                      const Eigen::MatrixXd& coupling);

}  // namespace fracwave
