#include "fracwave/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fracwave/errors.hpp"

namespace fracwave {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

}  // namespace

void validate(const FracOrders& orders) {
  if (!(orders.alpha > 1.0 && orders.alpha <= 2.0)) {
    std::ostringstream os;
    os << "time order alpha must satisfy 1 < alpha <= 2, got " << orders.alpha;
    throw DomainError(os.str());
  }
  if (!(orders.beta > 0.5 && orders.beta <= 1.0)) {
    std::ostringstream os;
    os << "space order beta must satisfy 1/2 < beta <= 1, got " << orders.beta;
    throw DomainError(os.str());
  }
}

double dirichlet_eigenvalue(std::size_t k) {
  const double kk = static_cast<double>(k);
  return kk * kk * kPi * kPi;
}

double eval_e_k(std::size_t k, double x) {
  if (k == 0) throw std::out_of_range("eigenfunction index starts at 1");
  return kSqrt2 * std::sin(static_cast<double>(k) * kPi * x);
}

double SineCoeffs::evaluate(double x) const {
  double s = 0.0;
  for (std::size_t k = 1; k <= size(); ++k) s += (*this)[k] * eval_e_k(k, x);
  return s;
}

SineCoeffs coeffs_v1(std::size_t modes) {
  SineCoeffs c(modes);
  for (std::size_t k = 1; k <= modes; k += 2) {
    const double kp = static_cast<double>(k) * kPi;
    c[k] = 16.0 * kSqrt2 / (kp * kp * kp);
  }
  return c;
}

SineCoeffs coeffs_v2(std::size_t modes) {
  SineCoeffs c(modes);
  for (std::size_t k = 1; k <= modes; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    c[k] = sign * kSqrt2 / (static_cast<double>(k) * kPi);
  }
  return c;
}

SineCoeffs coeffs_mode(std::size_t modes, std::size_t j) {
  if (j < 1 || j > modes) throw std::out_of_range("mode index outside the truncation");
  SineCoeffs c(modes);
  c[j] = 1.0;
  return c;
}

double sobolev_norm(const SineCoeffs& u, double q) {
  double s = 0.0;
  for (std::size_t k = 1; k <= u.size(); ++k) {
    s += std::pow(dirichlet_eigenvalue(k), q) * u[k] * u[k];
  }
  return std::sqrt(s);
}

SineCoeffs homogeneous_solution(const FracOrders& orders, const SineCoeffs& v1, const SineCoeffs& v2,
                                double t) {
  if (v1.size() != v2.size()) throw GridError("initial data truncations differ");
  if (t == 0.0) return v1;
  const KernelEvaluator value(orders, Kernel::kInitialValue);
  const KernelEvaluator velocity(orders, Kernel::kInitialVelocity);
  SineCoeffs u(v1.size());
  for (std::size_t k = 1; k <= v1.size(); ++k) {
    const double lb = std::pow(dirichlet_eigenvalue(k), orders.beta);
    double c = 0.0;
    if (v1[k] != 0.0) c += value(lb, t) * v1[k];
    if (v2[k] != 0.0) c += velocity(lb, t) * v2[k];
    u[k] = c;
  }
  return u;
}

std::size_t grid_index(double t, double dt) {
  if (!(dt > 0.0) || !(t >= 0.0)) throw GridError("grid time and step must be non-negative");
  const double ratio = t / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "t=" << t << " is not a node of the grid with step " << dt;
    throw GridError(os.str());
  }
  return static_cast<std::size_t>(nearest);
}

ConvolutionWeights::ConvolutionWeights(const FracOrders& orders, const NoiseSpec& noise,
                                       std::size_t modes, double dt, std::size_t t_index,
                                       ConvolutionRule rule)
    : weights_(modes, t_index), dt_(dt), rule_(rule) {
  if (!(dt > 0.0)) throw GridError("convolution step must be positive");
  const auto cells = static_cast<Eigen::Index>(t_index);
  if (rule == ConvolutionRule::kExactIntegration) {
    const KernelEvaluator antiderivative(orders, Kernel::kForcingIntegral);
    std::vector<double> g(t_index + 1);
    for (std::size_t k = 1; k <= modes; ++k) {
      const auto row = static_cast<Eigen::Index>(k - 1);
      if (k > noise.n_cutoff) {
        weights_.row(row).setZero();
        continue;
      }
      const double lb = std::pow(dirichlet_eigenvalue(k), orders.beta);
      for (std::size_t m = 0; m <= t_index; ++m) g[m] = antiderivative(lb, static_cast<double>(m) * dt);
      for (Eigen::Index i = 0; i < cells; ++i) {
        const double sigma = noise.sigma_n(k, static_cast<double>(i) * dt);
        // Cell i spans lags (I-i-1)dt .. (I-i)dt.
        const auto lag = static_cast<std::size_t>(cells - i);
        weights_(row, i) = sigma * (g[lag] - g[lag - 1]) / dt;
      }
    }
  } else {
    const KernelEvaluator forcing(orders, Kernel::kForcing);
    for (std::size_t k = 1; k <= modes; ++k) {
      const auto row = static_cast<Eigen::Index>(k - 1);
      const double lb = std::pow(dirichlet_eigenvalue(k), orders.beta);
      for (Eigen::Index i = 0; i < cells; ++i) {
        const double sigma = noise.sigma(k, static_cast<double>(i) * dt);
        weights_(row, i) = sigma * forcing(lb, static_cast<double>(cells - i) * dt);
      }
    }
  }
}

SineCoeffs ConvolutionWeights::apply(const NoisePaths& paths) const {
  if (std::abs(paths.dt() - dt_) > 1e-12 * dt_) {
    std::ostringstream os;
    os << "noise step " << paths.dt() << " does not match convolution step " << dt_;
    throw GridError(os.str());
  }
  if (paths.modes() < modes() || paths.steps() < cells()) {
    throw GridError("noise paths do not cover the convolution's modes and cells");
  }
  SineCoeffs out(modes());
  const auto cols = weights_.cols();
  for (Eigen::Index k = 0; k < weights_.rows(); ++k) {
    const double* w = weights_.row(k).data();
    const double* d = paths.increments().row(k).data();
    double s = 0.0;
    for (Eigen::Index i = 0; i < cols; ++i) s += w[i] * d[i];
    out.values(k) = s;
  }
  return out;
}

SineCoeffs stochastic_convolution_exact(const FracOrders& orders, const NoiseSpec& noise,
                                        const NoisePaths& paths, std::size_t t_index) {
  if (t_index > paths.steps()) throw GridError("evaluation time lies beyond the noise horizon");
  const ConvolutionWeights w(orders, noise, paths.modes(), paths.dt(), t_index,
                             ConvolutionRule::kExactIntegration);
  return w.apply(paths);
}

SineCoeffs reference_solution(const FracOrders& orders, const SineCoeffs& v1, const SineCoeffs& v2,
                              const NoiseSpec& noise, const NoisePaths& paths, double t) {
  const std::size_t index = grid_index(t, paths.dt());
  if (index > paths.steps()) throw GridError("evaluation time lies beyond the noise horizon");
  if (v1.size() != paths.modes()) throw GridError("initial data and noise use different mode counts");
  const ConvolutionWeights w(orders, noise, paths.modes(), paths.dt(), index,
                             ConvolutionRule::kLeftRectangle);
  SineCoeffs u = homogeneous_solution(orders, v1, v2, t);
  u.values += w.apply(paths).values;
  return u;
}

}  // namespace fracwave
