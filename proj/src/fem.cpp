#include "fracwave/fem.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <vector>

#include "fracwave/errors.hpp"
#include "fracwave/mittag_leffler.hpp"

namespace fracwave {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// sin(pi m / d), with exact zeros at multiples of d.
double sin_pi_ratio(std::uint64_t m, std::uint64_t d) {
  m %= 2 * d;
  double sign = 1.0;
  if (m >= d) {
    m -= d;
    sign = -1.0;
  }
  if (m == 0) return 0.0;
  if (2 * m > d) m = d - m;
  return sign * std::sin(kPi * static_cast<double>(m) / static_cast<double>(d));
}

// cos(pi m / d) = sin(pi (2m + d) / 2d).
double cos_pi_ratio(std::uint64_t m, std::uint64_t d) { return sin_pi_ratio(2 * m + d, 2 * d); }

// Everything about (phi_i, e_k) that depends on k only through k mod P.
struct HatSineTable {
  explicit HatSineTable(const FemMesh& mesh)
      : n(mesh.n_interior()), period(mesh.period()), h(mesh.h()), sines(period), bumps(period) {
    for (std::size_t m = 0; m < period; ++m) {
      sines[m] = sin_pi_ratio(m, n + 1);
      const double half = sin_pi_ratio(m, period);
      bumps[m] = 2.0 * half * half;  // 1 - cos(m pi h)
    }
  }

  double inner(std::size_t i, std::size_t k) const {
    const std::size_t r = k % period;
    const double kk = static_cast<double>(k);
    return kSqrt2 * 2.0 * bumps[r] / (h * kk * kk * kPi * kPi) * sines[(r * i) % period];
  }

  // Rows k0..k0+rows-1 of the (phi_i, e_k) matrix.
  void fill(std::size_t k0, Eigen::Index rows, Eigen::MatrixXd& out) const {
    out.resize(rows, static_cast<Eigen::Index>(n));
    for (Eigen::Index row = 0; row < rows; ++row) {
      const std::size_t k = k0 + static_cast<std::size_t>(row);
      const std::size_t r = k % period;
      const double kk = static_cast<double>(k);
      const double scale = kSqrt2 * 2.0 * bumps[r] / (h * kk * kk * kPi * kPi);
      for (std::size_t i = 1; i <= n; ++i) {
        out(row, static_cast<Eigen::Index>(i - 1)) = scale * sines[(r * i) % period];
      }
    }
  }

  std::size_t n;
  std::size_t period;
  double h;
  std::vector<double> sines;
  std::vector<double> bumps;
};

// Euler-Maclaurin estimate of sum_{j >= 0} (k0 + j P)^s for s < -1.
double power_tail(double k0, double period, double s) {
  const double integral = std::pow(k0, s + 1.0) / (-(s + 1.0) * period);
  const double f0 = std::pow(k0, s);
  const double d1 = s * period * std::pow(k0, s - 1.0);
  const double d3 = s * (s - 1.0) * (s - 2.0) * period * period * period * std::pow(k0, s - 3.0);
  return integral + 0.5 * f0 - d1 / 12.0 + d3 / 720.0;
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    std::ostringstream os;
    os << "fractional order beta must lie in (0, 1], got " << beta;
    throw DomainError(os.str());
  }
}

}  // namespace

FemMesh::FemMesh(std::size_t n_interior) : n_(n_interior) {
  if (n_interior == 0) throw GridError("mesh needs at least one interior node");
}

FemMesh FemMesh::from_h(double h) {
  if (!(h > 0.0 && h <= 0.5)) throw GridError("mesh size h must lie in (0, 1/2]");
  const double inv = 1.0 / h;
  const double m = std::round(inv);
  if (std::abs(inv - m) > 1e-9 * m) {
    std::ostringstream os;
    os << "mesh size h=" << h << " is not the reciprocal of an integer";
    throw GridError(os.str());
  }
  return FemMesh(static_cast<std::size_t>(m) - 1);
}

double FemMesh::node(std::size_t j) const {
  if (j < 1 || j > n_) throw std::out_of_range("mesh node index outside 1..N");
  return static_cast<double>(j) * h();
}

double phi_sin_inner(const FemMesh& mesh, std::size_t i, std::size_t k) {
  if (i < 1 || i > mesh.n_interior()) throw std::out_of_range("hat function index outside 1..N");
  if (k < 1) throw std::out_of_range("sine mode index starts at 1");
  const std::size_t period = mesh.period();
  const std::size_t r = k % period;
  const double half = sin_pi_ratio(r, period);
  const double kk = static_cast<double>(k);
  return kSqrt2 * 4.0 * half * half / (mesh.h() * kk * kk * kPi * kPi) *
         sin_pi_ratio((r * i) % period, mesh.n_interior() + 1);
}

Eigen::MatrixXd phi_sin_matrix(const FemMesh& mesh, std::size_t modes) {
  Eigen::MatrixXd out;
  HatSineTable(mesh).fill(1, static_cast<Eigen::Index>(modes), out);
  return out;
}

Eigen::MatrixXd mass_matrix(const FemMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.n_interior());
  const double h = mesh.h();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 4.0 * h / 6.0;
    if (i + 1 < n) {
      m(i, i + 1) = h / 6.0;
      m(i + 1, i) = h / 6.0;
    }
  }
  return m;
}

Eigen::MatrixXd fractional_stiffness(const FemMesh& mesh, double beta, const StiffnessOptions& options) {
  check_beta(beta);
  if (options.k_trunc < mesh.period()) {
    std::ostringstream os;
    os << "series truncation " << options.k_trunc << " is shorter than one period " << mesh.period();
    throw DomainError(os.str());
  }
  const std::size_t n = mesh.n_interior();
  const std::size_t period = mesh.period();
  const double s = 2.0 * beta - 4.0;

  // S_r = sum_{k <= K, k = r mod P} k^s.
  std::vector<double> sums(period, 0.0);
  std::vector<double> comp(period, 0.0);
  for (std::size_t k = options.k_trunc; k >= 1; --k) {
    const std::size_t r = k % period;
    const double y = std::pow(static_cast<double>(k), s) - comp[r];
    const double t = sums[r] + y;
    comp[r] = (t - sums[r]) - y;
    sums[r] = t;
  }
  if (options.tail_correction) {
    const std::size_t first = options.k_trunc + 1;
    for (std::size_t r = 0; r < period; ++r) {
      const std::size_t k0 = first + (r + period - first % period) % period;
      sums[r] += power_tail(static_cast<double>(k0), static_cast<double>(period), s);
    }
  }

  // A_ij = (g(|i-j|) - g(i+j)) / 2 with
  // g(m) = 32 pi^(2b-4) / h^2 * sum_r sin^4(pi r h / 2) cos(pi r m h) S_r.
  const double h = mesh.h();
  const double prefactor = 32.0 * std::pow(kPi, s) / (h * h);
  std::vector<double> weights(period);
  for (std::size_t r = 0; r < period; ++r) {
    const double half = sin_pi_ratio(r, period);
    weights[r] = half * half * half * half * sums[r];
  }
  std::vector<double> g(2 * n + 1);
  for (std::size_t m = 0; m <= 2 * n; ++m) {
    double acc = 0.0;
    for (std::size_t r = 1; r < period; ++r) acc += weights[r] * cos_pi_ratio((r * m) % period, n + 1);
    g[m] = prefactor * acc;
  }
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(nn, nn);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j <= n; ++j) {
      const double v = 0.5 * (g[j - i] - g[i + j]);
      a(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = v;
      a(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(i - 1)) = v;
    }
  }
  return a;
}

DiscreteSpectrum::DiscreteSpectrum(const FemMesh& mesh, double beta, const StiffnessOptions& options)
    : mesh_(mesh),
      beta_(beta),
      options_(options),
      mass_(mass_matrix(mesh)),
      stiffness_(fractional_stiffness(mesh, beta, options)) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiffness_, mass_);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("generalized eigensolver failed for the fractional stiffness pencil");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  for (Eigen::Index j = 0; j < eigenvectors_.cols(); ++j) {
    Eigen::Index arg = 0;
    eigenvectors_.col(j).cwiseAbs().maxCoeff(&arg);
    if (eigenvectors_(arg, j) < 0.0) eigenvectors_.col(j) *= -1.0;
  }
  if (eigenvalues_.size() > 0 && !(eigenvalues_(0) > 0.0)) {
    throw ConvergenceError("discrete fractional Laplacian is not positive definite");
  }
  mass_llt_.compute(mass_);
}

DiscreteSpectrum discrete_spectrum(const FemMesh& mesh, double beta, const StiffnessOptions& options) {
  return DiscreteSpectrum(mesh, beta, options);
}

Eigen::VectorXd series_eigenvalues(const DiscreteSpectrum& spectrum, std::size_t k_trunc) {
  const HatSineTable table(spectrum.mesh());
  const auto n = static_cast<Eigen::Index>(spectrum.size());
  constexpr std::size_t kBlock = 4096;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd phi;
  Eigen::VectorXd weight;
  for (std::size_t k0 = 1; k0 <= k_trunc; k0 += kBlock) {
    const auto rows = static_cast<Eigen::Index>(std::min(kBlock, k_trunc - k0 + 1));
    table.fill(k0, rows, phi);
    weight.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      weight(r) = std::pow(dirichlet_eigenvalue(k0 + static_cast<std::size_t>(r)), spectrum.beta());
    }
    const Eigen::MatrixXd proj = phi * spectrum.eigenvectors();
    const Eigen::VectorXd part = proj.cwiseAbs2().transpose() * weight;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double y = part(j) - comp(j);
      const double t = sum(j) + y;
      comp(j) = (t - sum(j)) - y;
      sum(j) = t;
    }
  }
  return sum;
}

Eigen::MatrixXd mode_coupling(const DiscreteSpectrum& spectrum, std::size_t modes) {
  return phi_sin_matrix(spectrum.mesh(), modes) * spectrum.eigenvectors();
}

void FemField::check_size(const DiscreteSpectrum& spectrum) const {
  if (size() != spectrum.size()) {
    std::ostringstream os;
    os << "field of size " << size() << " does not match a mesh with " << spectrum.size()
       << " interior nodes";
    throw GridError(os.str());
  }
}

FemField FemField::to_eigen(const DiscreteSpectrum& spectrum) const {
  check_size(spectrum);
  if (basis_ == Basis::kEigen) return *this;
  return eigen(spectrum.eigenvectors().transpose() * (spectrum.mass() * values_));
}

FemField FemField::to_nodal(const DiscreteSpectrum& spectrum) const {
  check_size(spectrum);
  if (basis_ == Basis::kNodal) return *this;
  return nodal(spectrum.eigenvectors() * values_);
}

FemField project_L2(const DiscreteSpectrum& spectrum, const SineCoeffs& data) {
  const Eigen::VectorXd b = phi_sin_matrix(spectrum.mesh(), data.size()).transpose() * data.values;
  return FemField::nodal(spectrum.solve_mass(b));
}

FemField project_ritz(const DiscreteSpectrum& spectrum, const SineCoeffs& data, double beta) {
  check_beta(beta);
  Eigen::VectorXd scaled = data.values;
  for (std::size_t k = 1; k <= data.size(); ++k) {
    scaled(static_cast<Eigen::Index>(k - 1)) *= std::pow(dirichlet_eigenvalue(k), beta);
  }
  const Eigen::VectorXd b = phi_sin_matrix(spectrum.mesh(), data.size()).transpose() * scaled;
  // A^{-1} = C diag(1/lambda) C^T for the M-orthonormal eigenvectors C.
  const Eigen::MatrixXd& c = spectrum.eigenvectors();
  const Eigen::VectorXd coeffs = (c.transpose() * b).cwiseQuotient(spectrum.eigenvalues());
  return FemField::nodal(c * coeffs);
}

FemField fem_homogeneous(const FracOrders& orders, const DiscreteSpectrum& spectrum,
                         const FemField& v1h, const FemField& v2h, double t) {
  const Eigen::VectorXd c1 = v1h.to_eigen(spectrum).values();
  const Eigen::VectorXd c2 = v2h.to_eigen(spectrum).values();
  if (!(t >= 0.0)) throw GridError("evaluation time must be non-negative");
  const KernelEvaluator value(orders, Kernel::kInitialValue);
  const KernelEvaluator velocity(orders, Kernel::kInitialVelocity);
  Eigen::VectorXd out(c1.size());
  for (Eigen::Index j = 0; j < c1.size(); ++j) {
    const double lambda = spectrum.eigenvalues()(j);
    double c = 0.0;
    if (c1(j) != 0.0) c += value(lambda, t) * c1(j);
    if (c2(j) != 0.0) c += velocity(lambda, t) * c2(j);
    out(j) = c;
  }
  return FemField::eigen(std::move(out));
}

FemConvolution::FemConvolution(const FracOrders& orders, const DiscreteSpectrum& spectrum,
                               const NoiseSpec& noise, std::size_t modes, double dt,
                               std::size_t t_index)
    : coupling_(mode_coupling(spectrum, modes)), dt_(dt) {
  if (!(dt > 0.0)) throw GridError("convolution step must be positive");
  const auto cells = static_cast<Eigen::Index>(t_index);
  const auto rows = static_cast<Eigen::Index>(modes);
  sigma_.resize(rows, cells);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index i = 0; i < cells; ++i) {
      sigma_(k, i) = noise.sigma_n(static_cast<std::size_t>(k + 1), static_cast<double>(i) * dt) / dt;
    }
  }
  const KernelEvaluator antiderivative(orders, Kernel::kForcingIntegral);
  const auto n = static_cast<Eigen::Index>(spectrum.size());
  kernel_.resize(n, cells);
  std::vector<double> g(t_index + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lambda = spectrum.eigenvalues()(j);
    for (std::size_t m = 0; m <= t_index; ++m) g[m] = antiderivative(lambda, static_cast<double>(m) * dt);
    for (Eigen::Index i = 0; i < cells; ++i) {
      const auto lag = static_cast<std::size_t>(cells - i);
      kernel_(j, i) = g[lag] - g[lag - 1];
    }
  }
}

Eigen::VectorXd FemConvolution::apply(const NoisePaths& paths) const {
  if (std::abs(paths.dt() - dt_) > 1e-12 * dt_) {
    std::ostringstream os;
    os << "noise step " << paths.dt() << " does not match convolution step " << dt_;
    throw GridError(os.str());
  }
  if (paths.modes() < modes() || paths.steps() < cells()) {
    throw GridError("noise paths do not cover the convolution's modes and cells");
  }
  const auto rows = static_cast<Eigen::Index>(modes());
  const auto cols = static_cast<Eigen::Index>(cells());
  const Eigen::MatrixXd forcing =
      sigma_.cwiseProduct(paths.increments().topLeftCorner(rows, cols));
  const Eigen::MatrixXd projected = coupling_.transpose() * forcing;
  return projected.cwiseProduct(kernel_).rowwise().sum();
}

FemField fem_solution(const FracOrders& orders, const DiscreteSpectrum& spectrum, const FemField& v1h,
                      const FemField& v2h, const NoiseSpec& noise, const NoisePaths& paths, double t) {
  const std::size_t index = grid_index(t, paths.dt());
  if (index > paths.steps()) throw GridError("evaluation time lies beyond the noise horizon");
  FemField u = fem_homogeneous(orders, spectrum, v1h, v2h, t);
  const FemConvolution conv(orders, spectrum, noise, paths.modes(), paths.dt(), index);
  return FemField::eigen(u.values() + conv.apply(paths));
}

double discrete_norm(const DiscreteSpectrum& spectrum, const FemField& u, double p) {
  const Eigen::VectorXd c = u.to_eigen(spectrum).values();
  double s = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    s += std::pow(spectrum.eigenvalues()(j), p / spectrum.beta()) * c(j) * c(j);
  }
  return std::sqrt(s);
}

double l2_error_cross(const SineCoeffs& u_spec, const FemField& u_fem, const DiscreteSpectrum& spectrum) {
  return l2_error_cross(u_spec, u_fem.to_eigen(spectrum).values(), mode_coupling(spectrum, u_spec.size()));
}

double l2_error_cross(const SineCoeffs& u_spec, const Eigen::VectorXd& c_fem,
                      const Eigen::MatrixXd& coupling) {
  if (coupling.rows() != u_spec.values.size() || coupling.cols() != c_fem.size()) {
    throw GridError("coupling matrix does not match the field sizes");
  }
  const double uu = u_spec.values.squaredNorm();
  const double cc = c_fem.squaredNorm();
  const double cross = (coupling.transpose() * u_spec.values).dot(c_fem);
  const double d = uu - 2.0 * cross + cc;
  if (d >= 0.0) return std::sqrt(d);
  if (d >= -1e-14 * std::max(1.0, uu + cc)) return 0.0;
  std::ostringstream os;
  os << "squared L2 distance is negative (" << d << "); truncations are inconsistent";
  throw ConvergenceError(os.str());
}

}  // namespace fracwave
