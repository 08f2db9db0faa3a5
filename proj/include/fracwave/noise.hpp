#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>

namespace fracwave {

/// sigma_k(t) = 1/k^3, the coefficient sequence used by the experiments.
double inverse_cube_sigma(std::size_t k, double t);

/// Description of the truncated space-time white noise
/// sum_k sigma_k^n(t) d xi_k(t) e_k(x).
///
/// Modes are numbered from 1 (mode k multiplies e_k). Time cells are
/// numbered from 0: cell i covers [i dt, (i+1) dt].
struct NoiseSpec {
  std::function<double(std::size_t, double)> sigma = inverse_cube_sigma;
  /// sigma_k^n = sigma_k for k <= n_cutoff and 0 beyond.
  std::size_t n_cutoff = 1000;
  std::size_t modes = 1000;
  double horizon = 1.0;
  std::size_t fine_steps = 1000;

  double fine_dt() const { return horizon / static_cast<double>(fine_steps); }
  /// sigma_k^n(t).
  double sigma_n(std::size_t k, double t) const { return k <= n_cutoff ? sigma(k, t) : 0.0; }
  /// Throws DomainError on an inconsistent specification.
  void validate() const;
};

/// Default cap on modes * steps for a single increment matrix.
inline constexpr std::size_t kDefaultNoiseEntryCap = std::size_t{1} << 27;

/// Brownian increments xi_k(t_{i+1}) - xi_k(t_i) for k = 1..modes and
/// i = 0..steps-1, stored row-major (one row per mode). Immutable once built.
class NoisePaths {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  NoisePaths() = default;
  NoisePaths(Matrix increments, double dt, std::uint64_t seed = 0);

  /// Independent N(0, dt) increments. Mode k draws from its own counter-based
  /// stream keyed by (seed, k), so adding modes never changes earlier rows.
  static NoisePaths generate(const NoiseSpec& spec, std::uint64_t seed,
                             std::size_t entry_cap = kDefaultNoiseEntryCap);

  /// Sums `factor` consecutive increments (ascending order) per mode. The
  /// result describes the same Brownian paths on a grid with step factor*dt.
  NoisePaths coarsen(std::size_t factor) const;

  std::size_t modes() const { return static_cast<std::size_t>(increments_.rows()); }
  std::size_t steps() const { return static_cast<std::size_t>(increments_.cols()); }
  double dt() const { return dt_; }
  std::uint64_t seed() const { return seed_; }
  const Matrix& increments() const { return increments_; }

  /// Increment of mode k (1-based) over cell i (0-based).
  double increment(std::size_t k, std::size_t i) const;
  /// increment(k, i) / sqrt(dt), a standard normal draw.
  double normalized_xi(std::size_t k, std::size_t i) const;
  /// xi_k(node * dt), the path value reconstructed by summing increments.
  double path_value(std::size_t k, std::size_t node) const;

  /// Binary dump: "FWNOISE1", modes and steps as little-endian uint32, then
  /// the increments as little-endian float64 in row-major order.
  void save(const std::filesystem::path& path) const;
  /// Loads a dump; dt = horizon / steps.
  static NoisePaths load(const std::filesystem::path& path, double horizon);

 private:
  void check_indices(std::size_t k, std::size_t i) const;

  Matrix increments_;
  double dt_ = 0.0;
  std::uint64_t seed_ = 0;
};

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

}  // namespace fracwave
