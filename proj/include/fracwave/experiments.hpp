#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracwave/orders.hpp"
#include "fracwave/spectral.hpp"

namespace fracwave {

/// Parameters shared by the modeling-error and FEM-error experiments.
struct ExperimentConfig {
  FracOrders orders;
  double horizon = 1.0;
  std::size_t m_traj = 1000;
  /// Fine noise grid: n_fine steps over [0, horizon].
  std::size_t n_fine = 1000;
  /// Sine modes carried by the noise and the spectral solution.
  std::size_t modes = 1000;
  /// sigma_k^n = sigma_k for k <= n_cutoff.
  std::size_t n_cutoff = 1000;
  /// Coarse steps of the modeling-error experiment.
  std::vector<double> dt_list = {1.0 / 25, 1.0 / 50, 1.0 / 100, 1.0 / 125, 1.0 / 200};
  /// Mesh sizes of the FEM experiment.
  std::vector<double> h_list = {1.0 / 10, 1.0 / 25, 1.0 / 50, 1.0 / 75, 1.0 / 100};
  /// Time step of the FEM experiment.
  double fem_dt = 0.01;
  /// Truncation of the sine series behind the fractional stiffness matrix.
  std::size_t stiffness_k_trunc = 1'000'000;
  std::uint64_t base_seed = 20240601;
  /// Worker threads; 0 means all available. Results do not depend on it.
  std::size_t threads = 0;
  /// Quadrature for the coarse-grid solution of the modeling experiment.
  ConvolutionRule coarse_rule = ConvolutionRule::kExactIntegration;

  /// Throws DomainError or GridError on inconsistent settings.
  void validate() const;
  /// Fine-grid steps per coarse step for `dt`; throws GridError if `dt` is
  /// not a multiple of the fine step dividing the horizon.
  std::size_t coarsening_factor(double dt) const;
};

struct RateRow {
  double resolution = 0.0;
  double error = 0.0;
  std::optional<double> rate;
  /// Standard error of `error`, from the trajectory spread.
  double std_error = 0.0;
};

struct RateTable {
  std::vector<RateRow> rows;
  FracOrders orders;
  std::size_t m_traj = 0;
  std::uint64_t seed = 0;

  double mean_rate() const;
};

/// rate_i = ln(e_{i-1}/e_i) / ln(r_{i-1}/r_i) for i >= 1 (output has one
/// entry fewer than the inputs). Throws DomainError on non-positive entries
/// or mismatched lengths.
std::vector<double> compute_rates(const std::vector<double>& errors,
                                  const std::vector<double>& resolutions);

/// Squared L2 distances ||u_ref - u_n||^2 at t = horizon, indexed
/// [dt index][trajectory]. Trajectory l draws its noise with seed
/// mix_seed(base_seed, l); the coarse solution sees the same Brownian path
/// through aggregated increments.
std::vector<std::vector<double>> modeling_squared_errors(const ExperimentConfig& cfg);

/// Monte Carlo root-mean-square modeling error per dt, with rates.
RateTable modeling_error_experiment(const ExperimentConfig& cfg);

/// Exact E||u_ref - u_n||^2 per dt (no sampling), summed from the kernel
/// tables.
std::vector<double> expected_modeling_error(const ExperimentConfig& cfg);

/// Squared L2 distances ||u_n - u_n^h||^2 at t = horizon, indexed
/// [h index][trajectory], both sides on the fem_dt grid with the same noise.
std::vector<std::vector<double>> fem_squared_errors(const ExperimentConfig& cfg);

/// Monte Carlo root-mean-square FEM error per h, with rates.
RateTable fem_error_experiment(const ExperimentConfig& cfg);

/// Exact E||u_n - u_n^h||^2 per h.
std::vector<double> expected_fem_error(const ExperimentConfig& cfg);

/// Reduces per-trajectory squared errors to a table row set.
RateTable fold_rate_table(const std::vector<std::vector<double>>& squared_errors,
                          const std::vector<double>& resolutions, const ExperimentConfig& cfg);

struct StabilityCheck {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool passed() const { return value >= lower && value <= upper; }
};

struct StabilityReport {
  FracOrders orders;
  std::vector<StabilityCheck> checks;
  bool passed() const;
};

/// Decay exponents of homogeneous solutions on log-spaced times, compared
/// with t^(-alpha) (initial value) and t^(1-alpha) (initial velocity), plus
/// the t -> 0 continuity of polynomial data. For alpha = 2 the solution does
/// not decay and only boundedness is checked.
StabilityReport stability_suite(const FracOrders& orders);

/// Least-squares slope of ln|y| against ln t.
double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y);

/// CSV with `#` metadata lines, then `resolution,error,rate,stderr`.
/// Floats use the shortest round-trip decimal form.
void write_rate_csv(std::ostream& os, const RateTable& table);
void write_rate_csv(const std::filesystem::path& path, const RateTable& table);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// `git describe` of the build.
const char* build_description();

}  // namespace fracwave
