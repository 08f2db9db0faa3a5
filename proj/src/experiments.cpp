#include "fracwave/experiments.hpp"

#include <omp.h>

#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fracwave/errors.hpp"
#include "fracwave/fem.hpp"
#include "fracwave/mittag_leffler.hpp"
#include "fracwave/noise.hpp"

#ifndef FRACWAVE_GIT_DESCRIBE
#define FRACWAVE_GIT_DESCRIBE "unknown"
#endif

namespace fracwave {
namespace {

NoiseSpec noise_spec(const ExperimentConfig& cfg) {
  NoiseSpec spec;
  spec.n_cutoff = cfg.n_cutoff;
  spec.modes = cfg.modes;
  spec.horizon = cfg.horizon;
  spec.fine_steps = cfg.n_fine;
  return spec;
}

int worker_count(const ExperimentConfig& cfg) {
  return cfg.threads == 0 ? omp_get_max_threads() : static_cast<int>(cfg.threads);
}

// Runs body(l) for every trajectory and rethrows the failure of the lowest
// failing index, so the reported error does not depend on scheduling.
template <typename Body>
void for_each_trajectory(const ExperimentConfig& cfg, Body body) {
  const auto count = static_cast<std::int64_t>(cfg.m_traj);
  std::vector<std::exception_ptr> failures(cfg.m_traj);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count(cfg))
  for (std::int64_t l = 0; l < count; ++l) {
    try {
      body(static_cast<std::size_t>(l));
    } catch (...) {
      failures[static_cast<std::size_t>(l)] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

void check_finite(double value, const ExperimentConfig& cfg, std::size_t l, const char* what) {
  if (std::isfinite(value)) return;
  std::ostringstream os;
  os << what << " is not finite for trajectory " << l << " (seed " << mix_seed(cfg.base_seed, l)
     << ", base seed " << cfg.base_seed << ")";
  throw ConvergenceError(os.str());
}

std::vector<double> linspace_log(double lo, double hi, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    t[i] = std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo)));
  }
  return t;
}

}  // namespace

void ExperimentConfig::validate() const {
  fracwave::validate(orders);
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon T must be positive");
  if (m_traj == 0) throw DomainError("need at least one trajectory");
  if (n_fine == 0) throw DomainError("fine grid needs at least one step");
  if (modes == 0) throw DomainError("need at least one sine mode");
  if (n_cutoff == 0 || n_cutoff > modes) throw DomainError("noise cutoff must lie in 1..modes");
  for (double dt : dt_list) coarsening_factor(dt);
  for (double h : h_list) FemMesh::from_h(h);
  coarsening_factor(fem_dt);
}

std::size_t ExperimentConfig::coarsening_factor(double dt) const {
  const double fine = horizon / static_cast<double>(n_fine);
  const double ratio = dt / fine;
  const double factor = std::round(ratio);
  if (!(dt > 0.0) || factor < 1.0 || std::abs(ratio - factor) > 1e-9 * factor ||
      n_fine % static_cast<std::size_t>(factor) != 0) {
    std::ostringstream os;
    os << "step " << dt << " is not a divisor grid of " << n_fine << " fine steps over T=" << horizon;
    throw GridError(os.str());
  }
  return static_cast<std::size_t>(factor);
}

double RateTable::mean_rate() const {
  double s = 0.0;
  int n = 0;
  for (const auto& row : rows) {
    if (row.rate) {
      s += *row.rate;
      ++n;
    }
  }
  return n > 0 ? s / n : std::nan("");
}

std::vector<double> compute_rates(const std::vector<double>& errors,
                                  const std::vector<double>& resolutions) {
  if (errors.size() != resolutions.size() || errors.size() < 2) {
    throw DomainError("rates need matching error and resolution lists of length >= 2");
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(resolutions[i] > 0.0)) {
      throw DomainError("rates need strictly positive errors and resolutions");
    }
  }
  std::vector<double> rates;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    rates.push_back(std::log(errors[i - 1] / errors[i]) / std::log(resolutions[i - 1] / resolutions[i]));
  }
  return rates;
}

RateTable fold_rate_table(const std::vector<std::vector<double>>& squared_errors,
                          const std::vector<double>& resolutions, const ExperimentConfig& cfg) {
  if (squared_errors.size() != resolutions.size()) throw GridError("one error list per resolution");
  RateTable table;
  table.orders = cfg.orders;
  table.m_traj = cfg.m_traj;
  table.seed = cfg.base_seed;
  for (std::size_t r = 0; r < resolutions.size(); ++r) {
    const auto& e2 = squared_errors[r];
    const double m = static_cast<double>(e2.size());
    double sum = 0.0;
    for (double v : e2) sum += v;
    const double mean = sum / m;
    RateRow row;
    row.resolution = resolutions[r];
    row.error = std::sqrt(mean);
    if (e2.size() < 2) {
      row.std_error = std::nan("");
    } else {
      double ss = 0.0;
      for (double v : e2) ss += (v - mean) * (v - mean);
      const double se_mean = std::sqrt(ss / (m - 1.0) / m);
      // Delta method for the square root.
      row.std_error = row.error > 0.0 ? se_mean / (2.0 * row.error) : 0.0;
    }
    if (r > 0 && row.error > 0.0 && table.rows.back().error > 0.0) {
      row.rate = compute_rates({table.rows.back().error, row.error},
                               {table.rows.back().resolution, row.resolution})[0];
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<std::vector<double>> modeling_squared_errors(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.dt_list.empty()) throw DomainError("modeling experiment needs at least one dt");
  const NoiseSpec spec = noise_spec(cfg);
  const double fine_dt = spec.fine_dt();
  const SineCoeffs v1 = coeffs_v1(cfg.modes);
  const SineCoeffs v2 = coeffs_v2(cfg.modes);
  // Both solutions share the homogeneous part.
  const SineCoeffs hom = homogeneous_solution(cfg.orders, v1, v2, cfg.horizon);
  const ConvolutionWeights reference(cfg.orders, spec, cfg.modes, fine_dt, cfg.n_fine,
                                     ConvolutionRule::kLeftRectangle);
  std::vector<std::size_t> factors;
  std::vector<ConvolutionWeights> coarse;
  for (double dt : cfg.dt_list) {
    const std::size_t f = cfg.coarsening_factor(dt);
    factors.push_back(f);
    coarse.emplace_back(cfg.orders, spec, cfg.modes, fine_dt * static_cast<double>(f), cfg.n_fine / f,
                        cfg.coarse_rule);
  }
  std::vector<std::vector<double>> out(cfg.dt_list.size(), std::vector<double>(cfg.m_traj));
  for_each_trajectory(cfg, [&](std::size_t l) {
    const NoisePaths paths = NoisePaths::generate(spec, mix_seed(cfg.base_seed, l));
    SineCoeffs u_ref = hom;
    u_ref.values += reference.apply(paths).values;
    for (std::size_t d = 0; d < factors.size(); ++d) {
      SineCoeffs u_n = hom;
      u_n.values += coarse[d].apply(paths.coarsen(factors[d])).values;
      const double e2 = (u_ref.values - u_n.values).squaredNorm();
      check_finite(e2, cfg, l, "modeling error");
      out[d][l] = e2;
    }
  });
  return out;
}

RateTable modeling_error_experiment(const ExperimentConfig& cfg) {
  return fold_rate_table(modeling_squared_errors(cfg), cfg.dt_list, cfg);
}

std::vector<double> expected_modeling_error(const ExperimentConfig& cfg) {
  cfg.validate();
  const NoiseSpec spec = noise_spec(cfg);
  const double fine_dt = spec.fine_dt();
  const ConvolutionWeights reference(cfg.orders, spec, cfg.modes, fine_dt, cfg.n_fine,
                                     ConvolutionRule::kLeftRectangle);
  std::vector<double> out;
  for (double dt : cfg.dt_list) {
    const std::size_t f = cfg.coarsening_factor(dt);
    const ConvolutionWeights coarse(cfg.orders, spec, cfg.modes, fine_dt * static_cast<double>(f),
                                    cfg.n_fine / f, cfg.coarse_rule);
    // Fine cell i lies in coarse cell i / f and sees weight difference
    // W_ref(k, i) - W_coarse(k, i / f) on an N(0, fine_dt) increment.
    double total = 0.0;
    for (Eigen::Index k = 0; k < reference.weights().rows(); ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < reference.weights().cols(); ++i) {
        const double d =
            reference.weights()(k, i) - coarse.weights()(k, i / static_cast<Eigen::Index>(f));
        s += d * d;
      }
      total += s * fine_dt;
    }
    out.push_back(std::sqrt(total));
  }
  return out;
}

namespace {

struct FemLevel {
  DiscreteSpectrum spectrum;
  Eigen::MatrixXd coupling;
  Eigen::VectorXd homogeneous;
  FemConvolution convolution;
};

struct FemSetup {
  NoiseSpec spec;
  std::size_t factor;
  SineCoeffs homogeneous;
  ConvolutionWeights spectral;
  std::vector<FemLevel> levels;
};

FemSetup fem_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.h_list.empty()) throw DomainError("FEM experiment needs at least one mesh size");
  const NoiseSpec spec = noise_spec(cfg);
  const std::size_t factor = cfg.coarsening_factor(cfg.fem_dt);
  const std::size_t cells = cfg.n_fine / factor;
  const double dt = spec.fine_dt() * static_cast<double>(factor);
  const SineCoeffs v1 = coeffs_v1(cfg.modes);
  const SineCoeffs v2 = coeffs_v2(cfg.modes);
  FemSetup setup{spec,
                 factor,
                 homogeneous_solution(cfg.orders, v1, v2, cfg.horizon),
                 ConvolutionWeights(cfg.orders, spec, cfg.modes, dt, cells,
                                    ConvolutionRule::kExactIntegration),
                 {}};
  StiffnessOptions options;
  options.k_trunc = cfg.stiffness_k_trunc;
  for (double h : cfg.h_list) {
    DiscreteSpectrum spectrum(FemMesh::from_h(h), cfg.orders.beta, options);
    Eigen::MatrixXd coupling = mode_coupling(spectrum, cfg.modes);
    // v_h = P_h v: eigen coefficients (v, e_j^h) = Q^T v.
    const FemField v1h = FemField::eigen(coupling.transpose() * v1.values);
    const FemField v2h = FemField::eigen(coupling.transpose() * v2.values);
    Eigen::VectorXd hom = fem_homogeneous(cfg.orders, spectrum, v1h, v2h, cfg.horizon).values();
    FemConvolution conv(cfg.orders, spectrum, spec, cfg.modes, dt, cells);
    setup.levels.push_back({std::move(spectrum), std::move(coupling), std::move(hom), std::move(conv)});
  }
  return setup;
}

}  // namespace

std::vector<std::vector<double>> fem_squared_errors(const ExperimentConfig& cfg) {
  const FemSetup setup = fem_setup(cfg);
  std::vector<std::vector<double>> out(setup.levels.size(), std::vector<double>(cfg.m_traj));
  for_each_trajectory(cfg, [&](std::size_t l) {
    const NoisePaths paths =
        NoisePaths::generate(setup.spec, mix_seed(cfg.base_seed, l)).coarsen(setup.factor);
    SineCoeffs u = setup.homogeneous;
    u.values += setup.spectral.apply(paths).values;
    for (std::size_t m = 0; m < setup.levels.size(); ++m) {
      const FemLevel& level = setup.levels[m];
      const Eigen::VectorXd c = level.homogeneous + level.convolution.apply(paths);
      const double e = l2_error_cross(u, c, level.coupling);
      check_finite(e, cfg, l, "FEM error");
      out[m][l] = e * e;
    }
  });
  return out;
}

RateTable fem_error_experiment(const ExperimentConfig& cfg) {
  return fold_rate_table(fem_squared_errors(cfg), cfg.h_list, cfg);
}

std::vector<double> expected_fem_error(const ExperimentConfig& cfg) {
  const FemSetup setup = fem_setup(cfg);
  const double dt = setup.spectral.dt();
  const NoisePaths::Matrix& a = setup.spectral.weights();
  std::vector<double> out;
  for (const FemLevel& level : setup.levels) {
    const double det = l2_error_cross(setup.homogeneous, level.homogeneous, level.coupling);
    // A unit increment in mode k, cell i moves the spectral coefficient by
    // a_ki and the discrete one by b_j = Q_kj s_ki dG_ji.
    const Eigen::MatrixXd q2 = level.coupling.cwiseAbs2();
    const Eigen::MatrixXd& dg = level.convolution.kernel_increments();
    const Eigen::MatrixXd& s = level.convolution.scaled_sigma();
    const Eigen::MatrixXd p1 = q2 * dg;
    const Eigen::MatrixXd p2 = q2 * dg.cwiseAbs2();
    double var = 0.0;
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      for (Eigen::Index i = 0; i < a.cols(); ++i) {
        var += a(k, i) * a(k, i) - 2.0 * a(k, i) * s(k, i) * p1(k, i) + s(k, i) * s(k, i) * p2(k, i);
      }
    }
    out.push_back(std::sqrt(det * det + var * dt));
  }
  return out;
}

double fit_log_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw DomainError("slope fit needs two or more points");
  double mx = 0.0;
  double my = 0.0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    mx += std::log(t[i]);
    my += std::log(std::abs(y[i]));
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dx = std::log(t[i]) - mx;
    sxy += dx * (std::log(std::abs(y[i])) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

bool StabilityReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed()) return false;
  }
  return true;
}

StabilityReport stability_suite(const FracOrders& orders) {
  validate(orders);
  const double alpha = orders.alpha;
  constexpr double kSlopeTolerance = 0.15;
  constexpr std::size_t kPolyModes = 1000;
  StabilityReport report;
  report.orders = orders;

  struct Case {
    std::string name;
    SineCoeffs v1;
    SineCoeffs v2;
    std::size_t slowest_mode;
    double slope;
  };
  std::vector<Case> cases;
  cases.push_back({"value e_50", coeffs_mode(50, 50), SineCoeffs(50), 50, -alpha});
  cases.push_back({"velocity e_50", SineCoeffs(50), coeffs_mode(50, 50), 50, 1.0 - alpha});
  cases.push_back({"value v1", coeffs_v1(kPolyModes), SineCoeffs(kPolyModes), 1, -alpha});
  cases.push_back({"velocity v2", SineCoeffs(kPolyModes), coeffs_v2(kPolyModes), 1, 1.0 - alpha});

  for (const Case& c : cases) {
    const double lb = std::pow(dirichlet_eigenvalue(c.slowest_mode), orders.beta);
    if (alpha >= 2.0) {
      // Undamped: |E_{2,1}(-L t^2)| <= 1 and |t E_{2,2}(-L t^2)| <= L^(-1/2).
      const std::vector<double> t = linspace_log(1e-2, 1e2, 41);
      const double bound = sobolev_norm(c.v1, 0.0) + sobolev_norm(c.v2, -orders.beta);
      double worst = 0.0;
      for (double ti : t) {
        worst = std::max(worst, sobolev_norm(homogeneous_solution(orders, c.v1, c.v2, ti), 0.0) / bound);
      }
      report.checks.push_back({"bounded " + c.name, worst, 0.0, 1.0 + 1e-9});
      continue;
    }
    // The oscillatory part decays like exp(L^(1/a) cos(pi/a) t); start the
    // fit once it has fallen below e^-40 so the algebraic tail dominates.
    const double damping = std::pow(lb, 1.0 / alpha) * std::abs(std::cos(std::numbers::pi / alpha));
    const double t0 = std::max(1.0, 40.0 / damping);
    const std::vector<double> t = linspace_log(t0, 100.0 * t0, 21);
    std::vector<double> norms;
    for (double ti : t) norms.push_back(sobolev_norm(homogeneous_solution(orders, c.v1, c.v2, ti), 0.0));
    report.checks.push_back({"slope " + c.name, fit_log_slope(t, norms), c.slope - kSlopeTolerance,
                             c.slope + kSlopeTolerance});
  }

  // t -> 0: |u(t) - v1| for polynomial data shrinks monotonically.
  const SineCoeffs v1 = coeffs_v1(kPolyModes);
  const SineCoeffs zero(kPolyModes);
  std::vector<double> t;
  std::vector<double> gaps;
  for (int e = 1; e <= 6; ++e) {
    const double ti = std::pow(10.0, -e);
    SineCoeffs diff = homogeneous_solution(orders, v1, zero, ti);
    diff.values -= v1.values;
    t.push_back(ti);
    gaps.push_back(sobolev_norm(diff, 0.0));
  }
  double increases = 0.0;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    if (!(gaps[i] < gaps[i - 1])) increases += 1.0;
  }
  report.checks.push_back({"continuity monotone steps", increases, 0.0, 0.0});
  report.checks.push_back({"continuity gap ratio t=1e-6 to t=1e-1", gaps.back() / gaps.front(), 0.0, 1e-3});
  return report;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

const char* build_description() { return FRACWAVE_GIT_DESCRIBE; }

void write_rate_csv(std::ostream& os, const RateTable& table) {
  os << "# alpha=" << format_double(table.orders.alpha) << '\n'
     << "# beta=" << format_double(table.orders.beta) << '\n'
     << "# M_traj=" << table.m_traj << '\n'
     << "# seed=" << table.seed << '\n'
     << "# git=" << build_description() << '\n'
     << "resolution,error,rate,stderr\n";
  for (const auto& row : table.rows) {
    os << format_double(row.resolution) << ',' << format_double(row.error) << ','
       << (row.rate ? format_double(*row.rate) : std::string()) << ',' << format_double(row.std_error)
       << '\n';
  }
}

void write_rate_csv(const std::filesystem::path& path, const RateTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  write_rate_csv(os, table);
  os.flush();
  if (!os) throw std::ios_base::failure("failed writing " + path.string());
}

}  // namespace fracwave
