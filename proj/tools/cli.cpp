#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "fracwave/errors.hpp"
#include "fracwave/experiments.hpp"
#include "fracwave/fem.hpp"
#include "fracwave/mittag_leffler.hpp"

namespace fracwave::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 20240601;
  std::string out_dir = ".";
  std::size_t threads = 0;
  std::optional<std::size_t> m_traj;
};

struct MlArgs {
  double alpha = 1.0;
  double beta = 1.0;
  double z = 0.0;
};

struct Table1Args {
  std::vector<double> alphas = {1.1, 1.25, 1.5, 1.75, 2.0};
  double beta = 0.75;
  std::vector<std::size_t> dt_inv = {25, 50, 100, 125, 200};
  std::size_t m_traj = 1000;
  double horizon = 1.0;
  std::size_t n_fine = 1000;
  std::size_t modes = 1000;
  std::size_t n_cutoff = 1000;
};

struct Table2Args {
  double alpha = 1.5;
  std::vector<double> betas = {0.6, 0.8, 1.0};
  std::vector<std::size_t> h_inv = {10, 25, 50, 75, 100};
  double dt = 0.01;
  std::size_t m_traj = 500;
  double horizon = 1.0;
  std::size_t n_fine = 1000;
  std::size_t modes = 1000;
  std::size_t n_cutoff = 1000;
  std::size_t k_trunc = 1'000'000;
};

struct SpectrumArgs {
  std::size_t n = 9;
  double beta = 1.0;
  std::size_t k_trunc = 1'000'000;
  bool no_tail = false;
};

struct StabilityArgs {
  double alpha = 1.5;
  double beta = 0.75;
};

// Writes through a temporary file so a failed run never leaves a partial CSV.
void write_atomically(const fs::path& path, const RateTable& table) {
  const fs::path tmp = path.string() + ".tmp";
  write_rate_csv(tmp, table);
  fs::rename(tmp, path);
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void print_table(std::ostream& out, const std::string& label, const RateTable& table) {
  out << label << '\n';
  for (const auto& row : table.rows) {
    out << "  " << format_double(row.resolution) << "  " << format_double(row.error) << "  "
        << (row.rate ? format_double(*row.rate) : std::string("-")) << '\n';
  }
}

int cmd_ml(const MlArgs& a, std::ostream& out) {
  out << format_ml_value(ml(MlParams{a.alpha, a.beta}, a.z)) << '\n';
  return kOk;
}

int cmd_table1(const Globals& g, const Table1Args& a, std::ostream& out) {
  std::vector<ExperimentConfig> configs;
  for (double alpha : a.alphas) {
    ExperimentConfig cfg;
    cfg.orders = {alpha, a.beta};
    cfg.horizon = a.horizon;
    cfg.m_traj = g.m_traj.value_or(a.m_traj);
    cfg.n_fine = a.n_fine;
    cfg.modes = a.modes;
    cfg.n_cutoff = a.n_cutoff;
    cfg.dt_list.clear();
    for (std::size_t inv : a.dt_inv) cfg.dt_list.push_back(a.horizon / static_cast<double>(inv));
    cfg.h_list.clear();
    cfg.fem_dt = a.horizon / static_cast<double>(a.n_fine);
    cfg.base_seed = g.seed;
    cfg.threads = g.threads;
    cfg.validate();
    configs.push_back(cfg);
  }
  const fs::path dir = prepare_out_dir(g.out_dir);
  std::vector<RateTable> tables;
  for (const auto& cfg : configs) tables.push_back(modeling_error_experiment(cfg));
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const fs::path path = dir / ("table1_alpha" + format_double(configs[i].orders.alpha) + ".csv");
    write_atomically(path, tables[i]);
    print_table(out, "alpha=" + format_double(configs[i].orders.alpha) + " -> " + path.string(), tables[i]);
  }
  return kOk;
}

int cmd_table2(const Globals& g, const Table2Args& a, std::ostream& out) {
  std::vector<ExperimentConfig> configs;
  for (double beta : a.betas) {
    ExperimentConfig cfg;
    cfg.orders = {a.alpha, beta};
    cfg.horizon = a.horizon;
    cfg.m_traj = g.m_traj.value_or(a.m_traj);
    cfg.n_fine = a.n_fine;
    cfg.modes = a.modes;
    cfg.n_cutoff = a.n_cutoff;
    cfg.dt_list.clear();
    cfg.h_list.clear();
    for (std::size_t inv : a.h_inv) cfg.h_list.push_back(1.0 / static_cast<double>(inv));
    cfg.fem_dt = a.dt;
    cfg.stiffness_k_trunc = a.k_trunc;
    cfg.base_seed = g.seed;
    cfg.threads = g.threads;
    cfg.validate();
    configs.push_back(cfg);
  }
  const fs::path dir = prepare_out_dir(g.out_dir);
  std::vector<RateTable> tables;
  for (const auto& cfg : configs) tables.push_back(fem_error_experiment(cfg));
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const fs::path path = dir / ("table2_beta" + format_double(configs[i].orders.beta) + ".csv");
    write_atomically(path, tables[i]);
    print_table(out, "beta=" + format_double(configs[i].orders.beta) + " -> " + path.string(), tables[i]);
  }
  return kOk;
}

int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  if (!(a.beta > 0.5 && a.beta <= 1.0)) throw DomainError("space order beta must satisfy 1/2 < beta <= 1");
  StiffnessOptions options;
  options.k_trunc = a.k_trunc;
  options.tail_correction = !a.no_tail;
  const DiscreteSpectrum spectrum(FemMesh(a.n), a.beta, options);
  out << "j,lambda_h,lambda\n";
  for (std::size_t j = 1; j <= spectrum.size(); ++j) {
    out << j << ',' << format_double(spectrum.eigenvalues()(static_cast<Eigen::Index>(j - 1))) << ','
        << format_double(std::pow(dirichlet_eigenvalue(j), a.beta)) << '\n';
  }
  return kOk;
}

int cmd_stability(const StabilityArgs& a, std::ostream& out) {
  const StabilityReport report = stability_suite(FracOrders{a.alpha, a.beta});
  for (const auto& c : report.checks) {
    out << (c.passed() ? "PASS " : "FAIL ") << c.name << ": " << format_double(c.value) << " in ["
        << format_double(c.lower) << ", " << format_double(c.upper) << "]\n";
  }
  return report.passed() ? kOk : kFailed;
}

}  // namespace

std::string format_ml_value(double x) {
  if (!std::isfinite(x)) return std::to_string(x);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  const std::string s(buf);
  const auto e = s.find('e');
  return s.substr(0, e + 1) + std::to_string(std::stoi(s.substr(e + 1)));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Stochastic space-time fractional wave equation: solvers and convergence experiments",
               "fracwave");
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML configuration file; flags override its values");

  Globals g;
  std::optional<std::size_t> m_traj;
  app.add_option("--seed", g.seed, "Base seed of the trajectory seeds")->capture_default_str();
  app.add_option("--out", g.out_dir, "Output directory for CSV files")
      ->envname("FRACWAVE_OUT")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all available)")->capture_default_str();
  app.add_option("--m-traj", m_traj, "Monte Carlo trajectories per table")->check(CLI::PositiveNumber);

  MlArgs ml_args;
  auto* ml_cmd = app.add_subcommand("ml", "Evaluate the Mittag-Leffler function E_{alpha,beta}(z)");
  ml_cmd->add_option("--alpha", ml_args.alpha)->required();
  ml_cmd->add_option("--beta", ml_args.beta)->required();
  ml_cmd->add_option("--z", ml_args.z)->required();

  Table1Args t1;
  auto* t1_cmd = app.add_subcommand("table1", "Modeling error versus the noise time step");
  t1_cmd->add_option("--alphas", t1.alphas, "Time orders, one CSV each")->capture_default_str();
  t1_cmd->add_option("--beta", t1.beta)->capture_default_str();
  t1_cmd->add_option("--dt-inv", t1.dt_inv, "Values of T/dt")->capture_default_str();
  t1_cmd->add_option("--horizon", t1.horizon)->capture_default_str();
  t1_cmd->add_option("--n-fine", t1.n_fine)->capture_default_str();
  t1_cmd->add_option("--modes", t1.modes)->capture_default_str();
  t1_cmd->add_option("--n-cutoff", t1.n_cutoff)->capture_default_str();

  Table2Args t2;
  auto* t2_cmd = app.add_subcommand("table2", "Finite element error versus the mesh size");
  t2_cmd->add_option("--alpha", t2.alpha)->capture_default_str();
  t2_cmd->add_option("--betas", t2.betas, "Space orders, one CSV each")->capture_default_str();
  t2_cmd->add_option("--h-inv", t2.h_inv, "Values of 1/h")->capture_default_str();
  t2_cmd->add_option("--dt", t2.dt)->capture_default_str();
  t2_cmd->add_option("--horizon", t2.horizon)->capture_default_str();
  t2_cmd->add_option("--n-fine", t2.n_fine)->capture_default_str();
  t2_cmd->add_option("--modes", t2.modes)->capture_default_str();
  t2_cmd->add_option("--n-cutoff", t2.n_cutoff)->capture_default_str();
  t2_cmd->add_option("--k-trunc", t2.k_trunc, "Sine modes behind the stiffness matrix")
      ->capture_default_str();

  SpectrumArgs sp;
  auto* sp_cmd = app.add_subcommand("spectrum", "Discrete fractional Laplacian eigenvalues as CSV");
  sp_cmd->add_option("--n", sp.n, "Interior mesh nodes")->check(CLI::PositiveNumber)->capture_default_str();
  sp_cmd->add_option("--beta", sp.beta)->capture_default_str();
  sp_cmd->add_option("--k-trunc", sp.k_trunc)->capture_default_str();
  sp_cmd->add_flag("--no-tail", sp.no_tail, "Skip the series tail correction");

  StabilityArgs st;
  auto* st_cmd = app.add_subcommand("stability", "Decay exponents of homogeneous solutions");
  st_cmd->add_option("--alpha", st.alpha)->capture_default_str();
  st_cmd->add_option("--beta", st.beta)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  g.m_traj = m_traj;

  try {
    if (ml_cmd->parsed()) return cmd_ml(ml_args, out);
    if (t1_cmd->parsed()) return cmd_table1(g, t1, out);
    if (t2_cmd->parsed()) return cmd_table2(g, t2, out);
    if (sp_cmd->parsed()) return cmd_spectrum(sp, out);
    if (st_cmd->parsed()) return cmd_stability(st, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const GridError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace fracwave::cli
