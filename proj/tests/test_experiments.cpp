#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "fracwave/errors.hpp"
#include "fracwave/experiments.hpp"

namespace fracwave {
namespace {

ExperimentConfig small_modeling(double alpha, std::size_t m_traj) {
  ExperimentConfig cfg;
  cfg.orders = {alpha, 0.75};
  cfg.m_traj = m_traj;
  cfg.n_fine = 200;
  cfg.modes = 60;
  cfg.n_cutoff = 60;
  cfg.dt_list = {1.0 / 10, 1.0 / 20, 1.0 / 40};
  cfg.h_list.clear();
  cfg.base_seed = 11;
  return cfg;
}

ExperimentConfig small_fem(double beta, std::size_t m_traj) {
  ExperimentConfig cfg;
  cfg.orders = {1.5, beta};
  cfg.m_traj = m_traj;
  cfg.n_fine = 200;
  cfg.modes = 80;
  cfg.n_cutoff = 80;
  cfg.dt_list.clear();
  cfg.h_list = {1.0 / 5, 1.0 / 10, 1.0 / 20};
  cfg.fem_dt = 0.05;
  cfg.stiffness_k_trunc = 100000;
  cfg.base_seed = 5;
  return cfg;
}

TEST(ComputeRates, Basics) {
  const auto r = compute_rates({4.0, 1.0}, {2.0, 1.0});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0], 2.0);
  EXPECT_EQ(compute_rates({3.0, 3.0}, {0.1, 0.05})[0], 0.0);
  // Published first two errors of the alpha = 1.1 modeling table.
  EXPECT_NEAR(compute_rates({1.2567e-2, 7.6842e-3}, {1.0 / 25, 1.0 / 50})[0], 0.7097, 5e-5);
  EXPECT_THROW(compute_rates({1.0}, {1.0}), DomainError);
  EXPECT_THROW(compute_rates({1.0, 2.0}, {1.0}), DomainError);
  EXPECT_THROW(compute_rates({1.0, 0.0}, {1.0, 0.5}), DomainError);
  EXPECT_THROW(compute_rates({1.0, 2.0}, {1.0, -0.5}), DomainError);
}

TEST(ExperimentConfig, Validation) {
  ExperimentConfig cfg = small_modeling(1.5, 4);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.coarsening_factor(0.1), 20u);
  EXPECT_THROW(cfg.coarsening_factor(0.003), GridError);
  EXPECT_THROW(cfg.coarsening_factor(0.3), GridError);

  auto broken = cfg;
  broken.orders.alpha = 2.5;
  EXPECT_THROW(broken.validate(), DomainError);
  broken = cfg;
  broken.m_traj = 0;
  EXPECT_THROW(broken.validate(), DomainError);
  broken = cfg;
  broken.n_cutoff = 61;
  EXPECT_THROW(broken.validate(), DomainError);
  broken = cfg;
  broken.dt_list = {0.007};
  EXPECT_THROW(modeling_squared_errors(broken), GridError);
  broken = cfg;
  broken.horizon = -1.0;
  EXPECT_THROW(broken.validate(), DomainError);
}

TEST(ModelingExperiment, ReproducibleAcrossRunsAndThreads) {
  ExperimentConfig cfg = small_modeling(1.5, 12);
  cfg.threads = 1;
  const auto a = modeling_squared_errors(cfg);
  const auto b = modeling_squared_errors(cfg);
  cfg.threads = 4;
  const auto c = modeling_squared_errors(cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  cfg.base_seed = 12;
  EXPECT_NE(a, modeling_squared_errors(cfg));
}

TEST(ModelingExperiment, VanishesWhenCoarseEqualsFine) {
  // Same rule, same grid, no truncation: the coarse solution is the reference.
  ExperimentConfig cfg = small_modeling(1.5, 3);
  cfg.coarse_rule = ConvolutionRule::kLeftRectangle;
  cfg.dt_list = {1.0 / 200};
  const auto sq = modeling_squared_errors(cfg);
  for (const auto& e : sq[0]) EXPECT_EQ(e, 0.0);
  const RateTable t = modeling_error_experiment(cfg);
  EXPECT_EQ(t.rows[0].error, 0.0);
  EXPECT_FALSE(t.rows[0].rate.has_value());
}

TEST(ModelingExperiment, MonteCarloMatchesExpectation) {
  const ExperimentConfig cfg = small_modeling(1.5, 400);
  const RateTable t = modeling_error_experiment(cfg);
  const auto expect = expected_modeling_error(cfg);
  ASSERT_EQ(t.rows.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    EXPECT_GT(t.rows[i].std_error, 0.0);
    EXPECT_NEAR(t.rows[i].error, expect[i], 4.0 * t.rows[i].std_error) << i;
    EXPECT_DOUBLE_EQ(t.rows[i].resolution, cfg.dt_list[i]);
  }
  EXPECT_FALSE(t.rows[0].rate.has_value());
  EXPECT_TRUE(t.rows[1].rate.has_value());
  EXPECT_EQ(t.m_traj, 400u);
  EXPECT_EQ(t.seed, 11u);
}

TEST(ModelingExperiment, DoublingTrajectoriesIsConsistent) {
  ExperimentConfig cfg = small_modeling(1.25, 100);
  const RateTable a = modeling_error_experiment(cfg);
  cfg.m_traj = 200;
  const RateTable b = modeling_error_experiment(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_LT(std::abs(a.rows[i].error - b.rows[i].error), 3.0 * a.rows[i].std_error) << i;
  }
}

TEST(ModelingExperiment, ExpectedRatesIncreaseWithAlpha) {
  auto mean_rate = [](double alpha) {
    ExperimentConfig cfg = small_modeling(alpha, 1);
    cfg.n_fine = 400;
    cfg.modes = cfg.n_cutoff = 200;
    const auto e = expected_modeling_error(cfg);
    const auto r = compute_rates(e, cfg.dt_list);
    return (r[0] + r[1]) / 2.0;
  };
  const double low = mean_rate(1.1);
  const double high = mean_rate(1.75);
  EXPECT_LT(low, high);
  EXPECT_GT(low, 0.3);
}

TEST(FemExperiment, MonteCarloMatchesExpectation) {
  const ExperimentConfig cfg = small_fem(0.8, 200);
  const RateTable t = fem_error_experiment(cfg);
  const auto expect = expected_fem_error(cfg);
  ASSERT_EQ(t.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(t.rows[i].error, expect[i], 4.0 * t.rows[i].std_error) << i;
    EXPECT_DOUBLE_EQ(t.rows[i].resolution, cfg.h_list[i]);
  }
  EXPECT_GT(t.rows[0].error, t.rows[2].error);
}

TEST(FemExperiment, Reproducible) {
  ExperimentConfig cfg = small_fem(0.9, 6);
  cfg.threads = 1;
  const auto a = fem_squared_errors(cfg);
  cfg.threads = 3;
  EXPECT_EQ(a, fem_squared_errors(cfg));
}

TEST(FemExperiment, ExpectedErrorRate) {
  ExperimentConfig cfg = small_fem(1.0, 1);
  cfg.h_list = {1.0 / 10, 1.0 / 20, 1.0 / 40};
  cfg.modes = cfg.n_cutoff = 400;
  cfg.n_fine = 100;
  cfg.fem_dt = 0.01;
  const auto e = expected_fem_error(cfg);
  for (double r : compute_rates(e, cfg.h_list)) EXPECT_GE(r, 2.0 - 0.3);
}

TEST(FoldRateTable, StatisticsAndRates) {
  ExperimentConfig cfg;
  cfg.orders = {1.5, 0.75};
  cfg.m_traj = 4;
  const RateTable t = fold_rate_table({{4.0, 4.0, 4.0, 4.0}, {1.0, 0.0, 2.0, 1.0}}, {0.2, 0.1}, cfg);
  EXPECT_EQ(t.rows[0].error, 2.0);
  EXPECT_EQ(t.rows[0].std_error, 0.0);
  EXPECT_EQ(t.rows[1].error, 1.0);
  EXPECT_GT(t.rows[1].std_error, 0.0);
  EXPECT_DOUBLE_EQ(*t.rows[1].rate, 1.0);
  EXPECT_DOUBLE_EQ(t.mean_rate(), 1.0);
  cfg.m_traj = 1;
  EXPECT_TRUE(std::isnan(fold_rate_table({{4.0}}, {0.2}, cfg).rows[0].std_error));
}

TEST(RateCsv, Format) {
  RateTable t;
  t.orders = {1.5, 0.75};
  t.m_traj = 3;
  t.seed = 9;
  t.rows.push_back({0.04, 0.0125, std::nullopt, 0.001});
  t.rows.push_back({0.02, 0.00625, 1.0, 0.0005});
  std::ostringstream os;
  write_rate_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 8u);
  EXPECT_EQ(lines[0], "# alpha=1.5");
  EXPECT_EQ(lines[1], "# beta=0.75");
  EXPECT_EQ(lines[2], "# M_traj=3");
  EXPECT_EQ(lines[3], "# seed=9");
  EXPECT_EQ(lines[4].rfind("# git=", 0), 0u);
  EXPECT_EQ(lines[5], "resolution,error,rate,stderr");
  EXPECT_EQ(lines[6], "0.04,0.0125,,0.001");
  EXPECT_EQ(lines[7], "0.02,0.00625,1,5e-04");
}

TEST(RateCsv, WritesFile) {
  RateTable t;
  t.rows.push_back({0.1, 1.0, std::nullopt, 0.0});
  const auto path = std::filesystem::temp_directory_path() / "fracwave_rate_test.csv";
  write_rate_csv(path, t);
  std::ifstream is(path);
  std::string first;
  std::getline(is, first);
  EXPECT_EQ(first.rfind("# alpha=", 0), 0u);
  std::filesystem::remove(path);
  EXPECT_THROW(write_rate_csv(std::filesystem::path("/nonexistent_dir/x.csv"), t), std::ios_base::failure);
}

TEST(FormatDouble, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0}) {
    const std::string s = format_double(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    EXPECT_EQ(x, y) << s;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(FitLogSlope, RecoversPowerLaw) {
  std::vector<double> t;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    t.push_back(std::pow(2.0, i));
    y.push_back(-3.0 * std::pow(t.back(), -1.25));
  }
  EXPECT_NEAR(fit_log_slope(t, y), -1.25, 1e-12);
  EXPECT_THROW(fit_log_slope({1.0}, {1.0}), DomainError);
}

TEST(StabilitySuite, PassesForSupportedOrders) {
  for (const FracOrders o : {FracOrders{1.25, 0.75}, FracOrders{1.5, 0.75}, FracOrders{1.75, 1.0},
                             FracOrders{2.0, 0.75}}) {
    const StabilityReport r = stability_suite(o);
    EXPECT_FALSE(r.checks.empty());
    for (const auto& c : r.checks) {
      EXPECT_TRUE(c.passed()) << o.alpha << ' ' << c.name << ' ' << c.value << " not in [" << c.lower << ", "
                              << c.upper << ']';
    }
    EXPECT_TRUE(r.passed());
  }
}

}  // namespace
}  // namespace fracwave
