#include <sstream>

#include "doctest.h"
#include "hdsvm/error.hpp"
#include "hdsvm/harness.hpp"
#include "test_support.hpp"

using namespace hdsvm;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an hdsvm::Error");
  return ErrorKind::InvalidArgument;
}

ExperimentConfig small_run(long reps, std::uint64_t seed = 7) {
  ExperimentConfig cfg;
  cfg.label = "small";
  cfg.points = scenario_points('c', {32, 64});
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.classifiers = {ClassifierKind::Svm, ClassifierKind::BcSvm, ClassifierKind::Ay14};
  return cfg;
}

}  // namespace

TEST_CASE("standard deviation bounds") {
  CHECK(std::round(sd_bound_simulation(2000) * 1e4) / 1e4 == 0.0112);
  CHECK(sd_bound_simulation(500) == doctest::Approx(0.02236).epsilon(1e-3));
  CHECK(sd_bound_simulation(100000000) <= 5e-5);
  CHECK(std::abs(su_bound(0.16, 40, 10) - 0.067) <= 0.0005);
  CHECK(su_bound(0.0, 40, 10) == 0.0);
  CHECK(su_bound(0.5, 35, 10) == doctest::Approx(0.1));
  CHECK(su_combined({0.03, 0.04}) == doctest::Approx(std::sqrt(0.00125)));
  CHECK(kind_of([] { su_bound(0.1, 10, 10); }) == ErrorKind::EmptyTestSet);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, {0, 0}) == derive_seed(1, {0, 0}));
  CHECK(derive_seed(1, {0, 1}) != derive_seed(1, {1, 0}));
  CHECK(derive_seed(1, {0, 0}) != derive_seed(2, {0, 0}));
}

TEST_CASE("report layout") {
  SUBCASE("empty report is the header line") {
    ErrorRateReport empty{"simulation", "x", 1, {}};
    std::ostringstream out;
    write_report_csv(empty, out);
    CHECK(out.str() == std::string(kCsvHeader) + "\n");
  }
  SUBCASE("one row per class plus a mean row") {
    const auto report = run_monte_carlo(small_run(4));
    std::ostringstream out;
    write_report_csv(report, out);
    std::istringstream in(out.str());
    std::string line;
    int rows = -1;
    while (std::getline(in, line)) {
      ++rows;
      if (rows > 0) CHECK(std::count(line.begin(), line.end(), ',') == 8);
    }
    CHECK(rows == 2 * 3 * 3);
  }
}

TEST_CASE("JSON round trip") {
  const auto report = run_monte_carlo(small_run(5));
  CHECK(report_from_json(report_to_json(report)) == report);
  CHECK(report_from_json(nlohmann::json::parse(report_to_json(report).dump())) == report);
  CHECK(kind_of([] { report_from_json(nlohmann::json{{"protocol", 1}}); }) == ErrorKind::ParseError);
}

TEST_CASE("results do not depend on the thread count") {
  auto cfg = small_run(12, 99);
  const auto one = run_monte_carlo(cfg);
  cfg.threads = 3;
  CHECK(run_monte_carlo(cfg) == one);
  cfg.seed = 100;
  CHECK_FALSE(run_monte_carlo(cfg) == one);
}

TEST_CASE("records can be regenerated from the seed") {
  const auto cfg = small_run(6, 3);
  const auto report = run_monte_carlo(cfg);
  REQUIRE(report.points.size() == 2);
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& point = report.points[p];
    CHECK(point.replications == 6);
    CHECK(point.sd_bound == doctest::Approx(sd_bound_simulation(6)));
    for (long r = 0; r < 6; ++r) {
      const int attempt = std::count(point.retried_replications.begin(), point.retried_replications.end(), r) ? 1 : 0;
      const auto data = replicate_data(cfg, p, r, attempt);
      const auto pred = fit_and_predict(data.train, data.test_points, cfg.classifiers, cfg.solver);
      for (std::size_t k = 0; k < cfg.classifiers.size(); ++k) {
        for (std::size_t c = 0; c < 2; ++c) {
          const double miss = pred[k][c] == static_cast<int>(c) + 1 ? 0.0 : 1.0;
          CHECK(point.classifiers[k].records[static_cast<std::size_t>(r)][c] == miss);
        }
      }
    }
    for (const auto& c : point.classifiers) {
      double sum = 0.0;
      for (double e : c.error_rates) sum += e;
      CHECK(c.mean_error == doctest::Approx(sum / 2.0));
    }
  }
}

TEST_CASE("configuration validation") {
  auto cfg = small_run(1);
  CHECK_NOTHROW(validate(cfg));
  SUBCASE("coincident means") {
    cfg.points[0].populations[1].mean = mean::Zero{};
    CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::ConfigError);
  }
  SUBCASE("no replications") {
    cfg.replications = 0;
    CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::ConfigError);
  }
  SUBCASE("tiny class") {
    cfg.points[0].sizes = {1, 10};
    CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::ConfigError);
  }
  SUBCASE("no classifiers") {
    cfg.classifiers.clear();
    CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::ConfigError);
  }
  SUBCASE("distance baseline with three classes") {
    auto& p = cfg.points[0];
    p.populations.push_back({mean::Constant{-1.0}, cov::ScaledIdentity{1.0}, Family::gaussian()});
    p.sizes.push_back(5);
    CHECK(kind_of([&] { validate(cfg); }) == ErrorKind::ConfigError);
    cfg.classifiers = {ClassifierKind::Svm, ClassifierKind::BcSvm};
    CHECK_NOTHROW(validate(cfg));
  }
  SUBCASE("empty sweep") {
    cfg.points.clear();
    CHECK(kind_of([&] { run_monte_carlo(cfg); }) == ErrorKind::ConfigError);
  }
}

TEST_CASE("three-class simulation runs through one-versus-one") {
  ExperimentConfig cfg;
  ExperimentPoint p;
  p.dim = 64;
  p.sweep_value = 64;
  p.populations = {{mean::Zero{}, cov::ScaledIdentity{1.0}, Family::gaussian()},
                   {mean::Constant{1.0}, cov::ScaledIdentity{1.0}, Family::gaussian()},
                   {mean::Constant{-1.0}, cov::ScaledIdentity{1.0}, Family::gaussian()}};
  p.sizes = {5, 6, 7};
  cfg.points = {p};
  cfg.replications = 20;
  const auto report = run_monte_carlo(cfg);
  for (const auto& c : report.points[0].classifiers) {
    CHECK(c.error_rates.size() == 3);
    CHECK(c.mean_error <= 0.05);
  }
}

TEST_CASE("config files") {
  SUBCASE("preset") {
    const auto map = parse_config_text("# run b\nscenario = b\nsweep = 32, 64\nreps = 10  # short\n"
                                       "classifiers = svm,ay14\nseed = 42\nthreads = 2\n");
    const auto cfg = experiment_from_config(map);
    CHECK(cfg.points.size() == 2);
    CHECK(cfg.points[1].dim == 64);
    CHECK(cfg.points[0].sizes == std::vector<Index>{6, 14});
    CHECK(cfg.replications == 10);
    CHECK(cfg.seed == 42);
    CHECK(cfg.threads == 2);
    CHECK(cfg.classifiers == std::vector<ClassifierKind>{ClassifierKind::Svm, ClassifierKind::Ay14});
  }
  SUBCASE("custom populations") {
    const auto map = parse_config_text(
        "dimensions = 16\nsizes = 4, 6\npopulation.1.mean = zero\npopulation.2.mean = alpha:4\n"
        "population.2.cov = structured:0.4\npopulation.2.family = t:10\n");
    const auto cfg = experiment_from_config(map);
    REQUIRE(cfg.points.size() == 1);
    CHECK(describe(cfg.points[0].populations[1].mean) == "alpha:4");
    CHECK(describe(cfg.points[0].populations[1].covariance) == "structured:0.4");
    CHECK(describe(cfg.points[0].populations[1].family) == "t:10");
    CHECK(describe(cfg.points[0].populations[0].covariance) == "identity:1");
  }
  SUBCASE("bad input") {
    CHECK(kind_of([] { parse_config_text("no equals sign\n"); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { experiment_from_config(parse_config_text("scenario = q\n")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { experiment_from_config(parse_config_text("scenario = a\nsweep = 33\n")); }) ==
          ErrorKind::ConfigError);
    CHECK(kind_of([] { experiment_from_config(parse_config_text("reps = 10\n")); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { parse_classifier_list("svm,knn"); }) == ErrorKind::ConfigError);
  }
}

TEST_CASE("real-data protocol on synthetic data agrees with direct simulation") {
  // A 40 + 40 sample from scenario (a) at d = 200, split 10 + 10 / 30 + 30.
  const Index d = 200;
  const PopulationSpec p1{mean::Zero{}, cov::ScaledIdentity{1.0}, Family::gaussian()};
  const PopulationSpec p2{mean::Constant{1.0 / 3.0}, cov::ScaledIdentity{1.0}, Family::gaussian()};
  std::mt19937_64 rng(606);
  Matrix x(d, 80);
  x.leftCols(40) = sample_population(p1, 40, d, rng);
  x.rightCols(40) = sample_population(p2, 40, d, rng);
  std::vector<int> labels(40, 1);
  labels.resize(80, 2);
  const LabeledDataset ds(x, labels, 2);

  RealDataConfig rc;
  rc.train_sizes = {10, 10};
  rc.replications = 100;
  rc.seed = 5;
  const auto real = run_real_data_protocol(ds, rc);
  REQUIRE(real.points.size() == 1);
  const auto& rp = real.points[0];
  CHECK(real.protocol == "real_data");
  REQUIRE(rp.pair_diagnostics.size() == 1);
  CHECK(rp.pair_diagnostics[0].first == 1);

  ExperimentConfig sim;
  sim.points = {ExperimentPoint{200, d, {p1, p2}, {10, 10}}};
  sim.replications = 2000;
  sim.seed = 9;
  const auto oracle = run_monte_carlo(sim);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& c = rp.classifiers[k];
    REQUIRE(c.su.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(c.su[i] == doctest::Approx(su_bound(c.error_rates[i], 40, 10)));
      const double e_sim = oracle.points[0].classifiers[k].error_rates[i];
      const double sim_sd = std::sqrt(e_sim * (1 - e_sim) / 2000.0);
      CHECK(std::abs(c.error_rates[i] - e_sim) <= 3.0 * c.su[i] + 3.0 * sim_sd);
    }
    CHECK(c.su_combined.value() == doctest::Approx(su_combined(c.su)));
  }

  rc.train_sizes = {40, 40};
  CHECK(kind_of([&] { run_real_data_protocol(ds, rc); }) == ErrorKind::EmptyTestSet);
  rc.train_sizes = {41, 10};
  CHECK(kind_of([&] { run_real_data_protocol(ds, rc); }) == ErrorKind::SizeExceedsClass);
}

TEST_CASE("spread of the error rate across seeds stays within twice the bound") {
  // Scenario (a), d = 256, R = 500, 20 master seeds.
  ExperimentConfig cfg;
  cfg.points = scenario_points('a', {256});
  cfg.replications = 500;
  cfg.classifiers = {ClassifierKind::Svm};
  std::vector<double> rates;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    cfg.seed = 1000 + s;
    rates.push_back(run_monte_carlo(cfg).points[0].classifiers[0].mean_error);
  }
  double m = 0.0;
  for (double r : rates) m += r;
  m /= 20.0;
  double ss = 0.0;
  for (double r : rates) ss += (r - m) * (r - m);
  CHECK(std::sqrt(ss / 19.0) <= 2.0 * sd_bound_simulation(500));
}
