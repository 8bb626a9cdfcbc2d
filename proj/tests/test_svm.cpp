#include <Eigen/QR>
#include <random>

#include "doctest.h"
#include "hdsvm/error.hpp"
#include "hdsvm/harness.hpp"
#include "hdsvm/simgen.hpp"
#include "hdsvm/svm.hpp"
#include "test_support.hpp"

using namespace hdsvm;
using hdsvm::testing::make_dataset;
using hdsvm::testing::random_separable;

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

const LabeledDataset& two_points() {
  static const auto ds = make_dataset({{-1, 0}, {1, 0}}, {1, 2});
  return ds;
}

}  // namespace

TEST_CASE("two antipodal points") {
  const auto svm = TrainedSvm::fit(two_points());
  CHECK(svm.dual().alphas[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(svm.dual().alphas[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(svm.dual().objective == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(svm.intercept()) < 1e-10);
  CHECK(svm.weight()[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(svm.weight()[1]) < 1e-10);
  CHECK(svm.support().size() == 2);

  const Vector x = (Vector(2) << 2, 0).finished();
  CHECK(svm.decision_value(x) == doctest::Approx(2.0).epsilon(1e-10));
  for (Index j = 0; j < 2; ++j) {
    CHECK(svm.signed_labels()[j] * svm.decision_value(two_points().sample(j)) == doctest::Approx(1.0));
  }
}

TEST_CASE("translation orthogonal to w keeps the intercept at zero") {
  const auto ds = make_dataset({{-1, 5}, {1, 5}}, {1, 2});
  const auto svm = TrainedSvm::fit(ds);
  CHECK(std::abs(svm.intercept()) < 1e-10);
}

TEST_CASE("three-point instance matches the hand solution") {
  // Class 1 at (0,0) and (0,2), class 2 at (2,1). The margin planes are x=0
  // and x=2, so w=(1,0), b=-1. With alpha1+alpha2=alpha3, w = sum a_j t_j x_j
  // gives (2 a3, a3 - 2 a2) = (1, 0): a = (1/4, 1/4, 1/2), L = 1 - 1/2.
  const auto ds = make_dataset({{0, 0}, {0, 2}, {2, 1}}, {1, 1, 2});
  const Matrix g = gram_matrix(ds);
  const Vector t = signed_labels(ds);
  const Vector hand = (Vector(3) << 0.25, 0.25, 0.5).finished();

  const auto oracle = brute_force_dual_oracle(g, t);
  CHECK((oracle.dual.alphas - hand).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(oracle.intercept == doctest::Approx(-1.0));

  const auto svm = TrainedSvm::fit(ds);
  CHECK((svm.dual().alphas - hand).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(svm.dual().objective == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(svm.intercept() == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("four-point instance in d=3 against frozen QP values") {
  // Reference from an independent primal/dual QP solve:
  // alpha = (8, 4, 10, 2)/27, w = (2/3, 2/3, 0), b = -1, objective 4/9.
  const auto ds = make_dataset({{0, 0, 1}, {1, -1, 0}, {2, 1, 1}, {1, 2, -1}}, {1, 1, 2, 2});
  const Matrix g = gram_matrix(ds);
  const Vector t = signed_labels(ds);
  const Vector expected = (Vector(4) << 8.0, 4.0, 10.0, 2.0).finished() / 27.0;

  const auto oracle = brute_force_dual_oracle(g, t);
  CHECK((oracle.dual.alphas - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(oracle.dual.objective == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(oracle.intercept == doctest::Approx(-1.0).epsilon(1e-12));

  const auto svm = TrainedSvm::fit(ds);
  CHECK(svm.dual().objective == doctest::Approx(oracle.dual.objective).epsilon(1e-6));
  CHECK(std::abs(svm.intercept() - oracle.intercept) < 1e-6);
  const auto s = support_set(svm.dual());
  CHECK(std::abs(compute_intercept(oracle.dual, g, t, s) - oracle.intercept) < 1e-8);
  CHECK((svm.weight() - Vector::Map(std::vector<double>{2.0 / 3, 2.0 / 3, 0}.data(), 3)).norm() < 1e-5);
}

TEST_CASE("dual objective") {
  const Matrix g = gram_matrix(two_points());
  const Vector t = signed_labels(two_points());
  CHECK(dual_objective(Vector::Zero(2), g, t) == 0.0);
  CHECK(dual_objective(Vector::Constant(2, 0.5), g, t) == doctest::Approx(0.5));

  std::mt19937_64 rng(21);
  const auto ds = random_separable(rng, 2, 3, 4);
  const Matrix g5 = gram_matrix(ds);
  const Vector t5 = signed_labels(ds);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Vector a(5);
  for (Index j = 0; j < 5; ++j) a[j] = u(rng);
  double oracle = 0.0;
  for (Index j = 0; j < 5; ++j) {
    oracle += a[j];
    for (Index k = 0; k < 5; ++k) oracle -= 0.5 * a[j] * a[k] * t5[j] * t5[k] * g5(j, k);
  }
  CHECK(dual_objective(a, g5, t5) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("solver agrees with the enumeration oracle on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 5), dim(2, 5);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n1 = size(rng);
    const Index n2 = std::max<Index>(1, std::min<Index>(6 - n1, size(rng)));
    const auto ds = random_separable(rng, n1, n2, dim(rng), 0.2);
    const Matrix g = gram_matrix(ds);
    const Vector t = signed_labels(ds);
    const auto sol = solve_hard_margin_dual(g, t);
    const auto oracle = brute_force_dual_oracle(g, t);
    const double gap = std::abs(sol.objective - oracle.dual.objective) / std::abs(oracle.dual.objective);
    worst_gap = std::max(worst_gap, gap);
    CHECK((sol.alphas - oracle.dual.alphas).cwiseAbs().maxCoeff() <= 1e-5);

    // Dual feasibility.
    CHECK(sol.alphas.minCoeff() >= 0.0);
    CHECK(std::abs(sol.alphas.dot(t)) <= 1e-8 * sol.alphas.sum());
    CHECK(sol.objective == doctest::Approx(dual_objective(sol.alphas, g, t)).epsilon(1e-10));
  }
  CHECK(worst_gap <= 1e-6);
}

TEST_CASE("fitted SVM is primal feasible and tight on its support set") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ds = random_separable(rng, 5, 7, 10, 0.3);
    const auto svm = TrainedSvm::fit(ds);
    double min_margin = 1e300;
    for (Index j = 0; j < ds.size(); ++j) {
      min_margin = std::min(min_margin, svm.signed_labels()[j] * svm.decision_value(ds.sample(j)));
    }
    CHECK(min_margin >= 1.0 - 1e-4);
    for (Index j : svm.support()) {
      CHECK(std::abs(svm.signed_labels()[j] * svm.decision_value(ds.sample(j)) - 1.0) <= 1e-4);
    }
  }
}

TEST_CASE("classification is invariant to rotations and translations") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  const Index d = 6;
  const auto ds = random_separable(rng, 4, 5, d, 0.3);
  Matrix a(d, d);
  for (Index j = 0; j < a.size(); ++j) a.data()[j] = z(rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
  Vector shift(d);
  for (Index j = 0; j < d; ++j) shift[j] = 3.0 * z(rng);

  const auto base = TrainedSvm::fit(ds);
  const LabeledDataset rotated(q * ds.features(), {ds.labels().begin(), ds.labels().end()}, 2);
  Matrix moved_x = ds.features();
  moved_x.colwise() += shift;
  const LabeledDataset moved(moved_x, {ds.labels().begin(), ds.labels().end()}, 2);
  const auto rot_svm = TrainedSvm::fit(rotated);
  const auto moved_svm = TrainedSvm::fit(moved);

  for (int k = 0; k < 200; ++k) {
    Vector x(d);
    for (Index j = 0; j < d; ++j) x[j] = 1.5 * z(rng);
    const double y = base.decision_value(x);
    if (std::abs(y) < 1e-6) continue;  // too close to the boundary to compare
    CHECK(rot_svm.classify(q * x) == base.classify(x));
    CHECK(moved_svm.classify(x + shift) == base.classify(x));
  }
}

TEST_CASE("decision rule sends ties to class 2") {
  CHECK(class_from_value(-3.0) == 1);
  CHECK(class_from_value(0.0) == 2);
  CHECK(class_from_value(0.1) == 2);
}

TEST_CASE("error paths") {
  SUBCASE("overlapping classes are not separable") {
    const auto ds = make_dataset({{0, 0}, {1, 1}, {0, 0}, {2, 2}}, {1, 2, 2, 1});
    CHECK(kind_of([&] { TrainedSvm::fit(ds); }) == ErrorKind::NotSeparable);
    CHECK(kind_of([&] { brute_force_dual_oracle(gram_matrix(ds), signed_labels(ds)); }) ==
          ErrorKind::NotSeparable);
  }
  SUBCASE("XOR is not separable") {
    const auto ds = make_dataset({{1, 1}, {-1, -1}, {1, -1}, {-1, 1}}, {1, 1, 2, 2});
    CHECK(kind_of([&] { TrainedSvm::fit(ds); }) == ErrorKind::NotSeparable);
  }
  SUBCASE("one class only") {
    const Matrix g = Matrix::Identity(2, 2);
    const Vector t = Vector::Constant(2, 1.0);
    CHECK(kind_of([&] { solve_hard_margin_dual(g, t); }) == ErrorKind::DegenerateGram);
  }
  SUBCASE("empty support set") {
    DualSolution sol{Vector::Zero(2), 0.0, 0, 0.0};
    CHECK(kind_of([&] { compute_intercept(sol, Matrix::Identity(2, 2), Vector::Ones(2), {}); }) ==
          ErrorKind::EmptySupportSet);
  }
  SUBCASE("dimension mismatch") {
    const auto svm = TrainedSvm::fit(two_points());
    CHECK(kind_of([&] { svm.decision_value(Vector::Zero(3)); }) == ErrorKind::DimensionMismatch);
  }
  SUBCASE("tolerances must be positive") {
    SolverConfig cfg;
    cfg.kkt_tol = 0.0;
    CHECK(kind_of([&] { TrainedSvm::fit(two_points(), cfg); }) == ErrorKind::ConfigError);
  }
}

TEST_CASE("data piling and equal within-class weights in high dimension") {
  // Population scenario (a) at d = 4096: Delta = d/9, delta = d/10 + d/10.
  ExperimentConfig cfg;
  cfg.points = scenario_points('a', {4096});
  cfg.seed = 12345;
  const auto data = replicate_data(cfg, 0, 0);
  const auto svm = TrainedSvm::fit(data.train);
  CHECK(svm.support().size() == 20);

  const double d = 4096.0;
  const double delta_star = d / 9.0 + d / 5.0;
  const double target = 2.0 / (delta_star * 10.0);
  for (Index j = 0; j < 20; ++j) {
    CHECK(svm.dual().alphas[j] == doctest::Approx(target).epsilon(0.2));
  }
  for (int c = 0; c < 2; ++c) {
    const Vector a = svm.dual().alphas.segment(10 * c, 10);
    const double mean = a.mean();
    const double sd = std::sqrt((a.array() - mean).square().sum() / 9.0);
    CHECK(sd / mean < 0.2);
  }
}

TEST_CASE("normalised SVM value carries the kappa/Delta bias") {
  // Scenario (b), d = 2048: Delta = d/9, delta = d/6 + d/14, kappa/Delta = 6/7.
  ExperimentConfig cfg;
  cfg.points = scenario_points('b', {2048});
  cfg.seed = 4242;
  const auto data = replicate_data(cfg, 0, 0);
  const auto svm = TrainedSvm::fit(data.train);
  const double d = 2048.0;
  const double delta = d / 9.0;
  const double delta_star = delta + d / 6.0 + d / 14.0;
  const double normalised = delta_star / delta * svm.decision_value(data.test_points.col(0));
  CHECK(std::abs(normalised - (-1.0 + 6.0 / 7.0)) <= 0.25);
}

TEST_CASE("distance-based baseline") {
  SUBCASE("zero traces") {
    const auto ds = make_dataset({{-1, 0}, {-1, 0}, {1, 0}, {1, 0}}, {1, 1, 2, 2});
    const auto clf = Ay14Classifier::fit(ds);
    const Vector x = (Vector(2) << -2, 0).finished();
    CHECK(clf.decision_value(x) == doctest::Approx(-4.0));
    CHECK(clf.classify(x) == 1);
    CHECK(clf.decision_value(Vector::Zero(2)) == 0.0);
    CHECK(clf.classify(Vector::Zero(2)) == 2);
  }
  SUBCASE("hand evaluation") {
    // m1 = (1,0), tr S1 = 2; m2 = (4,3), tr S2 = 2; x = (1,1):
    // (x - (2.5,1.5)) . (3,3) - 2/4 + 2/4 = -6
    const auto ds = make_dataset({{0, 0}, {2, 0}, {4, 2}, {4, 4}}, {1, 1, 2, 2});
    const auto clf = Ay14Classifier::fit(ds);
    CHECK(clf.decision_value((Vector(2) << 1, 1).finished()) == doctest::Approx(-6.0));
    // Unequal traces: add spread to class 2 only.
    const auto ds2 = make_dataset({{0, 0}, {2, 0}, {4, 0}, {4, 6}}, {1, 1, 2, 2});
    // m2 = (4,3), tr S2 = 18 -> -6 - 2/4 + 18/4 = -2
    CHECK(Ay14Classifier::fit(ds2).decision_value((Vector(2) << 1, 1).finished()) == doctest::Approx(-2.0));
  }
  SUBCASE("errors") {
    const auto ds = make_dataset({{0, 0}, {2, 0}, {4, 2}, {4, 4}}, {1, 1, 2, 2});
    CHECK(kind_of([&] { Ay14Classifier::fit(ds).decision_value(Vector::Zero(5)); }) ==
          ErrorKind::DimensionMismatch);
    const auto single = make_dataset({{0, 0}, {4, 2}, {4, 4}}, {1, 2, 2});
    CHECK(kind_of([&] { Ay14Classifier::fit(single); }) == ErrorKind::SingletonClass);
  }
}
