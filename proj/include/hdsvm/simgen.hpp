#pragma once

#include <array>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "hdsvm/dataset.hpp"

namespace hdsvm {

namespace mean {
struct Zero {};
struct Constant {
  double value = 0.0;
};
/// First t/2 entries 1, last t/2 entries -1. t must be even, 0 < t <= d.
struct Alpha {
  long t = 0;
  /// Use t = d_star(d) instead of `t`.
  bool use_d_star = false;
};
/// First two entries sqrt(t)/2, last two -sqrt(t)/2. Needs d >= 4.
struct Beta {
  double t = 0.0;
};
struct Explicit {
  Vector values;
};
}  // namespace mean

using MeanSpec = std::variant<mean::Zero, mean::Constant, mean::Alpha, mean::Beta, mean::Explicit>;

namespace cov {
/// c * I
struct ScaledIdentity {
  double c = 1.0;
};
/// B C(rho) B with C_jk = rho^{|j-k|^{1/3}} and B = diag{(0.5 + j/(d+1))^{1/2}}.
struct Structured {
  double rho = 0.3;
};
}  // namespace cov

using CovarianceSpec = std::variant<cov::ScaledIdentity, cov::Structured>;

struct Family {
  enum class Kind { Gaussian, StudentT };
  Kind kind = Kind::Gaussian;
  int df = 0;

  static Family gaussian() { return {}; }
  static Family student_t(int df) { return {Kind::StudentT, df}; }
};

struct PopulationSpec {
  MeanSpec mean = mean::Zero{};
  CovarianceSpec covariance = cov::ScaledIdentity{1.0};
  Family family;
};

std::string describe(const MeanSpec& spec);
std::string describe(const CovarianceSpec& spec);
std::string describe(const Family& family);

MeanSpec parse_mean_spec(const std::string& text);
CovarianceSpec parse_covariance_spec(const std::string& text);
Family parse_family(const std::string& text);

/// 2 * ceil(d^{2/3} / 2), computed in integer arithmetic.
long d_star(long d);

Vector mean_vector(const MeanSpec& spec, Index d);

/// Square-root factor of a covariance: either sqrt(c) * I or a lower
/// Cholesky factor L with L L^T = Sigma.
class CovarianceFactor {
 public:
  static CovarianceFactor identity(Index d, double c);
  static CovarianceFactor from_dense(const Matrix& sigma);

  Index dim() const { return dim_; }
  bool is_scaled_identity() const { return lower_.size() == 0; }
  double scale() const { return scale_; }
  const Matrix& lower() const { return lower_; }
  double trace() const { return trace_; }
  double trace_of_square() const { return trace_sq_; }

  /// Returns Sigma^{1/2} z column by column.
  Matrix apply(const Matrix& z) const;

 private:
  Index dim_ = 0;
  double scale_ = 1.0;
  Matrix lower_;
  double trace_ = 0.0;
  double trace_sq_ = 0.0;
};

Matrix dense_covariance(const CovarianceSpec& spec, Index d);

/// Cached per (spec, d); safe to call from several threads.
std::shared_ptr<const CovarianceFactor> build_covariance(const CovarianceSpec& spec, Index d);

/// n draws (d x n). Student-t draws are mu + L z sqrt((df - 2)/u) with
/// u ~ chi^2(df), so Sigma is the covariance rather than the scale matrix.
Matrix sample_population(const PopulationSpec& spec, Index n, Index d, std::mt19937_64& rng);

// --- scenario presets ---------------------------------------------------------

struct ScenarioPoint {
  char name = 'a';
  double sweep_value = 0.0;
  Index dim = 0;
  std::vector<PopulationSpec> populations;
  std::vector<Index> sizes;
};

/// Sweep variable is d for a-d and s for e-g.
ScenarioPoint scenario(char name, double sweep_value);

/// Published sweep grid for a scenario.
std::vector<double> default_grid(char name);

// --- assumption diagnostics ---------------------------------------------------

struct AssumptionReport {
  enum class Method { ClosedForm, MonteCarlo };

  std::array<double, 2> var_norm{};    // Var(||x - mu||^2)
  std::array<double, 2> trace{};       // tr(Sigma_i)
  std::array<double, 2> trace_sq{};    // tr(Sigma_i^2)
  std::array<double, 2> ratio_a_i{};   // Var(||x - mu||^2) / Delta^2
  std::array<double, 2> ratio_a_ii{};  // tr(Sigma_i^2) / Delta^2
  double ratio_a_iii = 0.0;            // |kappa| / Delta
  double delta = 0.0;                  // ||mu1 - mu2||^2
  double kappa = 0.0;                  // tr(Sigma1)/n1 - tr(Sigma2)/n2
  double delta_small = 0.0;            // tr(Sigma1)/n1 + tr(Sigma2)/n2
  double delta_star = 0.0;             // delta + delta_small
  double kappa_over_delta = 0.0;
  Method method = Method::ClosedForm;
};

/// Population-level ratios. Gaussian populations use 2 tr(Sigma^2) for
/// Var(||x - mu||^2); Student-t populations estimate it from `mc_draws`
/// samples.
AssumptionReport assumption_diagnostics(const PopulationSpec& first, const PopulationSpec& second, Index n1,
                                        Index n2, Index d, long mc_draws = 100000,
                                        std::uint64_t seed = 20160101);

}  // namespace hdsvm
