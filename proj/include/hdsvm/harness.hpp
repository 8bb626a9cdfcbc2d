#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hdsvm/dataset.hpp"
#include "hdsvm/multiclass.hpp"
#include "hdsvm/simgen.hpp"
#include "hdsvm/svm.hpp"

namespace hdsvm {

enum class ClassifierKind { Svm, BcSvm, Ay14 };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier(std::string_view name);
std::vector<ClassifierKind> parse_classifier_list(const std::string& csv);

/// One sweep point: g populations, their training sizes and the dimension.
struct ExperimentPoint {
  double sweep_value = 0.0;
  Index dim = 0;
  std::vector<PopulationSpec> populations;
  std::vector<Index> sizes;
};

struct ExperimentConfig {
  std::string label;
  std::vector<ExperimentPoint> points;
  long replications = 2000;
  std::uint64_t seed = 1;
  std::vector<ClassifierKind> classifiers{ClassifierKind::Svm, ClassifierKind::BcSvm};
  unsigned threads = 1;
  SolverConfig solver;
};

/// Points for a named preset over `grid` (the published grid when empty).
std::vector<ExperimentPoint> scenario_points(char name, const std::vector<double>& grid = {});

/// Throws ConfigError for an unusable configuration: no points, R < 1, no
/// classifiers, mismatched population/size counts, n_i < 2, coincident
/// population means, or the distance baseline requested for g > 2.
void validate(const ExperimentConfig& config);

/// Counter-based stream seed for (master, a, b, c, ...).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Data drawn for one replication of one sweep point.
struct ReplicationData {
  LabeledDataset train;
  Matrix test_points;  // one column per class, column c-1 drawn from class c
};

/// Regenerates exactly what run_monte_carlo used for (point, rep, attempt).
ReplicationData replicate_data(const ExperimentConfig& config, std::size_t point, long rep, int attempt = 0);

/// Predicted class (1-based) of every test column for each requested
/// classifier, in `classifiers` order. Binary rules for g = 2, one-versus-one
/// for g > 2. The plain and bias-corrected SVM share one fit.
std::vector<std::vector<int>> fit_and_predict(const LabeledDataset& train, const Matrix& test_points,
                                              const std::vector<ClassifierKind>& classifiers,
                                              const SolverConfig& solver);

struct ClassifierResult {
  ClassifierKind classifier = ClassifierKind::Svm;
  std::vector<double> error_rates;  // per class
  double mean_error = 0.0;
  /// records[r][c]: 0/1 misclassification (simulation) or per-class test
  /// error fraction (real data) of replication r.
  std::vector<std::vector<double>> records;
  /// Real-data only: s_u(i) per class and combined.
  std::vector<double> su;
  std::optional<double> su_combined;
};

struct PairDiagnostic {
  int first = 0;
  int second = 0;
  double kappa_over_delta_hat = 0.0;
  double delta_unbiased = 0.0;
  bool delta_negative = false;
  double trace_ratio_first = 0.0;   // tr(S_first) / delta_unbiased
  double trace_ratio_second = 0.0;  // tr(S_second) / delta_unbiased
};

struct SweepResult {
  double sweep_value = 0.0;
  Index dim = 0;
  long replications = 0;
  double sd_bound = 0.0;  // sqrt(1/(4R)) for simulations
  std::vector<ClassifierResult> classifiers;
  std::vector<PairDiagnostic> pair_diagnostics;  // real data only
  std::vector<long> retried_replications;
};

struct ErrorRateReport {
  std::string protocol;  // "simulation" or "real_data"
  std::string label;
  std::uint64_t seed = 0;
  std::vector<SweepResult> points;
};

ErrorRateReport run_monte_carlo(const ExperimentConfig& config);

/// sqrt(1/(4R)): bound on the standard deviation of a rate averaged over R
/// Bernoulli outcomes.
double sd_bound_simulation(long replications);

/// [e(1-e)/(m-n)]^{1/2}
double su_bound(double e_bar, Index m, Index n);
/// {sum s_u(i)^2 / g}^{1/2}
double su_combined(const std::vector<double>& per_class);

struct RealDataConfig {
  std::vector<Index> train_sizes;
  long replications = 100;
  std::uint64_t seed = 1;
  std::vector<ClassifierKind> classifiers{ClassifierKind::Svm, ClassifierKind::BcSvm};
  unsigned threads = 1;
  SolverConfig solver;
  std::string label;
};

/// Repeated random splits; per-class error is the fraction of that class's
/// held-out samples misclassified. Pair diagnostics use the full sample.
ErrorRateReport run_real_data_protocol(const LabeledDataset& ds, const RealDataConfig& config);

std::vector<PairDiagnostic> pair_diagnostics(const LabeledDataset& full, const std::vector<Index>& train_sizes);

// --- report output ---------------------------------------------------------------

/// Stable column set, one row per (classifier, sweep point, class) plus a
/// "mean" row per (classifier, sweep point).
inline constexpr std::string_view kCsvHeader =
    "protocol,classifier,sweep_value,dimension,class,error_rate,replications,sd_bound,kappa_over_delta_hat";

void write_report_csv(const ErrorRateReport& report, std::ostream& out);
nlohmann::json report_to_json(const ErrorRateReport& report);
ErrorRateReport report_from_json(const nlohmann::json& j);

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(const std::string& name);

/// Writes to `path`, or stdout when empty.
void emit_report(const ErrorRateReport& report, ReportFormat format, const std::string& path);

bool operator==(const ErrorRateReport& a, const ErrorRateReport& b);

// --- config files ----------------------------------------------------------------

/// `key = value` lines; `#` starts a comment. Later keys override earlier
/// ones.
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

/// Builds an experiment from keys: scenario, sweep, reps, seed, classifiers,
/// threads, kkt_tol, and for custom runs dimensions, sizes and
/// population.<i>.{mean,cov,family}.
ExperimentConfig experiment_from_config(const ConfigMap& cfg);

std::vector<double> parse_number_list(const std::string& csv);

}  // namespace hdsvm
