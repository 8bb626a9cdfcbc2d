// Command-line front end: simulate, bench-real, fit, predict, diagnose.

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hdsvm/bias_correction.hpp"
#include "hdsvm/dataset.hpp"
#include "hdsvm/error.hpp"
#include "hdsvm/harness.hpp"
#include "hdsvm/model_io.hpp"
#include "hdsvm/multiclass.hpp"
#include "hdsvm/simgen.hpp"

namespace {

using namespace hdsvm;

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kSolver = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::UnknownLabelColumn:
    case ErrorKind::IoError:
    case ErrorKind::SingletonClass:
    case ErrorKind::MissingClass:
    case ErrorKind::SizeExceedsClass:
    case ErrorKind::EmptyTestSet:
    case ErrorKind::DimensionMismatch:
      return kData;
    case ErrorKind::NotSeparable:
    case ErrorKind::DegenerateGram:
    case ErrorKind::DegenerateSupport:
    case ErrorKind::EmptySupportSet:
    case ErrorKind::DegenerateDelta:
    case ErrorKind::FactorizationFailure:
      return kSolver;
    default:
      return kConfig;
  }
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct GlobalOptions {
  std::uint64_t seed = 1;
  long reps = 0;
  std::string classifiers;
  std::string format = "csv";
  std::string out;
  unsigned threads = 1;
  std::string config;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* reps_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

struct DataOptions {
  std::string path;
  std::string delimiter = ",";
  bool columns = false;
  std::string label_column = "label";

  void add(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--data", path, "CSV/TSV file");
    if (required) opt->required();
    app->add_option("--delimiter", delimiter, "field separator (',' or 'tab')");
    app->add_flag("--columns", columns, "samples are columns, features are rows");
    app->add_option("--label-column", label_column, "name of the label field");
  }

  MatrixSchema schema() const {
    MatrixSchema s;
    if (delimiter == "tab" || delimiter == "\\t") {
      s.delimiter = '\t';
    } else if (delimiter.size() == 1) {
      s.delimiter = delimiter[0];
    } else {
      throw Error(ErrorKind::ConfigError, "delimiter must be a single character or 'tab'");
    }
    s.orientation = columns ? Orientation::SamplesAsColumns : Orientation::SamplesAsRows;
    s.label_field = label_column;
    return s;
  }
};

/// Writes `text` to the --out path, or stdout.
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << text;
}

std::vector<Index> parse_sizes(const std::string& text) {
  std::vector<Index> out;
  for (double v : parse_number_list(text)) {
    if (v != std::floor(v) || v < 0) throw Error(ErrorKind::ConfigError, "sizes must be non-negative integers");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

ConfigMap base_config(const GlobalOptions& g) { return g.config.empty() ? ConfigMap{} : load_config_file(g.config); }

// --- simulate -----------------------------------------------------------------------

struct SimulateOptions {
  std::string scenario;
  std::string sweep;
};

int run_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  ConfigMap cfg = base_config(g);
  if (!o.scenario.empty()) cfg["scenario"] = o.scenario;
  if (!o.sweep.empty()) cfg["sweep"] = o.sweep;
  ExperimentConfig exp = experiment_from_config(cfg);
  if (g.seed_opt->count()) exp.seed = g.seed;
  if (g.reps_opt->count()) exp.replications = g.reps;
  if (!g.classifiers.empty()) exp.classifiers = parse_classifier_list(g.classifiers);
  if (g.threads_opt->count()) exp.threads = g.threads;
  emit_report(run_monte_carlo(exp), parse_report_format(g.format), g.out);
  return kOk;
}

// --- bench-real ---------------------------------------------------------------------

struct BenchOptions {
  DataOptions data;
  std::string train_sizes;
  std::string preprocess = "none";
};

int run_bench_real(const GlobalOptions& g, const BenchOptions& o) {
  const ConfigMap cfg = base_config(g);
  auto get = [&](const std::string& key, const std::string& fallback) {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
  };
  const auto format = parse_report_format(g.format);
  RealDataConfig rc;
  const std::string sizes = o.train_sizes.empty() ? get("train_sizes", "") : o.train_sizes;
  if (sizes.empty()) throw Error(ErrorKind::ConfigError, "--train-sizes is required");
  rc.train_sizes = parse_sizes(sizes);
  rc.replications = g.reps_opt->count() ? g.reps : std::stol(get("reps", "100"));
  rc.seed = g.seed_opt->count() ? g.seed : std::stoull(get("seed", "1"));
  const std::string classifiers = g.classifiers.empty() ? get("classifiers", "") : g.classifiers;
  if (!classifiers.empty()) rc.classifiers = parse_classifier_list(classifiers);
  rc.threads = g.threads_opt->count() ? g.threads : static_cast<unsigned>(std::stoul(get("threads", "1")));
  rc.label = get("label", o.data.path);

  LabeledDataset ds = load_labeled_matrix(o.data.path, o.data.schema());
  ds = apply_preprocessing(ds, parse_preprocess(o.preprocess));
  emit_report(run_real_data_protocol(ds, rc), format, g.out);
  return kOk;
}

// --- fit / predict ------------------------------------------------------------------

struct FitOptions {
  DataOptions data;
  std::string variant = "bc_svm";
  std::string model;
};

int run_fit(const GlobalOptions&, const FitOptions& o) {
  const Variant variant = parse_variant(o.variant);
  const LabeledDataset ds = load_labeled_matrix(o.data.path, o.data.schema());
  const OvoModel model = train_ovo(ds, variant);
  save_model(model, o.model);
  std::cerr << "trained " << model.pairs.size() << " pairwise " << to_string(variant) << " rule(s) on "
            << ds.size() << " samples, d = " << ds.dim() << "\n";
  return kOk;
}

struct PredictOptions {
  DataOptions data;
  std::string model;
  bool labeled = false;
};

int run_predict(const GlobalOptions& g, const PredictOptions& o) {
  const auto format = parse_report_format(g.format);
  const OvoModel model = load_model(o.model);
  Matrix x;
  std::vector<std::string> truth;
  if (o.labeled) {
    const LabeledDataset ds = load_labeled_matrix(o.data.path, o.data.schema());
    x = ds.features();
    for (Index j = 0; j < ds.size(); ++j) {
      truth.push_back(ds.class_names()[static_cast<std::size_t>(ds.label(j) - 1)]);
    }
  } else {
    x = load_feature_matrix(o.data.path, o.data.schema());
  }

  std::ostringstream out;
  nlohmann::json rows = nlohmann::json::array();
  if (format == ReportFormat::Csv) out << "sample,predicted" << (o.labeled ? ",actual" : "") << ",votes,tie\n";
  for (Index j = 0; j < x.cols(); ++j) {
    const VoteResult r = classify_ovo(model, x.col(j));
    const std::string& name = model.class_names[static_cast<std::size_t>(r.winner - 1)];
    if (format == ReportFormat::Csv) {
      out << j << ',' << name;
      if (o.labeled) out << ',' << truth[static_cast<std::size_t>(j)];
      out << ',';
      for (std::size_t c = 0; c < r.votes.size(); ++c) out << (c ? ";" : "") << r.votes[c];
      out << ',' << (r.tie_broken ? 1 : 0) << '\n';
    } else {
      nlohmann::json row{{"sample", j}, {"predicted", name}, {"votes", r.votes}, {"tie", r.tie_broken}};
      if (o.labeled) row["actual"] = truth[static_cast<std::size_t>(j)];
      rows.push_back(std::move(row));
    }
  }
  write_output(g.out, format == ReportFormat::Csv ? out.str() : rows.dump(2) + "\n");
  return kOk;
}

// --- diagnose -----------------------------------------------------------------------

struct DiagnoseOptions {
  DataOptions data;
  std::string train_sizes;
  std::string scenario;
  std::string sweep;
  long mc_draws = 100000;
};

std::string diagnose_data(const DiagnoseOptions& o, ReportFormat format) {
  const LabeledDataset ds = load_labeled_matrix(o.data.path, o.data.schema());
  const auto diags = pair_diagnostics(ds, parse_sizes(o.train_sizes));
  if (format == ReportFormat::Json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& d : diags) {
      j.push_back({{"first", d.first},
                   {"second", d.second},
                   {"kappa_over_delta_hat", d.kappa_over_delta_hat},
                   {"delta_unbiased", d.delta_unbiased},
                   {"delta_negative", d.delta_negative},
                   {"trace_ratio_first", d.trace_ratio_first},
                   {"trace_ratio_second", d.trace_ratio_second}});
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "first,second,kappa_over_delta_hat,delta_unbiased,delta_negative,trace_ratio_first,trace_ratio_second\n";
  for (const auto& d : diags) {
    out << d.first << ',' << d.second << ',' << num(d.kappa_over_delta_hat) << ',' << num(d.delta_unbiased) << ','
        << (d.delta_negative ? 1 : 0) << ',' << num(d.trace_ratio_first) << ',' << num(d.trace_ratio_second) << '\n';
  }
  return out.str();
}

std::string diagnose_populations(const GlobalOptions& g, const DiagnoseOptions& o, ReportFormat format) {
  ConfigMap cfg = base_config(g);
  if (!o.scenario.empty()) cfg["scenario"] = o.scenario;
  if (!o.sweep.empty()) cfg["sweep"] = o.sweep;
  const ExperimentConfig exp = experiment_from_config(cfg);
  const std::uint64_t seed = g.seed_opt->count() ? g.seed : exp.seed;

  std::ostringstream out;
  nlohmann::json rows = nlohmann::json::array();
  if (format == ReportFormat::Csv) {
    out << "sweep_value,dimension,delta,kappa,delta_small,kappa_over_delta,ratio_a_i_1,ratio_a_i_2,"
           "ratio_a_ii_1,ratio_a_ii_2,ratio_a_iii,method\n";
  }
  for (const auto& p : exp.points) {
    if (p.populations.size() != 2) throw Error(ErrorKind::ConfigError, "diagnose needs exactly two populations");
    const auto r = assumption_diagnostics(p.populations[0], p.populations[1], p.sizes[0], p.sizes[1], p.dim,
                                          o.mc_draws, seed);
    const char* method = r.method == AssumptionReport::Method::ClosedForm ? "closed_form" : "monte_carlo";
    if (format == ReportFormat::Csv) {
      out << num(p.sweep_value) << ',' << p.dim << ',' << num(r.delta) << ',' << num(r.kappa) << ','
          << num(r.delta_small) << ',' << num(r.kappa_over_delta) << ',' << num(r.ratio_a_i[0]) << ','
          << num(r.ratio_a_i[1]) << ',' << num(r.ratio_a_ii[0]) << ',' << num(r.ratio_a_ii[1]) << ','
          << num(r.ratio_a_iii) << ',' << method << '\n';
    } else {
      rows.push_back({{"sweep_value", p.sweep_value},
                      {"dimension", p.dim},
                      {"delta", r.delta},
                      {"kappa", r.kappa},
                      {"delta_small", r.delta_small},
                      {"delta_star", r.delta_star},
                      {"kappa_over_delta", r.kappa_over_delta},
                      {"trace", r.trace},
                      {"trace_sq", r.trace_sq},
                      {"var_norm", r.var_norm},
                      {"ratio_a_i", r.ratio_a_i},
                      {"ratio_a_ii", r.ratio_a_ii},
                      {"ratio_a_iii", r.ratio_a_iii},
                      {"method", method}});
    }
  }
  return format == ReportFormat::Csv ? out.str() : rows.dump(2) + "\n";
}

int run_diagnose(const GlobalOptions& g, const DiagnoseOptions& o) {
  const auto format = parse_report_format(g.format);
  if (!o.data.path.empty()) {
    if (o.train_sizes.empty()) throw Error(ErrorKind::ConfigError, "--train-sizes is required with --data");
    write_output(g.out, diagnose_data(o, format));
  } else {
    write_output(g.out, diagnose_populations(g, o, format));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-margin SVM and bias-corrected SVM for high-dimension, low-sample-size data"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  g.seed_opt = app.add_option("--seed", g.seed, "master seed");
  g.reps_opt = app.add_option("--reps", g.reps, "replications")->check(CLI::PositiveNumber);
  app.add_option("--classifiers", g.classifiers, "comma list of svm, bc_svm, ay14");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", g.out, "output file (stdout when omitted)");
  g.threads_opt = app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "key = value configuration file");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo error rates over a scenario or custom sweep");
  simulate->add_option("--scenario", sim.scenario, "preset a..g");
  simulate->add_option("--sweep", sim.sweep, "comma list of sweep values (default: published grid)");

  BenchOptions bench;
  auto* bench_real = app.add_subcommand("bench-real", "repeated random splits of a labeled data file");
  bench.data.add(bench_real);
  bench_real->add_option("--train-sizes", bench.train_sizes, "training size per class, e.g. 10,10");
  bench_real->add_option("--preprocess", bench.preprocess, "none, center or standardize");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "train a model on a labeled file");
  fit.data.add(fit_cmd);
  fit_cmd->add_option("--variant", fit.variant, "svm or bc_svm");
  fit_cmd->add_option("--model", fit.model, "where to write the model")->required();

  PredictOptions pred;
  auto* predict = app.add_subcommand("predict", "classify rows with a saved model");
  pred.data.add(predict);
  predict->add_option("--model", pred.model, "model file from 'fit'")->required();
  predict->add_flag("--labeled", pred.labeled, "input carries a label field; echo it");

  DiagnoseOptions diag;
  auto* diagnose = app.add_subcommand("diagnose", "population assumption ratios or data kappa/Delta estimates");
  diag.data.add(diagnose, false);
  diagnose->add_option("--train-sizes", diag.train_sizes, "training sizes for kappa_hat divisors");
  diagnose->add_option("--scenario", diag.scenario, "preset a..g");
  diagnose->add_option("--sweep", diag.sweep, "comma list of sweep values");
  diagnose->add_option("--mc-draws", diag.mc_draws, "Monte Carlo draws for Student-t populations")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*simulate) return run_simulate(g, sim);
    if (*bench_real) return run_bench_real(g, bench);
    if (*fit_cmd) return run_fit(g, fit);
    if (*predict) return run_predict(g, pred);
    if (*diagnose) return run_diagnose(g, diag);
  } catch (const Error& e) {
    std::cerr << "hdsvm: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::invalid_argument& e) {
    std::cerr << "hdsvm: bad number in configuration: " << e.what() << "\n";
    return kConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "hdsvm: number out of range in configuration: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
