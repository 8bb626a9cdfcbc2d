#include "hdsvm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "hdsvm/bias_correction.hpp"
#include "hdsvm/error.hpp"

namespace hdsvm {

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::BcSvm: return "bc_svm";
    case ClassifierKind::Ay14: return "ay14";
  }
  return "?";
}

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "svm") return ClassifierKind::Svm;
  if (name == "bc_svm" || name == "bc-svm") return ClassifierKind::BcSvm;
  if (name == "ay14") return ClassifierKind::Ay14;
  throw Error(ErrorKind::ConfigError, "unknown classifier '" + std::string(name) + "'");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool retryable(const Error& e) {
  return e.kind() == ErrorKind::NotSeparable || e.kind() == ErrorKind::DegenerateSupport;
}

/// Runs body(k) for k in [0, n). The error of the lowest failing index wins
/// so failures do not depend on scheduling.
template <class Body>
void parallel_for(long n, unsigned threads, Body body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long k = next++; k < n; k = next++) {
      try {
        body(k);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(1L, n))));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<ClassifierResult> empty_results(const std::vector<ClassifierKind>& kinds, long reps, int g) {
  std::vector<ClassifierResult> out;
  for (auto k : kinds) {
    ClassifierResult r;
    r.classifier = k;
    r.records.assign(static_cast<std::size_t>(reps), std::vector<double>(static_cast<std::size_t>(g), 0.0));
    out.push_back(std::move(r));
  }
  return out;
}

void aggregate(ClassifierResult& r, int g) {
  r.error_rates.assign(static_cast<std::size_t>(g), 0.0);
  for (const auto& rec : r.records) {
    for (int c = 0; c < g; ++c) r.error_rates[static_cast<std::size_t>(c)] += rec[static_cast<std::size_t>(c)];
  }
  double total = 0.0;
  for (auto& e : r.error_rates) {
    e /= static_cast<double>(r.records.size());
    total += e;
  }
  r.mean_error = total / static_cast<double>(g);
}

}  // namespace

std::vector<ClassifierKind> parse_classifier_list(const std::string& csv) {
  std::vector<ClassifierKind> out;
  for (const auto& name : split_csv(csv)) {
    const auto k = parse_classifier(name);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  for (const auto& item : split_csv(csv)) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error(ErrorKind::ConfigError, "'" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<ExperimentPoint> scenario_points(char name, const std::vector<double>& grid) {
  std::vector<ExperimentPoint> out;
  for (double v : grid.empty() ? default_grid(name) : grid) {
    ScenarioPoint s = scenario(name, v);
    out.push_back(ExperimentPoint{s.sweep_value, s.dim, std::move(s.populations), std::move(s.sizes)});
  }
  return out;
}

void validate(const ExperimentConfig& config) {
  if (config.points.empty()) throw Error(ErrorKind::ConfigError, "sweep grid is empty");
  if (config.replications < 1) throw Error(ErrorKind::ConfigError, "replications must be at least 1");
  if (config.classifiers.empty()) throw Error(ErrorKind::ConfigError, "no classifiers requested");
  validate(config.solver);
  for (const auto& p : config.points) {
    const std::size_t g = p.populations.size();
    if (g < 2 || p.sizes.size() != g) {
      throw Error(ErrorKind::ConfigError, "need at least two populations and one size per population");
    }
    if (p.dim < 1) throw Error(ErrorKind::ConfigError, "dimension must be positive");
    for (Index n : p.sizes) {
      if (n < 2) throw Error(ErrorKind::ConfigError, "every training size must be at least 2");
    }
    if (g > 2 && std::find(config.classifiers.begin(), config.classifiers.end(), ClassifierKind::Ay14) !=
                     config.classifiers.end()) {
      throw Error(ErrorKind::ConfigError, "the distance baseline is two-class only");
    }
    std::vector<Vector> means;
    for (const auto& pop : p.populations) {
      if (pop.family.kind == Family::Kind::StudentT && pop.family.df < 3) {
        throw Error(ErrorKind::ConfigError, "Student-t populations need df >= 3");
      }
      try {
        means.push_back(mean_vector(pop.mean, p.dim));
      } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, e.detail());
      }
    }
    for (std::size_t i = 0; i < g; ++i) {
      for (std::size_t j = i + 1; j < g; ++j) {
        if ((means[i] - means[j]).squaredNorm() == 0.0) {
          throw Error(ErrorKind::ConfigError, "populations " + std::to_string(i + 1) + " and " +
                                                  std::to_string(j + 1) + " share a mean (Delta = 0)");
        }
      }
    }
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t state = mix(master);
  for (std::uint64_t v : path) state = mix(state ^ mix(v + 0x632be59bd9b4e019ULL));
  return state;
}

ReplicationData replicate_data(const ExperimentConfig& config, std::size_t point, long rep, int attempt) {
  const ExperimentPoint& p = config.points.at(point);
  const int g = static_cast<int>(p.populations.size());
  Index total = 0;
  for (Index n : p.sizes) total += n;

  Matrix x(p.dim, total);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(total));
  Matrix tests(p.dim, g);
  Index offset = 0;
  for (int c = 0; c < g; ++c) {
    std::mt19937_64 rng(derive_seed(config.seed, {point, static_cast<std::uint64_t>(rep),
                                                  static_cast<std::uint64_t>(attempt),
                                                  static_cast<std::uint64_t>(c)}));
    const Index n = p.sizes[static_cast<std::size_t>(c)];
    const Matrix draws = sample_population(p.populations[static_cast<std::size_t>(c)], n + 1, p.dim, rng);
    x.middleCols(offset, n) = draws.leftCols(n);
    tests.col(c) = draws.col(n);
    labels.insert(labels.end(), static_cast<std::size_t>(n), c + 1);
    offset += n;
  }
  return {LabeledDataset(std::move(x), std::move(labels), g), std::move(tests)};
}

std::vector<std::vector<int>> fit_and_predict(const LabeledDataset& train, const Matrix& test_points,
                                              const std::vector<ClassifierKind>& classifiers,
                                              const SolverConfig& solver) {
  const bool want_svm = std::any_of(classifiers.begin(), classifiers.end(), [](ClassifierKind k) {
    return k == ClassifierKind::Svm || k == ClassifierKind::BcSvm;
  });
  const Index m = test_points.cols();
  std::vector<std::vector<int>> out;

  if (train.num_classes() == 2) {
    std::optional<TrainedSvm> svm;
    if (want_svm) svm = TrainedSvm::fit(train, solver);
    for (auto k : classifiers) {
      std::vector<int> pred(static_cast<std::size_t>(m));
      if (k == ClassifierKind::Svm) {
        for (Index j = 0; j < m; ++j) pred[static_cast<std::size_t>(j)] = svm->classify(test_points.col(j));
      } else if (k == ClassifierKind::BcSvm) {
        const BcSvm bc(*svm, estimate_bias(train));
        for (Index j = 0; j < m; ++j) pred[static_cast<std::size_t>(j)] = bc.classify(test_points.col(j));
      } else {
        const auto ay = Ay14Classifier::fit(train);
        for (Index j = 0; j < m; ++j) pred[static_cast<std::size_t>(j)] = ay.classify(test_points.col(j));
      }
      out.push_back(std::move(pred));
    }
    return out;
  }

  std::optional<OvoModel> plain, corrected;
  if (want_svm) plain = train_ovo(train, Variant::Svm, solver);
  for (auto k : classifiers) {
    if (k == ClassifierKind::Ay14) throw Error(ErrorKind::ConfigError, "the distance baseline is two-class only");
    if (k == ClassifierKind::BcSvm && !corrected) corrected = bias_corrected(*plain);
    const OvoModel& model = k == ClassifierKind::Svm ? *plain : *corrected;
    std::vector<int> pred(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) pred[static_cast<std::size_t>(j)] = classify_ovo(model, test_points.col(j)).winner;
    out.push_back(std::move(pred));
  }
  return out;
}

ErrorRateReport run_monte_carlo(const ExperimentConfig& config) {
  validate(config);
  ErrorRateReport report;
  report.protocol = "simulation";
  report.label = config.label;
  report.seed = config.seed;

  for (std::size_t pi = 0; pi < config.points.size(); ++pi) {
    const ExperimentPoint& p = config.points[pi];
    const int g = static_cast<int>(p.populations.size());
    const long reps = config.replications;
    // Build shared covariance factors once, before the workers start.
    for (const auto& pop : p.populations) build_covariance(pop.covariance, p.dim);

    SweepResult sweep;
    sweep.sweep_value = p.sweep_value;
    sweep.dim = p.dim;
    sweep.replications = reps;
    sweep.sd_bound = sd_bound_simulation(reps);
    sweep.classifiers = empty_results(config.classifiers, reps, g);
    std::vector<char> retried(static_cast<std::size_t>(reps), 0);

    parallel_for(reps, config.threads, [&](long r) {
      for (int attempt = 0;; ++attempt) {
        try {
          const ReplicationData data = replicate_data(config, pi, r, attempt);
          const auto preds = fit_and_predict(data.train, data.test_points, config.classifiers, config.solver);
          for (std::size_t k = 0; k < preds.size(); ++k) {
            auto& rec = sweep.classifiers[k].records[static_cast<std::size_t>(r)];
            for (int c = 0; c < g; ++c) rec[static_cast<std::size_t>(c)] = preds[k][static_cast<std::size_t>(c)] != c + 1;
          }
          return;
        } catch (const Error& e) {
          if (retryable(e) && attempt == 0) {
            retried[static_cast<std::size_t>(r)] = 1;
            continue;
          }
          throw Error(e.kind(), "sweep value " + num(p.sweep_value) + ", replication " + std::to_string(r) +
                                    ", attempt " + std::to_string(attempt) + ": " + e.detail());
        }
      }
    });

    for (auto& c : sweep.classifiers) aggregate(c, g);
    for (long r = 0; r < reps; ++r) {
      if (retried[static_cast<std::size_t>(r)]) sweep.retried_replications.push_back(r);
    }
    report.points.push_back(std::move(sweep));
  }
  return report;
}

double sd_bound_simulation(long replications) {
  if (replications < 1) throw Error(ErrorKind::InvalidArgument, "replications must be at least 1");
  return std::sqrt(1.0 / (4.0 * static_cast<double>(replications)));
}

double su_bound(double e_bar, Index m, Index n) {
  if (m <= n) throw Error(ErrorKind::EmptyTestSet, "class has no held-out samples (m = n)");
  if (!(e_bar >= 0.0 && e_bar <= 1.0)) throw Error(ErrorKind::InvalidArgument, "error rate outside [0, 1]");
  return std::sqrt(e_bar * (1.0 - e_bar) / static_cast<double>(m - n));
}

double su_combined(const std::vector<double>& per_class) {
  if (per_class.empty()) throw Error(ErrorKind::InvalidArgument, "no per-class bounds");
  double s = 0.0;
  for (double v : per_class) s += v * v;
  return std::sqrt(s / static_cast<double>(per_class.size()));
}

std::vector<PairDiagnostic> pair_diagnostics(const LabeledDataset& full, const std::vector<Index>& train_sizes) {
  std::vector<PairDiagnostic> out;
  const int g = full.num_classes();
  for (int i = 1; i <= g; ++i) {
    for (int j = i + 1; j <= g; ++j) {
      const LabeledDataset sub = full.pair(i, j);
      PairDiagnostic d;
      d.first = i;
      d.second = j;
      const DeltaEstimate delta = estimate_delta_unbiased(sub);
      d.delta_unbiased = delta.value;
      d.delta_negative = delta.negative;
      d.kappa_over_delta_hat = estimate_kappa_over_delta(sub, train_sizes[static_cast<std::size_t>(i - 1)],
                                                         train_sizes[static_cast<std::size_t>(j - 1)]);
      d.trace_ratio_first = class_summary(sub, 1).cov_trace / delta.value;
      d.trace_ratio_second = class_summary(sub, 2).cov_trace / delta.value;
      out.push_back(d);
    }
  }
  return out;
}

ErrorRateReport run_real_data_protocol(const LabeledDataset& ds, const RealDataConfig& config) {
  const int g = ds.num_classes();
  if (g < 2) throw Error(ErrorKind::MissingClass, "need at least two classes");
  if (static_cast<int>(config.train_sizes.size()) != g) {
    throw Error(ErrorKind::ConfigError, "need one training size per class (" + std::to_string(g) + ")");
  }
  if (config.replications < 1) throw Error(ErrorKind::ConfigError, "replications must be at least 1");
  if (config.classifiers.empty()) throw Error(ErrorKind::ConfigError, "no classifiers requested");
  validate(config.solver);
  for (int c = 1; c <= g; ++c) {
    const Index n = config.train_sizes[static_cast<std::size_t>(c - 1)];
    if (n > ds.class_size(c)) {
      throw Error(ErrorKind::SizeExceedsClass, "class " + std::to_string(c) + ": training size exceeds class size");
    }
    if (n == ds.class_size(c)) {
      throw Error(ErrorKind::EmptyTestSet, "class " + std::to_string(c) + " would have no held-out samples");
    }
  }

  ErrorRateReport report;
  report.protocol = "real_data";
  report.label = config.label;
  report.seed = config.seed;
  SweepResult sweep;
  sweep.dim = ds.dim();
  sweep.replications = config.replications;
  sweep.sd_bound = sd_bound_simulation(config.replications);
  sweep.classifiers = empty_results(config.classifiers, config.replications, g);
  sweep.pair_diagnostics = pair_diagnostics(ds, config.train_sizes);

  parallel_for(config.replications, config.threads, [&](long r) {
    try {
      std::mt19937_64 rng(derive_seed(config.seed, {static_cast<std::uint64_t>(r)}));
      const TrainTestSplit split = split_train_test(ds, config.train_sizes, rng);
      const auto preds = fit_and_predict(split.train, split.test.features(), config.classifiers, config.solver);
      for (std::size_t k = 0; k < preds.size(); ++k) {
        std::vector<double> wrong(static_cast<std::size_t>(g), 0.0);
        for (Index j = 0; j < split.test.size(); ++j) {
          const int truth = split.test.label(j);
          if (preds[k][static_cast<std::size_t>(j)] != truth) wrong[static_cast<std::size_t>(truth - 1)] += 1.0;
        }
        auto& rec = sweep.classifiers[k].records[static_cast<std::size_t>(r)];
        for (int c = 1; c <= g; ++c) {
          rec[static_cast<std::size_t>(c - 1)] =
              wrong[static_cast<std::size_t>(c - 1)] / static_cast<double>(split.test.class_size(c));
        }
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "repetition " + std::to_string(r) + ": " + e.detail());
    }
  });

  for (auto& c : sweep.classifiers) {
    aggregate(c, g);
    for (int i = 1; i <= g; ++i) {
      c.su.push_back(su_bound(c.error_rates[static_cast<std::size_t>(i - 1)], ds.class_size(i),
                              config.train_sizes[static_cast<std::size_t>(i - 1)]));
    }
    c.su_combined = su_combined(c.su);
  }
  report.points.push_back(std::move(sweep));
  return report;
}

// --- report output ---------------------------------------------------------------

void write_report_csv(const ErrorRateReport& report, std::ostream& out) {
  out << kCsvHeader << '\n';
  const bool real = report.protocol == "real_data";
  for (const auto& p : report.points) {
    const std::string kod =
        p.pair_diagnostics.size() == 1 ? num(p.pair_diagnostics.front().kappa_over_delta_hat) : std::string();
    for (const auto& c : p.classifiers) {
      const std::string prefix = report.protocol + "," + std::string(to_string(c.classifier)) + "," +
                                 num(p.sweep_value) + "," + std::to_string(p.dim) + ",";
      for (std::size_t i = 0; i < c.error_rates.size(); ++i) {
        const double sd = real ? c.su.at(i) : p.sd_bound;
        out << prefix << (i + 1) << ',' << num(c.error_rates[i]) << ',' << p.replications << ',' << num(sd)
            << ",\n";
      }
      const double sd = real ? c.su_combined.value_or(0.0) : p.sd_bound;
      out << prefix << "mean," << num(c.mean_error) << ',' << p.replications << ',' << num(sd) << ',' << kod
          << '\n';
    }
  }
}

nlohmann::json report_to_json(const ErrorRateReport& report) {
  using nlohmann::json;
  json j;
  j["protocol"] = report.protocol;
  j["label"] = report.label;
  j["seed"] = report.seed;
  j["points"] = json::array();
  for (const auto& p : report.points) {
    json jp;
    jp["sweep_value"] = p.sweep_value;
    jp["dimension"] = p.dim;
    jp["replications"] = p.replications;
    jp["sd_bound"] = p.sd_bound;
    jp["retried_replications"] = p.retried_replications;
    jp["classifiers"] = json::array();
    for (const auto& c : p.classifiers) {
      json jc;
      jc["classifier"] = std::string(to_string(c.classifier));
      jc["error_rates"] = c.error_rates;
      jc["mean_error"] = c.mean_error;
      jc["records"] = c.records;
      jc["su"] = c.su;
      jc["su_combined"] = c.su_combined ? json(*c.su_combined) : json(nullptr);
      jp["classifiers"].push_back(std::move(jc));
    }
    jp["pair_diagnostics"] = json::array();
    for (const auto& d : p.pair_diagnostics) {
      jp["pair_diagnostics"].push_back({{"first", d.first},
                                        {"second", d.second},
                                        {"kappa_over_delta_hat", d.kappa_over_delta_hat},
                                        {"delta_unbiased", d.delta_unbiased},
                                        {"delta_negative", d.delta_negative},
                                        {"trace_ratio_first", d.trace_ratio_first},
                                        {"trace_ratio_second", d.trace_ratio_second}});
    }
    j["points"].push_back(std::move(jp));
  }
  return j;
}

ErrorRateReport report_from_json(const nlohmann::json& j) {
  try {
    ErrorRateReport r;
    r.protocol = j.at("protocol").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jp : j.at("points")) {
      SweepResult p;
      p.sweep_value = jp.at("sweep_value").get<double>();
      p.dim = jp.at("dimension").get<Index>();
      p.replications = jp.at("replications").get<long>();
      p.sd_bound = jp.at("sd_bound").get<double>();
      p.retried_replications = jp.at("retried_replications").get<std::vector<long>>();
      for (const auto& jc : jp.at("classifiers")) {
        ClassifierResult c;
        c.classifier = parse_classifier(jc.at("classifier").get<std::string>());
        c.error_rates = jc.at("error_rates").get<std::vector<double>>();
        c.mean_error = jc.at("mean_error").get<double>();
        c.records = jc.at("records").get<std::vector<std::vector<double>>>();
        c.su = jc.at("su").get<std::vector<double>>();
        if (!jc.at("su_combined").is_null()) c.su_combined = jc.at("su_combined").get<double>();
        p.classifiers.push_back(std::move(c));
      }
      for (const auto& jd : jp.at("pair_diagnostics")) {
        PairDiagnostic d;
        d.first = jd.at("first").get<int>();
        d.second = jd.at("second").get<int>();
        d.kappa_over_delta_hat = jd.at("kappa_over_delta_hat").get<double>();
        d.delta_unbiased = jd.at("delta_unbiased").get<double>();
        d.delta_negative = jd.at("delta_negative").get<bool>();
        d.trace_ratio_first = jd.at("trace_ratio_first").get<double>();
        d.trace_ratio_second = jd.at("trace_ratio_second").get<double>();
        p.pair_diagnostics.push_back(d);
      }
      r.points.push_back(std::move(p));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed report JSON: ") + e.what());
  }
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw Error(ErrorKind::ConfigError, "unknown format '" + name + "'");
}

void emit_report(const ErrorRateReport& report, ReportFormat format, const std::string& path) {
  auto write = [&](std::ostream& out) {
    if (format == ReportFormat::Csv) {
      write_report_csv(report, out);
    } else {
      out << report_to_json(report).dump(2) << '\n';
    }
  };
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  write(out);
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

bool operator==(const ClassifierResult& a, const ClassifierResult& b) {
  return a.classifier == b.classifier && a.error_rates == b.error_rates && a.mean_error == b.mean_error &&
         a.records == b.records && a.su == b.su && a.su_combined == b.su_combined;
}

bool operator==(const PairDiagnostic& a, const PairDiagnostic& b) {
  return a.first == b.first && a.second == b.second && a.kappa_over_delta_hat == b.kappa_over_delta_hat &&
         a.delta_unbiased == b.delta_unbiased && a.delta_negative == b.delta_negative &&
         a.trace_ratio_first == b.trace_ratio_first && a.trace_ratio_second == b.trace_ratio_second;
}

bool operator==(const SweepResult& a, const SweepResult& b) {
  return a.sweep_value == b.sweep_value && a.dim == b.dim && a.replications == b.replications &&
         a.sd_bound == b.sd_bound && a.classifiers == b.classifiers && a.pair_diagnostics == b.pair_diagnostics &&
         a.retried_replications == b.retried_replications;
}

bool operator==(const ErrorRateReport& a, const ErrorRateReport& b) {
  return a.protocol == b.protocol && a.label == b.label && a.seed == b.seed && a.points == b.points;
}

// --- config files ----------------------------------------------------------------

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": empty key");
    cfg[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorKind::ConfigError, key + ": '" + v + "' is not an integer");
  }
  return out;
}

}  // namespace

ExperimentConfig experiment_from_config(const ConfigMap& cfg) {
  ExperimentConfig out;
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = cfg.find(key);
    return it == cfg.end() ? nullptr : &it->second;
  };

  if (auto v = get("reps")) out.replications = to_long("reps", *v);
  if (auto v = get("seed")) {
    std::uint64_t s = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), s);
    if (ec != std::errc() || ptr != v->data() + v->size()) throw Error(ErrorKind::ConfigError, "bad seed '" + *v + "'");
    out.seed = s;
  }
  if (auto v = get("classifiers")) out.classifiers = parse_classifier_list(*v);
  if (auto v = get("threads")) out.threads = static_cast<unsigned>(std::max(1L, to_long("threads", *v)));
  if (auto v = get("kkt_tol")) out.solver.kkt_tol = parse_number_list(*v).at(0);
  if (auto v = get("label")) out.label = *v;

  try {
    if (auto v = get("scenario")) {
      if (v->size() != 1) throw Error(ErrorKind::UnknownScenario, "scenario must be one of a..g");
      std::vector<double> grid;
      if (auto s = get("sweep")) grid = parse_number_list(*s);
      out.points = scenario_points((*v)[0], grid);
      if (out.label.empty()) out.label = "scenario " + *v;
      return out;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnknownScenario || e.kind() == ErrorKind::SweepOutOfGrid) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
    throw;
  }

  const std::string* sizes = get("sizes");
  const std::string* dims = get("dimensions");
  if (!sizes || !dims) {
    throw Error(ErrorKind::ConfigError, "need either 'scenario' or both 'sizes' and 'dimensions'");
  }
  std::vector<Index> n;
  for (double s : parse_number_list(*sizes)) n.push_back(static_cast<Index>(s));
  std::vector<PopulationSpec> pops;
  for (std::size_t i = 1; i <= n.size(); ++i) {
    const std::string base = "population." + std::to_string(i) + ".";
    PopulationSpec spec;
    if (auto v = get(base + "mean")) spec.mean = parse_mean_spec(*v);
    if (auto v = get(base + "cov")) spec.covariance = parse_covariance_spec(*v);
    if (auto v = get(base + "family")) spec.family = parse_family(*v);
    pops.push_back(std::move(spec));
  }
  for (double d : parse_number_list(*dims)) {
    if (d < 1 || d != std::floor(d)) throw Error(ErrorKind::ConfigError, "dimensions must be positive integers");
    out.points.push_back(ExperimentPoint{d, static_cast<Index>(d), pops, n});
  }
  if (out.label.empty()) out.label = "custom";
  return out;
}

}  // namespace hdsvm
