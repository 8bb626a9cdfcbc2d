#include "hdsvm/model_io.hpp"

#include <fstream>

#include "hdsvm/error.hpp"

namespace hdsvm {

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

nlohmann::json model_to_json(const OvoModel& model) {
  using nlohmann::json;
  json j;
  j["format"] = "hdsvm-ovo-1";
  j["variant"] = std::string(to_string(model.variant));
  j["num_classes"] = model.num_classes;
  j["class_names"] = model.class_names;
  j["pairs"] = json::array();
  for (const auto& p : model.pairs) {
    const auto& s = p.svm;
    json jd{{"alphas", to_std(s.dual().alphas)},
            {"objective", s.dual().objective},
            {"iterations", s.dual().iterations},
            {"max_kkt_violation", s.dual().max_kkt_violation}};
    json je{{"delta_star_hat", p.estimates.delta_star_hat},
            {"kappa_hat", p.estimates.kappa_hat},
            {"trace_per_class", p.estimates.trace_per_class},
            {"sizes", p.estimates.sizes}};
    j["pairs"].push_back({{"first", p.first},
                          {"second", p.second},
                          {"bias", p.bias},
                          {"intercept", s.intercept()},
                          {"weight", to_std(s.weight())},
                          {"signed_labels", to_std(s.signed_labels())},
                          {"support", s.support()},
                          {"gram_diag", to_std(s.training_gram_diag())},
                          {"dual", std::move(jd)},
                          {"estimates", std::move(je)}});
  }
  return j;
}

OvoModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "hdsvm-ovo-1") {
      throw Error(ErrorKind::ParseError, "unsupported model format");
    }
    OvoModel m;
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.num_classes = j.at("num_classes").get<int>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& jp : j.at("pairs")) {
      const auto& jd = jp.at("dual");
      DualSolution dual{to_eigen(jd.at("alphas").get<std::vector<double>>()), jd.at("objective").get<double>(),
                        jd.at("iterations").get<long>(), jd.at("max_kkt_violation").get<double>()};
      TrainedSvm svm(std::move(dual), to_eigen(jp.at("signed_labels").get<std::vector<double>>()),
                     jp.at("support").get<std::vector<Index>>(), jp.at("intercept").get<double>(),
                     to_eigen(jp.at("weight").get<std::vector<double>>()),
                     to_eigen(jp.at("gram_diag").get<std::vector<double>>()));
      const auto& je = jp.at("estimates");
      BiasEstimates est;
      est.delta_star_hat = je.at("delta_star_hat").get<double>();
      est.kappa_hat = je.at("kappa_hat").get<double>();
      est.trace_per_class = je.at("trace_per_class").get<std::array<double, 2>>();
      est.sizes = je.at("sizes").get<std::array<Index, 2>>();
      m.pairs.push_back(PairClassifier{jp.at("first").get<int>(), jp.at("second").get<int>(), std::move(svm),
                                       jp.at("bias").get<double>(), est});
    }
    const auto g = static_cast<std::size_t>(m.num_classes);
    if (m.num_classes < 2 || m.pairs.size() != g * (g - 1) / 2 || m.class_names.size() != g) {
      throw Error(ErrorKind::ParseError, "model pair count does not match class count");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed model JSON: ") + e.what());
  }
}

void save_model(const OvoModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

OvoModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed model JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace hdsvm
