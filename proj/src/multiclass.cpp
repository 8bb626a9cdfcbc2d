#include "hdsvm/multiclass.hpp"

#include <algorithm>
#include <string>

#include "hdsvm/error.hpp"

namespace hdsvm {

std::string_view to_string(Variant v) { return v == Variant::Svm ? "svm" : "bc_svm"; }

Variant parse_variant(std::string_view name) {
  if (name == "svm") return Variant::Svm;
  if (name == "bc_svm" || name == "bc-svm") return Variant::BcSvm;
  throw Error(ErrorKind::ConfigError, "unknown classifier variant '" + std::string(name) + "'");
}

VoteResult tally_votes(std::vector<int> votes) {
  VoteResult r;
  r.votes = std::move(votes);
  if (r.votes.empty()) throw Error(ErrorKind::InvalidArgument, "empty vote vector");
  const auto top = std::max_element(r.votes.begin(), r.votes.end());
  r.winner = static_cast<int>(top - r.votes.begin()) + 1;
  r.tie_broken = std::count(r.votes.begin(), r.votes.end(), *top) > 1;
  return r;
}

OvoModel train_ovo(const LabeledDataset& ds, Variant variant, const SolverConfig& config) {
  const int g = ds.num_classes();
  if (g < 2) throw Error(ErrorKind::MissingClass, "one-versus-one needs at least two classes");
  for (int c = 1; c <= g; ++c) {
    if (ds.class_size(c) < 2) {
      throw Error(ErrorKind::SingletonClass, "class " + std::to_string(c) + " has fewer than 2 samples");
    }
  }

  OvoModel model;
  model.num_classes = g;
  model.variant = variant;
  model.class_names = ds.class_names();
  for (int i = 1; i <= g; ++i) {
    for (int j = i + 1; j <= g; ++j) {
      const LabeledDataset sub = ds.pair(i, j);
      try {
        BiasEstimates est = estimate_bias(sub);
        TrainedSvm svm = TrainedSvm::fit(sub, config);
        double bias = 0.0;
        if (variant == Variant::BcSvm) bias = BcSvm(svm, est).bias();
        model.pairs.push_back(PairClassifier{i, j, std::move(svm), bias, est});
      } catch (const Error& e) {
        throw Error(e.kind(), "pair (" + std::to_string(i) + "," + std::to_string(j) + "): " + e.detail());
      }
    }
  }
  return model;
}

OvoModel bias_corrected(const OvoModel& plain) {
  OvoModel out = plain;
  out.variant = Variant::BcSvm;
  for (auto& p : out.pairs) {
    try {
      p.bias = BcSvm(p.svm, p.estimates).bias();
    } catch (const Error& e) {
      throw Error(e.kind(), "pair (" + std::to_string(p.first) + "," + std::to_string(p.second) + "): " + e.detail());
    }
  }
  return out;
}

VoteResult classify_ovo(const OvoModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(model.dim()) +
                                                  " features, got " + std::to_string(x.size()));
  }
  std::vector<int> votes(static_cast<std::size_t>(model.num_classes), 0);
  for (const auto& p : model.pairs) ++votes[static_cast<std::size_t>(p.vote(x) - 1)];
  return tally_votes(std::move(votes));
}

}  // namespace hdsvm
