#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hdsvm/bias_correction.hpp"
#include "hdsvm/dataset.hpp"
#include "hdsvm/svm.hpp"

namespace hdsvm {

enum class Variant { Svm, BcSvm };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

/// Binary rule for classes `first` < `second`; locally `first` is class 1
/// (t = -1) and `second` is class 2.
struct PairClassifier {
  int first = 0;
  int second = 0;
  TrainedSvm svm;
  /// kappa_hat / delta_star_hat for the BC variant, 0 for the plain SVM.
  double bias = 0.0;
  /// Plug-in estimates for the pair (always computed, used as diagnostics).
  BiasEstimates estimates;

  double decision_value(const Eigen::Ref<const Vector>& x) const { return svm.decision_value(x) - bias; }
  /// Winning global class index.
  int vote(const Eigen::Ref<const Vector>& x) const {
    return class_from_value(decision_value(x)) == 1 ? first : second;
  }
};

struct OvoModel {
  int num_classes = 0;
  Variant variant = Variant::Svm;
  std::vector<PairClassifier> pairs;  // ordered (1,2), (1,3), ..., (g-1,g)
  std::vector<std::string> class_names;

  Index dim() const { return pairs.empty() ? 0 : pairs.front().svm.dim(); }
};

struct VoteResult {
  std::vector<int> votes;  // votes[c-1] for class c
  int winner = 0;
  bool tie_broken = false;
};

/// Max-wins over a vote vector; ties go to the lowest class index.
VoteResult tally_votes(std::vector<int> votes);

OvoModel train_ovo(const LabeledDataset& ds, Variant variant, const SolverConfig& config = {});

/// Copy of a plain-SVM model with every pair shifted by its own
/// kappa_hat / delta_star_hat, reusing the fitted SVMs.
OvoModel bias_corrected(const OvoModel& plain);

VoteResult classify_ovo(const OvoModel& model, const Eigen::Ref<const Vector>& x);

}  // namespace hdsvm
