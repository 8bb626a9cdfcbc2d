#pragma once

#include <array>

#include "hdsvm/dataset.hpp"
#include "hdsvm/svm.hpp"

namespace hdsvm {

/// Plug-in quantities from a two-class training sample.
struct BiasEstimates {
  double delta_star_hat = 0.0;  // ||mean1 - mean2||^2
  double kappa_hat = 0.0;       // tr(S1)/n1 - tr(S2)/n2
  std::array<double, 2> trace_per_class{};
  std::array<Index, 2> sizes{};
};

/// Squared distance between the two class means. Only needs n_i >= 1.
double estimate_delta_star(const LabeledDataset& train);

double estimate_kappa(const LabeledDataset& train);

BiasEstimates estimate_bias(const LabeledDataset& train);

/// SVM whose decision value is shifted by kappa_hat / delta_star_hat, both
/// estimated on the same training sample as the SVM.
class BcSvm {
 public:
  BcSvm(TrainedSvm base, BiasEstimates estimates);

  static BcSvm fit(const LabeledDataset& train, const SolverConfig& config = {});

  double decision_value(const Eigen::Ref<const Vector>& x) const { return base_.decision_value(x) - bias_; }
  int classify(const Eigen::Ref<const Vector>& x) const { return class_from_value(decision_value(x)); }

  const TrainedSvm& base() const { return base_; }
  const BiasEstimates& estimates() const { return estimates_; }
  double bias() const { return bias_; }

 private:
  TrainedSvm base_;
  BiasEstimates estimates_;
  double bias_;
};

struct DeltaEstimate {
  double value = 0.0;
  /// Set when the estimate came out negative (noise-dominated data). The
  /// value is reported unclamped.
  bool negative = false;
};

/// ||mean1 - mean2||^2 - tr(S1)/m1 - tr(S2)/m2 over the whole sample.
DeltaEstimate estimate_delta_unbiased(const LabeledDataset& ds);

/// {tr(S1)/n1 - tr(S2)/n2} / delta_unbiased, with traces from the full
/// sample `ds` but divisors the training sizes n1, n2.
double estimate_kappa_over_delta(const LabeledDataset& ds, Index n1, Index n2);

}  // namespace hdsvm
