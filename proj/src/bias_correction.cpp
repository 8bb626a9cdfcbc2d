#include "hdsvm/bias_correction.hpp"

#include <cmath>
#include <string>

#include "hdsvm/error.hpp"

namespace hdsvm {

namespace {

void require_two_classes(const LabeledDataset& ds) {
  if (ds.num_classes() != 2 || ds.class_size(1) == 0 || ds.class_size(2) == 0) {
    throw Error(ErrorKind::MissingClass, "expected samples from exactly two classes");
  }
}

}  // namespace

double estimate_delta_star(const LabeledDataset& train) {
  require_two_classes(train);
  const Vector m1 = train.class_features(1).rowwise().mean();
  const Vector m2 = train.class_features(2).rowwise().mean();
  return (m1 - m2).squaredNorm();
}

BiasEstimates estimate_bias(const LabeledDataset& train) {
  require_two_classes(train);
  const ClassSummary s1 = class_summary(train, 1);
  const ClassSummary s2 = class_summary(train, 2);
  BiasEstimates e;
  e.delta_star_hat = (s1.mean - s2.mean).squaredNorm();
  e.trace_per_class = {s1.cov_trace, s2.cov_trace};
  e.sizes = {s1.size, s2.size};
  e.kappa_hat = s1.cov_trace / static_cast<double>(s1.size) - s2.cov_trace / static_cast<double>(s2.size);
  return e;
}

double estimate_kappa(const LabeledDataset& train) { return estimate_bias(train).kappa_hat; }

BcSvm::BcSvm(TrainedSvm base, BiasEstimates estimates)
    : base_(std::move(base)), estimates_(estimates), bias_(0.0) {
  if (!(estimates_.delta_star_hat > 0.0)) {
    throw Error(ErrorKind::DegenerateDelta, "class means coincide; bias correction undefined");
  }
  bias_ = estimates_.kappa_hat / estimates_.delta_star_hat;
}

BcSvm BcSvm::fit(const LabeledDataset& train, const SolverConfig& config) {
  BiasEstimates e = estimate_bias(train);
  return BcSvm(TrainedSvm::fit(train, config), e);
}

DeltaEstimate estimate_delta_unbiased(const LabeledDataset& ds) {
  require_two_classes(ds);
  const ClassSummary s1 = class_summary(ds, 1);
  const ClassSummary s2 = class_summary(ds, 2);
  DeltaEstimate out;
  out.value = (s1.mean - s2.mean).squaredNorm() - s1.cov_trace / static_cast<double>(s1.size) -
              s2.cov_trace / static_cast<double>(s2.size);
  out.negative = out.value < 0.0;
  return out;
}

double estimate_kappa_over_delta(const LabeledDataset& ds, Index n1, Index n2) {
  if (n1 < 1 || n2 < 1) throw Error(ErrorKind::InvalidArgument, "training sizes must be positive");
  const DeltaEstimate delta = estimate_delta_unbiased(ds);
  if (delta.value == 0.0) throw Error(ErrorKind::DegenerateDelta, "unbiased distance estimate is zero");
  const double tr1 = class_summary(ds, 1).cov_trace;
  const double tr2 = class_summary(ds, 2).cov_trace;
  return (tr1 / static_cast<double>(n1) - tr2 / static_cast<double>(n2)) / delta.value;
}

}  // namespace hdsvm
