#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hdsvm/dataset.hpp"

namespace hdsvm {

struct SolverConfig {
  /// Stop once the maximal violating pair differs by less than this (in
  /// margin units, t_j * y(x_j)).
  double kkt_tol = 1e-6;
  /// 0 selects max(100 N^2, 10000).
  long max_iterations = 0;
  /// Support vectors are alphas above sv_threshold_rel * max(alpha).
  double sv_threshold_rel = 1e-8;
  /// Any alpha beyond this is taken as evidence the data are not separable.
  double alpha_cap = 1e8;
};

void validate(const SolverConfig& config);

struct DualSolution {
  Vector alphas;
  double objective = 0.0;
  long iterations = 0;
  double max_kkt_violation = 0.0;
};

/// sum(alpha) - 1/2 sum_jk alpha_j alpha_k t_j t_k G_jk
double dual_objective(const Vector& alphas, const Matrix& gram, const Vector& t);

/// Maximises the hard-margin dual subject to alpha >= 0 and sum(alpha t) = 0
/// by two-index SMO steps without an upper box bound, starting from alpha = 0.
DualSolution solve_hard_margin_dual(const Matrix& gram, const Vector& t, const SolverConfig& config = {});

std::vector<Index> support_set(const DualSolution& solution, const SolverConfig& config = {});

/// Intercept averaged over the whole support set:
///   b = (1/|S|) sum_{j in S} (t_j - sum_{k in S} alpha_k t_k G_jk)
double compute_intercept(const DualSolution& solution, const Matrix& gram, const Vector& t,
                         std::span<const Index> support);

struct OracleSolution {
  DualSolution dual;
  /// Multiplier of the equality constraint in the winning KKT system, i.e.
  /// the exact intercept.
  double intercept = 0.0;
};

/// Exact solver for tiny problems (N <= 8): enumerates every free set,
/// solves its equality-constrained KKT system and keeps the best candidate
/// that satisfies all KKT conditions.
OracleSolution brute_force_dual_oracle(const Matrix& gram, const Vector& t);

/// 1 when y < 0, otherwise 2 (ties go to the second class).
inline int class_from_value(double y) { return y < 0.0 ? 1 : 2; }

/// Fitted hard-margin linear SVM. Class 1 of the training set carries t = -1.
class TrainedSvm {
 public:
  TrainedSvm(DualSolution dual, Vector signed_labels, std::vector<Index> support, double intercept,
             Vector weight, Vector gram_diag);

  static TrainedSvm fit(const LabeledDataset& train, const SolverConfig& config = {});

  double decision_value(const Eigen::Ref<const Vector>& x) const;
  int classify(const Eigen::Ref<const Vector>& x) const { return class_from_value(decision_value(x)); }

  const DualSolution& dual() const { return dual_; }
  const Vector& signed_labels() const { return t_; }
  const std::vector<Index>& support() const { return support_; }
  double intercept() const { return intercept_; }
  const Vector& weight() const { return weight_; }
  const Vector& training_gram_diag() const { return gram_diag_; }
  Index dim() const { return weight_.size(); }

 private:
  DualSolution dual_;
  Vector t_;
  std::vector<Index> support_;
  double intercept_;
  Vector weight_;
  Vector gram_diag_;
};

/// Distance-based baseline:
///   y(x) = (x - (m1 + m2)/2)^T (m2 - m1) - tr(S1)/(2 n1) + tr(S2)/(2 n2)
class Ay14Classifier {
 public:
  explicit Ay14Classifier(ClassSummary first, ClassSummary second);

  static Ay14Classifier fit(const LabeledDataset& train);

  double decision_value(const Eigen::Ref<const Vector>& x) const;
  int classify(const Eigen::Ref<const Vector>& x) const { return class_from_value(decision_value(x)); }

  const ClassSummary& first() const { return first_; }
  const ClassSummary& second() const { return second_; }

 private:
  ClassSummary first_;
  ClassSummary second_;
};

}  // namespace hdsvm
