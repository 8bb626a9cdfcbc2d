#include "hdsvm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "hdsvm/error.hpp"

namespace hdsvm {

namespace {

constexpr double kTau = 1e-12;

void check_problem(const Matrix& gram, const Vector& t) {
  if (gram.rows() != gram.cols() || gram.rows() != t.size()) {
    throw Error(ErrorKind::DimensionMismatch, "Gram matrix and label vector sizes disagree");
  }
  bool neg = false, pos = false;
  for (Index j = 0; j < t.size(); ++j) {
    if (t[j] == -1.0) neg = true;
    else if (t[j] == 1.0) pos = true;
    else throw Error(ErrorKind::InvalidArgument, "signed labels must be -1 or +1");
  }
  if (!neg || !pos) throw Error(ErrorKind::DegenerateGram, "both classes must be present");
}

// Largest gap between the up and low index sets at `alpha`.
double kkt_violation(const Vector& alpha, const Vector& grad, const Vector& t) {
  double gmax = -std::numeric_limits<double>::infinity();
  double gmin = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < t.size(); ++k) {
    const double v = -t[k] * grad[k];
    if (t[k] > 0.0 || alpha[k] > 0.0) gmax = std::max(gmax, v);
    if (t[k] < 0.0 || alpha[k] > 0.0) gmin = std::min(gmin, v);
  }
  return gmax - gmin;
}

// Solves the equality KKT system on the support set found by SMO:
//   [Q_SS t_S; t_S^T 0] [a_S; b] = [1; 0]
// Kept only when every a_S stays positive and the violation does not grow.
void polish(const Matrix& gram, const Vector& t, double threshold_rel, Vector& alpha, Vector& grad,
            double& violation) {
  const Index n = t.size();
  std::vector<Index> s;
  const double threshold = threshold_rel * alpha.maxCoeff();
  for (Index j = 0; j < n; ++j) {
    if (alpha[j] > threshold) s.push_back(j);
  }
  const auto m = static_cast<Index>(s.size());
  if (m < 2) return;
  Matrix kkt = Matrix::Zero(m + 1, m + 1);
  Vector rhs = Vector::Zero(m + 1);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) kkt(a, b) = t[s[a]] * t[s[b]] * gram(s[a], s[b]);
    kkt(a, m) = t[s[a]];
    kkt(m, a) = t[s[a]];
    rhs[a] = 1.0;
  }
  const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  Vector candidate = Vector::Zero(n);
  for (Index a = 0; a < m; ++a) {
    if (!(sol[a] > 0.0)) return;
    candidate[s[a]] = sol[a];
  }
  const Vector at = candidate.cwiseProduct(t);
  const Vector cgrad = t.cwiseProduct(gram * at) - Vector::Ones(n);
  const double cviol = kkt_violation(candidate, cgrad, t);
  if (cviol <= violation) {
    alpha = candidate;
    grad = cgrad;
    violation = cviol;
  }
}

}  // namespace

void validate(const SolverConfig& config) {
  if (!(config.kkt_tol > 0.0) || !(config.sv_threshold_rel > 0.0) || !(config.alpha_cap > 0.0) ||
      config.max_iterations < 0) {
    throw Error(ErrorKind::ConfigError, "solver tolerances must be strictly positive");
  }
}

double dual_objective(const Vector& alphas, const Matrix& gram, const Vector& t) {
  const Vector at = alphas.cwiseProduct(t);
  return alphas.sum() - 0.5 * at.dot(gram * at);
}

DualSolution solve_hard_margin_dual(const Matrix& gram, const Vector& t, const SolverConfig& config) {
  validate(config);
  check_problem(gram, t);
  const Index n = t.size();
  const long max_iter =
      config.max_iterations > 0 ? config.max_iterations : std::max<long>(100L * n * n, 10000L);
  const long stall_window = std::max<long>(n * n, 1000L);

  // Minimise f(a) = 1/2 a^T Q a - sum(a) with Q_jk = t_j t_k G_jk.
  // grad holds Q a - 1.
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);

  DualSolution out;
  double best_violation = std::numeric_limits<double>::infinity();
  long last_progress = 0;
  long iter = 0;
  double violation = 0.0;

  for (;; ++iter) {
    // I_up: points whose alpha may move so that t_i * alpha_i grows.
    // I_low: points whose alpha may move so that t_j * alpha_j shrinks.
    Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
      const double v = -t[k] * grad[k];
      if ((t[k] > 0.0 || alpha[k] > 0.0) && v > gmax) {
        gmax = v;
        i = k;
      }
      if (t[k] < 0.0 || alpha[k] > 0.0) gmin = std::min(gmin, v);
    }
    violation = gmax - gmin;
    if (violation < config.kkt_tol) break;

    if (violation < best_violation) {
      best_violation = violation;
      last_progress = iter;
    } else if (iter - last_progress > stall_window) {
      throw Error(ErrorKind::NotSeparable, "KKT violation stopped shrinking after " +
                                               std::to_string(iter) + " iterations (" +
                                               std::to_string(violation) + ")");
    }
    if (iter >= max_iter) {
      throw Error(ErrorKind::NotSeparable,
                  "no convergence within " + std::to_string(max_iter) + " iterations");
    }

    // Second-order choice of the partner j.
    Index j = -1;
    double best_gain = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
      if (!(t[k] < 0.0 || alpha[k] > 0.0)) continue;
      const double b = gmax + t[k] * grad[k];
      if (b <= 0.0) continue;
      double a = gram(i, i) + gram(k, k) - 2.0 * gram(i, k);
      if (a <= 0.0) a = kTau;
      const double gain = -(b * b) / a;
      if (gain <= best_gain) {
        best_gain = gain;
        j = k;
      }
    }
    if (j < 0) break;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (t[i] != t[j]) {
      double quad = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
    } else {
      double quad = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
    }

    if (alpha[i] > config.alpha_cap || alpha[j] > config.alpha_cap) {
      throw Error(ErrorKind::NotSeparable, "dual variable exceeded alpha_cap (" +
                                               std::to_string(config.alpha_cap) + ")");
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    // Q column k of index i is t_k t_i G_ki.
    grad.noalias() += (di * t[i]) * t.cwiseProduct(gram.col(i));
    grad.noalias() += (dj * t[j]) * t.cwiseProduct(gram.col(j));
  }

  polish(gram, t, config.sv_threshold_rel, alpha, grad, violation);

  out.alphas = std::move(alpha);
  out.iterations = iter;
  out.max_kkt_violation = violation;
  out.objective = dual_objective(out.alphas, gram, t);
  return out;
}

std::vector<Index> support_set(const DualSolution& solution, const SolverConfig& config) {
  const double threshold = config.sv_threshold_rel * solution.alphas.maxCoeff();
  std::vector<Index> s;
  for (Index j = 0; j < solution.alphas.size(); ++j) {
    if (solution.alphas[j] > threshold) s.push_back(j);
  }
  return s;
}

double compute_intercept(const DualSolution& solution, const Matrix& gram, const Vector& t,
                         std::span<const Index> support) {
  if (support.empty()) throw Error(ErrorKind::EmptySupportSet, "no support vectors");
  double total = 0.0;
  for (Index j : support) {
    double inner = 0.0;
    for (Index k : support) inner += solution.alphas[k] * t[k] * gram(j, k);
    total += t[j] - inner;
  }
  return total / static_cast<double>(support.size());
}

OracleSolution brute_force_dual_oracle(const Matrix& gram, const Vector& t) {
  check_problem(gram, t);
  const Index n = t.size();
  if (n > 8) throw Error(ErrorKind::InvalidArgument, "oracle limited to N <= 8");

  const Matrix q = (t * t.transpose()).cwiseProduct(gram);
  const double scale = std::max(1.0, gram.diagonal().maxCoeff());

  std::optional<OracleSolution> best;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> free;
    bool neg = false, pos = false;
    for (Index j = 0; j < n; ++j) {
      if (mask & (1u << j)) {
        free.push_back(j);
        (t[j] < 0 ? neg : pos) = true;
      }
    }
    if (!neg || !pos) continue;
    const Index m = static_cast<Index>(free.size());

    // [Q_FF t_F; t_F^T 0] [a_F; b] = [1; 0]
    Matrix kkt = Matrix::Zero(m + 1, m + 1);
    Vector rhs = Vector::Zero(m + 1);
    for (Index r = 0; r < m; ++r) {
      for (Index c = 0; c < m; ++c) kkt(r, c) = q(free[r], free[c]);
      kkt(r, m) = t[free[r]];
      kkt(m, r) = t[free[r]];
      rhs[r] = 1.0;
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
    const Vector sol = cod.solve(rhs);
    if (!sol.allFinite() || (kkt * sol - rhs).norm() > 1e-9 * (1.0 + sol.norm() * scale)) continue;

    Vector alpha = Vector::Zero(n);
    bool feasible = true;
    for (Index r = 0; r < m; ++r) {
      if (sol[r] < -1e-12) feasible = false;
      alpha[free[r]] = std::max(0.0, sol[r]);
    }
    if (!feasible) continue;
    const double b = sol[m];

    // Points pinned at zero must lie on or beyond the margin.
    const Vector margin = q * alpha + b * t;
    bool kkt_ok = true;
    for (Index j = 0; j < n; ++j) {
      if (!(mask & (1u << j)) && margin[j] < 1.0 - 1e-9) kkt_ok = false;
    }
    if (!kkt_ok) continue;

    const double obj = dual_objective(alpha, gram, t);
    if (!best || obj > best->dual.objective) {
      best = OracleSolution{DualSolution{alpha, obj, 0, 0.0}, b};
    }
  }
  if (!best) throw Error(ErrorKind::NotSeparable, "no bounded KKT point exists");
  return *best;
}

// --- TrainedSvm --------------------------------------------------------------

TrainedSvm::TrainedSvm(DualSolution dual, Vector signed_labels, std::vector<Index> support, double intercept,
                       Vector weight, Vector gram_diag)
    : dual_(std::move(dual)),
      t_(std::move(signed_labels)),
      support_(std::move(support)),
      intercept_(intercept),
      weight_(std::move(weight)),
      gram_diag_(std::move(gram_diag)) {}

TrainedSvm TrainedSvm::fit(const LabeledDataset& train, const SolverConfig& config) {
  if (train.num_classes() != 2 || train.class_size(1) == 0 || train.class_size(2) == 0) {
    throw Error(ErrorKind::DegenerateGram, "SVM training needs samples from exactly two classes");
  }
  const Matrix gram = gram_matrix(train);
  const Vector t = hdsvm::signed_labels(train);
  DualSolution dual = solve_hard_margin_dual(gram, t, config);
  std::vector<Index> s = support_set(dual, config);

  bool neg = false, pos = false;
  for (Index j : s) (t[j] < 0 ? neg : pos) = true;
  if (!neg || !pos) {
    throw Error(ErrorKind::DegenerateSupport, "support set covers only one class");
  }
  const double b = compute_intercept(dual, gram, t, s);

  Vector w = Vector::Zero(train.dim());
  for (Index k : s) w.noalias() += (dual.alphas[k] * t[k]) * train.sample(k);
  Vector diag = gram.diagonal();
  return TrainedSvm(std::move(dual), t, std::move(s), b, std::move(w), std::move(diag));
}

double TrainedSvm::decision_value(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != weight_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(weight_.size()) +
                                                  " features, got " + std::to_string(x.size()));
  }
  return weight_.dot(x) + intercept_;
}

// --- AY14 baseline -----------------------------------------------------------

Ay14Classifier::Ay14Classifier(ClassSummary first, ClassSummary second)
    : first_(std::move(first)), second_(std::move(second)) {
  if (first_.size < 2 || second_.size < 2) {
    throw Error(ErrorKind::SingletonClass, "distance-based classifier needs n_i >= 2");
  }
  if (first_.mean.size() != second_.mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "class means differ in length");
  }
}

Ay14Classifier Ay14Classifier::fit(const LabeledDataset& train) {
  return Ay14Classifier(class_summary(train, 1), class_summary(train, 2));
}

double Ay14Classifier::decision_value(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != first_.mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(first_.mean.size()) +
                                                  " features, got " + std::to_string(x.size()));
  }
  const Vector mid = 0.5 * (first_.mean + second_.mean);
  return (x - mid).dot(second_.mean - first_.mean) -
         first_.cov_trace / (2.0 * static_cast<double>(first_.size)) +
         second_.cov_trace / (2.0 * static_cast<double>(second_.size));
}

}  // namespace hdsvm
