#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hdsvm {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Samples stored one per column (d rows x N columns) with a class index in
/// 1..g for every column. Immutable once built.
class LabeledDataset {
 public:
  LabeledDataset() = default;

  /// `num_classes` defaults to the largest label present. Class names default
  /// to "1".."g".
  LabeledDataset(Matrix features, std::vector<int> labels, int num_classes = 0,
                 std::vector<std::string> class_names = {});

  Index dim() const { return features_.rows(); }
  Index size() const { return features_.cols(); }
  int num_classes() const { return static_cast<int>(class_sizes_.size()); }

  const Matrix& features() const { return features_; }
  auto sample(Index j) const { return features_.col(j); }
  std::span<const int> labels() const { return labels_; }
  int label(Index j) const { return labels_[static_cast<std::size_t>(j)]; }

  /// Number of samples carrying class index `c` (1-based).
  Index class_size(int c) const;
  const std::vector<Index>& class_sizes() const { return class_sizes_; }
  std::vector<Index> class_indices(int c) const;
  Matrix class_features(int c) const;

  const std::vector<std::string>& class_names() const { return class_names_; }

  /// Columns `cols` in the given order; keeps the class count and names.
  LabeledDataset subset(std::span<const Index> cols) const;

  /// Two-class view of classes `first` and `second`, relabelled 1 and 2.
  LabeledDataset pair(int first, int second) const;

 private:
  Matrix features_;
  std::vector<int> labels_;
  std::vector<Index> class_sizes_;
  std::vector<std::string> class_names_;
};

struct ClassSummary {
  Vector mean;
  double cov_trace = 0.0;
  Index size = 0;
};

/// Inner products of every pair of samples.
Matrix gram_matrix(const LabeledDataset& ds);

/// Sample mean and tr(S) with divisor n - 1. S itself is never formed.
ClassSummary class_summary(const LabeledDataset& ds, int c);

/// Class 1 maps to -1 and class 2 to +1. Requires exactly two classes.
Vector signed_labels(const LabeledDataset& ds);

// --- delimited text ingestion ---------------------------------------------

enum class Orientation {
  SamplesAsRows,     // header row of field names, one sample per line
  SamplesAsColumns,  // first column holds feature names, one sample per column
};

struct MatrixSchema {
  char delimiter = ',';
  Orientation orientation = Orientation::SamplesAsRows;
  /// Header field (rows) or leading row name (columns) holding the labels.
  std::string label_field = "label";
};

/// Labels are mapped to 1..g in first-appearance order; the original strings
/// become the dataset's class names.
LabeledDataset load_labeled_matrix(const std::string& path, const MatrixSchema& schema);

/// Feature-only file (no label field). Returns d x N.
Matrix load_feature_matrix(const std::string& path, const MatrixSchema& schema);

/// Writes with round-trip precision so a reload reproduces every bit.
void write_labeled_matrix(const LabeledDataset& ds, const std::string& path,
                          const MatrixSchema& schema);

enum class Preprocess { None, Center, Standardize };

Preprocess parse_preprocess(const std::string& name);

/// Off by default. Center subtracts the pooled per-feature mean; Standardize
/// additionally divides by the pooled per-feature standard deviation
/// (constant features are left unscaled).
LabeledDataset apply_preprocessing(const LabeledDataset& ds, Preprocess mode);

// --- splitting --------------------------------------------------------------

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

/// Uniform without-replacement draw of `train_sizes[c-1]` samples from each
/// class; the rest form the test set. Column order within each part follows
/// the original dataset.
TrainTestSplit split_train_test(const LabeledDataset& ds, std::span<const Index> train_sizes,
                                std::mt19937_64& rng);

}  // namespace hdsvm
