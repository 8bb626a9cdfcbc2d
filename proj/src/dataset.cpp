#include "hdsvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hdsvm/error.hpp"

namespace hdsvm {

LabeledDataset::LabeledDataset(Matrix features, std::vector<int> labels, int num_classes,
                               std::vector<std::string> class_names)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (static_cast<Index>(labels_.size()) != features_.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "dataset has " + std::to_string(features_.cols()) + " samples but " +
                    std::to_string(labels_.size()) + " labels");
  }
  if (!features_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "dataset contains non-finite feature values");
  }
  int g = num_classes;
  for (int l : labels_) {
    if (l < 1) throw Error(ErrorKind::InvalidArgument, "class labels must be >= 1");
    g = std::max(g, l);
  }
  if (num_classes > 0 && g > num_classes) {
    throw Error(ErrorKind::InvalidArgument, "label exceeds declared class count");
  }
  class_sizes_.assign(static_cast<std::size_t>(g), 0);
  for (int l : labels_) ++class_sizes_[static_cast<std::size_t>(l - 1)];

  if (class_names.empty()) {
    for (int c = 1; c <= g; ++c) class_names.push_back(std::to_string(c));
  } else if (static_cast<int>(class_names.size()) != g) {
    throw Error(ErrorKind::InvalidArgument, "class name count does not match class count");
  }
  class_names_ = std::move(class_names);
}

Index LabeledDataset::class_size(int c) const {
  if (c < 1 || c > num_classes()) return 0;
  return class_sizes_[static_cast<std::size_t>(c - 1)];
}

std::vector<Index> LabeledDataset::class_indices(int c) const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(class_size(c)));
  for (Index j = 0; j < size(); ++j) {
    if (label(j) == c) out.push_back(j);
  }
  return out;
}

Matrix LabeledDataset::class_features(int c) const {
  const auto idx = class_indices(c);
  Matrix out(dim(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = features_.col(idx[k]);
  return out;
}

LabeledDataset LabeledDataset::subset(std::span<const Index> cols) const {
  Matrix x(dim(), static_cast<Index>(cols.size()));
  std::vector<int> l;
  l.reserve(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    x.col(static_cast<Index>(k)) = features_.col(cols[k]);
    l.push_back(label(cols[k]));
  }
  return LabeledDataset(std::move(x), std::move(l), num_classes(), class_names_);
}

LabeledDataset LabeledDataset::pair(int first, int second) const {
  if (first == second || class_size(first) == 0 || class_size(second) == 0) {
    throw Error(ErrorKind::MissingClass, "pair (" + std::to_string(first) + "," +
                                             std::to_string(second) + ") is not two present classes");
  }
  std::vector<Index> cols;
  std::vector<int> l;
  for (Index j = 0; j < size(); ++j) {
    if (label(j) == first || label(j) == second) {
      cols.push_back(j);
      l.push_back(label(j) == first ? 1 : 2);
    }
  }
  Matrix x(dim(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Index>(k)) = features_.col(cols[k]);
  return LabeledDataset(std::move(x), std::move(l), 2,
                        {class_names_[static_cast<std::size_t>(first - 1)],
                         class_names_[static_cast<std::size_t>(second - 1)]});
}

Matrix gram_matrix(const LabeledDataset& ds) {
  Matrix g = Matrix::Zero(ds.size(), ds.size());
  g.selfadjointView<Eigen::Lower>().rankUpdate(ds.features().transpose());
  return g.selfadjointView<Eigen::Lower>();
}

ClassSummary class_summary(const LabeledDataset& ds, int c) {
  const Matrix x = ds.class_features(c);
  const Index n = x.cols();
  if (n < 2) {
    throw Error(ErrorKind::SingletonClass,
                "class " + std::to_string(c) + " has " + std::to_string(n) + " sample(s); need 2");
  }
  ClassSummary s;
  s.size = n;
  s.mean = x.rowwise().mean();
  s.cov_trace = (x.colwise() - s.mean).squaredNorm() / static_cast<double>(n - 1);
  return s;
}

Vector signed_labels(const LabeledDataset& ds) {
  if (ds.num_classes() != 2) {
    throw Error(ErrorKind::InvalidArgument, "signed labels need exactly two classes");
  }
  Vector t(ds.size());
  for (Index j = 0; j < ds.size(); ++j) t[j] = ds.label(j) == 1 ? -1.0 : 1.0;
  return t;
}

// --- text I/O ----------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Table {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

Table read_table(const std::string& path, char delim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    t.rows.push_back(split_line(line, delim));
    t.line_numbers.push_back(lineno);
  }
  if (t.rows.empty()) throw Error(ErrorKind::ParseError, path + " is empty");
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.rows[0].size()) {
      throw Error(ErrorKind::ParseError, path + ": line " + std::to_string(t.line_numbers[r]) + " has " +
                                             std::to_string(t.rows[r].size()) + " fields, header has " +
                                             std::to_string(t.rows[0].size()));
    }
  }
  return t;
}

double parse_number(const std::string& cell, const std::string& path, std::size_t line, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorKind::ParseError, path + ": line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": '" + cell + "' is not a number");
  }
  return v;
}

// Shared by the labelled and unlabelled loaders. `label_field` empty means
// the file has no label field.
struct Parsed {
  Matrix features;
  std::vector<std::string> raw_labels;
};

Parsed parse_matrix(const std::string& path, const MatrixSchema& schema, bool want_labels) {
  const Table t = read_table(path, schema.delimiter);
  const auto& header = t.rows[0];
  Parsed p;

  if (schema.orientation == Orientation::SamplesAsRows) {
    std::ptrdiff_t label_col = -1;
    if (want_labels) {
      auto it = std::find(header.begin(), header.end(), schema.label_field);
      if (it == header.end()) {
        throw Error(ErrorKind::UnknownLabelColumn, path + ": no column named '" + schema.label_field + "'");
      }
      label_col = it - header.begin();
    }
    const Index n = static_cast<Index>(t.rows.size() - 1);
    const Index d = static_cast<Index>(header.size()) - (want_labels ? 1 : 0);
    p.features.resize(d, n);
    for (Index j = 0; j < n; ++j) {
      const auto& row = t.rows[static_cast<std::size_t>(j + 1)];
      Index f = 0;
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (static_cast<std::ptrdiff_t>(c) == label_col) {
          p.raw_labels.push_back(row[c]);
          continue;
        }
        p.features(f++, j) = parse_number(row[c], path, t.line_numbers[static_cast<std::size_t>(j + 1)], c + 1);
      }
    }
  } else {
    std::size_t label_row = 0;
    if (want_labels) {
      for (std::size_t r = 1; r < t.rows.size(); ++r) {
        if (t.rows[r][0] == schema.label_field) label_row = r;
      }
      if (label_row == 0) {
        throw Error(ErrorKind::UnknownLabelColumn, path + ": no row named '" + schema.label_field + "'");
      }
    }
    const Index n = static_cast<Index>(header.size()) - 1;
    const Index d = static_cast<Index>(t.rows.size()) - 1 - (want_labels ? 1 : 0);
    p.features.resize(d, n);
    Index f = 0;
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      if (r == label_row) {
        p.raw_labels.assign(row.begin() + 1, row.end());
        continue;
      }
      for (Index j = 0; j < n; ++j) {
        p.features(f, j) = parse_number(row[static_cast<std::size_t>(j + 1)], path, t.line_numbers[r],
                                        static_cast<std::size_t>(j + 2));
      }
      ++f;
    }
  }
  return p;
}

std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

LabeledDataset load_labeled_matrix(const std::string& path, const MatrixSchema& schema) {
  Parsed p = parse_matrix(path, schema, true);
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;
  std::vector<int> labels;
  labels.reserve(p.raw_labels.size());
  for (const auto& raw : p.raw_labels) {
    auto [it, inserted] = index.emplace(raw, static_cast<int>(names.size()) + 1);
    if (inserted) names.push_back(raw);
    labels.push_back(it->second);
  }
  const int g = static_cast<int>(names.size());
  return LabeledDataset(std::move(p.features), std::move(labels), g, std::move(names));
}

Matrix load_feature_matrix(const std::string& path, const MatrixSchema& schema) {
  return parse_matrix(path, schema, false).features;
}

void write_labeled_matrix(const LabeledDataset& ds, const std::string& path, const MatrixSchema& schema) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  const char sep = schema.delimiter;
  const auto& names = ds.class_names();
  if (schema.orientation == Orientation::SamplesAsRows) {
    for (Index f = 0; f < ds.dim(); ++f) out << 'f' << (f + 1) << sep;
    out << schema.label_field << '\n';
    for (Index j = 0; j < ds.size(); ++j) {
      for (Index f = 0; f < ds.dim(); ++f) out << format_exact(ds.features()(f, j)) << sep;
      out << names[static_cast<std::size_t>(ds.label(j) - 1)] << '\n';
    }
  } else {
    out << "feature";
    for (Index j = 0; j < ds.size(); ++j) out << sep << 's' << (j + 1);
    out << '\n' << schema.label_field;
    for (Index j = 0; j < ds.size(); ++j) out << sep << names[static_cast<std::size_t>(ds.label(j) - 1)];
    out << '\n';
    for (Index f = 0; f < ds.dim(); ++f) {
      out << 'f' << (f + 1);
      for (Index j = 0; j < ds.size(); ++j) out << sep << format_exact(ds.features()(f, j));
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

Preprocess parse_preprocess(const std::string& name) {
  if (name == "none" || name == "off") return Preprocess::None;
  if (name == "center") return Preprocess::Center;
  if (name == "standardize") return Preprocess::Standardize;
  throw Error(ErrorKind::ConfigError, "unknown preprocessing mode '" + name + "'");
}

LabeledDataset apply_preprocessing(const LabeledDataset& ds, Preprocess mode) {
  if (mode == Preprocess::None || ds.size() == 0) return ds;
  Matrix x = ds.features();
  const Vector mean = x.rowwise().mean();
  x.colwise() -= mean;
  if (mode == Preprocess::Standardize && ds.size() > 1) {
    for (Index f = 0; f < x.rows(); ++f) {
      const double sd = std::sqrt(x.row(f).squaredNorm() / static_cast<double>(ds.size() - 1));
      if (sd > 0.0) x.row(f) /= sd;
    }
  }
  std::vector<int> labels(ds.labels().begin(), ds.labels().end());
  return LabeledDataset(std::move(x), std::move(labels), ds.num_classes(), ds.class_names());
}

TrainTestSplit split_train_test(const LabeledDataset& ds, std::span<const Index> train_sizes,
                                std::mt19937_64& rng) {
  const int g = ds.num_classes();
  if (static_cast<int>(train_sizes.size()) != g) {
    throw Error(ErrorKind::InvalidArgument, "need one training size per class (" + std::to_string(g) + ")");
  }
  std::vector<char> in_train(static_cast<std::size_t>(ds.size()), 0);
  for (int c = 1; c <= g; ++c) {
    const Index want = train_sizes[static_cast<std::size_t>(c - 1)];
    auto idx = ds.class_indices(c);
    if (want > static_cast<Index>(idx.size())) {
      throw Error(ErrorKind::SizeExceedsClass, "class " + std::to_string(c) + ": training size " +
                                                   std::to_string(want) + " exceeds class size " +
                                                   std::to_string(idx.size()));
    }
    if (want < 2) {
      throw Error(ErrorKind::SingletonClass,
                  "class " + std::to_string(c) + ": training size must be at least 2");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (Index k = 0; k < want; ++k) in_train[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] = 1;
  }
  std::vector<Index> train, test;
  for (Index j = 0; j < ds.size(); ++j) (in_train[static_cast<std::size_t>(j)] ? train : test).push_back(j);
  return {ds.subset(train), ds.subset(test)};
}

}  // namespace hdsvm
