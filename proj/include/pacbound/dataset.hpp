#pragma once

#include <Eigen/Core>
#include <limits>
#include <iosfwd>
#include <string>
#include <vector>

namespace pacbound {

/// Patterns plus labels, optionally split into a labelled training part and an
/// unlabelled shadow part. Shadow labels, when present, are kept only so test
/// oracles can evaluate r2; bound computations never read them.
struct LabeledDataset {
  Eigen::MatrixXd patterns;  // one row per sample, one column per measurement
  std::vector<int> labels;   // size = row count; kNoLabel marks unlabelled rows
  int train_count = 0;       // N, the labelled prefix
  int label_count = 0;       // |Y| (0 until inferred or set)

  static constexpr int kNoLabel = std::numeric_limits<int>::min();

  int rows() const { return static_cast<int>(patterns.rows()); }
  int dims() const { return static_cast<int>(patterns.cols()); }
  int shadow_count() const { return rows() - train_count; }

  /// Throws ValidationError unless every coordinate lies in [0,1], labels of
  /// the training prefix lie in [0, label_count) and shadow rows trail.
  void validate_threshold() const;

  /// Throws ValidationError unless training labels are all -1 or +1.
  void validate_svm() const;
};

/// CSV format: header `f1,...,fh,y`; decimal point, LF lines. An empty y field
/// marks a shadow row. For threshold datasets y is a class id starting at 0;
/// for SVM datasets y is -1 or +1.
LabeledDataset load_csv(std::istream& in);
LabeledDataset load_csv_file(const std::string& path);

void save_csv(const LabeledDataset& ds, std::ostream& out);

/// Appends the rows of `shadow` as unlabelled shadow rows of `ds`.
void append_shadow(LabeledDataset& ds, const LabeledDataset& shadow);

struct SynthConfig {
  int n = 12;
  int h = 1;
  int label_count = 2;
  int shadow = 0;
  unsigned seed = 1;
  bool svm_labels = false;  // emit -1/+1 labels from a random halfspace
};

/// Deterministic synthetic dataset generator; the only randomness in the tool.
LabeledDataset make_synthetic(const SynthConfig& cfg);

}  // namespace pacbound
