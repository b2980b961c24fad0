#include "pacbound/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "pacbound/errors.hpp"

namespace pacbound {

void LabeledDataset::validate_threshold() const {
  if (train_count < 1 || train_count > rows()) {
    throw ValidationError("dataset: training prefix empty or larger than the file");
  }
  if (label_count < 2) throw ValidationError("dataset: need at least two classes");
  for (int i = 0; i < rows(); ++i) {
    for (int j = 0; j < dims(); ++j) {
      const double v = patterns(i, j);
      if (!(v >= 0.0) || !(v <= 1.0)) {
        throw ValidationError("dataset: coordinate outside [0,1] at row " + std::to_string(i));
      }
    }
    if (i < train_count) {
      if (labels[i] < 0 || labels[i] >= label_count) {
        throw ValidationError("dataset: label out of range at row " + std::to_string(i));
      }
    }
  }
}

void LabeledDataset::validate_svm() const {
  if (train_count < 2) throw ValidationError("dataset: SVM training needs at least two rows");
  for (int i = 0; i < train_count; ++i) {
    if (labels[i] != -1 && labels[i] != 1) {
      throw ValidationError("dataset: SVM labels must be -1 or +1 (row " + std::to_string(i) + ")");
    }
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

LabeledDataset load_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty input");
  const auto header = split_line(line);
  if (header.size() < 2 || header.back() != "y") {
    throw ValidationError("csv: header must end with column 'y'");
  }
  const int h = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < h; ++j) {
    if (header[j] != "f" + std::to_string(j + 1)) {
      throw ValidationError("csv: feature columns must be named f1..fh");
    }
  }
  std::vector<double> values;
  std::vector<int> labels;
  int rows = 0;
  int row_no = 1;
  bool shadow_seen = false;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (static_cast<int>(fields.size()) != h + 1) {
      throw ValidationError("csv: wrong field count at line " + std::to_string(row_no));
    }
    for (int j = 0; j < h; ++j) {
      try {
        std::size_t pos = 0;
        values.push_back(std::stod(fields[j], &pos));
        if (pos != fields[j].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ValidationError("csv: bad number at line " + std::to_string(row_no));
      }
    }
    if (fields[h].empty()) {
      labels.push_back(LabeledDataset::kNoLabel);
      shadow_seen = true;
    } else {
      if (shadow_seen) {
        throw ValidationError("csv: labelled row after shadow rows at line " +
                              std::to_string(row_no));
      }
      try {
        std::size_t pos = 0;
        labels.push_back(std::stoi(fields[h], &pos));
        if (pos != fields[h].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ValidationError("csv: bad label at line " + std::to_string(row_no));
      }
    }
    ++rows;
  }
  LabeledDataset ds;
  ds.patterns.resize(rows, h);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < h; ++j) ds.patterns(i, j) = values[static_cast<std::size_t>(i) * h + j];
  }
  ds.labels = std::move(labels);
  ds.train_count = rows;
  for (int i = 0; i < rows; ++i) {
    if (ds.labels[i] == LabeledDataset::kNoLabel) {
      ds.train_count = i;
      break;
    }
  }
  int max_label = -1;
  for (int i = 0; i < ds.train_count; ++i) max_label = std::max(max_label, ds.labels[i]);
  ds.label_count = max_label + 1;
  return ds;
}

LabeledDataset load_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open " + path);
  return load_csv(in);
}

void save_csv(const LabeledDataset& ds, std::ostream& out) {
  for (int j = 0; j < ds.dims(); ++j) out << "f" << j + 1 << ",";
  out << "y\n";
  std::ostringstream num;
  num.precision(17);
  for (int i = 0; i < ds.rows(); ++i) {
    for (int j = 0; j < ds.dims(); ++j) {
      num.str("");
      num << ds.patterns(i, j);
      out << num.str() << ",";
    }
    if (ds.labels[i] != LabeledDataset::kNoLabel) out << ds.labels[i];
    out << "\n";
  }
}

void append_shadow(LabeledDataset& ds, const LabeledDataset& shadow) {
  if (shadow.dims() != ds.dims()) throw ValidationError("shadow csv: dimension mismatch");
  const int old_rows = ds.rows();
  Eigen::MatrixXd merged(old_rows + shadow.rows(), ds.dims());
  merged.topRows(old_rows) = ds.patterns;
  merged.bottomRows(shadow.rows()) = shadow.patterns;
  ds.patterns = std::move(merged);
  ds.labels.insert(ds.labels.end(), shadow.rows(), LabeledDataset::kNoLabel);
}

LabeledDataset make_synthetic(const SynthConfig& cfg) {
  if (cfg.n < 1 || cfg.h < 1 || cfg.label_count < 2 || cfg.shadow < 0) {
    throw ValidationError("synthetic: bad configuration");
  }
  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabeledDataset ds;
  const int rows = cfg.n + cfg.shadow;
  ds.patterns.resize(rows, cfg.h);
  ds.labels.assign(rows, LabeledDataset::kNoLabel);
  ds.train_count = cfg.n;
  ds.label_count = cfg.svm_labels ? 2 : cfg.label_count;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cfg.h; ++j) ds.patterns(i, j) = unit(rng);
  }
  if (cfg.svm_labels) {
    std::vector<double> w(cfg.h);
    for (auto& v : w) v = unit(rng) - 0.5;
    for (int i = 0; i < cfg.n; ++i) {
      double s = 0.0;
      for (int j = 0; j < cfg.h; ++j) s += w[j] * (ds.patterns(i, j) - 0.5);
      ds.labels[i] = s >= 0.0 ? 1 : -1;
    }
  } else {
    // labels correlated with the first coordinate, plus noise
    std::uniform_int_distribution<int> any(0, cfg.label_count - 1);
    for (int i = 0; i < cfg.n; ++i) {
      if (unit(rng) < 0.25) {
        ds.labels[i] = any(rng);
      } else {
        ds.labels[i] = std::min(cfg.label_count - 1,
                                static_cast<int>(ds.patterns(i, 0) * cfg.label_count));
      }
    }
  }
  return ds;
}

}  // namespace pacbound
