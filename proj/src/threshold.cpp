#include "pacbound/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "pacbound/errors.hpp"

namespace pacbound {

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Streaming weighted mean under a log-sum-exp normalizer.
class GibbsMean {
 public:
  void add(double log_w, double value) {
    if (log_w == -std::numeric_limits<double>::infinity()) return;
    const double log_z = log_add(log_z_, log_w);
    mean_ = mean_ * std::exp(log_z_ - log_z) + value * std::exp(log_w - log_z);
    log_z_ = log_z;
  }
  double mean() const { return mean_; }
  double log_z() const { return log_z_; }

 private:
  double log_z_ = -std::numeric_limits<double>::infinity();
  double mean_ = 0.0;
};

}  // namespace

CellGrid::CellGrid(const LabeledDataset& ds, bool transductive, double cost_cap) {
  ds.validate_threshold();
  h_ = ds.dims();
  label_count_ = ds.label_count;
  train_count_ = ds.train_count;
  transductive_ = transductive;
  if (h_ < 1) throw ValidationError("cell grid: need at least one measurement");
  if (h_ >= 30) throw CapacityError("cell grid: too many measurements");
  cell_count_ = std::size_t{1} << h_;

  labels_.assign(ds.labels.begin(), ds.labels.begin() + train_count_);
  train_patterns_ = ds.patterns.topRows(train_count_);

  const int boundary_rows = transductive_ ? ds.rows() : train_count_;
  double cost = double(cell_count_) * label_count_;
  axes_.resize(h_);
  for (int j = 0; j < h_; ++j) {
    Axis& ax = axes_[j];
    std::set<double> distinct;
    for (int i = 0; i < boundary_rows; ++i) {
      const double v = ds.patterns(i, j);
      if (v > 0.0 && v < 1.0) distinct.insert(v);  // 0 and 1 never split (0,1)
    }
    ax.boundaries.assign(distinct.begin(), distinct.end());
    const std::size_t m = ax.boundaries.size();
    ax.midpoints.resize(m + 1);
    ax.lengths.resize(m + 1);
    double lo = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      const double hi = i < m ? ax.boundaries[i] : 1.0;
      ax.midpoints[i] = 0.5 * (lo + hi);
      ax.lengths[i] = hi - lo;
      lo = hi;
    }
    ax.flip_at.resize(m);
    for (int p = 0; p < train_count_; ++p) {
      const double v = train_patterns_(p, j);
      const auto it = std::lower_bound(ax.boundaries.begin(), ax.boundaries.end(), v);
      if (it != ax.boundaries.end() && *it == v) {
        ax.flip_at[std::size_t(it - ax.boundaries.begin())].push_back(p);
      }
    }
    cost *= double(m + 1);
    if (cost > cost_cap) {
      throw CapacityError("cell grid: enumeration cost exceeds the cap");
    }
  }
  vertex_count_ = 1;
  for (const Axis& ax : axes_) vertex_count_ *= ax.midpoints.size();
  if (transductive_) {
    log_uniform_weight_ = -std::log(double(vertex_count_));
  }
}

double CellGrid::log_weight(const std::vector<int>& pos) const {
  if (transductive_) return log_uniform_weight_;
  double lw = 0.0;
  for (int j = 0; j < h_; ++j) lw += std::log(axes_[j].lengths[pos[j]]);
  return lw;
}

// Odometer sweep over grid vertices (last axis fastest) with incremental
// per-cell counters. The visitor sees, for the current vertex,
//   n[c*Y + y]  training points in cell c with label y,
//   n_tot[c]    training points in cell c,
//   m[c*Y + y], m_tot[c]  same restricted to reference-classifier errors
// (zero-filled when no reference flags are supplied).
template <typename Visitor>
void CellGrid::for_each_vertex(Visitor&& visit) const {
  const int y_count = label_count_;
  std::vector<int> n(cell_count_ * y_count, 0), n_tot(cell_count_, 0);
  std::vector<int> m(cell_count_ * y_count, 0), m_tot(cell_count_, 0);
  std::vector<std::uint32_t> code(train_count_, 0);
  const std::vector<std::uint8_t>* flags = visit.reference_flags();

  for (int p = 0; p < train_count_; ++p) {
    std::uint32_t c = 0;
    for (int j = 0; j < h_; ++j) {
      const Axis& ax = axes_[j];
      const double upper = ax.boundaries.empty() ? 1.0 : ax.boundaries.front();
      if (train_patterns_(p, j) >= upper) c |= std::uint32_t{1} << j;
    }
    code[p] = c;
    n[c * y_count + labels_[p]]++;
    n_tot[c]++;
    if (flags && (*flags)[p]) {
      m[c * y_count + labels_[p]]++;
      m_tot[c]++;
    }
  }

  std::vector<int> pos(h_, 0);
  auto move_point = [&](int p, std::uint32_t to) {
    const std::uint32_t from = code[p];
    const int y = labels_[p];
    n[from * y_count + y]--;
    n_tot[from]--;
    n[to * y_count + y]++;
    n_tot[to]++;
    if (flags && (*flags)[p]) {
      m[from * y_count + y]--;
      m_tot[from]--;
      m[to * y_count + y]++;
      m_tot[to]++;
    }
    code[p] = to;
  };

  std::size_t vertex = 0;
  for (;;) {
    visit(vertex, log_weight(pos), n, n_tot, m, m_tot);
    ++vertex;
    int j = h_ - 1;
    while (j >= 0 && pos[j] + 1 == int(axes_[j].midpoints.size())) {
      // carry: restore every point this axis flipped during its sweep
      for (const auto& list : axes_[j].flip_at) {
        for (int p : list) move_point(p, code[p] | (std::uint32_t{1} << j));
      }
      pos[j] = 0;
      --j;
    }
    if (j < 0) break;
    for (int p : axes_[j].flip_at[pos[j]]) {
      move_point(p, code[p] & ~(std::uint32_t{1} << j));
    }
    pos[j]++;
  }
}

namespace {

// Wraps a lambda so for_each_vertex can also query the reference flags.
template <typename Fn>
struct VertexVisitor {
  Fn fn;
  const std::vector<std::uint8_t>* flags;
  const std::vector<std::uint8_t>* reference_flags() const { return flags; }
  template <typename... Args>
  void operator()(Args&&... args) {
    fn(std::forward<Args>(args)...);
  }
};

template <typename Fn>
VertexVisitor<Fn> make_visitor(Fn fn, const std::vector<std::uint8_t>* flags = nullptr) {
  return {std::move(fn), flags};
}

}  // namespace

double CellGrid::log_partition(double lambda) const {
  if (lambda < 0.0) throw DomainError("log_partition: lambda must be nonnegative");
  const double inv_n = 1.0 / train_count_;
  const double log_y = std::log(double(label_count_));
  double log_z = -std::numeric_limits<double>::infinity();
  auto body = [&](std::size_t, double log_w, const std::vector<int>& n,
                  const std::vector<int>& n_tot, const std::vector<int>&,
                  const std::vector<int>&) {
    double term = log_w;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      int best = 0;
      for (int y = 0; y < label_count_; ++y) best = std::max(best, n[c * label_count_ + y]);
      double sum = 0.0;
      for (int y = 0; y < label_count_; ++y) {
        sum += std::exp(-lambda * inv_n * (best - n[c * label_count_ + y]));
      }
      term += -lambda * inv_n * (n_tot[c] - best) + std::log(sum) - log_y;
    }
    log_z = log_add(log_z, term);
  };
  for_each_vertex(make_visitor(body));
  return log_z;
}

double CellGrid::gibbs_risk(double lambda) const {
  if (lambda < 0.0) throw DomainError("gibbs_risk: lambda must be nonnegative");
  const double inv_n = 1.0 / train_count_;
  const double log_y = std::log(double(label_count_));
  GibbsMean acc;
  auto body = [&](std::size_t, double log_w, const std::vector<int>& n,
                  const std::vector<int>& n_tot, const std::vector<int>&,
                  const std::vector<int>&) {
    double term = log_w;
    double risk = 0.0;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      int best = 0;
      for (int y = 0; y < label_count_; ++y) best = std::max(best, n[c * label_count_ + y]);
      double sum = 0.0;
      double err_sum = 0.0;
      for (int y = 0; y < label_count_; ++y) {
        const int miss = n_tot[c] - n[c * label_count_ + y];
        const double w = std::exp(-lambda * inv_n * (best - n[c * label_count_ + y]));
        sum += w;
        err_sum += w * miss;
      }
      term += -lambda * inv_n * (n_tot[c] - best) + std::log(sum) - log_y;
      risk += err_sum / sum * inv_n;
    }
    acc.add(term, risk);
  };
  for_each_vertex(make_visitor(body));
  return acc.mean();
}

ThetaRef CellGrid::erm() const {
  long long best_err = std::numeric_limits<long long>::max();
  std::size_t best_vertex = 0;
  auto body = [&](std::size_t vertex, double, const std::vector<int>& n,
                  const std::vector<int>& n_tot, const std::vector<int>&,
                  const std::vector<int>&) {
    long long err = 0;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      int best = 0;
      for (int y = 0; y < label_count_; ++y) best = std::max(best, n[c * label_count_ + y]);
      err += n_tot[c] - best;
    }
    if (err < best_err) {
      best_err = err;
      best_vertex = vertex;
    }
  };
  for_each_vertex(make_visitor(body));

  ThetaRef theta;
  theta.vertex = best_vertex;
  theta.thresholds = vertex_thresholds(best_vertex);
  theta.cell_labels.assign(cell_count_, 0);
  std::vector<int> counts(cell_count_ * label_count_, 0);
  for (int p = 0; p < train_count_; ++p) {
    Eigen::VectorXd x = train_patterns_.row(p);
    counts[cell_code(x, theta.thresholds) * label_count_ + labels_[p]]++;
  }
  for (std::size_t c = 0; c < cell_count_; ++c) {
    int best_y = 0;
    for (int y = 1; y < label_count_; ++y) {
      if (counts[c * label_count_ + y] > counts[c * label_count_ + best_y]) best_y = y;
    }
    theta.cell_labels[c] = best_y;
  }
  theta.risk = double(best_err) / train_count_;
  return theta;
}

double CellGrid::log_prior_mass_of_erm() const {
  const long long target = std::llround(erm().risk * train_count_);
  const double log_y = std::log(double(label_count_));
  double mass = -std::numeric_limits<double>::infinity();
  auto body = [&](std::size_t, double log_w, const std::vector<int>& n,
                  const std::vector<int>& n_tot, const std::vector<int>&,
                  const std::vector<int>&) {
    long long err = 0;
    double log_choices = 0.0;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      int best = 0;
      for (int y = 0; y < label_count_; ++y) best = std::max(best, n[c * label_count_ + y]);
      int ties = 0;
      for (int y = 0; y < label_count_; ++y) ties += n[c * label_count_ + y] == best;
      err += n_tot[c] - best;
      log_choices += std::log(double(ties)) - log_y;
    }
    if (err == target) mass = log_add(mass, log_w + log_choices);
  };
  for_each_vertex(make_visitor(body));
  return mass;
}

std::vector<std::uint8_t> CellGrid::error_flags(const ThetaRef& theta) const {
  std::vector<std::uint8_t> flags(train_count_);
  for (int p = 0; p < train_count_; ++p) {
    Eigen::VectorXd x = train_patterns_.row(p);
    const int predicted = theta.cell_labels[cell_code(x, theta.thresholds)];
    flags[p] = predicted != labels_[p];
  }
  return flags;
}

double CellGrid::joint_log_mgf(double lambda, double xi,
                               const std::vector<std::uint8_t>& errors) const {
  if (lambda < 0.0) throw DomainError("joint_log_mgf: lambda must be nonnegative");
  if (int(errors.size()) != train_count_) throw ValidationError("joint_log_mgf: bad flag vector");
  const double inv_n = 1.0 / train_count_;
  const double log_y = std::log(double(label_count_));
  double log_z = -std::numeric_limits<double>::infinity();
  auto body = [&](std::size_t, double log_w, const std::vector<int>& n,
                  const std::vector<int>& n_tot, const std::vector<int>& m,
                  const std::vector<int>& m_tot) {
    double term = log_w;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      double hi = -std::numeric_limits<double>::infinity();
      for (int y = 0; y < label_count_; ++y) {
        const int n_cy = n[c * label_count_ + y];
        const int mbar = 2 * m[c * label_count_ + y] - m_tot[c] + n_tot[c] - n_cy;
        hi = std::max(hi, inv_n * (-lambda * (n_tot[c] - n_cy) + xi * mbar));
      }
      double sum = 0.0;
      for (int y = 0; y < label_count_; ++y) {
        const int n_cy = n[c * label_count_ + y];
        const int mbar = 2 * m[c * label_count_ + y] - m_tot[c] + n_tot[c] - n_cy;
        sum += std::exp(inv_n * (-lambda * (n_tot[c] - n_cy) + xi * mbar) - hi);
      }
      term += hi + std::log(sum) - log_y;
    }
    log_z = log_add(log_z, term);
  };
  for_each_vertex(make_visitor(body, &errors));
  return log_z;
}

double CellGrid::joint_log_mgf(double lambda, double xi, const ThetaRef& theta) const {
  const auto flags = error_flags(theta);
  return joint_log_mgf(lambda, xi, flags);
}

double CellGrid::gibbs_m_prime(double lambda, const std::vector<std::uint8_t>& errors) const {
  if (lambda < 0.0) throw DomainError("gibbs_m_prime: lambda must be nonnegative");
  if (int(errors.size()) != train_count_) throw ValidationError("gibbs_m_prime: bad flag vector");
  const double inv_n = 1.0 / train_count_;
  const double log_y = std::log(double(label_count_));
  GibbsMean acc;
  auto body = [&](std::size_t, double log_w, const std::vector<int>& n,
                  const std::vector<int>& n_tot, const std::vector<int>& m,
                  const std::vector<int>& m_tot) {
    double term = log_w;
    double mval = 0.0;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      int best = 0;
      for (int y = 0; y < label_count_; ++y) best = std::max(best, n[c * label_count_ + y]);
      double sum = 0.0;
      double num = 0.0;
      for (int y = 0; y < label_count_; ++y) {
        const int n_cy = n[c * label_count_ + y];
        const int mbar = 2 * m[c * label_count_ + y] - m_tot[c] + n_tot[c] - n_cy;
        const double w = std::exp(-lambda * inv_n * (best - n_cy));
        sum += w;
        num += w * mbar;
      }
      term += -lambda * inv_n * (n_tot[c] - best) + std::log(sum) - log_y;
      mval += num / sum * inv_n;
    }
    acc.add(term, mval);
  };
  for_each_vertex(make_visitor(body, &errors));
  return acc.mean();
}

double CellGrid::gibbs_m_prime(double lambda, const ThetaRef& theta) const {
  const auto flags = error_flags(theta);
  return gibbs_m_prime(lambda, flags);
}

double CellGrid::kl_between_gibbs(double a, double b) const {
  if (a < 0.0 || b < 0.0) throw DomainError("kl_between_gibbs: temperatures must be nonnegative");
  if (a == b) return 0.0;
  const double kl = (b - a) * gibbs_risk(a) + log_partition(b) - log_partition(a);
  return std::max(kl, 0.0);
}

Eigen::VectorXd CellGrid::predict_proba(double lambda, const Eigen::VectorXd& x) const {
  if (lambda < 0.0) throw DomainError("predict_proba: lambda must be nonnegative");
  if (x.size() != h_) throw ValidationError("predict_proba: pattern dimension mismatch");
  for (int j = 0; j < h_; ++j) {
    if (!(x[j] >= 0.0) || !(x[j] <= 1.0)) {
      throw ValidationError("predict_proba: coordinate outside [0,1]");
    }
  }
  const double inv_n = 1.0 / train_count_;
  const double log_y = std::log(double(label_count_));
  Eigen::VectorXd proba = Eigen::VectorXd::Zero(label_count_);
  double log_z = -std::numeric_limits<double>::infinity();
  std::vector<int> pos(h_, 0);

  auto body = [&](std::size_t vertex, double log_w, const std::vector<int>& n,
                  const std::vector<int>& n_tot, const std::vector<int>&,
                  const std::vector<int>&) {
    // decode the vertex position to locate the query inside each interval
    std::size_t rem = vertex;
    for (int j = h_ - 1; j >= 0; --j) {
      pos[j] = int(rem % axes_[j].midpoints.size());
      rem /= axes_[j].midpoints.size();
    }
    double term = log_w;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      int best = 0;
      for (int y = 0; y < label_count_; ++y) best = std::max(best, n[c * label_count_ + y]);
      double sum = 0.0;
      for (int y = 0; y < label_count_; ++y) {
        sum += std::exp(-lambda * inv_n * (best - n[c * label_count_ + y]));
      }
      term += -lambda * inv_n * (n_tot[c] - best) + std::log(sum) - log_y;
    }

    // fraction of the cell (or its midpoint) answering each code on x
    Eigen::VectorXd cond = Eigen::VectorXd::Zero(label_count_);
    std::vector<std::pair<std::uint32_t, double>> parts{{0u, 1.0}};
    std::vector<std::pair<std::uint32_t, double>> next;
    for (int j = 0; j < h_; ++j) {
      const Axis& ax = axes_[j];
      double frac1;
      if (transductive_) {
        frac1 = x[j] >= ax.midpoints[pos[j]] ? 1.0 : 0.0;
      } else {
        const double lo = pos[j] > 0 ? ax.boundaries[pos[j] - 1] : 0.0;
        const double hi = pos[j] < int(ax.boundaries.size()) ? ax.boundaries[pos[j]] : 1.0;
        frac1 = std::clamp((std::min(hi, x[j]) - lo) / (hi - lo), 0.0, 1.0);
      }
      next.clear();
      for (const auto& [bits, f] : parts) {
        if (frac1 > 0.0) next.emplace_back(bits | (std::uint32_t{1} << j), f * frac1);
        if (frac1 < 1.0) next.emplace_back(bits, f * (1.0 - frac1));
      }
      parts.swap(next);
    }
    for (const auto& [c, frac] : parts) {
      if (n_tot[c] == 0) {
        for (int y = 0; y < label_count_; ++y) cond[y] += frac / label_count_;
        continue;
      }
      int best = 0;
      for (int y = 0; y < label_count_; ++y) best = std::max(best, n[c * label_count_ + y]);
      double sum = 0.0;
      for (int y = 0; y < label_count_; ++y) {
        sum += std::exp(-lambda * inv_n * (best - n[c * label_count_ + y]));
      }
      for (int y = 0; y < label_count_; ++y) {
        cond[y] += frac * std::exp(-lambda * inv_n * (best - n[c * label_count_ + y])) / sum;
      }
    }

    const double log_z_new = log_add(log_z, term);
    proba = proba * std::exp(log_z - log_z_new) + cond * std::exp(term - log_z_new);
    log_z = log_z_new;
  };
  for_each_vertex(make_visitor(body));
  return proba / proba.sum();
}

double CellGrid::empirical_dimension(const std::vector<double>& beta_grid) const {
  const double r_min = erm().risk;
  double d_e = 0.0;
  for (double beta : beta_grid) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw DomainError("empirical_dimension: beta grid must be positive and finite");
    }
    d_e = std::max(d_e, beta * (gibbs_risk(beta) - r_min));
  }
  return d_e;
}

double CellGrid::empirical_margin_fn(double x, const ThetaRef& theta_hat) const {
  if (x < 0.0) throw DomainError("empirical_margin_fn: x must be nonnegative");
  const auto flags = error_flags(theta_hat);
  double best = -std::numeric_limits<double>::infinity();
  auto body = [&](std::size_t, double, const std::vector<int>& n, const std::vector<int>& n_tot,
                  const std::vector<int>& m, const std::vector<int>& m_tot) {
    double total = 0.0;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (n_tot[c] == 0) continue;
      double cell_best = -std::numeric_limits<double>::infinity();
      for (int y = 0; y < label_count_; ++y) {
        const int n_cy = n[c * label_count_ + y];
        const int mbar = 2 * m[c * label_count_ + y] - m_tot[c] + n_tot[c] - n_cy;
        cell_best = std::max(cell_best, mbar - x * (n_tot[c] - n_cy));
      }
      total += cell_best;
    }
    best = std::max(best, total);
  };
  for_each_vertex(make_visitor(body, &flags));
  return best / train_count_ + x * theta_hat.risk;
}

std::size_t CellGrid::cell_code(const Eigen::VectorXd& x, const std::vector<double>& t) const {
  std::size_t c = 0;
  for (int j = 0; j < h_; ++j) {
    if (x[j] >= t[j]) c |= std::size_t{1} << j;
  }
  return c;
}

std::vector<double> CellGrid::vertex_thresholds(std::size_t vertex) const {
  std::vector<double> t(h_);
  for (int j = h_ - 1; j >= 0; --j) {
    const std::size_t size = axes_[j].midpoints.size();
    t[j] = axes_[j].midpoints[vertex % size];
    vertex /= size;
  }
  return t;
}

std::vector<double> default_beta_grid(int n, int points) {
  std::vector<double> grid(points);
  const double lo = std::log(1e-2);
  const double hi = std::log(50.0 * n);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * i / (points - 1));
  }
  return grid;
}

}  // namespace pacbound
