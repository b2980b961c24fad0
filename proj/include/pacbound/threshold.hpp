#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "pacbound/dataset.hpp"
#include "pacbound/errors.hpp"

namespace pacbound {

// Exact Gibbs-posterior computations on the thresholding model. A classifier
// is a pair (t, a): a threshold vector t in (0,1)^h and a response map a from
// cell codes {0,1}^h to labels. The prior is Lebesgue x uniform; grid vertices
// enumerate the finitely many threshold cells, and every Gibbs quantity is an
// exact sum over vertices with per-cell factorized label sums.

/// A concrete classifier (t, a) used as the reference point of m' expansions.
struct ThetaRef {
  std::vector<double> thresholds;   // h midpoint coordinates
  std::vector<int> cell_labels;     // 2^h response map
  std::size_t vertex = 0;           // grid vertex index of t
  double risk = 0.0;                // its training error rate
};

class CellGrid {
 public:
  /// Builds the cell decomposition from the training values of `ds`
  /// (plus shadow values when `transductive`). Throws CapacityError when
  /// |T| 2^h |Y| exceeds `cost_cap`.
  CellGrid(const LabeledDataset& ds, bool transductive = false, double cost_cap = 1e8);

  int dims() const { return h_; }
  int label_count() const { return label_count_; }
  int train_count() const { return train_count_; }
  bool transductive() const { return transductive_; }
  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t cell_count() const { return cell_count_; }

  /// log pi[exp(-lambda r)]; 0 at lambda = 0.
  double log_partition(double lambda) const;

  /// Exact Gibbs mean of the empirical error, -d/dlambda log_partition.
  double gibbs_risk(double lambda) const;

  /// Empirical risk minimizer: per-cell majority labels, ties broken by the
  /// smallest vertex index then the smallest label id.
  ThetaRef erm() const;

  /// log prior mass of the atoms achieving the minimal empirical error.
  double log_prior_mass_of_erm() const;

  /// log pi[exp(-lambda r + xi m'(. , theta))].
  double joint_log_mgf(double lambda, double xi, const ThetaRef& theta) const;

  /// Exact Gibbs mean of m'(. , theta) under pi_exp(-lambda r).
  double gibbs_m_prime(double lambda, const ThetaRef& theta) const;

  /// Same, with the reference classifier given by its per-point error flags.
  double gibbs_m_prime(double lambda, const std::vector<std::uint8_t>& errors) const;
  double joint_log_mgf(double lambda, double xi, const std::vector<std::uint8_t>& errors) const;

  /// K(pi_a, pi_b) between two Gibbs posteriors of the same model.
  double kl_between_gibbs(double a, double b) const;

  /// Label distribution for a new pattern under pi_exp(-lambda r).
  Eigen::VectorXd predict_proba(double lambda, const Eigen::VectorXd& x) const;

  /// d_e = max over the beta grid of beta (gibbs_risk(beta) - r_min).
  double empirical_dimension(const std::vector<double>& beta_grid) const;

  /// phibar(x) = sup_theta m'(theta, theta_hat) - x [r(theta) - r(theta_hat)].
  double empirical_margin_fn(double x, const ThetaRef& theta_hat) const;

  /// Training-error flags of a concrete classifier on the training rows.
  std::vector<std::uint8_t> error_flags(const ThetaRef& theta) const;

  /// Response cell code of pattern x at threshold vector t.
  std::size_t cell_code(const Eigen::VectorXd& x, const std::vector<double>& t) const;

  /// Midpoint coordinates of a vertex (odometer order).
  std::vector<double> vertex_thresholds(std::size_t vertex) const;

 private:
  struct Axis {
    std::vector<double> boundaries;  // strictly inside (0,1), sorted
    std::vector<double> midpoints;   // boundaries.size() + 1 entries
    std::vector<double> lengths;     // interval lengths, sum to 1
    // training point indices sorted by coordinate value; flip_at[i] lists the
    // points whose response bit drops when the axis moves past interval i.
    std::vector<std::vector<int>> flip_at;
  };

  template <typename Visitor>
  void for_each_vertex(Visitor&& visit) const;  // defined in threshold.cpp

  double log_weight(const std::vector<int>& pos) const;

  int h_ = 0;
  int label_count_ = 0;
  int train_count_ = 0;
  bool transductive_ = false;
  std::size_t vertex_count_ = 0;
  std::size_t cell_count_ = 0;  // 2^h
  std::vector<Axis> axes_;
  std::vector<int> labels_;          // training labels
  Eigen::MatrixXd train_patterns_;   // training rows only
  double log_uniform_weight_ = 0.0;  // -log |T| in the transductive case
};

/// A (model, inverse-temperature) pair addressing one Gibbs posterior.
/// The log-partition value and the risk are computed once and cached; the
/// handle must not outlive its grid.
class GibbsHandle {
 public:
  GibbsHandle(const CellGrid& grid, double lambda) : grid_(&grid), lambda_(lambda) {
    if (lambda < 0.0) throw DomainError("gibbs handle: lambda must be nonnegative");
  }
  const CellGrid& grid() const { return *grid_; }
  double lambda() const { return lambda_; }
  double log_partition() const {
    if (log_z_ < 0.5e300) return log_z_;
    return log_z_ = grid_->log_partition(lambda_);
  }
  double risk() const {
    if (risk_ < 0.5e300) return risk_;
    return risk_ = grid_->gibbs_risk(lambda_);
  }

 private:
  const CellGrid* grid_;
  double lambda_;
  mutable double log_z_ = 1e300;  // sentinel: not yet computed
  mutable double risk_ = 1e300;
};

/// Default beta grid for empirical_dimension: log-spaced on [1e-2, 50 N].
std::vector<double> default_beta_grid(int n, int points = 200);

}  // namespace pacbound
