#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "pacbound/report.hpp"

namespace pacbound {

// Kernel algebra, dual solvers for the canonical hyperplane and the box
// constraint, margin-based capacity measures and the margin bounds built on
// them. Points are dense Eigen row vectors; the Gram matrix is the only
// representation the solvers touch.

/// Positive symmetric kernel assembled from combinators that each preserve
/// positive semi-definiteness.
class Kernel {
 public:
  static Kernel linear();
  static Kernel scaled_sum(double a, const Kernel& k1, const Kernel& k2);
  static Kernel product(const Kernel& k1, const Kernel& k2);
  static Kernel rank_one(std::function<double(const Eigen::VectorXd&)> g);
  static Kernel polynomial(std::vector<double> coeffs, const Kernel& base);  // coeffs >= 0
  static Kernel exponential(const Kernel& base);
  static Kernel gaussian();  // exp(-|x - x'|^2)

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  /// Compact spec string: "linear", "gaussian", "poly:c0,c1,..." etc.
  std::string describe() const;
  /// Parses the spec strings produced by describe (rank_one excluded).
  static Kernel parse(const std::string& spec);

 private:
  struct Node;
  explicit Kernel(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Symmetric matrix of kernel evaluations over the rows of `points`.
Eigen::MatrixXd gram(const Kernel& kernel, const Eigen::MatrixXd& points);

struct DualSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  double box_c = 0.0;  // +inf marks the canonical (escalated) problem
  double objective = 0.0;     // box dual: sum(alpha) - 0.5 |w|^2
  double kkt_residual = 0.0;  // max violation at exit
  bool converged = false;
  std::vector<int> support;  // indices with alpha > 0
  double norm_sq = 0.0;      // |w|^2 = alpha' Q alpha
};

/// Maximal-violating-pair coordinate ascent on the box dual. Never throws on
/// slow convergence: the best iterate comes back flagged non-converged.
/// `warm_start` (when sized) seeds the iteration; it must satisfy the equality
/// constraint and fit the box.
DualSolution solve_box(const Eigen::MatrixXd& gram_matrix, const std::vector<int>& y, double c,
                       double tol = 1e-8, long long max_steps = 20'000'000,
                       const Eigen::VectorXd& warm_start = {});

struct MarginReport {
  double margin = 0.0;   // 1 / |w|
  double norm_sq = 0.0;  // |w|^2
  int h_margin = 0;      // smallest h with radius gamma_h <= margin
  double radius_sq = 0.0;
};

struct CanonicalSolution {
  DualSolution dual;  // alpha scaled to the canonical normalization
  MarginReport margin;
  double duality_gap = 0.0;  // |F(alpha) + |w|^2| with F the canonical dual
};

/// Canonical hyperplane via box solves with doubling C; throws
/// NonSeparableError when alphas stay saturated at C = 1e8.
CanonicalSolution solve_canonical(const Eigen::MatrixXd& gram_matrix, const std::vector<int>& y,
                                  double tol = 1e-8);

/// Trained machine: kernel + support expansion.
struct SvmModel {
  Kernel kernel = Kernel::linear();
  Eigen::MatrixXd support_points;
  Eigen::VectorXd coeffs;  // alpha_i y_i per support point
  double bias = 0.0;
  double box_c = 0.0;
};

double decision(const SvmModel& model, const Eigen::VectorXd& x);
int classify(const SvmModel& model, const Eigen::VectorXd& x);

/// Centered-radius bound max_i K_ii - (2/m) sum_j K_ij + (1/m^2) sum K.
double radius_sq(const Eigen::MatrixXd& points, const Kernel& kernel);
double radius_sq_from_gram(const Eigen::MatrixXd& gram_matrix);

/// gamma_n from the parity formulas; gamma_1 is +inf.
double margin_gamma(int h);

/// min{ h >= 1 : radius gamma_h <= margin }, capped at `cap`.
int margin_to_h(double margin, double radius, int cap);

struct VarianceMarginReport {
  double variance = 0.0;
  double ratio = 0.0;     // Var / gamma^2
  double required = 0.0;  // n-1 or (n-1)(n^2-1)/n^2
  double slack = 0.0;
  bool ok = false;
};

/// Checks Var(x)/gamma^2 against the shattering lower bound for n points.
VarianceMarginReport variance_margin_check(const Eigen::MatrixXd& points, double gamma);

struct FatShatteringBound {
  double exact = 0.0;   // with the exact binomial sum
  double relaxed = 0.0; // with the h log((b-2)n/h) + 1 closed form
};

/// log M bound from the fat-shattering dimension h on n shapes, b >= 3 levels.
FatShatteringBound fat_shattering_log_m(int n, int b, int h);

/// Transductive bound for machines in the margin class R_h.
BoundReport svm_transductive_bound(int n, int k, double r1, int h, double epsilon);

/// Margin-quantile bound: margin_counts[h-1] counts training points with
/// g(X) Y <= 4 R gamma_h. `log_nu_rmax` adds the clipped-radius union penalty.
BoundReport inductive_margin_bound(int n, int k, const std::vector<int>& margin_counts,
                                   double epsilon, double log_nu_rmax = 0.0);

/// The quantile counts for a trained model on its training data.
std::vector<int> margin_violation_counts(const SvmModel& model, const Eigen::MatrixXd& points,
                                         const std::vector<int>& y, double radius, int h_max);

}  // namespace pacbound
