#include "pacbound/svm.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "pacbound/errors.hpp"
#include "pacbound/scalar.hpp"
#include "pacbound/transductive.hpp"

namespace pacbound {

struct Kernel::Node {
  enum class Type { kLinear, kScaledSum, kProduct, kRankOne, kPolynomial, kExponential, kGaussian };
  Type type = Type::kLinear;
  double scale = 0.0;
  std::vector<double> coeffs;
  std::function<double(const Eigen::VectorXd&)> g;
  std::shared_ptr<const Node> left, right;

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    switch (type) {
      case Type::kLinear:
        return x.dot(y);
      case Type::kScaledSum:
        return scale * left->eval(x, y) + right->eval(x, y);
      case Type::kProduct:
        return left->eval(x, y) * right->eval(x, y);
      case Type::kRankOne:
        return g(x) * g(y);
      case Type::kPolynomial: {
        const double k = left->eval(x, y);
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * k + *it;
        return acc;
      }
      case Type::kExponential:
        return std::exp(left->eval(x, y));
      case Type::kGaussian:
        return std::exp(-(x - y).squaredNorm());
    }
    return 0.0;
  }

  std::string describe() const {
    switch (type) {
      case Type::kLinear:
        return "linear";
      case Type::kGaussian:
        return "gaussian";
      case Type::kExponential:
        if (left->type == Type::kLinear) return "exp";
        return "exp(" + left->describe() + ")";
      case Type::kPolynomial: {
        std::ostringstream os;
        os << "poly:";
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
          if (i) os << ",";
          os << coeffs[i];
        }
        if (left->type != Type::kLinear) os << "@" << left->describe();
        return os.str();
      }
      case Type::kScaledSum: {
        std::ostringstream os;
        os << "sum(" << scale << "," << left->describe() << "," << right->describe() << ")";
        return os.str();
      }
      case Type::kProduct:
        return "prod(" + left->describe() + "," + right->describe() + ")";
      case Type::kRankOne:
        return "rank_one";
    }
    return "?";
  }
};

Kernel Kernel::linear() {
  auto node = std::make_shared<Node>();
  node->type = Node::Type::kLinear;
  return Kernel(std::move(node));
}

Kernel Kernel::scaled_sum(double a, const Kernel& k1, const Kernel& k2) {
  if (a < 0.0) throw DomainError("kernel: scale must be nonnegative");
  auto node = std::make_shared<Node>();
  node->type = Node::Type::kScaledSum;
  node->scale = a;
  node->left = k1.node_;
  node->right = k2.node_;
  return Kernel(std::move(node));
}

Kernel Kernel::product(const Kernel& k1, const Kernel& k2) {
  auto node = std::make_shared<Node>();
  node->type = Node::Type::kProduct;
  node->left = k1.node_;
  node->right = k2.node_;
  return Kernel(std::move(node));
}

Kernel Kernel::rank_one(std::function<double(const Eigen::VectorXd&)> g) {
  auto node = std::make_shared<Node>();
  node->type = Node::Type::kRankOne;
  node->g = std::move(g);
  return Kernel(std::move(node));
}

Kernel Kernel::polynomial(std::vector<double> coeffs, const Kernel& base) {
  for (double c : coeffs) {
    if (c < 0.0) throw DomainError("kernel: polynomial coefficients must be nonnegative");
  }
  auto node = std::make_shared<Node>();
  node->type = Node::Type::kPolynomial;
  node->coeffs = std::move(coeffs);
  node->left = base.node_;
  return Kernel(std::move(node));
}

Kernel Kernel::exponential(const Kernel& base) {
  auto node = std::make_shared<Node>();
  node->type = Node::Type::kExponential;
  node->left = base.node_;
  return Kernel(std::move(node));
}

Kernel Kernel::gaussian() {
  auto node = std::make_shared<Node>();
  node->type = Node::Type::kGaussian;
  return Kernel(std::move(node));
}

double Kernel::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return node_->eval(x, y);
}

std::string Kernel::describe() const { return node_->describe(); }

Kernel Kernel::parse(const std::string& spec) {
  if (spec == "linear") return linear();
  if (spec == "gaussian") return gaussian();
  if (spec == "exp") return exponential(linear());
  if (spec.rfind("poly:", 0) == 0) {
    std::vector<double> coeffs;
    std::stringstream ss(spec.substr(5));
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        coeffs.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ValidationError("kernel: bad polynomial coefficient '" + field + "'");
      }
    }
    if (coeffs.empty()) throw ValidationError("kernel: empty polynomial");
    return polynomial(std::move(coeffs), linear());
  }
  throw ValidationError("kernel: unsupported spec '" + spec + "'");
}

Eigen::MatrixXd gram(const Kernel& kernel, const Eigen::MatrixXd& points) {
  const Eigen::Index m = points.rows();
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd xi = points.row(i);
    for (Eigen::Index j = i; j < m; ++j) {
      g(i, j) = g(j, i) = kernel(xi, points.row(j));
    }
  }
  return g;
}

DualSolution solve_box(const Eigen::MatrixXd& gram_matrix, const std::vector<int>& y, double c,
                       double tol, long long max_steps, const Eigen::VectorXd& warm_start) {
  const int m = static_cast<int>(gram_matrix.rows());
  if (static_cast<int>(y.size()) != m) throw ValidationError("solve_box: label count mismatch");
  if (!(c > 0.0)) throw ValidationError("solve_box: C must be positive");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw ValidationError("solve_box: labels must be -1 or +1");
  }
  if (!pos || !neg) throw ValidationError("solve_box: both classes must be present");

  // minimize 0.5 a'Qa - sum(a) with Q_ij = y_i y_j K_ij; G is its gradient
  Eigen::MatrixXd q(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) q(i, j) = y[i] * y[j] * gram_matrix(i, j);
  }
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(m, -1.0);
  if (warm_start.size() == m) {
    alpha = warm_start.cwiseMax(0.0).cwiseMin(c);
    grad = q * alpha - Eigen::VectorXd::Ones(m);
  }

  DualSolution sol;
  sol.box_c = c;
  const double eps_a = 1e-12 * std::max(1.0, c);
  long long steps = 0;
  double violation = std::numeric_limits<double>::infinity();
  while (steps < max_steps) {
    // maximal violating pair over I_up / I_low
    int up = -1, low = -1;
    double up_val = -std::numeric_limits<double>::infinity();
    double low_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double v = -y[i] * grad[i];
      const bool in_up = y[i] == 1 ? alpha[i] < c - eps_a : alpha[i] > eps_a;
      const bool in_low = y[i] == 1 ? alpha[i] > eps_a : alpha[i] < c - eps_a;
      if (in_up && v > up_val) {
        up_val = v;
        up = i;
      }
      if (in_low && v < low_val) {
        low_val = v;
        low = i;
      }
    }
    violation = up < 0 || low < 0 ? 0.0 : up_val - low_val;
    if (violation <= tol) {
      sol.converged = true;
      break;
    }
    // two-variable step along d = y_up e_up - y_low e_low
    const double curv =
        std::max(gram_matrix(up, up) + gram_matrix(low, low) - 2.0 * gram_matrix(up, low), 1e-12);
    double t = violation / curv;
    const double t_up = y[up] == 1 ? c - alpha[up] : alpha[up];
    const double t_low = y[low] == 1 ? alpha[low] : c - alpha[low];
    t = std::min({t, t_up, t_low});
    alpha[up] += y[up] * t;
    alpha[low] -= y[low] * t;
    grad += q.col(up) * (y[up] * t) - q.col(low) * (y[low] * t);
    ++steps;
  }
  sol.kkt_residual = std::max(violation, 0.0);
  sol.alpha = alpha;
  sol.norm_sq = alpha.dot(q * alpha);
  sol.objective = alpha.sum() - 0.5 * sol.norm_sq;

  double bias_sum = 0.0;
  int interior = 0;
  for (int i = 0; i < m; ++i) {
    if (alpha[i] > eps_a) sol.support.push_back(i);
    if (alpha[i] > 1e-8 * c && alpha[i] < c * (1.0 - 1e-8)) {
      bias_sum += y[i] * grad[i];  // f_i - y_i
      ++interior;
    }
  }
  if (interior > 0) {
    sol.bias = bias_sum / interior;
  } else {
    // sup construction from the box theorem proof
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (alpha[i] > eps_a && y[i] == 1) best = std::max(best, grad[i]);
    }
    sol.bias = std::isfinite(best) ? best : 0.0;
  }
  return sol;
}

CanonicalSolution solve_canonical(const Eigen::MatrixXd& gram_matrix, const std::vector<int>& y,
                                  double tol) {
  const int m = static_cast<int>(gram_matrix.rows());
  constexpr double kCap = 1e8;
  double c = 1.0;
  DualSolution dual;
  Eigen::VectorXd warm;
  for (;;) {
    dual = solve_box(gram_matrix, y, c, tol, 20'000'000, warm);
    bool bounded = false;
    for (int i = 0; i < m; ++i) {
      if (dual.alpha[i] >= c * (1.0 - 1e-9)) bounded = true;
    }
    if (dual.converged && !bounded) break;
    if (c >= kCap) throw NonSeparableError("solve_canonical: data not separable by this kernel");
    warm = dual.alpha;
    c *= 2.0;
  }

  CanonicalSolution sol;
  sol.dual = dual;
  sol.dual.box_c = std::numeric_limits<double>::infinity();
  // canonical dual F = |w|^2 - 2 sum(alpha) should equal -|w|^2 at the optimum
  sol.duality_gap = std::abs(2.0 * (dual.norm_sq - dual.alpha.sum()));
  sol.margin.norm_sq = dual.norm_sq;
  sol.margin.margin = 1.0 / std::sqrt(dual.norm_sq);
  sol.margin.radius_sq = radius_sq_from_gram(gram_matrix);
  sol.margin.h_margin =
      margin_to_h(sol.margin.margin, std::sqrt(sol.margin.radius_sq), m);

  // canonical bias: midpoint of the two class scores
  Eigen::VectorXd score = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) score[i] += dual.alpha[j] * y[j] * gram_matrix(j, i);
  }
  double neg_max = -std::numeric_limits<double>::infinity();
  double pos_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    if (y[i] == 1) pos_min = std::min(pos_min, score[i]);
    else neg_max = std::max(neg_max, score[i]);
  }
  sol.dual.bias = 0.5 * (neg_max + pos_min);
  return sol;
}

double decision(const SvmModel& model, const Eigen::VectorXd& x) {
  double s = -model.bias;
  for (Eigen::Index i = 0; i < model.support_points.rows(); ++i) {
    s += model.coeffs[i] * model.kernel(model.support_points.row(i), x);
  }
  return s;
}

int classify(const SvmModel& model, const Eigen::VectorXd& x) {
  return decision(model, x) >= 0.0 ? 1 : -1;
}

double radius_sq_from_gram(const Eigen::MatrixXd& g) {
  const Eigen::Index m = g.rows();
  if (m == 0) throw ValidationError("radius_sq: empty point set");
  const double mean_all = g.sum() / (double(m) * double(m));
  double best = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    best = std::max(best, g(i, i) - 2.0 * g.row(i).sum() / m + mean_all);
  }
  return std::max(best, 0.0);
}

double radius_sq(const Eigen::MatrixXd& points, const Kernel& kernel) {
  return radius_sq_from_gram(gram(kernel, points));
}

double margin_gamma(int h) {
  if (h < 1) throw DomainError("margin_gamma: h must be >= 1");
  if (h == 1) return std::numeric_limits<double>::infinity();
  if (h % 2 == 0) return 1.0 / std::sqrt(h - 1.0);
  const double k = (h - 1.0) / 2.0;  // h = 2k+1
  return 1.0 / std::sqrt(2.0 * k * (1.0 - 1.0 / (double(h) * h)));
}

int margin_to_h(double margin, double radius, int cap) {
  if (!(margin > 0.0) || !(radius > 0.0)) {
    throw DomainError("margin_to_h: margin and radius must be positive");
  }
  for (int h = 1; h <= cap; ++h) {
    if (radius * margin_gamma(h) <= margin) return h;
  }
  return cap;
}

VarianceMarginReport variance_margin_check(const Eigen::MatrixXd& points, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("variance_margin_check: gamma must be positive");
  const Eigen::Index m = points.rows();
  if (m < 2) throw ValidationError("variance_margin_check: need at least two points");
  const Eigen::RowVectorXd mean = points.colwise().mean();
  VarianceMarginReport rep;
  rep.variance = (points.rowwise() - mean).rowwise().squaredNorm().sum() / double(m);
  rep.ratio = rep.variance / (gamma * gamma);
  const double n = double(m);
  rep.required = m % 2 == 0 ? n - 1.0 : (n - 1.0) * (n * n - 1.0) / (n * n);
  rep.slack = rep.ratio - rep.required;
  rep.ok = rep.slack >= -1e-9;
  return rep;
}

FatShatteringBound fat_shattering_log_m(int n, int b, int h) {
  if (b < 3) throw DomainError("fat_shattering_log_m: need b >= 3");
  if (h < 1 || h > n) throw DomainError("fat_shattering_log_m: need 1 <= h <= n");
  // log sum_{i=1..h} C(n,i)(b-2)^i, accumulated in the log domain
  double log_sum = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= h; ++i) {
    const double term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                        i * std::log(double(b - 2));
    const double hi = std::max(log_sum, term);
    log_sum = hi + std::log1p(std::exp(std::min(log_sum, term) - hi));
  }
  const double front = std::log(double(b - 1) * double(b - 2) * n);
  FatShatteringBound out;
  out.exact = front * (log_sum / std::log(2.0) + 1.0) + std::log(2.0);
  out.relaxed =
      front * (h * (std::log(double(b - 2) * n / h) + 1.0) / std::log(2.0) + 1.0) + std::log(2.0);
  return out;
}

BoundReport svm_transductive_bound(int n, int k, double r1, int h, double epsilon) {
  if (h < 1) throw ValidationError("svm_transductive_bound: h must be >= 1");
  const double d = vc_trace_log(h, (long long)(k + 1) * n) + std::log(double(h) * (h + 1.0));
  BoundReport rep = trans_bound(n, k, r1, d, epsilon);
  rep.method = "svm_trans";
  rep.inputs["h"] = h;
  return rep;
}

BoundReport inductive_margin_bound(int n, int k, const std::vector<int>& margin_counts,
                                   double epsilon, double log_nu_rmax) {
  if (n < 1 || k < 1) throw ValidationError("inductive_margin_bound: bad N or k");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw ValidationError("inductive_margin_bound: bad epsilon");
  }
  if (margin_counts.empty()) throw ValidationError("inductive_margin_bound: no margin counts");
  BoundReport rep;
  rep.method = "inductive_margin";
  rep.inputs = {{"n", double(n)}, {"k", double(k)}, {"epsilon", epsilon}};
  double best = std::numeric_limits<double>::infinity();
  int best_h = 0;
  double best_lambda = 0.0;
  for (int h = 1; h <= static_cast<int>(margin_counts.size()); ++h) {
    const int cnt = margin_counts[h - 1];
    if (cnt < 0 || cnt > n) throw ValidationError("inductive_margin_bound: bad margin count");
    const double dh = std::log(20.0 * (k + 1.0) * n) *
                          (h * std::log(4.0 * std::exp(1.0) * (k + 1.0) * n / h) / std::log(2.0) +
                           1.0) +
                      std::log(2.0 * h * (h + 1.0) / epsilon) + log_nu_rmax;
    auto obj = [&](double lam) {
      return (k + 1.0) / k * -std::expm1(-lam * cnt / (double(n) * n) - dh / n) /
                 -std::expm1(-lam / n) -
             double(cnt) / (double(k) * n);
    };
    const ScalarMinimum m = minimize_log_grid(obj, 1e-2, 20.0 * n);
    if (m.value < best) {
      best = m.value;
      best_h = h;
      best_lambda = m.x;
    }
  }
  rep.bound = best;
  rep.lambda_opt = best_lambda;
  rep.extras["h_opt"] = best_h;
  rep.finalize();
  return rep;
}

std::vector<int> margin_violation_counts(const SvmModel& model, const Eigen::MatrixXd& points,
                                         const std::vector<int>& y, double radius, int h_max) {
  std::vector<int> counts(h_max, 0);
  std::vector<double> scores(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    scores[i] = decision(model, points.row(i)) * y[i];
  }
  for (int h = 1; h <= h_max; ++h) {
    const double level = 4.0 * radius * margin_gamma(h);
    int cnt = 0;
    for (double s : scores) cnt += s <= level;
    counts[h - 1] = cnt;
  }
  return counts;
}

}  // namespace pacbound
