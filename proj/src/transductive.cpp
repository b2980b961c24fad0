#include "pacbound/transductive.hpp"

#include <cmath>
#include <limits>

#include "pacbound/errors.hpp"
#include "pacbound/inductive.hpp"
#include "pacbound/scalar.hpp"

namespace pacbound {

namespace {

constexpr double kLambdaLo = 1e-2;

double lambda_hi(int n) { return 20.0 * n; }

double default_complexity(int h, int n, int k) { return vc_trace_log(h, (long long)(k + 1) * n); }

std::vector<double> default_etas(long long n) {
  return {1.0 / std::log(10.0 * n), 1.0 / (10.0 * n)};
}

}  // namespace

double vc_trace_log(int h, long long m) {
  if (h < 1 || h > m) throw DomainError("vc_trace_log: need 1 <= h <= m");
  return h * (std::log(double(m) / h) + 1.0);
}

double compression_log(int j, long long m) {
  if (j < 1 || j > m) throw DomainError("compression_log: need 1 <= j <= m");
  return std::log(double(j) * (j + 1.0)) + j * (std::log(double(m) / j) + 1.0);
}

BoundReport trans_bound(int n, int k, double r1, double d, double epsilon) {
  check_query(n, r1, epsilon);
  if (k < 1) throw ValidationError("trans_bound: k must be >= 1");
  if (d < 0.0) throw ValidationError("trans_bound: complexity must be nonnegative");
  BoundReport rep;
  rep.method = "trans";
  rep.inputs = {{"n", double(n)}, {"k", double(k)}, {"r1", r1}, {"d", d}, {"epsilon", epsilon}};
  rep.k_opt = k;
  const double load = (d - std::log(epsilon)) / n;
  auto obj = [&](double lam) {
    return (k + 1.0) / k * -std::expm1(-lam * r1 / n - load) / -std::expm1(-lam / n) - r1 / k;
  };
  const ScalarMinimum m = minimize_log_grid(obj, kLambdaLo, lambda_hi(n));
  rep.bound = m.value;
  rep.lambda_opt = m.x;
  rep.finalize();
  return rep;
}

BoundReport trans_bound_k1(int n, double r1, double d, double epsilon) {
  check_query(n, r1, epsilon);
  if (d < 0.0) throw ValidationError("trans_bound_k1: complexity must be nonnegative");
  BoundReport rep;
  rep.method = "trans_k1";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"d", d}, {"epsilon", epsilon}};
  auto obj = [&](double lam) {
    const double den = 1.0 - a_of_lambda(n, lam);
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * (r1 + (d - std::log(epsilon)) / lam) / den - r1;
  };
  const ScalarMinimum m = minimize_log_grid(obj, kLambdaLo, lambda_hi(n));
  if (!std::isfinite(m.value)) throw InfeasibleError("trans_bound_k1: no feasible lambda");
  rep.bound = m.value;
  rep.lambda_opt = m.x;
  rep.finalize();
  return rep;
}

BoundReport trans_bound_k1_exch(int n, double r1, double d, double epsilon) {
  check_query(n, r1, epsilon);
  if (d < 0.0) throw ValidationError("trans_bound_k1_exch: complexity must be nonnegative");
  BoundReport rep;
  rep.method = "trans_k1_exch";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"d", d}, {"epsilon", epsilon}};
  auto obj = [&](double lam) {
    const double a = a_of_lambda(n, lam);
    const double den = 1.0 - a * (1.0 - 2.0 * r1);
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return (r1 * (1.0 + a) + 2.0 * (d - std::log(epsilon)) / lam) / den;
  };
  const ScalarMinimum m = minimize_log_grid(obj, kLambdaLo, lambda_hi(n));
  if (!std::isfinite(m.value)) throw InfeasibleError("trans_bound_k1_exch: no feasible lambda");
  rep.bound = m.value;
  rep.lambda_opt = m.x;
  rep.finalize();
  return rep;
}

double eta_correction(long long n, double epsilon, const std::vector<double>& etas) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ValidationError("eta_correction: bad epsilon");
  std::vector<double> e = etas.empty() ? default_etas(n) : etas;
  const std::size_t j_count = e.size();
  double prev = 1.0;
  for (double v : e) {
    if (!(v > 0.0) || !(v < prev)) {
      throw DomainError("eta_correction: sequence must decrease strictly inside (0,1)");
    }
    prev = v;
  }
  double sum = std::log(double(j_count)) - std::log(e.front());
  for (std::size_t j = 0; j + 1 < j_count; ++j) sum += e[j] * std::log(e[j] / e[j + 1]);
  sum += e.back() * std::log(epsilon * e.back() / double(j_count));
  return sum;
}

BoundReport inductive_main_bound(int n, double r1, int h, double epsilon, const TransConfig& cfg) {
  check_query(n, r1, epsilon);
  if (h < 1) throw ValidationError("inductive_main_bound: h must be >= 1");
  BoundReport rep;
  rep.method = "inductive_main";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"h", double(h)}, {"epsilon", epsilon}};
  const std::vector<double> etas = cfg.etas.empty() ? default_etas(n) : cfg.etas;
  const double offset = eta_correction(n, epsilon, etas);
  const double eta_j = etas.back();
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  double best_lambda = 0.0;
  for (int k = 1; k <= cfg.k_max; ++k) {
    const double dk = (cfg.complexity ? cfg.complexity(k) : default_complexity(h, n, k)) -
                      std::log(epsilon) + offset + std::log(double(k) * (k + 1.0));
    auto obj = [&](double lam) {
      return (k + 1.0) / k * phi_inv(lam / n, r1 + eta_j * (1.0 - r1) + dk / lam) - r1 / k;
    };
    const ScalarMinimum m = minimize_log_grid(obj, kLambdaLo, lambda_hi(n));
    if (m.value < best) {
      best = m.value;
      best_k = k;
      best_lambda = m.x;
    }
  }
  rep.bound = best;
  rep.k_opt = best_k;
  rep.lambda_opt = best_lambda;
  rep.finalize();
  return rep;
}

BoundReport inductive_grid_bound(int n, double r1, int h, double epsilon, double alpha,
                                 const TransConfig& cfg) {
  check_query(n, r1, epsilon);
  if (h < 1) throw ValidationError("inductive_grid_bound: h must be >= 1");
  if (!(alpha > 1.0)) throw ValidationError("inductive_grid_bound: alpha must exceed 1");
  BoundReport rep;
  rep.method = "inductive_grid";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"h", double(h)}, {"epsilon", epsilon},
                {"alpha", alpha}};
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  double best_lambda = 0.0;
  for (int k = 1; k <= cfg.k_max; ++k) {
    const double dk =
        (cfg.complexity ? cfg.complexity(k) : default_complexity(h, n, k)) - std::log(epsilon);
    for (int j = 1;; ++j) {
      const double lam = std::pow(alpha, j);
      const double pen = std::log(double(k) * (k + 1.0) * double(j) * (j + 1.0));
      const double v = -std::expm1(-lam * r1 / n - (dk + pen) / n) /
                           (k / (k + 1.0) * -std::expm1(-lam / n)) -
                       r1 / k;
      if (v < best) {
        best = v;
        best_k = k;
        best_lambda = lam;
      }
      if (lam > 100.0 * n || j > 5000) break;
    }
  }
  rep.bound = best;
  rep.k_opt = best_k;
  rep.lambda_opt = best_lambda;
  rep.finalize();
  return rep;
}

BoundReport inductive_gaussian(int n, double r1, int h, double epsilon, const TransConfig& cfg) {
  check_query(n, r1, epsilon);
  if (h < 1) throw ValidationError("inductive_gaussian: h must be >= 1");
  BoundReport rep;
  rep.method = "inductive_gaussian";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"h", double(h)}, {"epsilon", epsilon}};
  const double offset = eta_correction(n, epsilon, cfg.etas);
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 1; k <= cfg.k_max; ++k) {
    const double dk = (cfg.complexity ? cfg.complexity(k) : default_complexity(h, n, k)) -
                      std::log(epsilon) + std::log(double(k) * (k + 1.0)) + offset;
    const double v =
        (k + 1.0) / k * sqrt_risk_bound(n, r1 + 1.0 / (10.0 * n), dk).bound - r1 / k;
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  rep.bound = best;
  rep.k_opt = best_k;
  rep.finalize();
  return rep;
}

namespace {

double d_second_k1(int n, int h, double epsilon) {
  return vc_trace_log(h, 2LL * n) - std::log(epsilon) + eta_correction(n, epsilon);
}

}  // namespace

BoundReport iid_k1_bound(int n, double r1, int h, double epsilon) {
  check_query(n, r1, epsilon);
  if (h < 1) throw ValidationError("iid_k1_bound: h must be >= 1");
  BoundReport rep;
  rep.method = "iid_k1";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"h", double(h)}, {"epsilon", epsilon}};
  const double dk = d_second_k1(n, h, epsilon);
  const double eta_j = 1.0 / (10.0 * n);
  auto obj = [&](double lam) {
    const double a = a_of_lambda(n, lam);
    const double den = 1.0 - a * (1.0 - 2.0 * r1);
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return ((1.0 + a) * r1 + 2.0 * dk / lam + 2.0 * eta_j * (1.0 - r1)) / den;
  };
  const ScalarMinimum m = minimize_log_grid(obj, kLambdaLo, lambda_hi(n));
  if (!std::isfinite(m.value)) throw InfeasibleError("iid_k1_bound: no feasible lambda");
  rep.bound = m.value;
  rep.lambda_opt = m.x;
  rep.finalize();
  return rep;
}

BoundReport iid_k1_gaussian(int n, double r1, int h, double epsilon) {
  check_query(n, r1, epsilon);
  if (h < 1) throw ValidationError("iid_k1_gaussian: h must be >= 1");
  BoundReport rep;
  rep.method = "iid_k1_gaussian";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"h", double(h)}, {"epsilon", epsilon}};
  const double dk = d_second_k1(n, h, epsilon);
  const double eta_j = 1.0 / (10.0 * n);
  const double flip = 1.0 - 2.0 * r1;
  rep.bound = r1 + dk / n * flip + 2.0 * eta_j +
              std::sqrt(4.0 * dk * (1.0 - r1) * r1 / n + dk * dk / (double(n) * n) * flip * flip +
                        4.0 * dk / n * flip * eta_j);
  rep.finalize();
  return rep;
}

BoundReport vapnik_baseline(int n, double r1, int h, double epsilon) {
  check_query(n, r1, epsilon);
  if (h < 1) throw ValidationError("vapnik_baseline: h must be >= 1");
  BoundReport rep;
  rep.method = "vapnik_baseline";
  rep.inputs = {{"n", double(n)}, {"r1", r1}, {"h", double(h)}, {"epsilon", epsilon}};
  const double dv = vc_trace_log(h, 2LL * n) + std::log(4.0 / epsilon);
  rep.bound = r1 + 2.0 * dv / n + std::sqrt(4.0 * dv * r1 / n + 4.0 * dv * dv / (double(n) * n));
  rep.extras["d_v"] = dv;
  rep.finalize();
  return rep;
}

}  // namespace pacbound
