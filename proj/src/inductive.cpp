#include "pacbound/inductive.hpp"

#include <cmath>
#include <limits>

#include "pacbound/errors.hpp"
#include "pacbound/scalar.hpp"

namespace pacbound {

namespace {

constexpr double kLambdaLo = 1e-2;

double lambda_hi(int n) { return 20.0 * n; }

}  // namespace

void check_query(int n, double r, double epsilon) {
  if (n < 1) throw ValidationError("bound query: N must be >= 1");
  if (r < 0.0 || r > 1.0) throw ValidationError("bound query: rate outside [0,1]");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw ValidationError("bound query: epsilon must lie strictly inside (0,1)");
  }
}

BoundReport single_rule_bound(int n, double r, double epsilon) {
  check_query(n, r, epsilon);
  BoundReport rep;
  rep.method = "single_rule";
  rep.inputs = {{"n", double(n)}, {"r", r}, {"epsilon", epsilon}};
  if (r == 0.0) {
    // numerator is lambda-free; the infimum is the lambda -> infinity limit
    rep.bound = -std::expm1(std::log(epsilon) / n);
    rep.finalize();
    return rep;
  }
  auto obj = [&](double lam) { return phi_inv(lam / n, r - std::log(epsilon) / lam); };
  const ScalarMinimum m = minimize_log_grid(obj, kLambdaLo, lambda_hi(n));
  rep.bound = m.value;
  rep.lambda_opt = m.x;
  rep.finalize();
  return rep;
}

BoundReport deviation_bound(int n, double r, double kl, double epsilon, double lambda) {
  check_query(n, r, epsilon);
  if (kl < 0.0) throw ValidationError("deviation_bound: kl must be nonnegative");
  if (lambda <= 0.0) throw ValidationError("deviation_bound: lambda must be positive");
  BoundReport rep;
  rep.method = "deviation";
  rep.inputs = {{"n", double(n)}, {"r", r}, {"kl", kl}, {"epsilon", epsilon}, {"lambda", lambda}};
  const double load = r + (kl - std::log(epsilon)) / lambda;
  rep.bound = phi_inv(lambda / n, load);
  rep.extras["linear"] = lambda / (n * -std::expm1(-lambda / n)) * load;
  rep.lambda_opt = lambda;
  rep.finalize();
  return rep;
}

BoundReport deviation_bound_grid(int n, double r, double kl, double epsilon, double alpha) {
  check_query(n, r, epsilon);
  if (kl < 0.0) throw ValidationError("deviation_bound_grid: kl must be nonnegative");
  if (!(alpha > 1.0)) throw ValidationError("deviation_bound_grid: alpha must exceed 1");
  BoundReport rep;
  rep.method = "deviation_grid";
  rep.inputs = {{"n", double(n)}, {"r", r}, {"kl", kl}, {"epsilon", epsilon}, {"alpha", alpha}};
  const double d = kl - std::log(epsilon);
  if (r == 0.0) {
    rep.bound = -std::expm1(-d / n);
    rep.finalize();
    return rep;
  }
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0;; ++k) {
    const double lam = std::pow(alpha, k);
    const double pen = std::log(double(k + 1) * double(k + 2));
    const double v = -std::expm1(-lam * r / n - (d + pen) / n) / -std::expm1(-lam / n);
    if (v < best) {
      best = v;
      best_k = k;
    }
    if (lam > 100.0 * n || k > 5000) break;
  }
  rep.bound = best;
  rep.k_opt = best_k;
  rep.lambda_opt = std::pow(alpha, best_k);
  rep.finalize();
  return rep;
}

BoundReport mean_risk_bound(int n, double q, double kl, double lambda) {
  if (n < 1 || q < 0.0 || q > 1.0) throw ValidationError("mean_risk_bound: bad N or q");
  if (kl < 0.0 || lambda <= 0.0) throw ValidationError("mean_risk_bound: bad kl or lambda");
  BoundReport rep;
  rep.method = "mean_risk";
  rep.inputs = {{"n", double(n)}, {"q", q}, {"kl", kl}, {"lambda", lambda}};
  rep.bound = -std::expm1(-(lambda * q + kl) / n) / -std::expm1(-lambda / n);
  rep.extras["linear"] = lambda / (n * -std::expm1(-lambda / n)) * (q + kl / lambda);
  rep.lambda_opt = lambda;
  rep.finalize();
  return rep;
}

BoundReport mean_risk_bound_opt(int n, double q, double kl) {
  if (n < 1 || q < 0.0 || q > 1.0 || kl < 0.0) {
    throw ValidationError("mean_risk_bound_opt: bad inputs");
  }
  BoundReport rep;
  rep.method = "mean_risk_opt";
  rep.inputs = {{"n", double(n)}, {"q", q}, {"kl", kl}};
  if (kl == 0.0) {
    rep.bound = q;  // analytic lambda -> 0 limit
    rep.finalize();
    return rep;
  }
  if (q <= 0.0 || q >= 1.0) {
    throw DomainError("mean_risk_bound_opt: q in {0,1} with positive kl");
  }
  const double num = -std::expm1(-std::sqrt(2.0 * kl * q / (n * (1.0 - q))) - kl / n);
  const double den = -std::expm1(-std::sqrt(2.0 * kl / (n * q * (1.0 - q))));
  rep.bound = num / den;
  rep.lambda_opt = std::sqrt(2.0 * n * kl / (q * (1.0 - q)));
  rep.finalize();
  return rep;
}

BoundReport sqrt_risk_bound(int n, double q, double d) {
  if (n < 1 || q < 0.0 || q > 1.0 || d < 0.0) throw ValidationError("sqrt_risk_bound: bad inputs");
  BoundReport rep;
  rep.method = "sqrt_risk";
  rep.inputs = {{"n", double(n)}, {"q", q}, {"d", d}};
  const double tail = q + std::sqrt(d / (2.0 * n));
  if (tail <= 0.5) {
    rep.bound = (q + d / n + std::sqrt(2.0 * d * q * (1.0 - q) / n + d * d / (double(n) * n))) /
                (1.0 + 2.0 * d / n);
  } else {
    rep.bound = tail;
  }
  rep.finalize();
  return rep;
}

BoundReport dim_margin_risk(int n, double r_min, double d_eta, double eta) {
  if (n < 1 || r_min < 0.0 || r_min > 1.0 || d_eta < 0.0 || eta < 0.0) {
    throw ValidationError("dim_margin_risk: bad inputs");
  }
  BoundReport rep;
  rep.method = "dim_margin";
  rep.inputs = {{"n", double(n)}, {"r_min", r_min}, {"d_eta", d_eta}, {"eta", eta}};
  rep.bound = r_min + eta + 4.0 * d_eta / n +
              2.0 * std::sqrt(2.0 * d_eta * (r_min + eta) / n + 4.0 * d_eta * d_eta / (double(n) * n));
  rep.finalize();
  return rep;
}

namespace {

// Shared assembly of the (alpha, gamma) local family: given the linear bound M,
// attach the quadratic inversion. gamma = 0 degenerates to (1 - e^-alpha M)/alpha.
void attach_nonlinear(BoundReport& rep, double alpha, double gamma, double m_linear) {
  rep.extras["linear"] = m_linear;
  if (gamma == 0.0) {
    rep.bound = -std::expm1(-alpha * m_linear) / alpha;
  } else {
    rep.bound = quadratic_inversion(alpha, gamma, m_linear);
  }
}

}  // namespace

BoundReport local_bound(int n, double alpha, double gamma, double epsilon, double r_min,
                        double d_e, double extra_kl) {
  check_query(n, r_min, epsilon);
  if (!(gamma >= 0.0) || !(gamma < alpha) || !(alpha < 1.0)) {
    throw DomainError("local_bound: need 0 <= gamma < alpha < 1");
  }
  if (gamma == 0.0 && d_e > 0.0) {
    throw DomainError("local_bound: gamma = 0 admits no dimension term");
  }
  BoundReport rep;
  rep.method = "local";
  rep.inputs = {{"n", double(n)},     {"alpha", alpha}, {"gamma", gamma}, {"epsilon", epsilon},
                {"r_min", r_min},     {"d_e", d_e},     {"extra_kl", extra_kl}};
  const double span = alpha - gamma;
  const double slope = -std::log((1.0 - alpha) * (1.0 + gamma)) / span;
  const double dim_term = d_e == 0.0 ? 0.0 : d_e * std::log(-std::log(1.0 - alpha) / std::log1p(gamma));
  const double m = slope * r_min + (dim_term + extra_kl - 2.0 * std::log(epsilon)) / (n * span);
  attach_nonlinear(rep, alpha, gamma, m);
  rep.finalize();
  return rep;
}

BoundReport local_bound_beta(int n, double beta, double epsilon, double r_min, double d_e,
                             double extra_kl) {
  check_query(n, r_min, epsilon);
  if (beta < 0.0 || d_e < 0.0) throw ValidationError("local_bound_beta: bad inputs");
  BoundReport rep;
  rep.method = "local_beta";
  rep.inputs = {{"n", double(n)}, {"beta", beta},          {"epsilon", epsilon},
                {"r_min", r_min}, {"d_e", d_e},            {"extra_kl", extra_kl}};
  const double denom = n * (2.0 - std::exp(beta / n) - std::exp(-2.0 * beta / n));
  const double numer = beta * r_min + d_e * std::log(2.0) + extra_kl - 2.0 * std::log(epsilon);
  if (denom <= 0.0) {
    if (beta == 0.0) {
      rep.bound = std::numeric_limits<double>::infinity();
      rep.infinite = true;
      rep.clipped = 1.0;
      rep.vacuous = true;
      return rep;
    }
    throw DomainError("local_bound_beta: denominator not positive (beta too large)");
  }
  rep.bound = numer / denom;
  rep.finalize();
  return rep;
}

BoundReport partially_local_bound(int n, double alpha, double gamma, double epsilon,
                                  const PartialLocalStats& stats) {
  check_query(n, stats.nu_rho_r, epsilon);
  if (!(gamma >= 0.0) || !(gamma < alpha) || !(alpha < 1.0)) {
    throw DomainError("partially_local_bound: need 0 <= gamma < alpha < 1");
  }
  BoundReport rep;
  rep.method = "partially_local";
  rep.inputs = {{"n", double(n)},
                {"alpha", alpha},
                {"gamma", gamma},
                {"epsilon", epsilon},
                {"nu_rho_r", stats.nu_rho_r},
                {"kl_nu_mu", stats.kl_nu_mu},
                {"nu_kl_rho_gibbs", stats.nu_kl_rho_gibbs}};
  const double span = alpha - gamma;
  const double b2 = -std::log((1.0 - alpha) * (1.0 + gamma)) / span * stats.nu_rho_r +
                    (2.0 * stats.kl_nu_mu + stats.nu_kl_rho_gibbs - 2.0 * std::log(epsilon)) /
                        (n * span);
  attach_nonlinear(rep, alpha, gamma, b2);
  rep.finalize();
  return rep;
}

}  // namespace pacbound
