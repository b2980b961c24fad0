#include "pacbound/reproduce.hpp"

#include <cmath>

#include "pacbound/inductive.hpp"
#include "pacbound/scalar.hpp"
#include "pacbound/transductive.hpp"

namespace pacbound {

namespace {

ReproRow two_sided(std::string id, std::string desc, double expected, double computed,
                   double tol) {
  ReproRow row{std::move(id), std::move(desc), expected, computed, tol};
  row.pass = std::abs(row.computed - row.expected) <= row.tolerance;
  return row;
}

ReproRow upper(std::string id, std::string desc, double limit, double computed) {
  ReproRow row{std::move(id), std::move(desc), limit, computed, 0.0, true};
  row.pass = row.computed <= row.expected;
  return row;
}

}  // namespace

std::vector<ReproRow> reproduce_rows(const std::string& only) {
  std::vector<ReproRow> rows;
  const int n = 1000;
  const double r = 0.2;
  const double eps = 0.01;

  {
    const BoundReport b = single_rule_bound(n, r, eps);
    rows.push_back(two_sided("T1", "single rule, N=1000 r=0.2", 0.2402, b.bound, 5e-4));
    rows.push_back(two_sided("T1-lambda", "single rule optimizer", 234.0, *b.lambda_opt,
                             0.02 * 234.0));
  }
  rows.push_back(two_sided("T2", "optimized mean-risk bound, kl=10", 0.2602,
                           mean_risk_bound_opt(n, r, 10.0).bound, 2e-4));
  rows.push_back(two_sided("T3", "square-root risk bound, d=10", 0.2624,
                           sqrt_risk_bound(n, r, 10.0).bound, 2e-4));
  rows.push_back(two_sided("T4", "dimension-margin risk, d=10", 0.3727,
                           dim_margin_risk(n, r, 10.0, 0.0).bound, 5e-4));
  {
    const BoundReport b = local_bound(n, 0.5, 0.1, eps, r, 10.0, 0.0);
    rows.push_back(two_sided("T5", "local bound, nonlinear", 0.3315, b.bound, 1e-3));
    rows.push_back(two_sided("T5-linear", "local bound, linear", 0.3715, b.extras.at("linear"),
                             1e-3));
  }
  rows.push_back(two_sided("T6", "local bound, beta form", 0.4749,
                           local_bound_beta(n, 100.0, eps, r, 10.0, 0.0).bound, 1e-3));
  rows.push_back(two_sided("T7", "quadratic inversion", 0.0955,
                           quadratic_inversion(0.5, 0.2, 0.1), 5e-4));
  for (int k : {15, 16, 17}) {
    const BoundReport b = trans_bound(n, k, r, vc_trace_log(10, (k + 1) * 1000LL), eps);
    rows.push_back(two_sided("T8-k" + std::to_string(k), "transductive bound", 0.4093, b.bound,
                             5e-4));
    rows.push_back(two_sided("T8-k" + std::to_string(k) + "-lambda", "transductive optimizer",
                             970.0, *b.lambda_opt, 15.0));
  }
  rows.push_back(two_sided("T8-k1", "transductive bound, k=1", 0.539,
                           trans_bound(n, 1, r, vc_trace_log(10, 2000), eps).bound, 1e-3));
  rows.push_back(two_sided("T9", "k=1 refinement", 0.5033,
                           trans_bound_k1(n, r, 62.984, eps).bound, 1e-3));
  rows.push_back(two_sided("T10", "k=1 exchangeable refinement", 0.4450,
                           trans_bound_k1_exch(n, r, 62.984, eps).bound, 1e-3));
  rows.push_back(upper("T11-n1e3", "eta correction, N=1e3", 3.7, eta_correction(1000, eps)));
  rows.push_back(upper("T11-n1e6", "eta correction, N=1e6", 4.4, eta_correction(1000000, eps)));
  rows.push_back(
      upper("T11-n1e9", "eta correction, N=1e9", 4.7, eta_correction(1000000000, eps)));
  const BoundReport t12 = inductive_grid_bound(n, r, 10, eps, 1.1);
  rows.push_back(two_sided("T12", "inductive grid bound", 0.427, t12.bound, 1e-3));
  rows.push_back(two_sided("T12-k", "inductive grid shadow ratio", 16.0, double(*t12.k_opt), 0.0));
  const BoundReport t13 = inductive_main_bound(n, r, 10, eps);
  rows.push_back(two_sided("T13", "inductive main bound", 0.4211, t13.bound, 1e-3));
  rows.push_back(two_sided("T13-k", "main bound shadow ratio", 15.0, double(*t13.k_opt), 0.0));
  rows.push_back(two_sided("T13-lambda", "main bound optimizer", 1010.0, *t13.lambda_opt,
                           0.02 * 1010.0));
  const BoundReport t14 = inductive_gaussian(n, r, 10, eps);
  rows.push_back(two_sided("T14", "inductive Gaussian bound", 0.4325, t14.bound, 1e-3));
  rows.push_back(two_sided("T14-k", "Gaussian bound shadow ratio", 15.0, double(*t14.k_opt), 0.0));
  const BoundReport t15 = iid_k1_bound(n, r, 10, eps);
  const BoundReport t15g = iid_k1_gaussian(n, r, 10, eps);
  rows.push_back(two_sided("T15", "iid k=1 bound", 0.453, t15.bound, 1e-3));
  rows.push_back(two_sided("T15-lambda", "iid k=1 optimizer", 1195.0, *t15.lambda_opt,
                           0.02 * 1195.0));
  rows.push_back(two_sided("T15-gaussian", "iid k=1 Gaussian bound", 0.461, t15g.bound, 1e-3));
  const BoundReport t16 = vapnik_baseline(n, r, 10, eps);
  rows.push_back(two_sided("T16", "Vapnik baseline", 0.610, t16.bound, 1e-3));
  const bool ordered = t16.bound > t15g.bound && t15g.bound > t15.bound && t15.bound > t13.bound;
  rows.push_back(two_sided("T16-order", "baseline > Gaussian > exact > main", 1.0,
                           ordered ? 1.0 : 0.0, 0.0));

  if (!only.empty()) {
    std::vector<ReproRow> filtered;
    for (auto& row : rows) {
      if (row.id == only || row.id.rfind(only + "-", 0) == 0) filtered.push_back(std::move(row));
    }
    return filtered;
  }
  return rows;
}

bool all_pass(const std::vector<ReproRow>& rows) {
  for (const auto& row : rows) {
    if (!row.pass) return false;
  }
  return true;
}

}  // namespace pacbound
