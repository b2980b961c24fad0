#pragma once

#include "pacbound/report.hpp"

namespace pacbound {

// Bound calculators for single rules and posterior averages on one sample:
// deviation bounds, unbiased mean-risk bounds, dimension-based non-random
// bounds, and the local family. Rates are passed as plain reals; the CLI layer
// converts integer error counts. Every optimizer uses the shared
// minimize_log_grid search on [1e-2, 20N], so reports are deterministic.

/// Throws ValidationError unless N >= 1, r in [0,1] and epsilon in (0,1).
void check_query(int n, double r, double epsilon);

/// inf over lambda of phi_inv(lambda/N, r - log(eps)/lambda).
BoundReport single_rule_bound(int n, double r, double epsilon);

/// phi_inv(lambda/N, r + (kl - log eps)/lambda) at a fixed lambda;
/// extras["linear"] carries the linear relaxation.
BoundReport deviation_bound(int n, double r, double kl, double epsilon, double lambda);

/// Union bound over the lambda grid {alpha^k}: penalty log[(k+1)(k+2)].
/// The r = 0 clause returns 1 - exp(-(kl - log eps)/N).
BoundReport deviation_bound_grid(int n, double r, double kl, double epsilon, double alpha);

/// Mean-risk bound at a fixed lambda: [1 - e^{-(lambda q + kl)/N}] / [1 - e^{-lambda/N}].
BoundReport mean_risk_bound(int n, double q, double kl, double lambda);

/// Same with the closed-form lambda = sqrt(2 N kl / (q (1-q))); kl = 0 gives q.
BoundReport mean_risk_bound_opt(int n, double q, double kl);

/// Vapnik-style closed form with the B-bar dichotomy at q + sqrt(d/2N) = 1/2.
BoundReport sqrt_risk_bound(int n, double q, double d);

/// r_min + eta + 4 d_eta/N + 2 sqrt(2 d_eta (r_min + eta)/N + 4 d_eta^2/N^2).
BoundReport dim_margin_risk(int n, double r_min, double d_eta, double eta);

/// Local bound at (alpha, gamma): nonlinear (quadratic inversion) in `bound`,
/// the linear form M in extras["linear"]. Requires 0 <= gamma < alpha < 1.
BoundReport local_bound(int n, double alpha, double gamma, double epsilon, double r_min,
                        double d_e, double extra_kl);

/// Linear-only corollary at lambda = 2 beta; diverges (infinite flag) as the
/// denominator N[2 - e^{beta/N} - e^{-2 beta/N}] vanishes.
BoundReport local_bound_beta(int n, double beta, double epsilon, double r_min, double d_e,
                             double extra_kl);

/// Inputs of the partially localized bound; exact values come from
/// threshold-model enumerations or are supplied directly.
struct PartialLocalStats {
  double nu_rho_r = 0.0;         // nu rho(r)
  double kl_nu_mu = 0.0;         // K(nu, mu)
  double nu_kl_rho_gibbs = 0.0;  // nu{ K[rho, pi_{(1+gamma)^{-Nr}}] }
};

/// B2 form of the partially local bound; nonlinear in `bound`, B2 in
/// extras["linear"].
BoundReport partially_local_bound(int n, double alpha, double gamma, double epsilon,
                                  const PartialLocalStats& stats);

}  // namespace pacbound
