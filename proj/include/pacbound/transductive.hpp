#pragma once

#include <functional>
#include <vector>

#include "pacbound/report.hpp"

namespace pacbound {

// Vapnik-type bounds: transductive test-error bounds for an arbitrary
// shadow-to-training ratio k, the k = 1 and exchangeable refinements, the
// inductive bounds obtained by integrating out fictitious shadow samples, and
// Vapnik's original bound as a baseline. Complexities are in nats.

/// h log(e m / h): log of the VC trace bound on m points. Requires 1 <= h <= m.
double vc_trace_log(int h, long long m);

/// log(j(j+1)) + j log(e m / j): compression-set penalty for |J| = j.
double compression_log(int j, long long m);

/// Per-k complexity -log pi[Delta_k] as a function of k (the -log eps part is
/// added by the bound). Default: vc_trace_log(h, (k+1) N).
using ComplexityFn = std::function<double(int k)>;

/// Shadow-sample bound for arbitrary k; d excludes the -log eps term.
BoundReport trans_bound(int n, int k, double r1, double d, double epsilon);

/// k = 1 refinement through A(lambda) = (2N/lambda) log cosh(lambda/2N).
BoundReport trans_bound_k1(int n, double r1, double d, double epsilon);

/// k = 1 under an exchangeable sample distribution.
BoundReport trans_bound_k1_exch(int n, double r1, double d, double epsilon);

/// Additive offset d''_k - d'_k of the level-sequence union bound; requires a
/// strictly decreasing sequence in (0,1). Empty etas selects the default pair
/// (1/log(10N), 1/(10N)).
double eta_correction(long long n, double epsilon, const std::vector<double>& etas = {});

struct TransConfig {
  int k_max = 100;
  ComplexityFn complexity;        // overrides the VC trace bound when set
  std::vector<double> etas;       // overrides the default level sequence
};

/// Main inductive bound: scan k and lambda with the exact eta-sequence offset.
BoundReport inductive_main_bound(int n, double r1, int h, double epsilon,
                                 const TransConfig& cfg = {});

/// Grid variant: lambda restricted to powers of alpha, union penalty
/// log[k(k+1) j(j+1)].
BoundReport inductive_grid_bound(int n, double r1, int h, double epsilon, double alpha,
                                 const TransConfig& cfg = {});

/// Gaussian relaxation of the main bound via the B-bar closed form.
BoundReport inductive_gaussian(int n, double r1, int h, double epsilon,
                               const TransConfig& cfg = {});

/// i.i.d. k = 1 bound (exact form).
BoundReport iid_k1_bound(int n, double r1, int h, double epsilon);

/// i.i.d. k = 1 bound, Gaussian closed form.
BoundReport iid_k1_gaussian(int n, double r1, int h, double epsilon);

/// Vapnik's original bound with d_V = vc_trace_log(h, 2N) + log(4/eps).
BoundReport vapnik_baseline(int n, double r1, int h, double epsilon);

}  // namespace pacbound
