#pragma once

#include <cstdint>
#include <functional>

namespace pacbound {

// Scalar transforms shared by every bound calculator. All functions are pure
// and reentrant. Near a = 0 the exp/log composites cancel catastrophically,
// so |a| < kSeriesThreshold switches to 3-term expansions.

inline constexpr double kSeriesThreshold = 1e-6;

/// Bernoulli log-Laplace kernel: -log(1 - (1 - e^-a) p) / a. Identity at a = 0.
double phi(double a, double p);

/// Inverse of phi in its second argument: (1 - e^-aq) / (1 - e^-a).
/// Defined for every real q; values may leave [0,1] when q does.
double phi_inv(double a, double q);

/// -log(1 - sinh(a) [p - m tanh(a/2)]) / a. Throws DomainError when the
/// log argument is not positive.
double psi(double a, double p, double m);

/// tanh(a)^-1 (1 - e^-aq). Throws DomainError at a = 0.
double xi(double a, double q);

/// F_{gamma,alpha}(x) = -N log(1 - tanh(gamma/N) x) - alpha x.
double big_f(int n, double gamma, double alpha, double x);

/// Inverse of big_f on x >= 0; requires alpha < N tanh(gamma/N) (strictly
/// increasing regime) and y >= 0. Bisection bracket then Newton polish.
double big_f_inv(int n, double gamma, double alpha, double y);

/// A(lambda) = (2N/lambda) log cosh(lambda/2N); series below lambda/2N = 1e-4.
/// Satisfies A(lambda) <= lambda/(4N).
double a_of_lambda(int n, double lambda);

/// (a-b)/(2ab) (sqrt(1 + 4ab/(a-b)^2 (1 - e^-(a-b)B)) - 1), 0 < b < a.
double quadratic_inversion(double a, double b, double big_b);

/// Sum of binomials C(n,0..h); 2^n when n <= h. Requires n < 63 in that branch.
std::uint64_t binom_tail_phi(int n, int h);

/// n H(h/n) with H the Bernoulli Shannon entropy; dominates log binom_tail_phi.
double entropy_bound(int n, int h);

/// Bernoulli relative entropy p log(p/q) + (1-p) log((1-p)/(1-q)).
/// Throws DomainError for q in {0,1} unless p == q.
double kl_bernoulli(double p, double q);

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
};

/// Deterministic minimizer shared by all lambda searches: a log grid of
/// `grid_points` points on [lo, hi], then `golden_iters` golden-section steps
/// bracketed by the neighbours of the best grid point.
ScalarMinimum minimize_log_grid(const std::function<double(double)>& f, double lo, double hi,
                                int grid_points = 512, int golden_iters = 60);

}  // namespace pacbound
