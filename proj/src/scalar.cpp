#include "pacbound/scalar.hpp"

#include <cmath>
#include <limits>

#include "pacbound/errors.hpp"

namespace pacbound {

double phi(double a, double p) {
  if (std::abs(a) < kSeriesThreshold) {
    return p + a * (p * p - p) / 2.0 + a * a * p * (2.0 * p - 1.0) * (p - 1.0) / 6.0;
  }
  // 1 - (1 - e^-a) p == 1 + expm1(-a) p
  return -std::log1p(std::expm1(-a) * p) / a;
}

double phi_inv(double a, double q) {
  if (std::abs(a) < kSeriesThreshold) {
    return q + a * q * (1.0 - q) / 2.0 + a * a / 12.0 * q * (2.0 * q - 1.0) * (q - 1.0);
  }
  return std::expm1(-a * q) / std::expm1(-a);
}

double psi(double a, double p, double m) {
  if (a == 0.0) return p;  // sinh(a)(p - m tanh(a/2)) -> a p, so psi -> p
  const double arg = 1.0 - std::sinh(a) * (p - m * std::tanh(a / 2.0));
  if (arg <= 0.0) throw DomainError("psi: log argument not positive");
  return -std::log(arg) / a;
}

double xi(double a, double q) {
  if (a == 0.0) throw DomainError("xi: a must be nonzero");
  if (std::abs(a) < kSeriesThreshold) {
    return q - a * q * q / 2.0 + a * a * (q * q * q / 6.0 + q / 3.0);
  }
  return -std::expm1(-a * q) / std::tanh(a);
}

double big_f(int n, double gamma, double alpha, double x) {
  const double t = std::tanh(gamma / n);
  if (t * x >= 1.0) throw DomainError("big_f: tanh(gamma/N) x must stay below 1");
  return -n * std::log1p(-t * x) - alpha * x;
}

double big_f_inv(int n, double gamma, double alpha, double y) {
  const double t = std::tanh(gamma / n);
  if (alpha >= n * t) throw DomainError("big_f_inv: alpha >= N tanh(gamma/N), not monotone");
  if (y < 0.0) throw DomainError("big_f_inv: y below the image of [0, x_max)");
  if (y == 0.0) return 0.0;
  double lo = 0.0;
  double hi = (1.0 - 1e-12) / t;
  // F is convex increasing on [0, x_max) with F(0) = 0 and F -> +inf, so the
  // bracket always contains the unique root.
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (big_f(n, gamma, alpha, mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double fx = big_f(n, gamma, alpha, x) - y;
    const double dfx = n * t / (1.0 - t * x) - alpha;
    double step = fx / dfx;
    double nx = x - step;
    if (nx <= lo || nx >= hi) break;  // keep the bisection bracket authoritative
    x = nx;
    if (std::abs(step) <= 1e-12 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double a_of_lambda(int n, double lambda) {
  if (lambda <= 0.0) throw DomainError("a_of_lambda: lambda must be positive");
  const double x = lambda / (2.0 * n);
  if (x < 1e-4) {
    const double x2 = x * x;
    return x / 2.0 - x * x2 / 12.0 + x2 * x2 * x / 45.0;
  }
  return std::log(std::cosh(x)) / x;
}

double quadratic_inversion(double a, double b, double big_b) {
  if (b <= 0.0 || b >= a) throw DomainError("quadratic_inversion: need 0 < b < a");
  const double d = a - b;
  const double u = 4.0 * a * b / (d * d) * (-std::expm1(-d * big_b));
  return d / (2.0 * a * b) * (std::sqrt(1.0 + u) - 1.0);
}

std::uint64_t binom_tail_phi(int n, int h) {
  if (n < 1 || h < 0) throw DomainError("binom_tail_phi: need n >= 1 and h >= 0");
  if (n <= h) {
    if (n >= 63) throw DomainError("binom_tail_phi: 2^n overflows 64 bits");
    return std::uint64_t{1} << n;
  }
  std::uint64_t sum = 1;  // C(n,0)
  std::uint64_t c = 1;
  for (int k = 1; k <= h; ++k) {
    c = c * static_cast<std::uint64_t>(n - k + 1) / static_cast<std::uint64_t>(k);
    sum += c;
  }
  return sum;
}

double entropy_bound(int n, int h) {
  if (n < 1 || h < 0) throw DomainError("entropy_bound: need n >= 1 and h >= 0");
  if (h == 0) return 0.0;
  if (h >= n) return n * std::log(2.0);
  const double p = static_cast<double>(h) / n;
  return n * (-p * std::log(p) - (1.0 - p) * std::log1p(-p));
}

double kl_bernoulli(double p, double q) {
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0) {
    throw DomainError("kl_bernoulli: arguments must lie in [0,1]");
  }
  if (p == q) return 0.0;
  if (q <= 0.0 || q >= 1.0) throw DomainError("kl_bernoulli: infinite divergence");
  double v = 0.0;
  if (p > 0.0) v += p * std::log(p / q);
  if (p < 1.0) v += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return v;
}

ScalarMinimum minimize_log_grid(const std::function<double(double)>& f, double lo, double hi,
                                int grid_points, int golden_iters) {
  if (!(lo > 0.0) || !(hi > lo)) throw DomainError("minimize_log_grid: need 0 < lo < hi");
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double x = std::exp(llo + (lhi - llo) * i / (grid_points - 1));
    const double v = f(x);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  auto grid_at = [&](int i) { return std::exp(llo + (lhi - llo) * i / (grid_points - 1)); };
  double a = grid_at(best > 0 ? best - 1 : 0);
  double b = grid_at(best < grid_points - 1 ? best + 1 : grid_points - 1);
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < golden_iters; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double v = f(x);
  if (v <= best_val) return {x, v};
  return {grid_at(best), best_val};
}

}  // namespace pacbound
