#include "pacbound/relative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "pacbound/errors.hpp"
#include "pacbound/scalar.hpp"

namespace pacbound {

SelectionConfig SelectionConfig::defaults(int n, double epsilon) {
  SelectionConfig cfg;
  cfg.epsilon = epsilon;
  for (double v = 1.0; v <= n; v *= 2.0) cfg.grid.push_back(v);
  cfg.nu.assign(cfg.grid.size(), std::log(2.0) / std::log(2.0 * n));
  return cfg;
}

namespace {

double nu_at(const SelectionConfig& cfg, double x) {
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    if (std::abs(cfg.grid[i] - x) <= 1e-12 * std::max(1.0, std::abs(x))) return cfg.nu[i];
  }
  return 0.0;  // off-grid atoms carry no mass; -log(0) pushes the bound to +inf
}

double mu_at(const SelectionConfig& cfg, int model, int model_count) {
  if (cfg.mu.empty()) return 1.0 / model_count;
  return cfg.mu.at(model);
}

}  // namespace

int PosteriorSet::add_model(const CellGrid& grid) {
  if (!grids_.empty() && grid.train_count() != grids_.front()->train_count()) {
    throw ValidationError("posterior set: all models must share the training sample");
  }
  grids_.push_back(&grid);
  erms_.push_back(grid.erm());
  erm_flags_.push_back(grid.error_flags(erms_.back()));
  return static_cast<int>(grids_.size()) - 1;
}

const CellGrid& PosteriorSet::grid(int model) const { return *grids_.at(model); }

double PosteriorSet::log_partition(int model, double lambda) const {
  const auto key = std::make_tuple(model, lambda);
  auto it = log_z_cache_.find(key);
  if (it == log_z_cache_.end()) {
    it = log_z_cache_.emplace(key, grids_[model]->log_partition(lambda)).first;
  }
  return it->second;
}

double PosteriorSet::risk(int model, double lambda) const {
  const auto key = std::make_tuple(model, lambda);
  auto it = risk_cache_.find(key);
  if (it == risk_cache_.end()) {
    it = risk_cache_.emplace(key, grids_[model]->gibbs_risk(lambda)).first;
  }
  return it->second;
}

double PosteriorSet::m_prime(int model, double lambda, int ref_model) const {
  const auto key = std::make_tuple(model, lambda, ref_model);
  auto it = m_prime_cache_.find(key);
  if (it == m_prime_cache_.end()) {
    it = m_prime_cache_
             .emplace(key, grids_[model]->gibbs_m_prime(lambda, erm_flags_[ref_model]))
             .first;
  }
  return it->second;
}

double PosteriorSet::log_mgf(int model, double lambda, double xi, int ref_model) const {
  const auto key = std::make_tuple(model, lambda, xi, ref_model);
  auto it = mgf_cache_.find(key);
  if (it == mgf_cache_.end()) {
    it = mgf_cache_
             .emplace(key, grids_[model]->joint_log_mgf(lambda, xi, erm_flags_[ref_model]))
             .first;
  }
  return it->second;
}

const ThetaRef& PosteriorSet::erm_ref(int model) const { return erms_.at(model); }

double PosteriorSet::gibbs_relative_bound(const PosteriorSpec& rho, double beta, double gamma,
                                          double lambda1, double lambda2,
                                          const SelectionConfig& cfg) const {
  const CellGrid& g = grid(rho.model);
  const int n = g.train_count();
  if (!(beta > 0.0) || !(gamma > 0.0)) {
    throw DomainError("gibbs_relative_bound: beta and gamma must be positive");
  }
  if (lambda1 < 0.0 || lambda1 > gamma) {
    throw DomainError("gibbs_relative_bound: need 0 <= lambda1 <= gamma");
  }
  if (!(lambda2 > beta * gamma / (n * std::tanh(gamma / n)))) {
    throw DomainError("gibbs_relative_bound: lambda2 below the monotone regime");
  }
  const int md = rho.model;
  const double c = n * std::log(std::cosh(gamma / n));
  const double union_term = -std::log(cfg.epsilon * nu_at(cfg, beta) * nu_at(cfg, gamma));

  const double kl = (lambda1 - rho.lambda) * risk(md, rho.lambda) +
                    log_partition(md, lambda1) - log_partition(md, rho.lambda);
  const double drift = (gamma - lambda1) * (risk(md, rho.lambda) - risk(md, lambda2));
  const double mgf1 = log_mgf(md, lambda1, c, md) - log_partition(md, lambda1) +
                      c * m_prime(md, rho.lambda, md);
  const double inner = log_mgf(md, lambda2, c, md) - log_partition(md, lambda2) +
                       c * m_prime(md, lambda2, md) + union_term;
  const double tail =
      (gamma - lambda1) * beta / lambda2 * big_f_inv(n, gamma, beta * gamma / lambda2, inner);
  return std::max(kl, 0.0) + drift + mgf1 + union_term + tail;
}

double PosteriorSet::effective_temperature(const PosteriorSpec& rho,
                                           const SelectionConfig& cfg) const {
  const CellGrid& g = grid(rho.model);
  const int n = g.train_count();
  std::vector<double> betas = cfg.grid;
  std::sort(betas.begin(), betas.end(), std::greater<>());
  for (double beta : betas) {
    double best = std::numeric_limits<double>::infinity();
    for (double gamma : cfg.grid) {
      if (!(n * std::tanh(gamma / n) > beta)) continue;
      std::vector<double> lambda1s;
      if (cfg.scan_lambda1) {
        lambda1s.push_back(0.0);
        for (double l1 : cfg.grid) {
          if (l1 <= gamma) lambda1s.push_back(l1);
        }
      } else {
        lambda1s.push_back(gamma / 2.0);
      }
      for (double l1 : lambda1s) {
        for (double l2 : cfg.grid) {
          if (!(l2 > beta * gamma / (n * std::tanh(gamma / n)))) continue;
          best = std::min(best, gibbs_relative_bound(rho, beta, gamma, l1, l2, cfg));
        }
      }
    }
    if (best <= 0.0) return beta;
  }
  return 0.0;
}

double PosteriorSet::complexity(const PosteriorSpec& rho, const SelectionConfig& cfg) const {
  if (!(cfg.zeta > 1.0)) throw DomainError("complexity: zeta must exceed 1");
  const CellGrid& g = grid(rho.model);
  const int n = g.train_count();
  const double beta = rho.lambda;
  const int md = rho.model;
  const double c = n / cfg.zeta * std::log(std::cosh(cfg.zeta * beta / n));
  const double mgf = log_mgf(md, beta, c, md) - log_partition(md, beta) +
                     c * m_prime(md, beta, md);
  const double atom = nu_at(cfg, beta) * mu_at(cfg, rho.model, size());
  return mgf / (1.0 - 1.0 / cfg.zeta) +
         (cfg.zeta + 1.0) / (cfg.zeta - 1.0) * -std::log(atom);
}

double PosteriorSet::pairwise_bound(const PosteriorSpec& rho1, const PosteriorSpec& rho2,
                                    const SelectionConfig& cfg) const {
  const int n = grid(rho1.model).train_count();
  // reference = the better of the two empirical risk minimizers
  const int ref_model =
      erms_[rho1.model].risk <= erms_[rho2.model].risk ? rho1.model : rho2.model;
  const double cross =
      m_prime(rho1.model, rho1.lambda, ref_model) + m_prime(rho2.model, rho2.lambda, ref_model);
  const double c1 = complexity(rho1, cfg);
  const double c2 = complexity(rho2, cfg);
  const double risk_gap = risk(rho2.model, rho2.lambda) - risk(rho1.model, rho1.lambda);
  const double zf = (cfg.zeta + 1.0) / (cfg.zeta - 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : cfg.grid) {
    const double s = n / lambda * std::log(std::cosh(lambda / n)) * cross +
                     (c1 + c2 - zf * std::log(nu_at(cfg, lambda) * cfg.epsilon / 3.0)) / lambda;
    best = std::min(best, xi(lambda / n, risk_gap + s));
  }
  return best;
}

Eigen::MatrixXd chained_closure(const Eigen::MatrixXd& pairwise) {
  const auto m = pairwise.rows();
  Eigen::MatrixXd d = pairwise;
  for (Eigen::Index i = 0; i < m; ++i) d(i, i) = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
      }
    }
  }
  return d;
}

double chained_bound(const Eigen::MatrixXd& pairwise, int i, int j) {
  return chained_closure(pairwise)(i, j);
}

SelectionResult select_from_matrix(const Eigen::MatrixXd& chained) {
  const int m = static_cast<int>(chained.rows());
  SelectionResult res;
  res.chained = chained;
  res.t_map.resize(m);
  for (int k = 0; k < m; ++k) {
    int t = m + 1;
    for (int j = 0; j < m; ++j) {
      if (chained(j, k) > 0.0) {
        t = j + 1;
        break;
      }
    }
    res.t_map[k] = t;
  }
  const int t_max = *std::max_element(res.t_map.begin(), res.t_map.end());
  int k_hat = 0;
  while (res.t_map[k_hat] != t_max) ++k_hat;
  res.k_hat = k_hat + 1;
  res.t_hat = res.t_map[k_hat];

  res.certificate_case.resize(m);
  res.certificate_gap.resize(m);
  auto bt = [&](int a, int b) { return chained(a - 1, b - 1); };  // 1-based
  for (int j = 1; j <= m; ++j) {
    const bool in_argmax = res.t_map[j - 1] == t_max;
    if (j < res.t_hat) {  // rho_khat already proved no worse than rho_j
      res.certificate_case[j - 1] = 1;
      res.certificate_gap[j - 1] = 0.0;
    } else if (in_argmax) {
      res.certificate_case[j - 1] = 3;
      res.certificate_gap[j - 1] = bt(j, res.t_hat) + bt(res.t_hat, res.k_hat);
    } else if (j < res.k_hat) {
      res.certificate_case[j - 1] = 2;
      res.certificate_gap[j - 1] = bt(j, res.t_map[j - 1]);
    } else {
      res.certificate_case[j - 1] = 4;
      res.certificate_gap[j - 1] = bt(j, res.k_hat);
    }
  }
  return res;
}

SelectionResult select(const PosteriorSet& set, const std::vector<PosteriorSpec>& posteriors,
                       const SelectionConfig& cfg) {
  const int m = static_cast<int>(posteriors.size());
  if (m == 0) throw ValidationError("select: empty posterior list");
  std::vector<double> complexity(m);
  for (int i = 0; i < m; ++i) complexity[i] = set.complexity(posteriors[i], cfg);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return complexity[a] < complexity[b]; });

  Eigen::MatrixXd pair(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      pair(i, j) = i == j ? 0.0
                          : set.pairwise_bound(posteriors[order[i]], posteriors[order[j]], cfg);
    }
  }
  SelectionResult res = select_from_matrix(chained_closure(pair));
  res.pairwise = pair;
  res.order = order;
  res.complexity.resize(m);
  for (int i = 0; i < m; ++i) res.complexity[i] = complexity[order[i]];
  return res;
}

}  // namespace pacbound
