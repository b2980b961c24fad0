#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "pacbound/threshold.hpp"

namespace pacbound {

// Relative-bound machinery on top of the threshold model: the Gibbs-relative
// bound B(rho, beta, gamma), effective temperatures, posterior complexities,
// pairwise posterior bounds, the min-plus chained bound and the selection rule
// built on it. Every m'(., rho) term inside an exponential moment is replaced
// through the reference-classifier split m'(t1,t2) <= m'(t1,ref) + m'(ref,t2)
// with ref the empirical risk minimizer, keeping all moments exactly
// computable by cell enumeration.

/// A Gibbs posterior pi^model_exp(-lambda r) on a registered threshold model.
struct PosteriorSpec {
  int model = 0;
  double lambda = 0.0;
};

struct SelectionConfig {
  std::vector<double> grid;  // atomic support of beta, gamma and lambda
  std::vector<double> nu;    // weights of the grid atoms
  std::vector<double> mu;    // prior over models (defaults to uniform)
  double zeta = 2.0;
  double epsilon = 0.05;
  bool scan_lambda1 = false;  // default keeps lambda1 = gamma/2

  /// Powers of two up to N, nu(each) = log 2 / log(2N).
  static SelectionConfig defaults(int n, double epsilon);
};

class PosteriorSet {
 public:
  /// Registers a sub-model; keeps a reference to the grid (caller owns it).
  int add_model(const CellGrid& grid);

  const CellGrid& grid(int model) const;
  const ThetaRef& erm_ref(int model) const;
  int size() const { return static_cast<int>(grids_.size()); }

  /// B(rho, beta, gamma) at explicit inner parameters; DomainError when
  /// lambda1 > gamma or lambda2 <= beta gamma / (N tanh(gamma/N)).
  double gibbs_relative_bound(const PosteriorSpec& rho, double beta, double gamma, double lambda1,
                              double lambda2, const SelectionConfig& cfg) const;

  /// Largest grid beta whose best grid (gamma, lambda2 [, lambda1]) makes the
  /// relative bound nonpositive; 0 when none qualifies.
  double effective_temperature(const PosteriorSpec& rho, const SelectionConfig& cfg) const;

  /// Posterior complexity C(rho) with ratio fixed to zeta.
  double complexity(const PosteriorSpec& rho, const SelectionConfig& cfg) const;

  /// B(rho1, rho2): pairwise relative bound through Xi and the shared
  /// complexity terms; bounds rho2(R) - rho1(R).
  double pairwise_bound(const PosteriorSpec& rho1, const PosteriorSpec& rho2,
                        const SelectionConfig& cfg) const;

 private:
  double log_partition(int model, double lambda) const;
  double risk(int model, double lambda) const;
  double m_prime(int model, double lambda, int ref_model) const;
  double log_mgf(int model, double lambda, double xi, int ref_model) const;

  std::vector<const CellGrid*> grids_;
  std::vector<ThetaRef> erms_;
  std::vector<std::vector<std::uint8_t>> erm_flags_;
  // memoized Gibbs quantities; the grids are immutable once registered
  mutable std::map<std::tuple<int, double>, double> log_z_cache_;
  mutable std::map<std::tuple<int, double>, double> risk_cache_;
  mutable std::map<std::tuple<int, double, int>, double> m_prime_cache_;
  mutable std::map<std::tuple<int, double, double, int>, double> mgf_cache_;
};

/// Min-plus transitive closure of a pairwise-bound matrix (diagonal forced to
/// zero by convention). Entry (i,j) bounds rho_j(R) - rho_i(R).
Eigen::MatrixXd chained_closure(const Eigen::MatrixXd& pairwise);

/// Chained bound between two posteriors of a sequence.
double chained_bound(const Eigen::MatrixXd& pairwise, int i, int j);

struct SelectionResult {
  std::vector<int> order;          // complexity-sorted position -> posterior index
  std::vector<double> complexity;  // in sorted order
  Eigen::MatrixXd pairwise;        // B, sorted order
  Eigen::MatrixXd chained;         // B-tilde, sorted order
  std::vector<int> t_map;          // 1-based; size()+1 when no j qualifies
  int k_hat = 1;                   // 1-based position in sorted order
  int t_hat = 1;
  std::vector<int> certificate_case;    // 1..4 per sorted position
  std::vector<double> certificate_gap;  // the proved bound on rho_khat(R) - rho_j(R)
};

/// Selection rule t(k) = min{ j : Btilde(rho_j, rho_k) > 0 }, k_hat = min argmax t,
/// applied to a chained matrix whose rows/columns follow complexity order.
SelectionResult select_from_matrix(const Eigen::MatrixXd& chained);

/// Full pipeline: complexities, pairwise matrix, closure, selection.
SelectionResult select(const PosteriorSet& set, const std::vector<PosteriorSpec>& posteriors,
                       const SelectionConfig& cfg);

}  // namespace pacbound
