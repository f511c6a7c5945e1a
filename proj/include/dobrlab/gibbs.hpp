#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dobrlab/mrf.hpp"
#include "dobrlab/rng.hpp"
#include "dobrlab/types.hpp"

namespace dobrlab {

// ---------------------------------------------------------------------------
// Discrete chains
// ---------------------------------------------------------------------------

struct ChainState {
  std::vector<int> config;
  std::int64_t steps = 0;  // single-site updates applied so far
};

// P(z_i = · | z_{-i}) computed from the potentials, O(q · degree). Agrees
// with conditional_distribution on the exact joint.
Vecd local_conditional(const PairwiseMrf& model, std::span<const int> config,
                       int i);

// One update: pick a site uniformly at random, resample it from its exact
// conditional given all others.
void gibbs_step(const PairwiseMrf& model, ChainState& state, Rng& rng);

ChainState random_state(const PairwiseMrf& model, Rng& rng);

// `count` configurations, each separated by thin·m single-site steps, after
// burn_in·m steps from a uniform random start. Deterministic given the rng
// stream.
std::vector<std::vector<int>> gibbs_sample(const PairwiseMrf& model,
                                           int burn_in, int thin, int count,
                                           Rng& rng);

// ---------------------------------------------------------------------------
// Continuous [-1,1]-valued chain with couplings θ_ij = c / (|i-j| log²(|i-j|+1))
// ---------------------------------------------------------------------------

// Density p(x) ∝ exp(Σ_{i<j} θ_ij x_i x_j) on [-1,1]^m; the single-site
// conditional is ∝ exp(a·x_i) with tilt a = Σ_{j≠i} θ_ij x_j. The kernel
// depends only on |i-j|, so tilts are two contiguous dot products against a
// mirrored copy of the state.
class ThetaChainModel {
 public:
  ThetaChainModel(int num_nodes, double coupling);

  // Picks the coupling constant so the largest tilt-row sum Σ_{j≠i} θ_ij
  // equals `target`.
  static ThetaChainModel with_row_sum_target(int num_nodes, double target);

  int num_nodes() const { return m_; }
  double coupling() const { return c_; }
  double theta(int i, int j) const;
  double max_row_sum() const { return max_row_sum_; }

  double tilt(const Vecd& x, const Vecd& x_mirror, int i) const;

 private:
  int m_;
  double c_;
  Vecd kernel_;  // kernel_[d] = θ for nodes at distance d; kernel_[0] = 0
  double max_row_sum_;
};

struct ContinuousChainState {
  Vecd x;
  Vecd x_mirror;  // x_mirror[m-1-i] == x[i], kept in sync
  std::int64_t steps = 0;
};

// Exact inverse-CDF draw from the density ∝ exp(a·x) on [-1,1]. Tilts below
// 1e-8 in magnitude take a first-order branch to avoid cancellation.
double tilted_interval_sample(double a, Rng& rng);

ContinuousChainState random_state(const ThetaChainModel& model, Rng& rng);
void gibbs_step(const ThetaChainModel& model, ContinuousChainState& state,
                Rng& rng);
void gibbs_sweeps(const ThetaChainModel& model, ContinuousChainState& state,
                  int sweeps, Rng& rng);

// ---------------------------------------------------------------------------
// Greedy (TV-optimal) coupling
// ---------------------------------------------------------------------------

// One draw from the maximal coupling of finite distributions p and q: the
// marginals are exactly p and q and the pair disagrees with probability
// d_TV(p, q).
std::pair<int, int> tv_optimal_coupled_draw(const Vecd& p, const Vecd& q,
                                            Rng& rng);

// Two Gibbs chains conditioned on prefixes `a` and `a_prime` (sites 0..k-1
// pinned), started from a shared uniform configuration on the free sites and
// advanced with the same site choices and greedily coupled updates. Returns
// the final Hamming distance over free sites; if `per_sweep` is non-null it
// receives the distance after each sweep of (m-k) steps.
int coupled_gibbs_run(const PairwiseMrf& model, int k, std::span<const int> a,
                      std::span<const int> a_prime, int sweeps, Rng& rng,
                      std::vector<int>* per_sweep = nullptr);

struct CoupledRunResult {
  int distance = 0;
  std::vector<int> u, v;  // final full configurations (prefix included)
};
CoupledRunResult coupled_gibbs_run_full(const PairwiseMrf& model, int k,
                                        std::span<const int> a,
                                        std::span<const int> a_prime,
                                        int sweeps, Rng& rng,
                                        std::vector<int>* per_sweep = nullptr);

// Mixing diagnostic: summary statistics (coordinate mean, second moment,
// adjacent-pair product) from fresh chains burned in for `burn_in` sweeps
// must agree with chains burned in for 2·burn_in sweeps within three combined
// standard errors.
struct DoublingDiagnostic {
  double max_delta = 0.0;      // worst |statistic difference|
  double max_allowance = 0.0;  // its 3·stderr allowance
  bool pass = false;
};
DoublingDiagnostic mixing_doubling_check(const ThetaChainModel& model,
                                         int burn_in, int chains,
                                         const Rng& base, int workers = 1);

struct CouplingStats {
  int k = 0;
  double alpha = 0.0;
  int runs = 0;
  double mean_hamming = 0.0;
  double stderr_mean = 0.0;
  double bound = 0.0;  // kα/(1-α); +inf when α >= 1
  std::vector<double> sweep_mean;
  std::vector<double> sweep_stderr;
  bool pass = false;  // mean ≤ bound + 3·stderr at every recorded sweep
};

// Aggregates coupled_gibbs_run over `runs` trials (trial index keys the rng
// stream, so results are independent of worker count). `burn_in` leading
// sweeps run coupled but unrecorded.
CouplingStats coupling_experiment(const PairwiseMrf& model, int k,
                                  std::span<const int> a,
                                  std::span<const int> a_prime, int runs,
                                  int sweeps, const Rng& base, int workers = 1,
                                  int burn_in = 0);

}  // namespace dobrlab
