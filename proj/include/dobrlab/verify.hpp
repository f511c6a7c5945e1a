#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dobrlab/mrf.hpp"
#include "dobrlab/rng.hpp"
#include "dobrlab/types.hpp"

namespace dobrlab {

// Inverse-CDF sampler over an enumerated joint; draws are exact, so tail
// checks carry no mixing error.
class ExactSampler {
 public:
  explicit ExactSampler(const JointTable& table);
  void draw(Rng& rng, std::span<int> out) const;

 private:
  int m_;
  int q_;
  std::vector<double> cumulative_;
};

// f with the bounded-differences property |f(w)-f(w')| ≤ Σ λ_i·1[w_i≠w'_i].
// The property is spot-checked on random configuration pairs before use.
struct BoundedDifferenceSpec {
  std::function<double(std::span<const int>)> f;
  Vecd lambdas;
};

struct LemmaCheckReport {
  std::string lemma;
  int instances = 0;
  // Signed worst slack: positive means the inequality failed by that much.
  double max_violation = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::string detail;
};

// Random test instances: potentials with log-uniform magnitudes and random
// signs. When beta_target >= 0 the pair tables are rescaled so the inverse
// temperature equals it.
struct RandomMrfSpec {
  int m = 3;
  int q = 2;
  double log_lo = -2.0;
  double log_hi = 2.0;
  double pair_prob = 0.7;  // each pair present independently
  double beta_target = -1.0;
};
PairwiseMrf random_mrf(const RandomMrfSpec& spec, Rng& rng);

// I_{j->i} ≤ I^log_{j,i} ≤ β_ij for every pair, at 1e-9.
LemmaCheckReport check_influence_chain(const PairwiseMrf& model);

// α of the conditional distribution ≤ α of the model, at 1e-9.
LemmaCheckReport check_conditioning_preserves_alpha(
    const PairwiseMrf& model, const std::map<int, int>& fixed);
// Same, over every 1..max_fixed node conditioning.
LemmaCheckReport check_conditioning_exhaustive(const PairwiseMrf& model,
                                               int max_fixed = 2);

// |M11/(M11+M-11) - M1-1/(M1-1+M-1-1)| ≤ (1/4)|log cross ratio|, at 1e-12.
LemmaCheckReport check_lemma8(double m_pp, double m_pm, double m_mp,
                              double m_mm);
LemmaCheckReport check_lemma8_suite(int count, Rng& rng);

// Exact σ-shuffle facts on a tiny model: the conditional sign law given any
// mixed pair (T, T') is symmetric and zero-mean, and its log-influences are
// at most twice the model's.
LemmaCheckReport check_sigma_shuffle(const PairwiseMrf& model);

// Empirical tails of f against the Dobrushin concentration bound
// 2·exp(-(1-α)t²/(2Σλ²)) with a 3·binomial-stderr allowance. Enumerable
// models use exact inverse-CDF draws, the exact α, and the exact mean of f;
// past the enumeration cap the draws come from a converged Gibbs chain and
// the caller must supply alpha_hint (the mean of f is then estimated from an
// independent run).
LemmaCheckReport check_concentration(const PairwiseMrf& model,
                                     const BoundedDifferenceSpec& spec,
                                     int samples, std::span<const double> t_grid,
                                     Rng& rng, double alpha_hint = -1.0);

// |E[L_S] - E[L_S | S_I]| ≤ (2-α)R|I| / ((1-α)m) for every assignment of the
// pinned block, with L_S the average of a per-state loss table.
LemmaCheckReport check_conditional_mean_shift(const PairwiseMrf& model,
                                              const Vecd& site_loss,
                                              std::span<const int> pinned);

// E_S sup_f (avg_f(S) - E avg_f) ≤ E_{S,S'} sup_f (avg_f(S) - avg_f(S')),
// both sides enumerated exactly; class given per-state values (|F| x q).
LemmaCheckReport check_symmetrization(const PairwiseMrf& model,
                                      const Matd& class_state_values);

// Pr(x_0 > 0, x_k > 0) under a single coupling θ equals 1/4 + θ/16 + O(θ²);
// quadrature to 1e-10 absolute error.
LemmaCheckReport check_claim_slow_mixing(std::span<const double> theta_grid);

// Empirical directional tails against 2·exp(-t²/(2K²|θ|²)).
LemmaCheckReport check_subgaussian_direction(
    const std::function<Vecd(Rng&)>& sampler, double k2, const Matd& directions,
    std::span<const double> t_grid, int draws, Rng& rng);

}  // namespace dobrlab
