#include "dobrlab/gibbs.hpp"

#include <cmath>
#include <limits>

#include "dobrlab/parallel.hpp"

namespace dobrlab {

Vecd local_conditional(const PairwiseMrf& model, std::span<const int> config,
                       int i) {
  Vecd logits = model.node_potential(i);
  for (const auto& [key, table] : model.pairs()) {
    if (key.first == i) {
      logits += table.col(config[key.second]);
    } else if (key.second == i) {
      logits += table.row(config[key.first]).transpose();
    }
  }
  return (logits.array() - log_sum_exp(logits)).exp();
}

namespace {

int sample_categorical(const Vecd& probs, Rng& rng) {
  double u = rng.uniform();
  for (int v = 0; v < probs.size() - 1; ++v) {
    u -= probs[v];
    if (u <= 0.0) return v;
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

void gibbs_step(const PairwiseMrf& model, ChainState& state, Rng& rng) {
  const int i = rng.uniform_int(model.num_nodes());
  const Vecd cond = local_conditional(model, state.config, i);
  state.config[i] = sample_categorical(cond, rng);
  ++state.steps;
}

ChainState random_state(const PairwiseMrf& model, Rng& rng) {
  ChainState state;
  state.config.resize(model.num_nodes());
  for (auto& v : state.config) v = rng.uniform_int(model.num_states());
  return state;
}

std::vector<std::vector<int>> gibbs_sample(const PairwiseMrf& model,
                                           int burn_in, int thin, int count,
                                           Rng& rng) {
  if (burn_in < 0 || thin < 0 || count < 0)
    throw InvalidInput("burn_in, thin, count must be nonnegative");
  std::vector<std::vector<int>> draws;
  if (count == 0) return draws;
  draws.reserve(count);
  const int m = model.num_nodes();
  ChainState state = random_state(model, rng);
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(burn_in) * m; ++s)
    gibbs_step(model, state, rng);
  draws.push_back(state.config);
  for (int d = 1; d < count; ++d) {
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(thin) * m; ++s)
      gibbs_step(model, state, rng);
    draws.push_back(state.config);
  }
  return draws;
}

// ---------------------------------------------------------------------------
// Continuous chain
// ---------------------------------------------------------------------------

ThetaChainModel::ThetaChainModel(int num_nodes, double coupling)
    : m_(num_nodes), c_(coupling) {
  if (m_ < 1) throw InvalidInput("node count must be >= 1");
  if (c_ < 0.0) throw InvalidInput("coupling constant must be >= 0");
  kernel_ = Vecd::Zero(m_);
  for (int d = 1; d < m_; ++d) {
    const double l = std::log(static_cast<double>(d) + 1.0);
    kernel_[d] = c_ / (d * l * l);
  }
  // Row sums are largest at the middle node.
  max_row_sum_ = 0.0;
  for (int i = 0; i < m_; ++i) {
    double row = 0.0;
    for (int j = 0; j < m_; ++j)
      if (j != i) row += kernel_[std::abs(i - j)];
    max_row_sum_ = std::max(max_row_sum_, row);
  }
}

ThetaChainModel ThetaChainModel::with_row_sum_target(int num_nodes,
                                                     double target) {
  if (target < 0.0) throw InvalidInput("row sum target must be >= 0");
  ThetaChainModel unit(num_nodes, 1.0);
  if (num_nodes == 1 || target == 0.0) return ThetaChainModel(num_nodes, 0.0);
  return ThetaChainModel(num_nodes, target / unit.max_row_sum());
}

double ThetaChainModel::theta(int i, int j) const {
  if (i == j) return 0.0;
  return kernel_[std::abs(i - j)];
}

double ThetaChainModel::tilt(const Vecd& x, const Vecd& x_mirror, int i) const {
  // Σ_{d=1..i} k[d]·x[i-d]  +  Σ_{d=1..m-1-i} k[d]·x[i+d]
  double a = 0.0;
  if (i > 0) a += kernel_.segment(1, i).dot(x_mirror.segment(m_ - i, i));
  const int right = m_ - 1 - i;
  if (right > 0) a += kernel_.segment(1, right).dot(x.segment(i + 1, right));
  return a;
}

double tilted_interval_sample(double a, Rng& rng) {
  if (!std::isfinite(a)) throw InvalidInput("tilt must be finite");
  const double u = rng.uniform();
  if (std::abs(a) < 1e-8) {
    const double x0 = 2.0 * u - 1.0;
    return x0 + 0.5 * a * (1.0 - x0 * x0);
  }
  if (a < 0.0) {
    // mirror symmetry: -x under tilt a is distributed as x under tilt -a
    return -(1.0 + std::log(u + (1.0 - u) * std::exp(2.0 * a)) / (-a));
  }
  // F^{-1}(u) for density ∝ e^{ax}: written with e^{-2a} so nothing overflows
  return 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * a)) / a;
}

ContinuousChainState random_state(const ThetaChainModel& model, Rng& rng) {
  ContinuousChainState state;
  const int m = model.num_nodes();
  state.x.resize(m);
  for (int i = 0; i < m; ++i) state.x[i] = rng.uniform(-1.0, 1.0);
  state.x_mirror = state.x.reverse();
  return state;
}

void gibbs_step(const ThetaChainModel& model, ContinuousChainState& state,
                Rng& rng) {
  const int m = model.num_nodes();
  const int i = rng.uniform_int(m);
  const double a = model.coupling() == 0.0
                       ? 0.0
                       : model.tilt(state.x, state.x_mirror, i);
  const double v = tilted_interval_sample(a, rng);
  state.x[i] = v;
  state.x_mirror[m - 1 - i] = v;
  ++state.steps;
}

void gibbs_sweeps(const ThetaChainModel& model, ContinuousChainState& state,
                  int sweeps, Rng& rng) {
  const std::int64_t steps =
      static_cast<std::int64_t>(sweeps) * model.num_nodes();
  for (std::int64_t s = 0; s < steps; ++s) gibbs_step(model, state, rng);
}

// ---------------------------------------------------------------------------
// Greedy coupling
// ---------------------------------------------------------------------------

std::pair<int, int> tv_optimal_coupled_draw(const Vecd& p, const Vecd& q,
                                            Rng& rng) {
  if (p.size() != q.size())
    throw InvalidInput("coupled draw needs distributions on the same alphabet");
  const Vecd overlap = p.cwiseMin(q);
  const double agree = overlap.sum();  // = 1 - d_TV(p, q)
  const double u = rng.uniform();
  if (u < agree) {
    // draw from the overlap component; both coordinates coincide
    double acc = 0.0;
    for (int v = 0; v < overlap.size(); ++v) {
      acc += overlap[v];
      if (u <= acc) return {v, v};
    }
    return {static_cast<int>(overlap.size()) - 1,
            static_cast<int>(overlap.size()) - 1};
  }
  // residuals have disjoint supports, so the pair always disagrees here
  const double tv = 1.0 - agree;
  if (tv <= 0.0) {  // p == q up to rounding; u landed in the closure
    const int x = sample_categorical(p, rng);
    return {x, x};
  }
  const int x = sample_categorical((p - overlap) / tv, rng);
  const int y = sample_categorical((q - overlap) / tv, rng);
  return {x, y};
}

CoupledRunResult coupled_gibbs_run_full(const PairwiseMrf& model, int k,
                                        std::span<const int> a,
                                        std::span<const int> a_prime,
                                        int sweeps, Rng& rng,
                                        std::vector<int>* per_sweep) {
  const int m = model.num_nodes();
  const int q = model.num_states();
  if (k < 0 || k >= m) throw InvalidInput("prefix size must leave a free site");
  if (static_cast<int>(a.size()) != k || static_cast<int>(a_prime.size()) != k)
    throw InvalidInput("prefix assignments must have length k");
  for (int i = 0; i < k; ++i) {
    if (a[i] < 0 || a[i] >= q || a_prime[i] < 0 || a_prime[i] >= q)
      throw InvalidInput("prefix state out of alphabet range");
  }

  CoupledRunResult result;
  auto& u = result.u;
  auto& v = result.v;
  u.resize(m);
  v.resize(m);
  for (int i = 0; i < k; ++i) {
    u[i] = a[i];
    v[i] = a_prime[i];
  }
  // shared random start on the free sites: d_H = 0 initially
  for (int i = k; i < m; ++i) u[i] = v[i] = rng.uniform_int(q);

  const int free_count = m - k;
  if (per_sweep) {
    per_sweep->clear();
    per_sweep->reserve(sweeps);
  }
  auto recount = [&] {
    int d = 0;
    for (int i = k; i < m; ++i) d += (u[i] != v[i]);
    return d;
  };
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int s = 0; s < free_count; ++s) {
      const int i = k + rng.uniform_int(free_count);
      const Vecd pu = local_conditional(model, u, i);
      const Vecd pv = local_conditional(model, v, i);
      const auto [xu, xv] = tv_optimal_coupled_draw(pu, pv, rng);
      u[i] = xu;
      v[i] = xv;
    }
    result.distance = recount();
    if (per_sweep) per_sweep->push_back(result.distance);
  }
  if (sweeps == 0) result.distance = recount();
  return result;
}

int coupled_gibbs_run(const PairwiseMrf& model, int k, std::span<const int> a,
                      std::span<const int> a_prime, int sweeps, Rng& rng,
                      std::vector<int>* per_sweep) {
  return coupled_gibbs_run_full(model, k, a, a_prime, sweeps, rng, per_sweep)
      .distance;
}

DoublingDiagnostic mixing_doubling_check(const ThetaChainModel& model,
                                         int burn_in, int chains,
                                         const Rng& base, int workers) {
  if (chains < 2) throw InvalidInput("doubling check needs at least 2 chains");
  const int m = model.num_nodes();
  // per chain and per horizon: mean x, mean x², mean x_i·x_{i+1}
  Matd stats_short(chains, 3), stats_long(chains, 3);
  parallel_for(chains, workers, [&](int c) {
    for (int horizon = 0; horizon < 2; ++horizon) {
      Rng rng = base.fork(2 * c + horizon);
      ContinuousChainState state = random_state(model, rng);
      gibbs_sweeps(model, state, horizon == 0 ? burn_in : 2 * burn_in, rng);
      Vecd row(3);
      row[0] = state.x.mean();
      row[1] = state.x.squaredNorm() / m;
      row[2] = m > 1 ? state.x.head(m - 1).dot(state.x.tail(m - 1)) / (m - 1)
                     : 0.0;
      (horizon == 0 ? stats_short : stats_long).row(c) = row;
    }
  });
  DoublingDiagnostic diag;
  for (int s = 0; s < 3; ++s) {
    const double mean_a = stats_short.col(s).mean();
    const double mean_b = stats_long.col(s).mean();
    const double var_a =
        (stats_short.col(s).array() - mean_a).square().sum() / (chains - 1);
    const double var_b =
        (stats_long.col(s).array() - mean_b).square().sum() / (chains - 1);
    const double allowance = 3.0 * std::sqrt((var_a + var_b) / chains);
    const double delta = std::abs(mean_a - mean_b);
    if (delta - allowance > diag.max_delta - diag.max_allowance) {
      diag.max_delta = delta;
      diag.max_allowance = allowance;
    }
  }
  diag.pass = diag.max_delta <= diag.max_allowance;
  return diag;
}

CouplingStats coupling_experiment(const PairwiseMrf& model, int k,
                                  std::span<const int> a,
                                  std::span<const int> a_prime, int runs,
                                  int sweeps, const Rng& base, int workers,
                                  int burn_in) {
  if (runs < 1) throw InvalidInput("runs must be >= 1");
  if (burn_in < 0) throw InvalidInput("burn_in must be >= 0");
  CouplingStats stats;
  stats.k = k;
  stats.runs = runs;
  stats.alpha = dobrushin_alpha(exact_joint(model));
  stats.bound = stats.alpha < 1.0
                    ? k * stats.alpha / (1.0 - stats.alpha)
                    : std::numeric_limits<double>::infinity();

  std::vector<std::vector<int>> traces(runs);
  std::vector<int> a_copy(a.begin(), a.end());
  std::vector<int> ap_copy(a_prime.begin(), a_prime.end());
  parallel_for(runs, workers, [&](int trial) {
    Rng rng = base.fork(trial);
    coupled_gibbs_run(model, k, a_copy, ap_copy, burn_in + sweeps, rng,
                      &traces[trial]);
  });

  stats.sweep_mean.assign(sweeps, 0.0);
  stats.sweep_stderr.assign(sweeps, 0.0);
  for (int s = 0; s < sweeps; ++s) {
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < runs; ++t) {
      const double d = traces[t][burn_in + s];
      sum += d;
      sumsq += d * d;
    }
    const double mean = sum / runs;
    const double var = std::max(0.0, sumsq / runs - mean * mean);
    stats.sweep_mean[s] = mean;
    stats.sweep_stderr[s] = std::sqrt(var / runs);
  }
  stats.mean_hamming = stats.sweep_mean.back();
  stats.stderr_mean = stats.sweep_stderr.back();
  stats.pass = true;
  for (int s = 0; s < sweeps; ++s) {
    if (stats.sweep_mean[s] > stats.bound + 3.0 * stats.sweep_stderr[s]) {
      stats.pass = false;
      break;
    }
  }
  return stats;
}

}  // namespace dobrlab
