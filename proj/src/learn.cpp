#include "dobrlab/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <tuple>

#include "dobrlab/parallel.hpp"

namespace dobrlab {

int zero_one_loss(int y_hat, int y) {
  if ((y_hat != -1 && y_hat != 1) || (y != -1 && y != 1))
    throw InvalidInput("labels must be -1 or +1");
  return y_hat != y ? 1 : 0;
}

double empirical_loss(const Predictor& predict, const LabeledSample& sample) {
  if (sample.size() == 0) throw InvalidInput("empirical loss of an empty sample");
  int errors = 0;
  for (const auto& p : sample.points) errors += zero_one_loss(predict(p.x), p.y);
  return static_cast<double>(errors) / sample.size();
}

namespace {

// Indices sorted by covariate; stable so duplicates keep original order.
std::vector<int> sorted_order(const LabeledSample& sample) {
  std::vector<int> order(sample.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sample.points[a].x < sample.points[b].x;
  });
  return order;
}

struct ThresholdScan {
  double best_cut;
  int best_errors;
  int best_left_index;  // original index of the point left of the cut; -1 at -inf
};

// One pass over all realizable cuts. Cut position c splits sorted points into
// a left part (predicted -1) and right part (predicted +1); errors(c) =
// (+1 labels on the left) + (-1 labels on the right). Leftmost optimum wins.
ThresholdScan scan_thresholds(const LabeledSample& sample) {
  const int m = sample.size();
  const auto order = sorted_order(sample);
  int pos_left = 0;  // +1 labels among the first c sorted points
  int neg_total = 0;
  for (const auto& p : sample.points) neg_total += (p.y == -1);

  ThresholdScan best{-std::numeric_limits<double>::infinity(),
                     neg_total,  // c = 0: everything predicted +1
                     -1};
  int neg_left = 0;
  for (int c = 1; c <= m; ++c) {
    const auto& p = sample.points[order[c - 1]];
    pos_left += (p.y == 1);
    neg_left += (p.y == -1);
    // a cut is realizable after sorted index c-1 only if the next value differs
    if (c < m && sample.points[order[c]].x == p.x) continue;
    const int errors = pos_left + (neg_total - neg_left);
    if (errors < best.best_errors) {
      const double here = p.x;
      const double next = c < m ? sample.points[order[c]].x
                                : p.x + 1.0;  // sentinel above the top
      best = {0.5 * (here + next), errors, order[c - 1]};
      // keep the lowest original index among duplicates of this value
      for (int b = c - 1; b >= 0 && sample.points[order[b]].x == here; --b)
        best.best_left_index = order[b];
    }
  }
  return best;
}

}  // namespace

ThresholdHypothesis erm_threshold(const LabeledSample& sample) {
  if (sample.size() == 0) throw InvalidInput("ERM needs a nonempty sample");
  const ThresholdScan scan = scan_thresholds(sample);
  return {scan.best_cut};
}

ThresholdCompression threshold_compression(const LabeledSample& sample) {
  if (sample.size() == 0) throw InvalidInput("compression needs a nonempty sample");
  const ThresholdScan scan = scan_thresholds(sample);
  ThresholdCompression out;
  if (scan.best_left_index < 0) {
    out.hypothesis = ThresholdHypothesis{};  // constant +1
  } else {
    out.kept_indices.push_back(scan.best_left_index);
    out.hypothesis = ThresholdHypothesis{sample.points[scan.best_left_index].x};
  }
  return out;
}

namespace {

struct Group {
  double x;
  int weight;          // Σ (+1 for y=+1, -1 for y=-1) over duplicates
  int first_original;  // lowest original index with this covariate value
};

std::vector<Group> collapse_duplicates(const LabeledSample& sample) {
  const auto order = sorted_order(sample);
  std::vector<Group> groups;
  for (int idx : order) {
    const auto& p = sample.points[idx];
    if (!groups.empty() && groups.back().x == p.x) {
      groups.back().weight += p.y;
      groups.back().first_original = std::min(groups.back().first_original, idx);
    } else {
      groups.push_back({p.x, p.y, idx});
    }
  }
  return groups;
}

struct IntervalScan {
  int lo = -1, hi = -1;  // group range of the best segment; -1/-1 = empty
  int best_sum = 0;
};

// Maximum-subarray over duplicate groups; the empty segment (sum 0) is the
// constant -1 classifier. First optimal segment wins.
IntervalScan scan_intervals(const std::vector<Group>& groups) {
  IntervalScan best;
  int cur_sum = 0, cur_lo = 0;
  for (int g = 0; g < static_cast<int>(groups.size()); ++g) {
    if (cur_sum <= 0) {
      cur_sum = 0;
      cur_lo = g;
    }
    cur_sum += groups[g].weight;
    if (cur_sum > best.best_sum) best = {cur_lo, g, cur_sum};
  }
  return best;
}

}  // namespace

IntervalHypothesis erm_interval(const LabeledSample& sample) {
  if (sample.size() == 0) throw InvalidInput("ERM needs a nonempty sample");
  const auto groups = collapse_duplicates(sample);
  const IntervalScan scan = scan_intervals(groups);
  if (scan.lo < 0) return IntervalHypothesis{};
  return {false, groups[scan.lo].x, groups[scan.hi].x};
}

IntervalCompression interval_compression(const LabeledSample& sample) {
  if (sample.size() == 0) throw InvalidInput("compression needs a nonempty sample");
  const auto groups = collapse_duplicates(sample);
  const IntervalScan scan = scan_intervals(groups);
  IntervalCompression out;
  if (scan.lo < 0) return out;  // empty interval, no kept points
  out.kept_indices.push_back(groups[scan.lo].first_original);
  if (scan.hi != scan.lo)
    out.kept_indices.push_back(groups[scan.hi].first_original);
  out.hypothesis = {false, groups[scan.lo].x, groups[scan.hi].x};
  return out;
}

int erm_finite(const Matd& predictions, const LabeledSample& sample) {
  if (predictions.cols() != sample.size())
    throw InvalidInput("prediction matrix must cover the sample");
  int best_row = 0;
  int best_errors = sample.size() + 1;
  for (int r = 0; r < predictions.rows(); ++r) {
    int errors = 0;
    for (int i = 0; i < sample.size(); ++i)
      errors += zero_one_loss(predictions(r, i) > 0 ? 1 : -1,
                              sample.points[i].y);
    if (errors < best_errors) {
      best_errors = errors;
      best_row = r;
    }
  }
  return best_row;
}

int vc_dimension(const Matd& values) {
  const int n = static_cast<int>(values.cols());
  if (n < 1 || n > 24) throw EnumerationTooLarge(
      "VC brute force supports domains of at most 24 points");
  // distinct behaviors as bitmasks
  std::vector<std::uint32_t> rows;
  rows.reserve(values.rows());
  for (int r = 0; r < values.rows(); ++r) {
    std::uint32_t mask = 0;
    for (int i = 0; i < n; ++i)
      if (values(r, i) > 0) mask |= (1u << i);
    rows.push_back(mask);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

  int max_d = 0;
  while ((std::size_t{1} << (max_d + 1)) <= rows.size() && max_d + 1 <= n)
    ++max_d;  // shattering d points needs 2^d behaviors

  std::vector<int> cols(n);
  auto shattered = [&](std::uint32_t subset, int d) {
    int nc = 0;
    for (int i = 0; i < n; ++i)
      if (subset & (1u << i)) cols[nc++] = i;
    std::vector<bool> seen(std::size_t{1} << d, false);
    int distinct = 0;
    for (std::uint32_t row : rows) {
      std::uint32_t pattern = 0;
      for (int b = 0; b < d; ++b)
        if (row & (1u << cols[b])) pattern |= (1u << b);
      if (!seen[pattern]) {
        seen[pattern] = true;
        if (++distinct == (1 << d)) return true;
      }
    }
    return false;
  };

  for (int d = max_d; d >= 1; --d) {
    // Gosper's hack over size-d subsets of n columns
    std::uint32_t subset = (1u << d) - 1;
    const std::uint32_t limit = 1u << n;
    while (subset < limit) {
      if (shattered(subset, d)) return d;
      const std::uint32_t c = subset & -subset;
      const std::uint32_t r = subset + c;
      subset = (((r ^ subset) >> 2) / c) | r;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Data models
// ---------------------------------------------------------------------------

DiscreteDataModel::DiscreteDataModel(PairwiseMrf model, Vecd state_values,
                                     Labeler labeler)
    : model_(std::move(model)),
      state_values_(std::move(state_values)),
      labeler_(labeler),
      joint_(exact_joint(model_)) {
  if (state_values_.size() != model_.num_states())
    throw InvalidInput("state values must cover the alphabet");
  cumulative_.resize(joint_.size());
  double acc = 0.0;
  for (std::int64_t idx = 0; idx < joint_.size(); ++idx) {
    acc += joint_.prob(idx);
    cumulative_[idx] = acc;
  }
}

LabeledSample DiscreteDataModel::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto* begin = cumulative_.data();
  const auto* end = begin + cumulative_.size();
  const std::int64_t idx = std::lower_bound(begin, end, u) - begin;
  std::vector<int> config(model_.num_nodes());
  decode_config(std::min(idx, joint_.size() - 1), model_.num_states(), config);
  LabeledSample out;
  out.points.reserve(config.size());
  for (int state : config) {
    const double x = state_values_[state];
    out.points.push_back({x, labeler_.draw(x, rng)});
  }
  return out;
}

double DiscreteDataModel::population_loss(const Predictor& predict) const {
  const int m = model_.num_nodes();
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vecd marg = marginal(joint_, i);
    for (int v = 0; v < model_.num_states(); ++v) {
      const double x = state_values_[v];
      const int clean = labeler_.clean(x);
      const double loss =
          (1.0 - labeler_.flip_prob) * zero_one_loss(predict(x), clean) +
          labeler_.flip_prob * zero_one_loss(predict(x), -clean);
      total += marg[v] * loss;
    }
  }
  return total / m;
}

std::pair<double, double> DiscreteDataModel::population_loss_mc(
    const Predictor& predict, int draws, Rng& rng) const {
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < draws; ++t) {
    const LabeledSample s = sample(rng);
    const double loss = empirical_loss(predict, s);
    sum += loss;
    sumsq += loss * loss;
  }
  const double mean = sum / draws;
  const double var = std::max(0.0, sumsq / draws - mean * mean);
  return {mean, std::sqrt(var / draws)};
}

// ---------------------------------------------------------------------------
// Reference pool
// ---------------------------------------------------------------------------

void ReferencePool::add(double x, int y) {
  xs_.push_back(x);
  ys_.push_back(y);
  finalized_ = false;
}

void ReferencePool::finalize() {
  std::vector<int> order(xs_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return xs_[a] < xs_[b]; });
  std::vector<double> xs(xs_.size());
  std::vector<int> ys(ys_.size());
  for (size_t k = 0; k < order.size(); ++k) {
    xs[k] = xs_[order[k]];
    ys[k] = ys_[order[k]];
  }
  xs_ = std::move(xs);
  ys_ = std::move(ys);
  pos_prefix_.assign(xs_.size() + 1, 0);
  for (size_t k = 0; k < xs_.size(); ++k)
    pos_prefix_[k + 1] = pos_prefix_[k] + (ys_[k] == 1);
  finalized_ = true;
}

double ReferencePool::loss(const ThresholdHypothesis& h) const {
  if (!finalized_ || xs_.empty()) throw InvalidInput("pool not finalized");
  const int n = size();
  // points with x <= cut are predicted -1
  const int left = static_cast<int>(
      std::upper_bound(xs_.begin(), xs_.end(), h.cut) - xs_.begin());
  const int pos_left = pos_prefix_[left];
  const int neg_right = (n - left) - (pos_prefix_[n] - pos_left);
  return static_cast<double>(pos_left + neg_right) / n;
}

double ReferencePool::loss(const IntervalHypothesis& h) const {
  if (!finalized_ || xs_.empty()) throw InvalidInput("pool not finalized");
  const int n = size();
  const int pos_total = pos_prefix_[n];
  if (h.empty) return static_cast<double>(pos_total) / n;
  const int lo = static_cast<int>(
      std::lower_bound(xs_.begin(), xs_.end(), h.lo) - xs_.begin());
  const int hi = static_cast<int>(
      std::upper_bound(xs_.begin(), xs_.end(), h.hi) - xs_.begin());
  const int pos_in = pos_prefix_[hi] - pos_prefix_[lo];
  const int neg_in = (hi - lo) - pos_in;
  return static_cast<double>((pos_total - pos_in) + neg_in) / n;
}

// ---------------------------------------------------------------------------
// Generalization experiment
// ---------------------------------------------------------------------------

namespace {

ThetaChainModel make_chain(const GenExperimentConfig& cfg, int m) {
  if (cfg.coupling_c >= 0.0) return ThetaChainModel(m, cfg.coupling_c);
  return ThetaChainModel::with_row_sum_target(m, cfg.row_sum_target);
}

LabeledSample label_config(const Vecd& x, const Labeler& labeler, Rng& rng) {
  LabeledSample out;
  out.points.reserve(x.size());
  for (int i = 0; i < x.size(); ++i)
    out.points.push_back({x[i], labeler.draw(x[i], rng)});
  return out;
}

}  // namespace

GeneralizationReport generalization_experiment(const GenExperimentConfig& cfg,
                                               const Rng& base) {
  if (cfg.m_grid.empty()) throw InvalidInput("m grid must be nonempty");
  if (cfg.trials < 2) throw InvalidInput("need at least 2 trials");
  const Labeler labeler{cfg.label_threshold, cfg.flip_prob};

  GeneralizationReport report;
  for (size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    const int m = cfg.m_grid[mi];
    if (m < 2) throw InvalidInput("sample sizes must be >= 2");
    const ThetaChainModel chain = make_chain(cfg, m);
    const Rng scoped = base.fork(0x10000 + mi);

    // Reference pool for L_D, pooled over coordinates of fresh draws; chains
    // run in parallel and merge in chain order.
    const int draws_per_chain = std::max(
        1, (cfg.pool_target + cfg.pool_chains * m - 1) / (cfg.pool_chains * m));
    std::vector<std::vector<LabeledPoint>> partial(cfg.pool_chains);
    parallel_for(cfg.pool_chains, cfg.workers, [&](int c) {
      Rng rng = scoped.fork(0x200000 + c);
      ContinuousChainState state = random_state(chain, rng);
      gibbs_sweeps(chain, state, cfg.burn_in_sweeps, rng);
      partial[c].reserve(draws_per_chain * m);
      for (int d = 0; d < draws_per_chain; ++d) {
        gibbs_sweeps(chain, state, cfg.pool_thin_sweeps, rng);
        for (int i = 0; i < m; ++i)
          partial[c].push_back({state.x[i], labeler.draw(state.x[i], rng)});
      }
    });
    ReferencePool pool;
    for (const auto& part : partial)
      for (const auto& p : part) pool.add(p.x, p.y);
    pool.finalize();

    // trial loop
    std::vector<double> gaps(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](int t) {
      Rng rng = scoped.fork(t);
      ContinuousChainState state = random_state(chain, rng);
      gibbs_sweeps(chain, state, cfg.burn_in_sweeps, rng);
      const LabeledSample sample = label_config(state.x, labeler, rng);
      double train = 0.0, test = 0.0;
      if (cfg.scheme == SchemeKind::threshold) {
        const auto comp = threshold_compression(sample);
        const auto& h = comp.hypothesis;
        train = empirical_loss([&](double x) { return h.predict(x); }, sample);
        test = pool.loss(h);
      } else {
        const auto comp = interval_compression(sample);
        const auto& h = comp.hypothesis;
        train = empirical_loss([&](double x) { return h.predict(x); }, sample);
        test = pool.loss(h);
      }
      gaps[t] = std::abs(train - test);
    });

    double sum = 0.0, sumsq = 0.0;
    for (double g : gaps) {
      sum += g;
      sumsq += g * g;
    }
    const double mean = sum / cfg.trials;
    const double var = std::max(0.0, sumsq / cfg.trials - mean * mean);
    const int k = cfg.scheme == SchemeKind::threshold ? 1 : 2;
    const double bound =
        cfg.bound_constant *
        std::sqrt((k * std::log(static_cast<double>(m)) +
                   std::log(1.0 / cfg.bound_delta)) /
                  m);
    report.rows.push_back(
        {m, cfg.trials, mean, std::sqrt(var / cfg.trials), bound});
  }

  std::vector<double> xs, ys;
  bool fittable = report.rows.size() >= 2;
  for (const auto& row : report.rows) {
    xs.push_back(row.m);
    ys.push_back(row.mean_gap);
    fittable = fittable && row.mean_gap > 0.0;
  }
  if (fittable)
    std::tie(report.slope, report.slope_stderr) = fit_loglog_slope(xs, ys);
  return report;
}

std::pair<double, double> fit_loglog_slope(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != x.size())
    throw InvalidInput("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw InvalidInput("log-log fit needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = std::log(y[i]) - (intercept + slope * std::log(x[i]));
    rss += r * r;
  }
  const double se =
      n > 2 ? std::sqrt(rss / (n - 2) / (sxx - sx * sx / n)) : 0.0;
  return {slope, se};
}

double pac_sample_size(int k, double epsilon, double delta, double alpha,
                       double c_alpha) {
  if (k < 1) throw InvalidInput("compression size must be >= 1");
  if (epsilon <= 0.0 || epsilon >= 1.0 || delta <= 0.0 || delta >= 1.0)
    throw InvalidInput("epsilon and delta must lie in (0, 1)");
  if (alpha < 0.0 || alpha >= 1.0)
    throw InvalidInput("alpha must lie in [0, 1)");
  const double eps2 = epsilon * epsilon;
  return (c_alpha * k * std::log(k / eps2) + std::log(1.0 / delta)) /
         ((1.0 - alpha) * eps2);
}

double mohri_bound(int m, int d, const std::function<double(int)>& beta_fn,
                   double delta, double loss_bound) {
  if (m < 2 || d < 1) throw InvalidInput("need m >= 2 and d >= 1");
  double best = std::numeric_limits<double>::infinity();
  if (m % 2 != 0) return best;
  const int half = m / 2;
  for (int mu = 1; mu <= half; ++mu) {
    if (half % mu != 0) continue;
    const int a = half / mu;
    const double slack = delta - 2.0 * (mu - 1) * beta_fn(a);
    if (slack <= 0.0) continue;
    const double value =
        std::sqrt(static_cast<double>(d) / mu) +
        loss_bound * std::sqrt(std::log(2.0 / slack) / (2.0 * mu));
    best = std::min(best, value);
  }
  return best;
}

std::vector<BoundTableRow> sample_complexity_table(
    const std::vector<double>& epsilon_grid,
    const std::vector<double>& delta_grid, const std::vector<int>& d_grid) {
  std::vector<BoundTableRow> rows;
  for (int d : d_grid) {
    for (double eps : epsilon_grid) {
      for (double delta : delta_grid) {
        if (d < 1 || eps <= 0.0 || delta <= 0.0)
          throw InvalidInput("grids must be positive");
        BoundTableRow row;
        row.d = d;
        row.epsilon = eps;
        row.delta = delta;
        row.m_prior =
            static_cast<double>(d) * d / (delta * eps * eps * eps * eps);
        row.m_this = (d + std::log(1.0 / delta)) / (eps * eps);
        row.ratio = row.m_prior / row.m_this;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace dobrlab
