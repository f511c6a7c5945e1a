#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dobrlab/gibbs.hpp"
#include "dobrlab/mrf.hpp"
#include "dobrlab/rng.hpp"
#include "dobrlab/types.hpp"

namespace dobrlab {

struct LabeledPoint {
  double x = 0.0;
  int y = 0;  // -1 or +1
};

struct LabeledSample {
  std::vector<LabeledPoint> points;
  int size() const { return static_cast<int>(points.size()); }
};

int zero_one_loss(int y_hat, int y);

// h_t(x) = +1 iff x > cut; cut = -inf is the constant +1 classifier.
struct ThresholdHypothesis {
  double cut = -std::numeric_limits<double>::infinity();
  int predict(double x) const { return x > cut ? 1 : -1; }
};

// +1 inside [lo, hi] (inclusive); empty interval is the constant -1.
struct IntervalHypothesis {
  bool empty = true;
  double lo = 0.0;
  double hi = 0.0;
  int predict(double x) const {
    return (!empty && x >= lo && x <= hi) ? 1 : -1;
  }
};

using Predictor = std::function<int(double)>;

double empirical_loss(const Predictor& predict, const LabeledSample& sample);

// ERM over one-sided thresholds: candidate cuts are the -inf sentinel,
// midpoints between consecutive distinct covariates, and a sentinel above the
// largest point. Ties break toward the leftmost cut.
ThresholdHypothesis erm_threshold(const LabeledSample& sample);

// ERM over intervals via maximum-subarray on duplicate-collapsed points.
// Ties break toward the first optimal segment in sorted order.
IntervalHypothesis erm_interval(const LabeledSample& sample);

// ERM over an explicit finite class given its ±1 prediction matrix
// (|H| x m on this sample); ties break toward the lowest row index.
int erm_finite(const Matd& predictions, const LabeledSample& sample);

// Agnostic sample compression for thresholds, size 1: keep the point
// immediately left of the ERM cut (nothing when the cut is the -inf
// sentinel); reconstruction places the cut at that point.
struct ThresholdCompression {
  std::vector<int> kept_indices;  // ≤ 1 original sample indices
  ThresholdHypothesis hypothesis;
};
ThresholdCompression threshold_compression(const LabeledSample& sample);

// Compression for intervals, size 2: keep the boundary points of the optimal
// interval (empty set for the constant -1).
struct IntervalCompression {
  std::vector<int> kept_indices;  // ≤ 2 original sample indices
  IntervalHypothesis hypothesis;
};
IntervalCompression interval_compression(const LabeledSample& sample);

// Largest shattered subset of the domain columns by brute force; `values` is
// the ±1 prediction matrix of the class over a finite domain (≤ 24 points).
int vc_dimension(const Matd& values);

// Ground-truth labels: sign(x - threshold), flipped with probability
// flip_prob.
struct Labeler {
  double threshold = 0.0;
  double flip_prob = 0.0;
  int clean(double x) const { return x > threshold ? 1 : -1; }
  int draw(double x, Rng& rng) const {
    const int y = clean(x);
    return rng.bernoulli(flip_prob) ? -y : y;
  }
};

// Discrete data model: node states carry numeric covariates, labels come from
// the labeler. Supports exact (enumerated) population loss and exact
// ancestral sampling.
class DiscreteDataModel {
 public:
  DiscreteDataModel(PairwiseMrf model, Vecd state_values, Labeler labeler);

  int sample_size() const { return model_.num_nodes(); }
  LabeledSample sample(Rng& rng) const;
  // Exact L_D under the averaged coordinate marginal.
  double population_loss(const Predictor& predict) const;
  // Monte Carlo estimate from exact joint draws; returns (mean, stderr).
  std::pair<double, double> population_loss_mc(const Predictor& predict,
                                               int draws, Rng& rng) const;

 private:
  PairwiseMrf model_;
  Vecd state_values_;
  Labeler labeler_;
  JointTable joint_;
  Vecd cumulative_;  // inverse-CDF table over configurations
};

// Sorted (x, y) pool with prefix counts for O(log n) population-loss lookups
// of thresholds and intervals.
class ReferencePool {
 public:
  void add(double x, int y);
  void finalize();
  int size() const { return static_cast<int>(xs_.size()); }
  double loss(const ThresholdHypothesis& h) const;
  double loss(const IntervalHypothesis& h) const;

 private:
  std::vector<double> xs_;
  std::vector<int> ys_;
  std::vector<int> pos_prefix_;  // count of +1 labels among the first k
  bool finalized_ = false;
};

enum class SchemeKind { threshold, interval };

struct GenExperimentConfig {
  std::vector<int> m_grid;
  int trials = 200;
  // Chain coupling: if coupling_c >= 0 it is used directly, otherwise the
  // constant is chosen per m so the maximal tilt-row sum equals
  // row_sum_target (0 gives the i.i.d. control).
  double coupling_c = -1.0;
  double row_sum_target = 0.4;
  double label_threshold = 0.0;
  double flip_prob = 0.15;
  int burn_in_sweeps = 64;
  SchemeKind scheme = SchemeKind::threshold;
  // Reference pool for L_D: chains x draws sized to reach pool_target pairs.
  int pool_target = 200000;
  int pool_chains = 8;
  int pool_thin_sweeps = 2;
  int workers = 1;
  // Reported bound column: C·R·sqrt((k log m + log(1/δ))/m) with R = 1.
  double bound_delta = 0.05;
  double bound_constant = 1.0;
};

struct GenReportRow {
  int m = 0;
  int trials = 0;
  double mean_gap = 0.0;
  double stderr_gap = 0.0;
  double bound = 0.0;
};

struct GeneralizationReport {
  std::vector<GenReportRow> rows;
  double slope = 0.0;         // least-squares slope of log(gap) vs log(m)
  double slope_stderr = 0.0;  // regression standard error of the slope
};

GeneralizationReport generalization_experiment(const GenExperimentConfig& cfg,
                                               const Rng& base);

// Least squares fit of log(y) against log(x); returns (slope, stderr).
std::pair<double, double> fit_loglog_slope(const std::vector<double>& x,
                                           const std::vector<double>& y);

// (C(α)·k·log(k/ε²) + log(1/δ)) / ((1-α)·ε²).
double pac_sample_size(int k, double epsilon, double delta, double alpha,
                       double c_alpha = 1.0);

// Block-decomposition uniform-convergence bound for stationary β-mixing
// series, minimized over integer splits 2μa = m with δ > 2(μ-1)β(a), using
// sqrt(d/μ) as the complexity term. +inf when no split is feasible.
double mohri_bound(int m, int d, const std::function<double(int)>& beta_fn,
                   double delta, double loss_bound);

struct BoundTableRow {
  int d = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double m_prior = 0.0;  // d² / (δ ε⁴)
  double m_this = 0.0;   // (d + log(1/δ)) / ε²
  double ratio = 0.0;
};

std::vector<BoundTableRow> sample_complexity_table(
    const std::vector<double>& epsilon_grid,
    const std::vector<double>& delta_grid, const std::vector<int>& d_grid);

}  // namespace dobrlab
