#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dobrlab/rng.hpp"
#include "dobrlab/types.hpp"

namespace dobrlab {

// A finite function class materialized as its value matrix: row f, column i
// holds f(s_i) on the fixed sample points.
struct FunctionClass {
  Matd values;  // |F| x m
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(values.rows()); }
  int num_points() const { return static_cast<int>(values.cols()); }

  // All 2^m sign patterns on m points.
  static FunctionClass all_sign_patterns(int m);
  static FunctionClass singleton_zero(int m);
  // The ≤ m+1 distinct behaviors of one-sided thresholds on the points.
  static FunctionClass thresholds_on(const Vecd& points);
};

enum class NoiseKind { rademacher, gaussian, custom };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::rademacher;
  std::function<Vecd(int, Rng&)> sampler;  // only for custom

  static NoiseSpec rademacher();
  static NoiseSpec gaussian();
  static NoiseSpec custom(std::function<Vecd(int, Rng&)> fn);

  Vecd draw(int m, Rng& rng) const;
};

struct ComplexityEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  int draws = 0;
  NoiseKind kind = NoiseKind::rademacher;
};

// (1/m) · max_f Σ_i τ_i f(s_i) for one noise vector.
double sup_correlation(const FunctionClass& cls, const Vecd& tau);

// Monte Carlo mean of sup_correlation over `draws` noise vectors; draw t uses
// the stream base.fork(t).
ComplexityEstimate tau_complexity(const FunctionClass& cls,
                                  const NoiseSpec& noise, int draws,
                                  const Rng& base, int workers = 1);

// Exact average over all 2^m sign vectors (m ≤ 20).
double exact_rademacher(const FunctionClass& cls);

ComplexityEstimate gaussian_complexity(const FunctionClass& cls, int draws,
                                       const Rng& base, int workers = 1);

using SampleDraw = std::function<Vecd(Rng&)>;
using ClassBuilder = std::function<FunctionClass(const Vecd&)>;

// Nested Monte Carlo over samples S ~ sampler of the empirical complexity of
// builder(S); the stderr comes from the outer replicates.
ComplexityEstimate distributional_complexity(const SampleDraw& sampler,
                                             const ClassBuilder& builder,
                                             const NoiseSpec& noise,
                                             int outer_draws, int inner_draws,
                                             const Rng& base);

struct MixtureCheckReport {
  double gc_mixture = 0.0;   // Gaussian complexity under the σ-shuffle of S, S'
  double gc_base = 0.0;      // Gaussian complexity under the sampler itself
  double margin_mean = 0.0;  // mean of (sup_T - 2·sup_S), common noise
  double margin_stderr = 0.0;
  int draws = 0;
  bool pass = false;  // margin_mean ≤ 3·margin_stderr
};

// Checks GC over the shuffled mixture T against twice the base Gaussian
// complexity with common random numbers: draw S, S' and signs σ, mix into T,
// and use the same Gaussian vector for both sides of the comparison.
MixtureCheckReport gc_mixture_inequality_check(const SampleDraw& sampler,
                                               const ClassBuilder& builder,
                                               int draws, const Rng& base);

}  // namespace dobrlab
