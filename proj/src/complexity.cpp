#include "dobrlab/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "dobrlab/error.hpp"
#include "dobrlab/parallel.hpp"

namespace dobrlab {

FunctionClass FunctionClass::all_sign_patterns(int m) {
  if (m < 1 || m > 20) throw InvalidInput("sign-pattern class needs 1 <= m <= 20");
  const std::int64_t rows = std::int64_t{1} << m;
  FunctionClass cls;
  cls.values.resize(rows, m);
  for (std::int64_t r = 0; r < rows; ++r)
    for (int i = 0; i < m; ++i)
      cls.values(r, i) = (r >> i) & 1 ? 1.0 : -1.0;
  return cls;
}

FunctionClass FunctionClass::singleton_zero(int m) {
  FunctionClass cls;
  cls.values = Matd::Zero(1, m);
  return cls;
}

FunctionClass FunctionClass::thresholds_on(const Vecd& points) {
  const int m = static_cast<int>(points.size());
  std::vector<double> sorted(points.data(), points.data() + m);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  // cuts: below everything, between consecutive distinct values, above
  std::vector<double> cuts;
  cuts.push_back(-std::numeric_limits<double>::infinity());
  for (size_t k = 0; k + 1 < sorted.size(); ++k)
    cuts.push_back(0.5 * (sorted[k] + sorted[k + 1]));
  if (!sorted.empty()) cuts.push_back(sorted.back() + 1.0);

  FunctionClass cls;
  cls.values.resize(static_cast<int>(cuts.size()), m);
  for (size_t r = 0; r < cuts.size(); ++r)
    for (int i = 0; i < m; ++i)
      cls.values(static_cast<int>(r), i) = points[i] > cuts[r] ? 1.0 : -1.0;
  return cls;
}

NoiseSpec NoiseSpec::rademacher() { return {NoiseKind::rademacher, {}}; }
NoiseSpec NoiseSpec::gaussian() { return {NoiseKind::gaussian, {}}; }
NoiseSpec NoiseSpec::custom(std::function<Vecd(int, Rng&)> fn) {
  return {NoiseKind::custom, std::move(fn)};
}

Vecd NoiseSpec::draw(int m, Rng& rng) const {
  Vecd tau(m);
  switch (kind) {
    case NoiseKind::rademacher:
      for (int i = 0; i < m; ++i) tau[i] = rng.rademacher();
      return tau;
    case NoiseKind::gaussian:
      for (int i = 0; i < m; ++i) tau[i] = rng.normal();
      return tau;
    case NoiseKind::custom:
      if (!sampler) throw InvalidInput("custom noise needs a sampler");
      return sampler(m, rng);
  }
  throw InvalidInput("unknown noise kind");
}

double sup_correlation(const FunctionClass& cls, const Vecd& tau) {
  if (tau.size() != cls.num_points())
    throw InvalidInput("noise vector length must match the sample size");
  return (cls.values * tau).maxCoeff() / cls.num_points();
}

namespace {

ComplexityEstimate summarize(const std::vector<double>& sups, NoiseKind kind) {
  const int n = static_cast<int>(sups.size());
  double sum = 0.0, sumsq = 0.0;
  for (double s : sups) {
    sum += s;
    sumsq += s * s;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean);
  return {mean, std::sqrt(var / n), n, kind};
}

}  // namespace

ComplexityEstimate tau_complexity(const FunctionClass& cls,
                                  const NoiseSpec& noise, int draws,
                                  const Rng& base, int workers) {
  if (draws < 1) throw InvalidInput("draws must be >= 1");
  std::vector<double> sups(draws);
  parallel_for(draws, workers, [&](int t) {
    Rng rng = base.fork(t);
    sups[t] = sup_correlation(cls, noise.draw(cls.num_points(), rng));
  });
  return summarize(sups, noise.kind);
}

double exact_rademacher(const FunctionClass& cls) {
  const int m = cls.num_points();
  if (m > 20) throw EnumerationTooLarge("2^" + std::to_string(m) +
                                        " sign vectors exceed the cap of 2^20");
  const std::int64_t total = std::int64_t{1} << m;
  Vecd sigma(m);
  double acc = 0.0;
  for (std::int64_t mask = 0; mask < total; ++mask) {
    for (int i = 0; i < m; ++i) sigma[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    acc += sup_correlation(cls, sigma);
  }
  return acc / static_cast<double>(total);
}

ComplexityEstimate gaussian_complexity(const FunctionClass& cls, int draws,
                                       const Rng& base, int workers) {
  return tau_complexity(cls, NoiseSpec::gaussian(), draws, base, workers);
}

ComplexityEstimate distributional_complexity(const SampleDraw& sampler,
                                             const ClassBuilder& builder,
                                             const NoiseSpec& noise,
                                             int outer_draws, int inner_draws,
                                             const Rng& base) {
  if (outer_draws < 1 || inner_draws < 1)
    throw InvalidInput("draw counts must be >= 1");
  std::vector<double> outer_means(outer_draws);
  for (int o = 0; o < outer_draws; ++o) {
    Rng rng = base.fork(o);
    const Vecd sample = sampler(rng);
    const FunctionClass cls = builder(sample);
    double acc = 0.0;
    for (int t = 0; t < inner_draws; ++t) {
      Rng inner = rng.fork(t + 1);
      acc += sup_correlation(cls, noise.draw(cls.num_points(), inner));
    }
    outer_means[o] = acc / inner_draws;
  }
  return summarize(outer_means, noise.kind);
}

MixtureCheckReport gc_mixture_inequality_check(const SampleDraw& sampler,
                                               const ClassBuilder& builder,
                                               int draws, const Rng& base) {
  if (draws < 1) throw InvalidInput("draws must be >= 1");
  MixtureCheckReport report;
  report.draws = draws;
  double sum_t = 0.0, sum_s = 0.0, sum_d = 0.0, sumsq_d = 0.0;
  for (int t = 0; t < draws; ++t) {
    Rng rng = base.fork(t);
    const Vecd s = sampler(rng);
    const Vecd s_prime = sampler(rng);
    const int m = static_cast<int>(s.size());
    Vecd mixed(m);
    for (int i = 0; i < m; ++i)
      mixed[i] = rng.rademacher() == 1 ? s[i] : s_prime[i];

    const FunctionClass cls_t = builder(mixed);
    const FunctionClass cls_s = builder(s);
    const Vecd g = NoiseSpec::gaussian().draw(m, rng);  // common noise

    const double sup_t = sup_correlation(cls_t, g);
    const double sup_s = sup_correlation(cls_s, g);
    const double diff = sup_t - 2.0 * sup_s;
    sum_t += sup_t;
    sum_s += sup_s;
    sum_d += diff;
    sumsq_d += diff * diff;
  }
  report.gc_mixture = sum_t / draws;
  report.gc_base = sum_s / draws;
  report.margin_mean = sum_d / draws;
  const double var =
      std::max(0.0, sumsq_d / draws - report.margin_mean * report.margin_mean);
  report.margin_stderr = std::sqrt(var / draws);
  report.pass = report.margin_mean <= 3.0 * report.margin_stderr;
  return report;
}

}  // namespace dobrlab
