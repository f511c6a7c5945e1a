#include "dobrlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dobrlab/gibbs.hpp"

namespace dobrlab {

namespace {

LemmaCheckReport make_report(std::string lemma, double tolerance) {
  LemmaCheckReport r;
  r.lemma = std::move(lemma);
  r.tolerance = tolerance;
  return r;
}

void record(LemmaCheckReport& r, double violation) {
  r.max_violation = std::max(r.max_violation, violation);
}

void finish(LemmaCheckReport& r) { r.pass = r.max_violation <= r.tolerance; }

double binom_stderr(double p_hat, int n) {
  return std::sqrt(std::max(p_hat * (1.0 - p_hat), 1.0 / n) / n);
}

}  // namespace

ExactSampler::ExactSampler(const JointTable& table)
    : m_(table.m), q_(table.alphabet.size()) {
  cumulative_.resize(table.size());
  double acc = 0.0;
  for (std::int64_t idx = 0; idx < table.size(); ++idx) {
    acc += table.prob(idx);
    cumulative_[idx] = acc;
  }
  cumulative_.back() = 1.0;
}

void ExactSampler::draw(Rng& rng, std::span<int> out) const {
  const double u = rng.uniform();
  const auto it =
      std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::int64_t idx = it - cumulative_.begin();
  decode_config(idx, q_, out);
}

PairwiseMrf random_mrf(const RandomMrfSpec& spec, Rng& rng) {
  PairwiseMrf model(spec.q == 2 ? Alphabet::spin() : Alphabet::numbered(spec.q),
                    spec.m);
  auto draw_entry = [&](Rng& r) {
    const double mag = std::exp(r.uniform(spec.log_lo, spec.log_hi));
    return r.rademacher() * mag;
  };
  for (int i = 0; i < spec.m; ++i) {
    Vecd phi(spec.q);
    for (int v = 0; v < spec.q; ++v) phi[v] = draw_entry(rng);
    model.set_node_potential(i, phi);
  }
  bool any_pair = false;
  for (int i = 0; i < spec.m; ++i) {
    for (int j = i + 1; j < spec.m; ++j) {
      if (!rng.bernoulli(spec.pair_prob)) continue;
      any_pair = true;
      Matd table(spec.q, spec.q);
      for (int a = 0; a < spec.q; ++a)
        for (int b = 0; b < spec.q; ++b) table(a, b) = draw_entry(rng);
      model.set_pair_potential(i, j, table);
    }
  }
  if (spec.beta_target >= 0.0 && any_pair) {
    double beta = 0.0;
    for (int i = 0; i < spec.m; ++i) {
      double row = 0.0;
      for (int j = 0; j < spec.m; ++j)
        if (j != i) row += model.beta_entry(i, j);
      beta = std::max(beta, row);
    }
    if (beta > 0.0) return model.scaled_pairs(spec.beta_target / beta);
  }
  return model;
}

LemmaCheckReport check_influence_chain(const PairwiseMrf& model) {
  auto report = make_report("influence_chain", Tol::derived);
  report.instances = 1;
  const InfluenceReport coef = coefficients(model);
  const int m = model.num_nodes();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      record(report, coef.dobrushin(i, j) - coef.log_influence(i, j));
      record(report, coef.log_influence(i, j) - coef.beta(i, j));
    }
  }
  finish(report);
  return report;
}

LemmaCheckReport check_conditioning_preserves_alpha(
    const PairwiseMrf& model, const std::map<int, int>& fixed) {
  auto report = make_report("conditioning_preserves_alpha", Tol::derived);
  report.instances = 1;
  const JointTable joint = exact_joint(model);
  const double alpha = dobrushin_alpha(joint);
  const double alpha_cond = dobrushin_alpha(condition(joint, fixed));
  record(report, alpha_cond - alpha);
  finish(report);
  return report;
}

LemmaCheckReport check_conditioning_exhaustive(const PairwiseMrf& model,
                                               int max_fixed) {
  auto report = make_report("conditioning_preserves_alpha", Tol::derived);
  const JointTable joint = exact_joint(model);
  const double alpha = dobrushin_alpha(joint);
  const int m = model.num_nodes();
  const int q = model.num_states();
  for (int i = 0; i < m; ++i) {
    for (int v = 0; v < q; ++v) {
      record(report, dobrushin_alpha(condition(joint, {{i, v}})) - alpha);
      ++report.instances;
    }
  }
  if (max_fixed >= 2 && m >= 3) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        for (int v = 0; v < q; ++v) {
          for (int w = 0; w < q; ++w) {
            record(report,
                   dobrushin_alpha(condition(joint, {{i, v}, {j, w}})) - alpha);
            ++report.instances;
          }
        }
      }
    }
  }
  finish(report);
  return report;
}

LemmaCheckReport check_lemma8(double m_pp, double m_pm, double m_mp,
                              double m_mm) {
  if (m_pp <= 0.0 || m_pm <= 0.0 || m_mp <= 0.0 || m_mm <= 0.0)
    throw InvalidInput("all four entries must be positive");
  auto report = make_report("lemma8", Tol::exact);
  report.instances = 1;
  const double lhs =
      std::abs(m_pp / (m_pp + m_mp) - m_pm / (m_pm + m_mm));
  const double cross = std::log(m_pp) + std::log(m_mm) - std::log(m_pm) -
                       std::log(m_mp);
  const double rhs = 0.25 * std::abs(cross);
  record(report, lhs - rhs);
  finish(report);
  return report;
}

LemmaCheckReport check_lemma8_suite(int count, Rng& rng) {
  auto report = make_report("lemma8", Tol::exact);
  report.seed = rng.seed();
  for (int t = 0; t < count; ++t) {
    const double a = std::exp(rng.uniform(-6.0, 6.0));
    const double b = std::exp(rng.uniform(-6.0, 6.0));
    const double c = std::exp(rng.uniform(-6.0, 6.0));
    const double d = std::exp(rng.uniform(-6.0, 6.0));
    const auto one = check_lemma8(a, b, c, d);
    record(report, one.max_violation);
  }
  report.instances = count;
  finish(report);
  return report;
}

LemmaCheckReport check_sigma_shuffle(const PairwiseMrf& model) {
  const int m = model.num_nodes();
  const int q = model.num_states();
  const JointTable joint = exact_joint(model);
  const std::int64_t configs = joint.size();
  const std::int64_t sign_count = std::int64_t{1} << m;
  if (configs * configs * sign_count > kEnumerationCap)
    throw EnumerationTooLarge("(q^m)^2 * 2^m exceeds the cap of 2^20");

  // Mixed tolerances (1e-12 identities, 1e-9 influence bounds), so each
  // recorded violation already subtracts its own allowance.
  auto report = make_report("sigma_shuffle", 0.0);
  // Model log-influences, one per unordered pair.
  Matd model_log = Matd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      model_log(i, j) = model_log(j, i) = log_influence(joint, j, i);

  std::vector<int> t_cfg(m), tp_cfg(m), s_cfg(m), sp_cfg(m);
  Vecd sign_log_w(sign_count);
  for (std::int64_t ti = 0; ti < configs; ++ti) {
    decode_config(ti, q, t_cfg);
    for (std::int64_t tpi = 0; tpi < configs; ++tpi) {
      decode_config(tpi, q, tp_cfg);
      // conditional (unnormalized) law of σ given (T, T')
      for (std::int64_t sm = 0; sm < sign_count; ++sm) {
        for (int i = 0; i < m; ++i) {
          const bool keep = (sm >> i) & 1;  // σ_i = +1 keeps t_i in S
          s_cfg[i] = keep ? t_cfg[i] : tp_cfg[i];
          sp_cfg[i] = keep ? tp_cfg[i] : t_cfg[i];
        }
        sign_log_w[sm] = joint.log_weights[encode_config(s_cfg, q)] +
                         joint.log_weights[encode_config(sp_cfg, q)];
      }
      // symmetry: flipping every sign swaps the roles of S and S'
      for (std::int64_t sm = 0; sm < sign_count; ++sm) {
        const std::int64_t flipped = ~sm & (sign_count - 1);
        record(report, std::abs(sign_log_w[sm] - sign_log_w[flipped]));
      }
      const double lognorm = log_sum_exp(sign_log_w);
      const Vecd probs = (sign_log_w.array() - lognorm).exp();
      for (int i = 0; i < m; ++i) {
        double mean = 0.0;
        for (std::int64_t sm = 0; sm < sign_count; ++sm)
          mean += probs[sm] * (((sm >> i) & 1) ? 1.0 : -1.0);
        record(report, std::abs(mean) - Tol::exact);  // zero-mean at 1e-12
      }
      if (m >= 2) {
        const JointTable sign_table(Alphabet::spin(), m, sign_log_w);
        for (int i = 0; i < m; ++i) {
          for (int j = i + 1; j < m; ++j) {
            const double li = log_influence(sign_table, j, i);
            record(report, li - 2.0 * model_log(i, j) - Tol::derived);
          }
        }
      }
      ++report.instances;
    }
  }
  finish(report);
  return report;
}

LemmaCheckReport check_concentration(const PairwiseMrf& model,
                                     const BoundedDifferenceSpec& spec,
                                     int samples,
                                     std::span<const double> t_grid,
                                     Rng& rng, double alpha_hint) {
  const int m = model.num_nodes();
  if (spec.lambdas.size() != m)
    throw InvalidInput("need one lambda per node");
  if ((spec.lambdas.array() < 0.0).any())
    throw InvalidInput("lambdas must be nonnegative");

  const bool enumerable =
      m * std::log(static_cast<double>(model.num_states())) <=
      std::log(static_cast<double>(kEnumerationCap)) + 1e-9;
  if (!enumerable && alpha_hint < 0.0)
    throw InvalidInput(
        "model exceeds the enumeration cap; supply alpha_hint for the Gibbs "
        "path");

  // Lipschitz guard on random configuration pairs.
  {
    Rng guard = rng.fork(1001);
    std::vector<int> w(m), wp(m);
    for (int trial = 0; trial < 1000; ++trial) {
      for (int i = 0; i < m; ++i) {
        w[i] = guard.uniform_int(model.num_states());
        wp[i] = guard.uniform_int(model.num_states());
      }
      double allowed = 0.0;
      for (int i = 0; i < m; ++i)
        if (w[i] != wp[i]) allowed += spec.lambdas[i];
      if (std::abs(spec.f(w) - spec.f(wp)) > allowed + Tol::exact)
        throw GuardFailure(
            "bounded-differences spot check failed: supplied lambdas do not "
            "dominate f");
    }
  }

  auto report = make_report("concentration", 0.0);
  report.seed = rng.seed();
  report.instances = static_cast<int>(t_grid.size());

  double alpha = alpha_hint;
  double mean = 0.0;
  std::vector<double> deviations(samples);
  if (enumerable) {
    const JointTable joint = exact_joint(model);
    alpha = dobrushin_alpha(joint);
    if (alpha >= 1.0) {
      report.detail = "alpha >= 1: bound vacuous";
      report.max_violation = 0.0;
      finish(report);
      return report;
    }
    std::vector<int> cfg(m);
    for (std::int64_t idx = 0; idx < joint.size(); ++idx) {
      decode_config(idx, model.num_states(), cfg);
      mean += joint.prob(idx) * spec.f(cfg);
    }
    const ExactSampler sampler(joint);
    for (int s = 0; s < samples; ++s) {
      sampler.draw(rng, cfg);
      deviations[s] = std::abs(spec.f(cfg) - mean);
    }
    report.detail = "exact draws";
  } else {
    // mean of f from an independent chain, then tail draws from a second one
    const int burn_in = 1000, thin = 2;
    Rng mean_rng = rng.fork(2001);
    const auto mean_draws =
        gibbs_sample(model, burn_in, thin, samples, mean_rng);
    for (const auto& cfg : mean_draws) mean += spec.f(cfg);
    mean /= samples;
    Rng tail_rng = rng.fork(2002);
    const auto tail_draws =
        gibbs_sample(model, burn_in, thin, samples, tail_rng);
    for (int s = 0; s < samples; ++s)
      deviations[s] = std::abs(spec.f(tail_draws[s]) - mean);
    report.detail = "gibbs draws with caller-supplied alpha";
  }

  const double lambda_sq = spec.lambdas.squaredNorm();
  for (double t : t_grid) {
    int exceed = 0;
    for (double d : deviations) exceed += (d >= t);
    const double p_hat = static_cast<double>(exceed) / samples;
    const double bound =
        2.0 * std::exp(-(1.0 - alpha) * t * t / (2.0 * lambda_sq));
    record(report, p_hat - bound - 3.0 * binom_stderr(p_hat, samples));
  }
  finish(report);
  return report;
}

LemmaCheckReport check_conditional_mean_shift(const PairwiseMrf& model,
                                              const Vecd& site_loss,
                                              std::span<const int> pinned) {
  const int m = model.num_nodes();
  const int q = model.num_states();
  if (site_loss.size() != q) throw InvalidInput("need one loss value per state");
  if (site_loss.minCoeff() < 0.0)
    throw InvalidInput("per-state losses must be nonnegative");
  const double loss_range = site_loss.maxCoeff();

  const JointTable joint = exact_joint(model);
  const double alpha = dobrushin_alpha(joint);
  auto report = make_report("conditional_mean_shift", Tol::derived);

  double unconditional = 0.0;
  for (int i = 0; i < m; ++i)
    unconditional += marginal(joint, i).dot(site_loss);
  unconditional /= m;

  const int k = static_cast<int>(pinned.size());
  if (k == 0) {
    report.instances = 1;
    record(report, 0.0);
    finish(report);
    return report;
  }
  const double bound = alpha < 1.0
                           ? (2.0 - alpha) * loss_range * k / ((1.0 - alpha) * m)
                           : std::numeric_limits<double>::infinity();

  std::int64_t assignments = 1;
  for (int i = 0; i < k; ++i) assignments *= q;
  std::vector<int> states(k);
  for (std::int64_t a = 0; a < assignments; ++a) {
    decode_config(a, q, states);
    std::map<int, int> fixed;
    for (int i = 0; i < k; ++i) fixed[pinned[i]] = states[i];
    const JointTable cond = condition(joint, fixed);
    double conditional = 0.0;
    for (int i = 0; i < k; ++i) conditional += site_loss[states[i]];
    for (int i = 0; i < cond.m; ++i)
      conditional += marginal(cond, i).dot(site_loss);
    conditional /= m;
    record(report, std::abs(unconditional - conditional) - bound);
    ++report.instances;
  }
  finish(report);
  return report;
}

LemmaCheckReport check_symmetrization(const PairwiseMrf& model,
                                      const Matd& class_state_values) {
  const int m = model.num_nodes();
  const int q = model.num_states();
  if (class_state_values.cols() != q)
    throw InvalidInput("class must give per-state values (|F| x q)");
  const JointTable joint = exact_joint(model);
  const std::int64_t configs = joint.size();
  if (configs * configs > kEnumerationCap)
    throw EnumerationTooLarge("(q^m)^2 exceeds the cap of 2^20");
  const int num_f = static_cast<int>(class_state_values.rows());

  // per-configuration averages (1/m) Σ_i f(s_i), one column per f
  Matd averages(configs, num_f);
  std::vector<int> cfg(m);
  for (std::int64_t idx = 0; idx < configs; ++idx) {
    decode_config(idx, q, cfg);
    for (int f = 0; f < num_f; ++f) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += class_state_values(f, cfg[i]);
      averages(idx, f) = acc / m;
    }
  }
  Vecd probs(configs);
  for (std::int64_t idx = 0; idx < configs; ++idx) probs[idx] = joint.prob(idx);
  const Vecd means = averages.transpose() * probs;  // E avg_f per f

  double lhs = 0.0;
  for (std::int64_t idx = 0; idx < configs; ++idx)
    lhs += probs[idx] *
           (averages.row(idx).transpose() - means).maxCoeff();

  double rhs = 0.0;
  for (std::int64_t a = 0; a < configs; ++a) {
    double inner = 0.0;
    for (std::int64_t b = 0; b < configs; ++b)
      inner += probs[b] * (averages.row(a) - averages.row(b)).maxCoeff();
    rhs += probs[a] * inner;
  }

  auto report = make_report("symmetrization", Tol::exact);
  report.instances = 1;
  record(report, lhs - rhs);   // LHS ≤ RHS
  record(report, -lhs);        // LHS ≥ 0
  finish(report);
  return report;
}

namespace {

// adaptive Simpson on [a, b] to absolute tolerance
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double whole, double tol,
               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) throw Error("quadrature failed to converge");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

LemmaCheckReport check_claim_slow_mixing(std::span<const double> theta_grid) {
  auto report = make_report("slow_mixing_claim", 0.0);
  double prev = 0.0;
  bool first = true;
  for (double theta : theta_grid) {
    if (theta <= 0.0 || theta > 0.5)
      throw InvalidInput("theta grid must lie in (0, 0.5]");
    // inner integrals in closed form; outer by adaptive quadrature
    auto upper = [theta](double x) {
      const double t = theta * x;
      return std::abs(t) < 1e-12 ? 1.0 + 0.5 * t : std::expm1(t) / t;
    };
    auto full = [theta](double x) {
      const double t = theta * x;
      return std::abs(t) < 1e-12 ? 2.0 + t * t / 3.0
                                 : (std::exp(t) - std::exp(-t)) / t;
    };
    const double num = integrate(upper, 0.0, 1.0, 1e-11);
    const double den = integrate(full, -1.0, 1.0, 1e-11);
    const double prob = num / den;
    if (theta <= 0.1)
      record(report, std::abs(prob - 0.25 - theta / 16.0) - theta * theta);
    if (!first && prob <= prev)
      record(report, prev - prob + Tol::exact);  // must increase with theta
    prev = prob;
    first = false;
    ++report.instances;
  }
  finish(report);
  return report;
}

LemmaCheckReport check_subgaussian_direction(
    const std::function<Vecd(Rng&)>& sampler, double k2,
    const Matd& directions, std::span<const double> t_grid, int draws,
    Rng& rng) {
  if (k2 <= 0.0) throw InvalidInput("variance proxy must be positive");
  auto report = make_report("subgaussian_direction", 0.0);
  report.seed = rng.seed();

  const int num_dirs = static_cast<int>(directions.rows());
  Matd projections(draws, num_dirs);
  for (int s = 0; s < draws; ++s) {
    const Vecd w = sampler(rng);
    if (w.size() != directions.cols())
      throw InvalidInput("sampler dimension must match the directions");
    projections.row(s) = (directions * w).transpose();
  }
  for (int d = 0; d < num_dirs; ++d) {
    const double norm_sq = directions.row(d).squaredNorm();
    for (double t : t_grid) {
      int exceed = 0;
      for (int s = 0; s < draws; ++s)
        exceed += (std::abs(projections(s, d)) > t);
      const double p_hat = static_cast<double>(exceed) / draws;
      const double bound = 2.0 * std::exp(-t * t / (2.0 * k2 * norm_sq));
      record(report, p_hat - bound - 3.0 * binom_stderr(p_hat, draws));
      ++report.instances;
    }
  }
  finish(report);
  return report;
}

}  // namespace dobrlab
