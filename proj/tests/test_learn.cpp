#include "dobrlab/learn.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "dobrlab/complexity.hpp"
#include "oracles.hpp"

using namespace dobrlab;
using oracles::best_interval_loss;
using oracles::best_threshold_loss;

namespace {

LabeledSample random_sample(int m, Rng& rng) {
  LabeledSample s;
  for (int i = 0; i < m; ++i)
    s.points.push_back({rng.uniform(-1.0, 1.0), rng.rademacher()});
  return s;
}

}  // namespace

TEST_CASE("zero-one loss basics") {
  CHECK(zero_one_loss(1, 1) == 0);
  CHECK(zero_one_loss(1, -1) == 1);
  CHECK(zero_one_loss(-1, 1) == zero_one_loss(1, -1));
  CHECK_THROWS_AS(zero_one_loss(0, 1), InvalidInput);
}

TEST_CASE("empirical loss on hand-checked data") {
  LabeledSample s;
  s.points = {{-0.9, -1}, {-0.4, -1}, {0.1, 1}, {0.3, -1}, {0.6, 1}, {0.8, 1}};
  ThresholdHypothesis h{0.0};
  // predicts -1,-1,+1,+1,+1,+1: one mistake at x = 0.3
  CHECK(empirical_loss([&](double x) { return h.predict(x); }, s) ==
        doctest::Approx(1.0 / 6).epsilon(1e-12));

  ThresholdHypothesis perfect{0.0};
  LabeledSample clean;
  clean.points = {{-0.5, -1}, {0.5, 1}};
  CHECK(empirical_loss([&](double x) { return perfect.predict(x); }, clean) ==
        0.0);

  LabeledSample flipped;
  flipped.points = {{-0.5, 1}, {0.5, -1}};
  CHECK(empirical_loss([&](double x) { return perfect.predict(x); }, flipped) ==
        1.0);
  CHECK_THROWS_AS(
      empirical_loss([](double) { return 1; }, LabeledSample{}), InvalidInput);
}

TEST_CASE("threshold ERM achieves zero on separable data") {
  LabeledSample s;
  s.points = {{0.3, 1}, {-0.7, -1}, {0.9, 1}, {-0.1, -1}};
  const ThresholdHypothesis h = erm_threshold(s);
  CHECK(empirical_loss([&](double x) { return h.predict(x); }, s) == 0.0);
}

TEST_CASE("all-positive labels give the constant +1 sentinel") {
  LabeledSample s;
  s.points = {{0.3, 1}, {-0.7, 1}, {0.9, 1}};
  const ThresholdHypothesis h = erm_threshold(s);
  CHECK(std::isinf(h.cut));
  CHECK(h.cut < 0);
  CHECK(h.predict(-100.0) == 1);
}

TEST_CASE("threshold ERM matches the exhaustive-cut oracle") {
  Rng rng(211);
  for (int t = 0; t < 300; ++t) {
    Rng local = rng.fork(t);
    const LabeledSample s = random_sample(8, local);
    const ThresholdHypothesis h = erm_threshold(s);
    const double loss =
        empirical_loss([&](double x) { return h.predict(x); }, s);
    CHECK(loss == doctest::Approx(best_threshold_loss(s))
                      .epsilon(1e-12));
  }
}

TEST_CASE("ERM tie-break is deterministic") {
  Rng rng(223);
  const LabeledSample s = random_sample(10, rng);
  const ThresholdHypothesis h1 = erm_threshold(s);
  const ThresholdHypothesis h2 = erm_threshold(s);
  CHECK(h1.cut == h2.cut);
}

TEST_CASE("threshold compression: valid, tight, and small") {
  Rng rng(227);
  for (int t = 0; t < 1000; ++t) {
    Rng local = rng.fork(t);
    const LabeledSample s = random_sample(10, local);
    const auto comp = threshold_compression(s);
    CHECK(comp.kept_indices.size() <= 1);
    const auto& h = comp.hypothesis;
    const double loss =
        empirical_loss([&](double x) { return h.predict(x); }, s);
    CHECK(loss == doctest::Approx(best_threshold_loss(s))
                      .epsilon(1e-12));
    for (int idx : comp.kept_indices) {
      CHECK(idx >= 0);
      CHECK(idx < s.size());
    }
  }
}

TEST_CASE("threshold compression on degenerate samples") {
  LabeledSample all_pos;
  all_pos.points = {{0.1, 1}, {0.2, 1}};
  const auto comp = threshold_compression(all_pos);
  CHECK(comp.kept_indices.empty());
  CHECK(comp.hypothesis.predict(0.0) == 1);

  LabeledSample separable;
  separable.points = {{-0.5, -1}, {0.5, 1}};
  const auto comp2 = threshold_compression(separable);
  const auto& h2 = comp2.hypothesis;
  CHECK(empirical_loss([&](double x) { return h2.predict(x); }, separable) ==
        0.0);
}

TEST_CASE("interval compression: valid, tight, and small") {
  Rng rng(229);
  for (int t = 0; t < 1000; ++t) {
    Rng local = rng.fork(t);
    const LabeledSample s = random_sample(9, local);
    const auto comp = interval_compression(s);
    CHECK(comp.kept_indices.size() <= 2);
    const auto& h = comp.hypothesis;
    const double loss =
        empirical_loss([&](double x) { return h.predict(x); }, s);
    CHECK(loss ==
          doctest::Approx(best_interval_loss(s)).epsilon(1e-12));
  }
}

TEST_CASE("interval compression degenerate cases") {
  LabeledSample all_neg;
  all_neg.points = {{0.1, -1}, {0.4, -1}};
  const auto comp = interval_compression(all_neg);
  CHECK(comp.kept_indices.empty());
  CHECK(comp.hypothesis.empty);

  LabeledSample one_pos;
  one_pos.points = {{-0.3, -1}, {0.2, 1}, {0.7, -1}};
  const auto comp2 = interval_compression(one_pos);
  REQUIRE(comp2.kept_indices.size() == 1);
  CHECK(comp2.kept_indices[0] == 1);
  CHECK(comp2.hypothesis.lo == doctest::Approx(0.2));
  CHECK(comp2.hypothesis.hi == doctest::Approx(0.2));
}

TEST_CASE("interval compression handles duplicate covariates") {
  LabeledSample s;
  s.points = {{0.5, 1}, {0.5, -1}, {-0.2, -1}, {0.9, 1}};
  const auto comp = interval_compression(s);
  const auto& h = comp.hypothesis;
  CHECK(empirical_loss([&](double x) { return h.predict(x); }, s) ==
        doctest::Approx(best_interval_loss(s)).epsilon(1e-12));
}

TEST_CASE("erm over an explicit finite class breaks ties low") {
  LabeledSample s;
  s.points = {{0.0, 1}, {1.0, -1}};
  Matd predictions(3, 2);
  predictions << 1, -1,   // perfect
                 1, -1,   // also perfect
                 -1, 1;   // inverted
  CHECK(erm_finite(predictions, s) == 0);
}

TEST_CASE("vc dimension of canonical classes") {
  Vecd domain(6);
  domain << -2.5, -1.0, -0.2, 0.4, 1.1, 2.0;
  CHECK(vc_dimension(FunctionClass::thresholds_on(domain).values) == 1);

  // intervals over the same domain
  const int n = static_cast<int>(domain.size());
  std::vector<Vecd> rows;
  for (int i = 0; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      Vecd row(n);
      for (int k = 0; k < n; ++k) row[k] = (k >= i && k < j) ? 1.0 : -1.0;
      rows.push_back(row);
    }
  }
  Matd values(static_cast<int>(rows.size()), n);
  for (size_t r = 0; r < rows.size(); ++r) values.row(static_cast<int>(r)) = rows[r];
  CHECK(vc_dimension(values) == 2);

  CHECK(vc_dimension(FunctionClass::all_sign_patterns(5).values) == 5);
}

TEST_CASE("population loss: symmetric marginal gives one half") {
  PairwiseMrf model = PairwiseMrf::ising_chain(3, 0.4);
  Vecd values(2);
  values << -1.0, 1.0;
  const DiscreteDataModel data(model, values, Labeler{0.0, 0.0});
  const double loss = data.population_loss([](double) { return 1; });
  CHECK(loss == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("population loss: exact agrees with Monte Carlo") {
  PairwiseMrf model = PairwiseMrf::ising_chain(3, 0.6);
  model.set_node_potential(0, (Vecd(2) << 0.0, 0.4).finished());
  Vecd values(2);
  values << -1.0, 1.0;
  const DiscreteDataModel data(model, values, Labeler{0.0, 0.1});
  ThresholdHypothesis h{0.0};
  auto predict = [&](double x) { return h.predict(x); };
  const double exact = data.population_loss(predict);
  Rng rng(233);
  const auto [mc, se] = data.population_loss_mc(predict, 20000, rng);
  CHECK(std::abs(mc - exact) < 3.0 * se + 1e-6);
}

TEST_CASE("population loss of a product model is the single-site expectation") {
  PairwiseMrf model(Alphabet::spin(), 4);
  const Vecd phi = (Vecd(2) << 0.0, 0.8).finished();
  for (int i = 0; i < 4; ++i) model.set_node_potential(i, phi);
  Vecd values(2);
  values << -1.0, 1.0;
  const DiscreteDataModel data(model, values, Labeler{0.0, 0.0});
  const double p_plus = std::exp(0.8) / (1.0 + std::exp(0.8));
  // constant -1 classifier errs exactly when the label is +1
  const double loss = data.population_loss([](double) { return -1; });
  CHECK(loss == doctest::Approx(p_plus).epsilon(1e-12));
}

TEST_CASE("loglog slope fit recovers a power law exactly") {
  std::vector<double> xs{10, 100, 1000, 10000};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * std::pow(x, -0.5));
  const auto [slope, se] = fit_loglog_slope(xs, ys);
  CHECK(slope == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(se == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("trivial family: constant labels and constant classifier, zero gap") {
  GenExperimentConfig cfg;
  cfg.m_grid = {16, 32};
  cfg.trials = 10;
  cfg.coupling_c = 0.0;
  cfg.label_threshold = -2.0;  // every covariate is above it: labels all +1
  cfg.flip_prob = 0.0;
  cfg.burn_in_sweeps = 4;
  cfg.pool_target = 2000;
  const auto report = generalization_experiment(cfg, Rng(239));
  for (const auto& row : report.rows) {
    CHECK(row.mean_gap == 0.0);
    CHECK(row.stderr_gap == 0.0);
  }
}

TEST_CASE("generalization gaps stay within the loss range and reproduce") {
  GenExperimentConfig cfg;
  cfg.m_grid = {16, 64};
  cfg.trials = 12;
  cfg.row_sum_target = 0.4;
  cfg.burn_in_sweeps = 8;
  cfg.pool_target = 4000;
  cfg.workers = 2;
  const auto r1 = generalization_experiment(cfg, Rng(241));
  const auto r2 = generalization_experiment(cfg, Rng(241));
  for (size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].mean_gap >= 0.0);
    CHECK(r1.rows[i].mean_gap <= 1.0);
    CHECK(r1.rows[i].mean_gap == r2.rows[i].mean_gap);
  }
  cfg.workers = 1;
  const auto r3 = generalization_experiment(cfg, Rng(241));
  CHECK(r3.rows[0].mean_gap == r1.rows[0].mean_gap);
}

TEST_CASE("pac sample size formula") {
  const double value = pac_sample_size(1, 0.1, 0.01, 0.0, 1.0);
  CHECK(value == doctest::Approx(921.034).epsilon(1e-4));

  // halving delta adds log(2)/((1-alpha) eps^2)
  const double base = pac_sample_size(2, 0.2, 0.1, 0.5, 1.0);
  const double tighter = pac_sample_size(2, 0.2, 0.05, 0.5, 1.0);
  CHECK(tighter - base ==
        doctest::Approx(std::log(2.0) / (0.5 * 0.04)).epsilon(1e-9));

  CHECK(pac_sample_size(3, 0.1, 0.01, 0.2) >
        pac_sample_size(2, 0.1, 0.01, 0.2));
  CHECK_THROWS_AS(pac_sample_size(1, 0.1, 0.01, 1.0), InvalidInput);
}

TEST_CASE("mohri bound: free mixing picks the largest block count") {
  auto zero = [](int) { return 0.0; };
  const int m = 512, d = 3;
  const double L = 1.0, delta = 0.05;
  const double got = mohri_bound(m, d, zero, delta, L);
  const int mu = m / 2;
  const double expect = std::sqrt(static_cast<double>(d) / mu) +
                        L * std::sqrt(std::log(2.0 / delta) / (2.0 * mu));
  CHECK(got == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mohri bound: infeasible splits give infinity") {
  auto zero = [](int) { return 0.0; };
  CHECK(std::isinf(mohri_bound(101, 2, zero, 0.05, 1.0)));  // odd m

  // a never-decaying beta rules out every split except the two-block one
  auto heavy = [](int) { return 1.0; };
  const double got = mohri_bound(100, 2, heavy, 0.05, 1.0);
  const double two_block =
      std::sqrt(2.0) + std::sqrt(std::log(2.0 / 0.05) / 2.0);
  CHECK(got == doctest::Approx(two_block).epsilon(1e-12));
}

TEST_CASE("mohri bound grows with the dimension") {
  auto decay = [](int a) { return 0.1 / a; };
  const double d2 = mohri_bound(1024, 2, decay, 0.2, 1.0);
  const double d8 = mohri_bound(1024, 8, decay, 0.2, 1.0);
  CHECK(d2 < d8);
}

TEST_CASE("sample complexity table reproduces the closed forms") {
  const auto rows = sample_complexity_table({0.1}, {0.1}, {1});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].m_prior == doctest::Approx(1e5).epsilon(1e-12));
  CHECK(rows[0].m_this ==
        doctest::Approx((1.0 + std::log(10.0)) / 0.01).epsilon(1e-12));
  CHECK(rows[0].ratio ==
        doctest::Approx(1e5 / ((1.0 + std::log(10.0)) / 0.01)).epsilon(1e-12));

  // deterministic across calls
  const auto again = sample_complexity_table({0.1}, {0.1}, {1});
  CHECK(again[0].ratio == rows[0].ratio);

  // ratio grows as delta and epsilon shrink
  const auto more = sample_complexity_table({0.1, 0.05}, {0.1}, {1});
  CHECK(more[1].ratio > more[0].ratio);
}

TEST_CASE("vc dimension refuses oversized domains") {
  CHECK_THROWS_AS(vc_dimension(Matd::Zero(2, 25)), EnumerationTooLarge);
}

TEST_CASE("vc dimension is stable across domain sizes") {
  Rng rng(53);
  for (int n : {3, 5, 9, 14}) {
    Vecd domain(n);
    for (int i = 0; i < n; ++i) domain[i] = rng.uniform(-3.0, 3.0);
    std::sort(domain.data(), domain.data() + n);
    CHECK(vc_dimension(FunctionClass::thresholds_on(domain).values) == 1);

    std::vector<Vecd> rows;
    for (int i = 0; i <= n; ++i) {
      for (int j = i; j <= n; ++j) {
        Vecd row(n);
        for (int k = 0; k < n; ++k) row[k] = (k >= i && k < j) ? 1.0 : -1.0;
        rows.push_back(row);
      }
    }
    Matd values(static_cast<int>(rows.size()), n);
    for (size_t r = 0; r < rows.size(); ++r)
      values.row(static_cast<int>(r)) = rows[r];
    CHECK(vc_dimension(values) == 2);
  }
}
