#include "dobrlab/mrf.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "dobrlab/rng.hpp"
#include "dobrlab/verify.hpp"

using namespace dobrlab;

namespace {

// Second summation path for the log weight: walk every ordered pair once and
// halve, instead of iterating the stored tables.
double log_weight_by_streaming(const PairwiseMrf& model,
                               const std::vector<int>& config) {
  double total = 0.0;
  for (int i = 0; i < model.num_nodes(); ++i)
    total += model.node_potential(i)[config[i]];
  for (int i = 0; i < model.num_nodes(); ++i)
    for (int j = 0; j < model.num_nodes(); ++j)
      if (i != j)
        total += 0.5 * model.pair_potential(i, j)(config[i], config[j]);
  return total;
}

}  // namespace

TEST_CASE("log weight of the all-zero model is zero") {
  PairwiseMrf model(Alphabet::spin(), 3);
  std::vector<int> config{0, 1, 0};
  CHECK(log_unnormalized_weight(model, config) == 0.0);
}

TEST_CASE("two-node Ising weight is a single pair term") {
  PairwiseMrf model = PairwiseMrf::ising_pair(0.5);
  std::vector<int> config{1, 1};  // (+1, +1)
  CHECK(log_unnormalized_weight(model, config) == doctest::Approx(0.5));
  std::vector<int> mixed{0, 1};
  CHECK(log_unnormalized_weight(model, mixed) == doctest::Approx(-0.5));
}

TEST_CASE("log weight matches an independent summation path") {
  Rng rng(20240811);
  for (int trial = 0; trial < 20; ++trial) {
    Rng local = rng.fork(trial);
    PairwiseMrf model = random_mrf({.m = 3, .q = 3, .pair_prob = 1.0}, local);
    std::vector<int> config(3);
    for (auto& c : config) c = local.uniform_int(3);
    CHECK(log_unnormalized_weight(model, config) ==
          doctest::Approx(log_weight_by_streaming(model, config))
              .epsilon(1e-12));
  }
}

TEST_CASE("weight rejects configurations of the wrong length") {
  PairwiseMrf model(Alphabet::spin(), 2);
  std::vector<int> config{0, 0, 1};
  CHECK_THROWS_AS(log_unnormalized_weight(model, config), InvalidInput);
}

TEST_CASE("single free node gives the softmax of its potential") {
  PairwiseMrf model(Alphabet::spin(), 1);
  const JointTable table = exact_joint(model);
  CHECK(table.prob(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(table.prob(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two-node Ising joint matches hand enumeration") {
  const JointTable table = exact_joint(PairwiseMrf::ising_pair(0.5));
  const double agree = std::exp(0.5) / (2 * std::exp(0.5) + 2 * std::exp(-0.5));
  std::vector<int> pp{1, 1}, mm{0, 0}, pm{1, 0};
  CHECK(table.prob(encode_config(pp, 2)) == doctest::Approx(agree).epsilon(1e-12));
  CHECK(table.prob(encode_config(mm, 2)) == doctest::Approx(agree).epsilon(1e-12));
  CHECK(table.prob(encode_config(pm, 2)) ==
        doctest::Approx(0.5 - agree).epsilon(1e-12));
}

TEST_CASE("joint normalizes to one") {
  Rng rng(7);
  PairwiseMrf model = random_mrf({.m = 4, .q = 2}, rng);
  const JointTable table = exact_joint(model);
  double total = 0.0;
  for (std::int64_t idx = 0; idx < table.size(); ++idx) total += table.prob(idx);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pairless model factorizes into per-node softmaxes") {
  Rng rng(11);
  PairwiseMrf model(Alphabet::numbered(3), 3);
  for (int i = 0; i < 3; ++i) {
    Vecd phi(3);
    for (int v = 0; v < 3; ++v) phi[v] = rng.uniform(-2.0, 2.0);
    model.set_node_potential(i, phi);
  }
  const JointTable table = exact_joint(model);
  std::vector<Vecd> softmaxes;
  for (int i = 0; i < 3; ++i) {
    const Vecd& phi = model.node_potential(i);
    softmaxes.push_back((phi.array() - log_sum_exp(phi)).exp());
  }
  std::vector<int> cfg(3);
  for (std::int64_t idx = 0; idx < table.size(); ++idx) {
    decode_config(idx, 3, cfg);
    const double expected =
        softmaxes[0][cfg[0]] * softmaxes[1][cfg[1]] * softmaxes[2][cfg[2]];
    CHECK(table.prob(idx) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("enumeration cap is enforced and names the size") {
  PairwiseMrf model(Alphabet::spin(), 21);
  CHECK_THROWS_WITH_AS(exact_joint(model),
                       doctest::Contains("2^21"), EnumerationTooLarge);
}

TEST_CASE("conditional of an independent node ignores the rest") {
  PairwiseMrf model(Alphabet::spin(), 3);
  model.set_node_potential(1, (Vecd(2) << 0.0, 1.0).finished());
  const JointTable table = exact_joint(model);
  const Vecd expected =
      ((Vecd(2) << 0.0, 1.0).finished().array() -
       log_sum_exp((Vecd(2) << 0.0, 1.0).finished()))
          .exp();
  std::vector<int> rest{0, 1};
  const Vecd cond = conditional_distribution(table, 1, rest);
  CHECK(cond[0] == doctest::Approx(expected[0]).epsilon(1e-12));
  CHECK(cond[1] == doctest::Approx(expected[1]).epsilon(1e-12));
}

TEST_CASE("two-node Ising conditional matches the closed form") {
  const JointTable table = exact_joint(PairwiseMrf::ising_pair(0.5));
  std::vector<int> rest{1};  // other node at +1
  const Vecd cond = conditional_distribution(table, 0, rest);
  const double expect = std::exp(0.5) / (std::exp(0.5) + std::exp(-0.5));
  CHECK(cond[1] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("conditionals normalize for random models") {
  Rng rng(13);
  PairwiseMrf model = random_mrf({.m = 3, .q = 3, .pair_prob = 1.0}, rng);
  const JointTable table = exact_joint(model);
  std::vector<int> rest{2, 0};
  for (int i = 0; i < 3; ++i)
    CHECK(conditional_distribution(table, i, rest).sum() ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("influence vanishes without pair potentials") {
  Rng rng(17);
  PairwiseMrf model = random_mrf({.m = 3, .q = 2, .pair_prob = 0.0}, rng);
  const JointTable table = exact_joint(model);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(influence(table, j, i) == doctest::Approx(0.0));
}

TEST_CASE("two-node Ising influence is tanh(theta)") {
  const JointTable table = exact_joint(PairwiseMrf::ising_pair(0.5));
  CHECK(influence(table, 1, 0) ==
        doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
  CHECK(influence(table, 0, 1) ==
        doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
}

TEST_CASE("influence rejects i == j") {
  const JointTable table = exact_joint(PairwiseMrf::ising_pair(0.5));
  CHECK_THROWS_AS(influence(table, 1, 1), InvalidInput);
}

TEST_CASE("two-node Ising log influence equals theta") {
  const JointTable table = exact_joint(PairwiseMrf::ising_pair(0.5));
  CHECK(log_influence(table, 1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("log influence is symmetric exactly") {
  Rng rng(19);
  PairwiseMrf model = random_mrf({.m = 3, .q = 3, .pair_prob = 1.0}, rng);
  const JointTable table = exact_joint(model);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      CHECK(log_influence(table, j, i) == log_influence(table, i, j));
}

TEST_CASE("log influence matches the pairwise closed form") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Rng local = rng.fork(trial);
    PairwiseMrf model = random_mrf({.m = 3, .q = 2, .pair_prob = 1.0}, local);
    const JointTable table = exact_joint(model);
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        CHECK(log_influence(table, j, i) ==
              doctest::Approx(pairwise_log_influence_closed_form(model, j, i))
                  .epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("closed form on a spin product potential is theta") {
  PairwiseMrf model = PairwiseMrf::ising_pair(0.7);
  CHECK(pairwise_log_influence_closed_form(model, 1, 0) ==
        doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("closed form of a constant pair table is zero") {
  PairwiseMrf model(Alphabet::spin(), 2);
  model.set_pair_potential(0, 1, Matd::Constant(2, 2, 3.25));
  CHECK(pairwise_log_influence_closed_form(model, 1, 0) == 0.0);
}

TEST_CASE("coefficients of the two-node Ising") {
  const InfluenceReport report = coefficients(PairwiseMrf::ising_pair(0.5));
  CHECK(report.alpha == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
  CHECK(report.alpha_log == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.beta_total == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("coefficients vanish for a product model") {
  Rng rng(29);
  PairwiseMrf model = random_mrf({.m = 3, .q = 2, .pair_prob = 0.0}, rng);
  const InfluenceReport report = coefficients(model);
  CHECK(report.alpha == doctest::Approx(0.0));
  CHECK(report.alpha_log == doctest::Approx(0.0));
  CHECK(report.beta_total == 0.0);
}

TEST_CASE("influence chain alpha <= alpha_log <= beta on random models") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Rng local = rng.fork(trial);
    const int m = 2 + local.uniform_int(3);
    const int q = 2 + local.uniform_int(2);
    PairwiseMrf model = random_mrf({.m = m, .q = q}, local);
    const InfluenceReport report = coefficients(model);
    CHECK(report.alpha <= report.alpha_log + 1e-9);
    CHECK(report.alpha_log <= report.beta_total + 1e-9);
  }
}

TEST_CASE("beta scales exactly and alpha, alpha_log monotonically") {
  Rng rng(37);
  PairwiseMrf model = random_mrf({.m = 3, .q = 2, .pair_prob = 1.0,
                                  .beta_target = 0.5}, rng);
  const InfluenceReport base = coefficients(model);
  const InfluenceReport scaled = coefficients(model.scaled_pairs(1.5));
  CHECK(scaled.beta_total == doctest::Approx(1.5 * base.beta_total).epsilon(1e-12));
  CHECK(scaled.alpha >= base.alpha - 1e-9);
  CHECK(scaled.alpha_log >= base.alpha_log - 1e-9);
}

TEST_CASE("conditioning a product model leaves marginals intact") {
  Rng rng(41);
  PairwiseMrf model = random_mrf({.m = 3, .q = 2, .pair_prob = 0.0}, rng);
  const JointTable table = exact_joint(model);
  const Vecd marg2 = marginal(table, 2);
  const JointTable cond = condition(table, {{0, 1}});
  // node 2 of the original is node 1 of the conditioned table
  const Vecd cond_marg = marginal(cond, 1);
  CHECK(cond_marg[0] == doctest::Approx(marg2[0]).epsilon(1e-12));
}

TEST_CASE("conditioning the middle of a chain splits it") {
  PairwiseMrf model = PairwiseMrf::ising_chain(3, 0.6);
  const JointTable table = exact_joint(model);
  const JointTable cond = condition(table, {{1, 1}});
  // the two remaining nodes must be independent: joint = product of marginals
  const Vecd m0 = marginal(cond, 0), m1 = marginal(cond, 1);
  std::vector<int> cfg(2);
  for (std::int64_t idx = 0; idx < cond.size(); ++idx) {
    decode_config(idx, 2, cfg);
    CHECK(cond.prob(idx) ==
          doctest::Approx(m0[cfg[0]] * m1[cfg[1]]).epsilon(1e-12));
  }
  // and each is tilted toward +1
  CHECK(m0[1] > 0.5);
}

TEST_CASE("conditioning never raises the Dobrushin coefficient") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Rng local = rng.fork(trial);
    PairwiseMrf model = random_mrf({.m = 4, .q = 2}, local);
    const auto report = check_conditioning_exhaustive(model, 2);
    CHECK(report.pass);
  }
}

TEST_CASE("invalid conditioning is rejected") {
  const JointTable table = exact_joint(PairwiseMrf::ising_pair(0.5));
  CHECK_THROWS_AS(condition(table, {{0, 5}}), InvalidInput);
  CHECK_THROWS_AS(condition(table, {{0, 0}, {1, 0}}), InvalidInput);
}

TEST_CASE("coefficient monotonicity under pair scaling, random instances") {
  Rng rng(47);
  for (int t = 0; t < 8; ++t) {
    Rng local = rng.fork(t);
    PairwiseMrf model =
        random_mrf({.m = 3, .q = 2, .pair_prob = 1.0, .beta_target = 0.4},
                   local);
    const InfluenceReport base = coefficients(model);
    for (double lambda : {1.5, 2.0}) {
      const InfluenceReport scaled = coefficients(model.scaled_pairs(lambda));
      CHECK(scaled.beta_total ==
            doctest::Approx(lambda * base.beta_total).epsilon(1e-12));
      CHECK(scaled.alpha >= base.alpha - 1e-9);
      CHECK(scaled.alpha_log >= base.alpha_log - 1e-9);
    }
  }
}

TEST_CASE("joint tables require positive mass everywhere") {
  Vecd weights(4);
  weights << 0.0, -std::numeric_limits<double>::infinity(), 0.0, 0.0;
  CHECK_THROWS_AS(JointTable(Alphabet::spin(), 2, weights),
                  PositivityViolation);
}
