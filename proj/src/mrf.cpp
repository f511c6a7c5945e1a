#include "dobrlab/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dobrlab {

Alphabet::Alphabet(std::vector<std::string> names) : labels(std::move(names)) {
  if (labels.size() < 2) throw InvalidInput("alphabet needs at least 2 states");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw InvalidInput("alphabet labels must be distinct");
}

Alphabet Alphabet::spin() { return Alphabet({"-1", "+1"}); }

Alphabet Alphabet::numbered(int q) {
  std::vector<std::string> names;
  names.reserve(q);
  for (int k = 0; k < q; ++k) names.push_back(std::to_string(k));
  return Alphabet(std::move(names));
}

int Alphabet::index_of(const std::string& label) const {
  for (int k = 0; k < size(); ++k)
    if (labels[k] == label) return k;
  throw InvalidInput("unknown alphabet label: " + label);
}

PairwiseMrf::PairwiseMrf(Alphabet alphabet, int num_nodes)
    : alphabet_(std::move(alphabet)), m_(num_nodes) {
  if (m_ < 1) throw InvalidInput("node count must be >= 1");
  node_potentials_.assign(m_, Vecd::Zero(alphabet_.size()));
}

const Vecd& PairwiseMrf::node_potential(int i) const {
  if (i < 0 || i >= m_) throw InvalidInput("node index out of range");
  return node_potentials_[i];
}

void PairwiseMrf::set_node_potential(int i, Vecd phi) {
  if (i < 0 || i >= m_) throw InvalidInput("node index out of range");
  if (phi.size() != alphabet_.size())
    throw InvalidInput("node potential must have q entries");
  if (!phi.allFinite()) throw InvalidInput("node potential must be finite");
  node_potentials_[i] = std::move(phi);
}

bool PairwiseMrf::has_pair(int i, int j) const {
  return pairs_.count({std::min(i, j), std::max(i, j)}) > 0;
}

Matd PairwiseMrf::pair_potential(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= m_ || j >= m_)
    throw InvalidInput("pair indices must be distinct nodes");
  auto it = pairs_.find({std::min(i, j), std::max(i, j)});
  if (it == pairs_.end())
    return Matd::Zero(alphabet_.size(), alphabet_.size());
  return i < j ? it->second : it->second.transpose();
}

void PairwiseMrf::set_pair_potential(int i, int j, const Matd& table) {
  if (i == j || i < 0 || j < 0 || i >= m_ || j >= m_)
    throw InvalidInput("pair indices must be distinct nodes");
  if (table.rows() != alphabet_.size() || table.cols() != alphabet_.size())
    throw InvalidInput("pair potential must be q x q");
  if (!table.allFinite()) throw InvalidInput("pair potential must be finite");
  if (i < j)
    pairs_[{i, j}] = table;
  else
    pairs_[{j, i}] = table.transpose();
}

double PairwiseMrf::beta_entry(int i, int j) const {
  if (!has_pair(i, j)) return 0.0;
  return pair_potential(i, j).cwiseAbs().maxCoeff();
}

PairwiseMrf PairwiseMrf::scaled_pairs(double lambda) const {
  PairwiseMrf out = *this;
  for (auto& [key, table] : out.pairs_) table *= lambda;
  return out;
}

PairwiseMrf PairwiseMrf::ising_pair(double theta) {
  return ising_chain(2, theta);
}

PairwiseMrf PairwiseMrf::ising_chain(int m, double theta) {
  PairwiseMrf model(Alphabet::spin(), m);
  Matd table(2, 2);
  table << theta, -theta, -theta, theta;  // θ·a·b over a,b ∈ {-1,+1}
  for (int i = 0; i + 1 < m; ++i) model.set_pair_potential(i, i + 1, table);
  return model;
}

JointTable::JointTable(Alphabet a, int num_nodes, Vecd lw)
    : alphabet(std::move(a)), m(num_nodes), log_weights(std::move(lw)) {
  std::int64_t expect = 1;
  for (int i = 0; i < m; ++i) expect *= alphabet.size();
  if (log_weights.size() != expect)
    throw InvalidInput("joint table must have q^m entries");
  if (!log_weights.allFinite())
    throw PositivityViolation("joint table requires finite log weights");
  log_partition = log_sum_exp(log_weights);
}

std::int64_t encode_config(std::span<const int> config, int q) {
  std::int64_t idx = 0;
  for (int i = static_cast<int>(config.size()) - 1; i >= 0; --i) {
    idx = idx * q + config[i];
  }
  return idx;
}

void decode_config(std::int64_t idx, int q, std::span<int> out) {
  for (auto& digit : out) {
    digit = static_cast<int>(idx % q);
    idx /= q;
  }
}

double log_unnormalized_weight(const PairwiseMrf& model,
                               std::span<const int> config) {
  const int m = model.num_nodes();
  const int q = model.num_states();
  if (static_cast<int>(config.size()) != m)
    throw InvalidInput("configuration length must equal node count");
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    if (config[i] < 0 || config[i] >= q)
      throw InvalidInput("state index out of alphabet range");
    total += model.node_potential(i)[config[i]];
  }
  for (const auto& [key, table] : model.pairs()) {
    total += table(config[key.first], config[key.second]);
  }
  return total;
}

JointTable exact_joint(const PairwiseMrf& model) {
  const int m = model.num_nodes();
  const int q = model.num_states();
  double log_count = m * std::log(static_cast<double>(q));
  if (log_count > std::log(static_cast<double>(kEnumerationCap)) + 1e-9) {
    throw EnumerationTooLarge("q^m = " + std::to_string(q) + "^" +
                              std::to_string(m) + " exceeds the cap of 2^20");
  }
  std::int64_t total = 1;
  for (int i = 0; i < m; ++i) total *= q;

  Vecd log_weights(total);
  std::vector<int> config(m, 0);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    log_weights[idx] = log_unnormalized_weight(model, config);
    // base-q increment, node 0 least significant
    for (int i = 0; i < m; ++i) {
      if (++config[i] < q) break;
      config[i] = 0;
    }
  }
  return JointTable(model.alphabet(), m, std::move(log_weights));
}

Vecd conditional_distribution(const JointTable& table, int i,
                              std::span<const int> rest) {
  const int q = table.alphabet.size();
  if (i < 0 || i >= table.m) throw InvalidInput("node index out of range");
  if (static_cast<int>(rest.size()) != table.m - 1)
    throw InvalidInput("rest must list the other m-1 states");
  std::vector<int> config(table.m);
  int r = 0;
  for (int k = 0; k < table.m; ++k) {
    if (k == i) continue;
    if (rest[r] < 0 || rest[r] >= q)
      throw InvalidInput("state index out of alphabet range");
    config[k] = rest[r++];
  }
  Vecd logits(q);
  for (int v = 0; v < q; ++v) {
    config[i] = v;
    logits[v] = table.log_weights[encode_config(config, q)];
  }
  return (logits.array() - log_sum_exp(logits)).exp();
}

Vecd marginal(const JointTable& table, int i) {
  const int q = table.alphabet.size();
  Vecd probs = Vecd::Zero(q);
  std::vector<int> config(table.m);
  for (std::int64_t idx = 0; idx < table.size(); ++idx) {
    decode_config(idx, q, config);
    probs[config[i]] += table.prob(idx);
  }
  return probs;
}

namespace {

// Enumerates assignments of all nodes except i and j (kept zero in `config`)
// and invokes fn(config) once per assignment.
template <typename Fn>
void for_each_rest(int m, int q, int i, int j, Fn&& fn) {
  std::vector<int> others;
  for (int k = 0; k < m; ++k)
    if (k != i && k != j) others.push_back(k);
  std::vector<int> config(m, 0);
  std::int64_t count = 1;
  for (size_t k = 0; k < others.size(); ++k) count *= q;
  for (std::int64_t idx = 0; idx < count; ++idx) {
    std::int64_t rem = idx;
    for (int node : others) {
      config[node] = static_cast<int>(rem % q);
      rem /= q;
    }
    fn(config);
  }
}

}  // namespace

double influence(const JointTable& table, int j, int i) {
  if (i == j) throw InvalidInput("influence requires i != j");
  const int q = table.alphabet.size();
  const int m = table.m;
  if (i < 0 || j < 0 || i >= m || j >= m)
    throw InvalidInput("node index out of range");

  double worst = 0.0;
  for_each_rest(m, q, i, j, [&](std::vector<int>& config) {
    // conditional of node i for each value of node j, rest fixed
    Matd conds(q, q);  // column per z_j value
    for (int b = 0; b < q; ++b) {
      config[j] = b;
      Vecd logits(q);
      for (int v = 0; v < q; ++v) {
        config[i] = v;
        logits[v] = table.log_weights[encode_config(config, q)];
      }
      conds.col(b) = (logits.array() - log_sum_exp(logits)).exp();
    }
    for (int b = 0; b < q; ++b)
      for (int b2 = b + 1; b2 < q; ++b2)
        worst = std::max(worst, tv_distance(conds.col(b), conds.col(b2)));
    config[i] = 0;
    config[j] = 0;
  });
  return worst;
}

double log_influence(const JointTable& table, int j, int i) {
  if (i == j) throw InvalidInput("log_influence requires i != j");
  const int q = table.alphabet.size();
  const int m = table.m;
  if (i < 0 || j < 0 || i >= m || j >= m)
    throw InvalidInput("node index out of range");
  if (!table.log_weights.allFinite())
    throw PositivityViolation("log_influence requires positive mass");

  // The cross-ratio cancels the partition function and every term not
  // involving both i and j, so it can be read off the log weights. Each
  // candidate is grouped as (W(a,b) + W(a',b')) - (W(a',b) + W(a,b')), which
  // is invariant under swapping the roles of i and j, making the result
  // symmetric bit for bit.
  double worst = 0.0;
  for_each_rest(m, q, i, j, [&](std::vector<int>& config) {
    Matd w(q, q);
    for (int a = 0; a < q; ++a) {
      config[i] = a;
      for (int b = 0; b < q; ++b) {
        config[j] = b;
        w(a, b) = table.log_weights[encode_config(config, q)];
      }
    }
    for (int a = 0; a < q; ++a)
      for (int a2 = 0; a2 < q; ++a2)
        for (int b = 0; b < q; ++b)
          for (int b2 = 0; b2 < q; ++b2)
            worst = std::max(worst,
                             (w(a, b) + w(a2, b2)) - (w(a2, b) + w(a, b2)));
    config[i] = 0;
    config[j] = 0;
  });
  return 0.25 * worst;
}

double pairwise_log_influence_closed_form(const PairwiseMrf& model, int j,
                                          int i) {
  if (i == j) throw InvalidInput("log influence requires i != j");
  if (!model.has_pair(i, j)) return 0.0;
  const Matd psi = model.pair_potential(i, j);
  const int q = model.num_states();
  double worst = 0.0;
  for (int b = 0; b < q; ++b) {
    for (int b2 = 0; b2 < q; ++b2) {
      const double fwd = (psi.col(b) - psi.col(b2)).maxCoeff();
      const double rev = (psi.col(b2) - psi.col(b)).maxCoeff();
      worst = std::max(worst, fwd + rev);
    }
  }
  return 0.25 * worst;
}

Matd influence_matrix(const JointTable& table) {
  const int m = table.m;
  Matd out = Matd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) out(i, j) = influence(table, j, i);
  return out;
}

double dobrushin_alpha(const JointTable& table) {
  if (table.m == 1) return 0.0;
  return influence_matrix(table).rowwise().sum().maxCoeff();
}

InfluenceReport coefficients(const PairwiseMrf& model) {
  const JointTable table = exact_joint(model);
  const int m = model.num_nodes();
  InfluenceReport report;
  report.dobrushin = influence_matrix(table);
  report.log_influence = Matd::Zero(m, m);
  report.beta = Matd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double li = log_influence(table, j, i);
      report.log_influence(i, j) = li;
      report.log_influence(j, i) = li;
      const double b = model.beta_entry(i, j);
      report.beta(i, j) = b;
      report.beta(j, i) = b;
    }
  }
  if (m > 1) {
    report.alpha = report.dobrushin.rowwise().sum().maxCoeff();
    report.alpha_log = report.log_influence.rowwise().sum().maxCoeff();
    report.beta_total = report.beta.rowwise().sum().maxCoeff();
  }
  return report;
}

JointTable condition(const JointTable& table, const std::map<int, int>& fixed) {
  const int q = table.alphabet.size();
  for (const auto& [node, state] : fixed) {
    if (node < 0 || node >= table.m) throw InvalidInput("fixed node out of range");
    if (state < 0 || state >= q) throw InvalidInput("fixed state out of range");
  }
  std::vector<int> free_nodes;
  for (int k = 0; k < table.m; ++k)
    if (!fixed.count(k)) free_nodes.push_back(k);
  if (free_nodes.empty())
    throw InvalidInput("conditioning must leave at least one free node");

  const int mf = static_cast<int>(free_nodes.size());
  std::int64_t total = 1;
  for (int k = 0; k < mf; ++k) total *= q;

  Vecd log_weights(total);
  std::vector<int> config(table.m);
  for (const auto& [node, state] : fixed) config[node] = state;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (int node : free_nodes) {
      config[node] = static_cast<int>(rem % q);
      rem /= q;
    }
    log_weights[idx] = table.log_weights[encode_config(config, q)];
  }
  if (!std::isfinite(log_sum_exp(log_weights)))
    throw InvalidConditioning("conditioning event has zero probability");
  return JointTable(table.alphabet, mf, std::move(log_weights));
}

}  // namespace dobrlab
