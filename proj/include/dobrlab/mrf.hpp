#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dobrlab/error.hpp"
#include "dobrlab/types.hpp"

namespace dobrlab {

// Finite state space shared by all nodes. Indexing is stable: state k is
// labels[k].
struct Alphabet {
  std::vector<std::string> labels;

  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  // {"-1", "+1"} with numeric values -1, +1.
  static Alphabet spin();
  static Alphabet numbered(int q);

  int size() const { return static_cast<int>(labels.size()); }
  int index_of(const std::string& label) const;
};

// Pairwise-potential MRF over q^m configurations:
//   P(z) ∝ exp( Σ_i φ_i(z_i) + Σ_{i<j} ψ_ij(z_i, z_j) ).
// Pair tables are stored once per unordered pair under the (min,max) key with
// rows indexed by the smaller node's state; querying the reversed pair
// transposes. An absent pair means ψ_ij ≡ 0.
class PairwiseMrf {
 public:
  PairwiseMrf(Alphabet alphabet, int num_nodes);

  int num_nodes() const { return m_; }
  int num_states() const { return alphabet_.size(); }
  const Alphabet& alphabet() const { return alphabet_; }

  const Vecd& node_potential(int i) const;
  void set_node_potential(int i, Vecd phi);

  bool has_pair(int i, int j) const;
  // ψ_ij with rows indexed by z_i and columns by z_j (transposing as needed).
  Matd pair_potential(int i, int j) const;
  void set_pair_potential(int i, int j, const Matd& table);
  const std::map<std::pair<int, int>, Matd>& pairs() const { return pairs_; }

  // sup_{z_i,z_j} |ψ_ij|; zero when the pair is absent.
  double beta_entry(int i, int j) const;

  // Scales every pairwise table by lambda, leaving node potentials alone.
  PairwiseMrf scaled_pairs(double lambda) const;

  // Two-node Ising block over the spin alphabet: ψ(a,b) = θ·a·b.
  static PairwiseMrf ising_pair(double theta);
  // Path graph with a uniform edge weight θ on consecutive nodes.
  static PairwiseMrf ising_chain(int m, double theta);

 private:
  Alphabet alphabet_;
  int m_;
  std::vector<Vecd> node_potentials_;
  std::map<std::pair<int, int>, Matd> pairs_;
};

// Exact normalized joint over all q^m configurations, kept in log space.
// Configurations are encoded base q with node 0 as the least significant
// digit.
struct JointTable {
  Alphabet alphabet;
  int m = 0;
  Vecd log_weights;      // q^m unnormalized log masses
  double log_partition = 0.0;

  JointTable() = default;
  JointTable(Alphabet a, int num_nodes, Vecd lw);

  std::int64_t size() const { return log_weights.size(); }
  double log_prob(std::int64_t idx) const {
    return log_weights[idx] - log_partition;
  }
  double prob(std::int64_t idx) const { return std::exp(log_prob(idx)); }
};

std::int64_t encode_config(std::span<const int> config, int q);
void decode_config(std::int64_t idx, int q, std::span<int> out);

// Σ_i φ_i(z_i) + Σ_{i<j} ψ_ij(z_i, z_j) for one configuration.
double log_unnormalized_weight(const PairwiseMrf& model,
                               std::span<const int> config);

// Full enumeration; throws EnumerationTooLarge past q^m = 2^20.
JointTable exact_joint(const PairwiseMrf& model);

// P(z_i = · | z_{-i} = rest); `rest` lists the other nodes' states in node
// order with node i skipped.
Vecd conditional_distribution(const JointTable& table, int i,
                              std::span<const int> rest);

// Marginal law of node i.
Vecd marginal(const JointTable& table, int i);

// Dobrushin influence I_{j->i}: the worst total-variation swing of node i's
// conditional when only node j's value changes.
double influence(const JointTable& table, int j, int i);

// Log-influence I^log_{j,i}: a quarter of the worst log cross-ratio under
// swaps at nodes i and j. Symmetric in (i, j); requires positive mass
// everywhere.
double log_influence(const JointTable& table, int j, int i);

// (1/4)·max over states of ψ_ij(a,b) + ψ_ij(a',b') - ψ_ij(a',b) - ψ_ij(a,b').
// For a pairwise MRF this equals log_influence exactly.
double pairwise_log_influence_closed_form(const PairwiseMrf& model, int j,
                                          int i);

// Matrix with entry (i, j) = I_{j->i}; diagonal zero.
Matd influence_matrix(const JointTable& table);

// max_i Σ_{j≠i} I_{j->i}.
double dobrushin_alpha(const JointTable& table);

// Influence/temperature summary of a model. dobrushin(i,j) holds I_{j->i},
// log_influence(i,j) holds I^log_{j,i}, beta(i,j) holds sup|ψ_ij|.
struct InfluenceReport {
  Matd dobrushin;
  Matd log_influence;
  Matd beta;
  double alpha = 0.0;       // max row sum of dobrushin
  double alpha_log = 0.0;   // max row sum of log_influence
  double beta_total = 0.0;  // max row sum of beta (inverse temperature)
};

InfluenceReport coefficients(const PairwiseMrf& model);

// Exact conditional joint over the free nodes after pinning `fixed`
// (node -> state), renormalized. Node order of the result is the original
// order with fixed nodes removed.
JointTable condition(const JointTable& table, const std::map<int, int>& fixed);

}  // namespace dobrlab
