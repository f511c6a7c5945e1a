#pragma once

#include <string>

#include "dobrlab/mrf.hpp"

namespace dobrlab {

// Model files are JSON:
//   {
//     "alphabet": ["-1", "+1"],
//     "m": 2,
//     "node_potentials": [[0.0, 0.0], [0.0, 0.0]],
//     "pair_potentials": [{"i": 0, "j": 1, "table": [[0.5,-0.5],[-0.5,0.5]]}]
//   }
// Indices are 0-based; table rows are indexed by z_i, columns by z_j.
PairwiseMrf load_model(const std::string& path);
PairwiseMrf parse_model(const std::string& json_text);
std::string model_to_json(const PairwiseMrf& model);
void save_model(const PairwiseMrf& model, const std::string& path);

}  // namespace dobrlab
