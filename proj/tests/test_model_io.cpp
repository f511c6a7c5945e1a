#include "dobrlab/model_io.hpp"

#include <filesystem>

#include "doctest.h"
#include "dobrlab/verify.hpp"

using namespace dobrlab;

TEST_CASE("model JSON round trip preserves potentials") {
  Rng rng(501);
  const PairwiseMrf model =
      random_mrf({.m = 3, .q = 3, .pair_prob = 1.0}, rng);
  const PairwiseMrf back = parse_model(model_to_json(model));
  CHECK(back.num_nodes() == model.num_nodes());
  CHECK(back.num_states() == model.num_states());
  for (int i = 0; i < 3; ++i)
    CHECK(back.node_potential(i) == model.node_potential(i));
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      CHECK(back.pair_potential(i, j) == model.pair_potential(i, j));
}

TEST_CASE("reversed pair entries land transposed") {
  const PairwiseMrf model = parse_model(R"({
    "alphabet": ["a", "b"],
    "m": 2,
    "node_potentials": [[0, 0], [0, 0]],
    "pair_potentials": [{"i": 1, "j": 0, "table": [[1, 2], [3, 4]]}]
  })");
  // stored canonically under (0,1); querying (1,0) gives the file's table
  const Matd back = model.pair_potential(1, 0);
  CHECK(back(0, 1) == 2.0);
  CHECK(back(1, 0) == 3.0);
  CHECK(model.pair_potential(0, 1)(0, 1) == 3.0);
}

TEST_CASE("parse errors carry actionable messages") {
  CHECK_THROWS_WITH_AS(parse_model("[1,2]"),
                       doctest::Contains("object"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse_model(R"({"alphabet": ["a","b"], "m": 2,
                      "node_potentials": [[0,0]]})"),
      doctest::Contains("m tables"), ParseError);
  CHECK_THROWS_AS(
      parse_model(R"({"alphabet": ["a","b"], "m": 2,
                      "node_potentials": [[0,0],[0,0]],
                      "pair_potentials": [
                        {"i":0,"j":1,"table":[[1,1],[1,1]]},
                        {"i":1,"j":0,"table":[[1,1],[1,1]]}]})"),
      ParseError);
}

TEST_CASE("save and load through a file") {
  Rng rng(503);
  const PairwiseMrf model = random_mrf({.m = 2, .q = 2}, rng);
  const auto path =
      (std::filesystem::temp_directory_path() / "dobrlab_model.json").string();
  save_model(model, path);
  const PairwiseMrf back = load_model(path);
  CHECK(back.node_potential(1) == model.node_potential(1));
}
