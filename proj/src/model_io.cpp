#include "dobrlab/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dobrlab {

using nlohmann::json;

namespace {

Vecd to_vec(const json& arr, const char* what, int expect) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != expect)
    throw ParseError(std::string(what) + ": expected an array of " +
                     std::to_string(expect) + " numbers");
  Vecd v(expect);
  for (int k = 0; k < expect; ++k) {
    if (!arr[k].is_number())
      throw ParseError(std::string(what) + ": entry " + std::to_string(k) +
                       " is not a number");
    v[k] = arr[k].get<double>();
  }
  return v;
}

}  // namespace

PairwiseMrf parse_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model file must be a JSON object");
  for (const char* field : {"alphabet", "m", "node_potentials"})
    if (!doc.contains(field))
      throw ParseError(std::string("model file missing field '") + field + "'");

  if (!doc["alphabet"].is_array() || doc["alphabet"].size() < 2)
    throw ParseError("alphabet must be an array of at least 2 labels");
  std::vector<std::string> labels;
  for (const auto& item : doc["alphabet"]) {
    if (item.is_string())
      labels.push_back(item.get<std::string>());
    else
      labels.push_back(item.dump());
  }

  if (!doc["m"].is_number_integer() || doc["m"].get<int>() < 1)
    throw ParseError("m must be a positive integer");
  const int m = doc["m"].get<int>();
  const int q = static_cast<int>(labels.size());

  PairwiseMrf model{Alphabet(std::move(labels)), m};

  const json& phis = doc["node_potentials"];
  if (!phis.is_array() || static_cast<int>(phis.size()) != m)
    throw ParseError("node_potentials must list m tables");
  for (int i = 0; i < m; ++i)
    model.set_node_potential(i, to_vec(phis[i], "node_potentials", q));

  if (doc.contains("pair_potentials")) {
    const json& pairs = doc["pair_potentials"];
    if (!pairs.is_array()) throw ParseError("pair_potentials must be an array");
    for (const auto& entry : pairs) {
      if (!entry.contains("i") || !entry.contains("j") ||
          !entry.contains("table"))
        throw ParseError("each pair potential needs fields i, j, table");
      const int i = entry["i"].get<int>();
      const int j = entry["j"].get<int>();
      if (i == j || i < 0 || j < 0 || i >= m || j >= m)
        throw ParseError("pair potential indices must be distinct nodes in [0, m)");
      if (model.has_pair(i, j))
        throw ParseError("duplicate pair potential for nodes " +
                         std::to_string(i) + ", " + std::to_string(j));
      const json& rows = entry["table"];
      if (!rows.is_array() || static_cast<int>(rows.size()) != q)
        throw ParseError("pair table must have q rows");
      Matd table(q, q);
      for (int a = 0; a < q; ++a) table.row(a) = to_vec(rows[a], "pair table", q);
      model.set_pair_potential(i, j, table);
    }
  }
  return model;
}

PairwiseMrf load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string model_to_json(const PairwiseMrf& model) {
  json doc;
  doc["alphabet"] = model.alphabet().labels;
  doc["m"] = model.num_nodes();
  json phis = json::array();
  for (int i = 0; i < model.num_nodes(); ++i) {
    json row = json::array();
    for (int v = 0; v < model.num_states(); ++v)
      row.push_back(model.node_potential(i)[v]);
    phis.push_back(row);
  }
  doc["node_potentials"] = phis;
  json pairs = json::array();
  for (const auto& [key, table] : model.pairs()) {
    json entry;
    entry["i"] = key.first;
    entry["j"] = key.second;
    json rows = json::array();
    for (int a = 0; a < model.num_states(); ++a) {
      json row = json::array();
      for (int b = 0; b < model.num_states(); ++b) row.push_back(table(a, b));
      rows.push_back(row);
    }
    entry["table"] = rows;
    pairs.push_back(entry);
  }
  doc["pair_potentials"] = pairs;
  return doc.dump(2);
}

void save_model(const PairwiseMrf& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << model_to_json(model) << "\n";
}

}  // namespace dobrlab
