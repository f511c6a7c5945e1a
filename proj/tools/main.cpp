// dobrlab: influence/temperature reports, Gibbs sampling and coupling
// experiments, complexity estimation, generalization experiments, bound
// tables, and the lemma verification suites, driven by JSON configs.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dobrlab/complexity.hpp"
#include "dobrlab/gibbs.hpp"
#include "dobrlab/learn.hpp"
#include "dobrlab/model_io.hpp"
#include "dobrlab/mrf.hpp"
#include "dobrlab/parallel.hpp"
#include "dobrlab/rng.hpp"
#include "dobrlab/types.hpp"
#include "dobrlab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dobrlab;

namespace {

// exit-code contract
constexpr int kOk = 0;
constexpr int kStatFail = 1;
constexpr int kInputError = 2;
constexpr int kInternalError = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  bool force = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;  // 0: take from config or default
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what + " is not valid JSON: " + e.what());
  }
}

std::string fnv1a_digest(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
  return buf;
}

std::string full_precision(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_fresh(const fs::path& path, bool force) {
  if (!force && fs::exists(path))
    throw ParseError("refusing to overwrite " + path.string() +
                     " (pass --force to allow)");
}

void write_text(const fs::path& path, const std::string& text, bool force) {
  ensure_fresh(path, force);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows, bool force) {
  std::ostringstream out;
  for (size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << full_precision(row[c]);
    out << "\n";
  }
  write_text(path, out.str(), force);
}

json envelope(const std::string& config_text, std::uint64_t seed) {
  json env;
  env["version"] = kVersion;
  env["seed"] = seed;
  env["config_digest"] = fnv1a_digest(config_text);
  return env;
}

std::uint64_t pick_seed(const CommonOpts& opts, const json& cfg,
                        bool required) {
  if (opts.seed_set) return opts.seed;
  if (cfg.contains("seed")) return cfg["seed"].get<std::uint64_t>();
  if (required)
    throw ParseError("a seed is required: pass --seed or set \"seed\"");
  return 0;
}

int pick_workers(const CommonOpts& opts, const json& cfg) {
  if (opts.workers > 0) return opts.workers;
  if (cfg.contains("workers")) return cfg["workers"].get<int>();
  return default_workers();
}

PairwiseMrf model_from_config(const json& cfg, const std::string& field) {
  if (!cfg.contains(field))
    throw ParseError("config missing field '" + field + "'");
  if (cfg[field].is_string()) return load_model(cfg[field].get<std::string>());
  return parse_model(cfg[field].dump());
}

json matrix_to_json(const Matd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

void write_matrix_csv(const fs::path& path, const Matd& m, bool force) {
  std::vector<std::string> header;
  for (int c = 0; c < m.cols(); ++c) header.push_back("c" + std::to_string(c));
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (int c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  write_csv(path, header, rows, force);
}

// ---------------------------------------------------------------------------
// influence
// ---------------------------------------------------------------------------

int cmd_influence(const std::string& model_path, const CommonOpts& opts) {
  const std::string text = read_file(model_path);
  const PairwiseMrf model = parse_model(text);
  const InfluenceReport report = coefficients(model);

  json out = envelope(text, 0);
  out["m"] = model.num_nodes();
  out["alpha"] = report.alpha;
  out["alpha_log"] = report.alpha_log;
  out["beta"] = report.beta_total;
  out["dobrushin"] = matrix_to_json(report.dobrushin);
  out["log_influence"] = matrix_to_json(report.log_influence);
  out["beta_matrix"] = matrix_to_json(report.beta);
  std::cout << out.dump(2) << "\n";

  if (!opts.out_dir.empty()) {
    const fs::path dir(opts.out_dir);
    write_matrix_csv(dir / "dobrushin.csv", report.dobrushin, opts.force);
    write_matrix_csv(dir / "log_influence.csv", report.log_influence,
                     opts.force);
    write_matrix_csv(dir / "beta.csv", report.beta, opts.force);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// gibbs
// ---------------------------------------------------------------------------

int cmd_gibbs(const CommonOpts& opts) {
  const std::string text = read_file(opts.config_path);
  const json cfg = parse_json(text, "config");
  const PairwiseMrf model = model_from_config(cfg, "model");
  const std::uint64_t seed = pick_seed(opts, cfg, true);
  const int burn_in = cfg.value("burn_in", 1000);
  const int thin = cfg.value("thin", 1);
  const int count = cfg.value("count", 1000);

  Rng rng(seed);
  const auto draws = gibbs_sample(model, burn_in, thin, count, rng);

  json out = envelope(text, seed);
  out["count"] = count;
  out["burn_in"] = burn_in;
  out["thin"] = thin;
  std::cout << out.dump(2) << "\n";

  if (!opts.out_dir.empty()) {
    std::vector<std::string> header;
    for (int i = 0; i < model.num_nodes(); ++i)
      header.push_back("z" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    rows.reserve(draws.size());
    for (const auto& cfg_row : draws)
      rows.emplace_back(cfg_row.begin(), cfg_row.end());
    write_csv(fs::path(opts.out_dir) / "samples.csv", header, rows, opts.force);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// couple
// ---------------------------------------------------------------------------

int cmd_couple(const CommonOpts& opts) {
  const std::string text = read_file(opts.config_path);
  const json cfg = parse_json(text, "config");
  const PairwiseMrf model = model_from_config(cfg, "model");
  const std::uint64_t seed = pick_seed(opts, cfg, true);
  const int workers = pick_workers(opts, cfg);
  const int k = cfg.value("k", 1);
  const int runs = cfg.value("runs", 10000);
  const int sweeps = cfg.value("sweeps", 200);
  const int burn_in = cfg.value("burn_in", 0);
  if (!cfg.contains("a") || !cfg.contains("a_prime"))
    throw ParseError("couple config needs prefix assignments 'a' and 'a_prime'");
  const std::vector<int> a = cfg["a"].get<std::vector<int>>();
  const std::vector<int> a_prime = cfg["a_prime"].get<std::vector<int>>();

  const CouplingStats stats = coupling_experiment(
      model, k, a, a_prime, runs, sweeps, Rng(seed), workers, burn_in);

  json out = envelope(text, seed);
  out["alpha"] = stats.alpha;
  out["bound"] = stats.bound;
  out["mean"] = stats.mean_hamming;
  out["stderr"] = stats.stderr_mean;
  out["runs"] = stats.runs;
  out["k"] = stats.k;
  out["pass"] = stats.pass;
  std::cout << out.dump(2) << "\n";

  if (!opts.out_dir.empty()) {
    std::vector<std::vector<double>> rows;
    for (size_t s = 0; s < stats.sweep_mean.size(); ++s)
      rows.push_back({static_cast<double>(s + 1), stats.sweep_mean[s],
                      stats.sweep_stderr[s]});
    const fs::path dir(opts.out_dir);
    write_csv(dir / "couple.csv", {"sweep", "mean_hamming", "stderr"}, rows,
              opts.force);
    write_text(dir / "couple_summary.json", out.dump(2) + "\n", opts.force);
  }
  return stats.pass ? kOk : kStatFail;
}

// ---------------------------------------------------------------------------
// complexity
// ---------------------------------------------------------------------------

Matd parse_class_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        throw ParseError("class CSV cell is not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("class CSV rows have inconsistent lengths");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("class CSV is empty");
  Matd values(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) values(r, c) = rows[r][c];
  return values;
}

int cmd_complexity(const CommonOpts& opts) {
  const std::string text = read_file(opts.config_path);
  const json cfg = parse_json(text, "config");
  const std::uint64_t seed = pick_seed(opts, cfg, true);
  const int workers = pick_workers(opts, cfg);
  const int draws = cfg.value("draws", 10000);

  FunctionClass cls;
  if (cfg.contains("class_csv"))
    cls.values = parse_class_csv(read_file(cfg["class_csv"].get<std::string>()));
  else if (cfg.contains("class"))
    cls.values = parse_class_csv([&] {
      std::ostringstream flat;
      for (const auto& row : cfg["class"]) {
        for (size_t c = 0; c < row.size(); ++c)
          flat << (c ? "," : "") << row[c].get<double>();
        flat << "\n";
      }
      return flat.str();
    }());
  else
    throw ParseError("complexity config needs 'class_csv' or 'class'");

  const std::string noise = cfg.value("noise", std::string("rademacher"));
  json out = envelope(text, seed);
  if (noise == "exact_rademacher") {
    out["mean"] = exact_rademacher(cls);
    out["stderr"] = 0.0;
    out["draws"] = 0;
    out["kind"] = noise;
  } else {
    NoiseSpec spec = noise == "gaussian" ? NoiseSpec::gaussian()
                                         : NoiseSpec::rademacher();
    if (noise != "gaussian" && noise != "rademacher")
      throw ParseError("unknown noise kind: " + noise);
    const auto est = tau_complexity(cls, spec, draws, Rng(seed), workers);
    out["mean"] = est.mean;
    out["stderr"] = est.stderr_mean;
    out["draws"] = est.draws;
    out["kind"] = noise;
  }
  std::cout << out.dump(2) << "\n";
  if (!opts.out_dir.empty())
    write_text(fs::path(opts.out_dir) / "complexity.json", out.dump(2) + "\n",
               opts.force);
  return kOk;
}

// ---------------------------------------------------------------------------
// learn
// ---------------------------------------------------------------------------

int cmd_learn(const CommonOpts& opts) {
  const std::string text = read_file(opts.config_path);
  const json cfg = parse_json(text, "config");
  const std::uint64_t seed = pick_seed(opts, cfg, true);
  const int workers = pick_workers(opts, cfg);

  if (!cfg.contains("family") || !cfg["family"].contains("kind"))
    throw ParseError("learn config needs family.kind");
  const std::string kind = cfg["family"]["kind"].get<std::string>();
  // the compression scheme follows the hypothesis class unless overridden
  const std::string cls = cfg.value("class", std::string("threshold"));
  const std::string scheme = cfg.value("scheme", cls);
  if (scheme != "threshold" && scheme != "interval")
    throw ParseError("unknown scheme: " + scheme);

  json out = envelope(text, seed);
  std::vector<std::vector<double>> csv_rows;

  if (kind == "theta_chain") {
    GenExperimentConfig gc;
    gc.m_grid = cfg.value("m_grid", std::vector<int>{64, 256, 1024});
    gc.trials = cfg.value("trials", 200);
    const json& family = cfg["family"];
    if (family.contains("c")) gc.coupling_c = family["c"].get<double>();
    gc.row_sum_target = family.value("row_sum_target", 0.4);
    gc.label_threshold = family.value("label_threshold", 0.0);
    gc.flip_prob = cfg.value("flip_prob", 0.15);
    gc.burn_in_sweeps = cfg.value("burn_in", 64);
    gc.pool_target = cfg.value("pool_target", 200000);
    gc.scheme =
        scheme == "threshold" ? SchemeKind::threshold : SchemeKind::interval;
    gc.workers = workers;
    gc.bound_delta = cfg.value("bound_delta", 0.05);
    gc.bound_constant = cfg.value("bound_constant", 1.0);

    const GeneralizationReport report =
        generalization_experiment(gc, Rng(seed));
    for (const auto& row : report.rows)
      csv_rows.push_back({static_cast<double>(row.m),
                          static_cast<double>(row.trials), row.mean_gap,
                          row.stderr_gap, row.bound});
    out["slope"] = report.slope;
    out["slope_stderr"] = report.slope_stderr;
  } else if (kind == "discrete") {
    const PairwiseMrf model = model_from_config(cfg["family"], "model");
    Vecd values(model.num_states());
    if (cfg["family"].contains("state_values")) {
      const auto sv = cfg["family"]["state_values"].get<std::vector<double>>();
      if (static_cast<int>(sv.size()) != model.num_states())
        throw ParseError("state_values must have q entries");
      for (int i = 0; i < values.size(); ++i) values[i] = sv[i];
    } else {
      for (int i = 0; i < values.size(); ++i) values[i] = i;
    }
    const Labeler labeler{cfg["family"].value("label_threshold", 0.0),
                          cfg.value("flip_prob", 0.15)};
    const DiscreteDataModel data(model, values, labeler);
    const int trials = cfg.value("trials", 200);
    const Rng base(seed);
    std::vector<double> gaps(trials);
    parallel_for(trials, workers, [&](int t) {
      Rng rng = base.fork(t);
      const LabeledSample sample = data.sample(rng);
      double train, test;
      if (scheme == "threshold") {
        const auto comp = threshold_compression(sample);
        const auto& h = comp.hypothesis;
        train = empirical_loss([&](double x) { return h.predict(x); }, sample);
        test = data.population_loss([&](double x) { return h.predict(x); });
      } else {
        const auto comp = interval_compression(sample);
        const auto& h = comp.hypothesis;
        train = empirical_loss([&](double x) { return h.predict(x); }, sample);
        test = data.population_loss([&](double x) { return h.predict(x); });
      }
      gaps[t] = std::abs(train - test);
    });
    double sum = 0.0, sumsq = 0.0;
    for (double g : gaps) {
      sum += g;
      sumsq += g * g;
    }
    const double mean = sum / trials;
    const double var = std::max(0.0, sumsq / trials - mean * mean);
    csv_rows.push_back({static_cast<double>(data.sample_size()),
                        static_cast<double>(trials), mean,
                        std::sqrt(var / trials), 0.0});
  } else {
    throw ParseError("unknown family kind: " + kind);
  }

  out["rows"] = json::array();
  for (const auto& row : csv_rows) {
    json jrow;
    jrow["m"] = static_cast<int>(row[0]);
    jrow["trials"] = static_cast<int>(row[1]);
    jrow["mean_gap"] = row[2];
    jrow["stderr"] = row[3];
    jrow["bound"] = row[4];
    out["rows"].push_back(jrow);
  }
  std::cout << out.dump(2) << "\n";

  if (!opts.out_dir.empty()) {
    const fs::path dir(opts.out_dir);
    write_csv(dir / "learn.csv", {"m", "trials", "mean_gap", "stderr", "bound"},
              csv_rows, opts.force);
    write_text(dir / "learn_summary.json", out.dump(2) + "\n", opts.force);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

int cmd_bounds(const CommonOpts& opts) {
  const std::string text = read_file(opts.config_path);
  const json cfg = parse_json(text, "config");

  const auto eps = cfg.value("epsilon_grid", std::vector<double>{0.1});
  const auto deltas = cfg.value("delta_grid", std::vector<double>{0.1});
  const auto ds = cfg.value("d_grid", std::vector<int>{1});
  const auto rows = sample_complexity_table(eps, deltas, ds);

  std::vector<std::vector<double>> csv_rows;
  for (const auto& row : rows)
    csv_rows.push_back({static_cast<double>(row.d), row.epsilon, row.delta,
                        row.m_prior, row.m_this, row.ratio});

  json out = envelope(text, 0);
  out["rows"] = rows.size();

  if (cfg.contains("mohri")) {
    const json& mo = cfg["mohri"];
    const int m = mo.value("m", 1024);
    const int d = mo.value("d", 1);
    const double delta = mo.value("delta", 0.1);
    const double loss_bound = mo.value("L", 1.0);
    const std::string beta_kind = mo.value("beta", std::string("theta_decay"));
    const double c = mo.value("c", 0.1);
    std::function<double(int)> beta_fn;
    if (beta_kind == "zero")
      beta_fn = [](int) { return 0.0; };
    else if (beta_kind == "constant")
      beta_fn = [c](int) { return c; };
    else if (beta_kind == "theta_decay")
      beta_fn = [c](int k) {
        const double l = std::log(k + 1.0);
        return c / (k * l * l);
      };
    else
      throw ParseError("unknown beta kind: " + beta_kind);
    out["mohri_bound"] = mohri_bound(m, d, beta_fn, delta, loss_bound);
  }
  std::cout << out.dump(2) << "\n";

  const fs::path target = opts.out_dir.empty()
                              ? fs::path("bounds.csv")
                              : fs::path(opts.out_dir) / "bounds.csv";
  if (!opts.out_dir.empty())
    write_csv(target, {"d", "epsilon", "delta", "m_prior", "m_this", "ratio"},
              csv_rows, opts.force);
  else
    for (const auto& row : csv_rows) {
      std::ostringstream line;
      for (size_t c2 = 0; c2 < row.size(); ++c2)
        line << (c2 ? "," : "") << full_precision(row[c2]);
      std::cout << line.str() << "\n";
    }
  return kOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

json report_to_json(const LemmaCheckReport& r) {
  json out;
  out["lemma"] = r.lemma;
  out["instances"] = r.instances;
  out["max_violation"] = r.max_violation;
  out["tolerance"] = r.tolerance;
  out["pass"] = r.pass;
  out["seed"] = r.seed;
  if (!r.detail.empty()) out["detail"] = r.detail;
  return out;
}

void merge_into(LemmaCheckReport& total, const LemmaCheckReport& part) {
  total.instances += part.instances;
  total.max_violation = std::max(total.max_violation, part.max_violation);
  total.tolerance = part.tolerance;
  total.pass = total.instances == part.instances
                   ? part.pass
                   : (total.pass && part.pass);
}

LemmaCheckReport run_manifest_entry(const json& entry) {
  if (!entry.contains("lemma"))
    throw ParseError("manifest entry missing 'lemma'");
  const std::string lemma = entry["lemma"].get<std::string>();
  const std::uint64_t seed = entry.value("seed", 0);
  const int instances = entry.value("instances", 50);
  Rng rng(seed);

  auto random_models = [&](int count, auto&& fn) {
    LemmaCheckReport total;
    total.lemma = lemma;
    total.max_violation = -std::numeric_limits<double>::infinity();
    total.pass = true;
    const auto ms = entry.value("m_values", std::vector<int>{2, 3, 4});
    const auto qs = entry.value("q_values", std::vector<int>{2, 3});
    for (int t = 0; t < count; ++t) {
      Rng local = rng.fork(t);
      RandomMrfSpec spec;
      spec.m = ms[t % ms.size()];
      spec.q = qs[(t / ms.size()) % qs.size()];
      spec.log_lo = entry.value("log_lo", -2.0);
      spec.log_hi = entry.value("log_hi", 2.0);
      spec.beta_target = entry.value("beta_target", -1.0);
      const PairwiseMrf model = random_mrf(spec, local);
      merge_into(total, fn(model, local));
    }
    total.seed = seed;
    return total;
  };

  if (lemma == "influence_chain") {
    return random_models(instances, [](const PairwiseMrf& m, Rng&) {
      return check_influence_chain(m);
    });
  }
  if (lemma == "conditioning") {
    const int max_fixed = entry.value("max_fixed", 2);
    return random_models(instances, [&](const PairwiseMrf& m, Rng&) {
      return check_conditioning_exhaustive(m, max_fixed);
    });
  }
  if (lemma == "lemma8") {
    if (entry.contains("quadruples")) {
      LemmaCheckReport total;
      total.lemma = lemma;
      total.pass = true;
      for (const auto& quad : entry["quadruples"]) {
        const auto v = quad.get<std::vector<double>>();
        if (v.size() != 4)
          throw ParseError("lemma8 quadruples need exactly 4 numbers");
        merge_into(total, check_lemma8(v[0], v[1], v[2], v[3]));
      }
      return total;
    }
    return check_lemma8_suite(instances, rng);
  }
  if (lemma == "sigma_shuffle") {
    LemmaCheckReport total;
    total.lemma = lemma;
    total.pass = true;
    const auto thetas = entry.value("thetas", std::vector<double>{0.1, 0.3, 0.5});
    for (double theta : thetas)
      merge_into(total, check_sigma_shuffle(PairwiseMrf::ising_pair(theta)));
    if (entry.value("include_chain3", true))
      for (double theta : thetas)
        merge_into(total,
                   check_sigma_shuffle(PairwiseMrf::ising_chain(3, theta)));
    total.seed = seed;
    return total;
  }
  if (lemma == "concentration") {
    const int m = entry.value("m", 6);
    const double theta = entry.value("theta", 0.25);
    const int samples = entry.value("samples", 100000);
    const auto ts = entry.value("t_grid", std::vector<double>{1, 2, 3, 4, 5, 6});
    PairwiseMrf model = PairwiseMrf::ising_chain(m, theta);
    BoundedDifferenceSpec spec;
    spec.f = [](std::span<const int> w) {
      double total = 0.0;
      for (int v : w) total += (v == 1 ? 1.0 : -1.0);
      return total;
    };
    spec.lambdas = Vecd::Constant(m, 2.0);
    return check_concentration(model, spec, samples, ts, rng);
  }
  if (lemma == "conditional_mean_shift") {
    const int max_pin = entry.value("max_fixed", 1);
    return random_models(instances, [&](const PairwiseMrf& m, Rng& local) {
      const Vecd loss = Vecd::LinSpaced(m.num_states(), 0.0, 1.0);
      std::vector<int> pinned{local.uniform_int(m.num_nodes())};
      if (max_pin >= 2 && m.num_nodes() >= 3) {
        int second = local.uniform_int(m.num_nodes());
        if (second != pinned[0]) pinned.push_back(second);
      }
      return check_conditional_mean_shift(m, loss, pinned);
    });
  }
  if (lemma == "symmetrization") {
    Matd cls;
    if (entry.contains("class")) {
      const auto rows = entry["class"].get<std::vector<std::vector<double>>>();
      cls.resize(rows.size(), rows[0].size());
      for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) cls(r, c) = rows[r][c];
    }
    return random_models(instances, [&](const PairwiseMrf& m, Rng& local) {
      Matd use = cls;
      if (use.size() == 0 || use.cols() != m.num_states()) {
        use.resize(3, m.num_states());
        for (int r = 0; r < use.rows(); ++r)
          for (int c = 0; c < use.cols(); ++c)
            use(r, c) = local.uniform(-1.0, 1.0);
      }
      return check_symmetrization(m, use);
    });
  }
  if (lemma == "slow_mixing") {
    const auto grid =
        entry.value("theta_grid", std::vector<double>{0.01, 0.02, 0.05, 0.1});
    return check_claim_slow_mixing(grid);
  }
  if (lemma == "subgaussian_direction") {
    const int dim = entry.value("dim", 4);
    const double k2 = entry.value("k2", 1.0);
    const int draws = entry.value("draws", 20000);
    const auto ts = entry.value("t_grid", std::vector<double>{0.5, 1, 2, 3});
    const std::string kind = entry.value("sampler", std::string("gaussian"));
    Matd directions(2, dim);
    directions.row(0).setZero();
    directions(0, 0) = 1.0;
    directions.row(1).setConstant(1.0 / std::sqrt(static_cast<double>(dim)));
    std::function<Vecd(Rng&)> sampler;
    if (kind == "gaussian")
      sampler = [dim](Rng& r) {
        Vecd w(dim);
        for (int i = 0; i < dim; ++i) w[i] = r.normal();
        return w;
      };
    else if (kind == "signs")
      sampler = [dim](Rng& r) {
        Vecd w(dim);
        for (int i = 0; i < dim; ++i) w[i] = r.rademacher();
        return w;
      };
    else
      throw ParseError("unknown sampler kind: " + kind);
    return check_subgaussian_direction(sampler, k2, directions, ts, draws, rng);
  }
  throw ParseError("unknown lemma id: " + lemma);
}

int cmd_verify(const std::string& manifest_path, const CommonOpts& opts) {
  const std::string text = read_file(manifest_path);
  const json manifest = parse_json(text, "manifest");
  if (!manifest.is_array())
    throw ParseError("manifest must be a JSON array of suite entries");

  json reports = json::array();
  bool all_pass = true;
  for (const auto& entry : manifest) {
    const LemmaCheckReport report = run_manifest_entry(entry);
    reports.push_back(report_to_json(report));
    all_pass = all_pass && report.pass;
  }
  json out = envelope(text, 0);
  out["reports"] = reports;
  out["pass"] = all_pass;
  std::cout << out.dump(2) << "\n";
  if (!opts.out_dir.empty())
    write_text(fs::path(opts.out_dir) / "verify_report.json",
               out.dump(2) + "\n", opts.force);
  return all_pass ? kOk : kStatFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MRF influence, sampling, complexity and generalization lab"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string model_path, manifest_path;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("--config", opts.config_path, "JSON config file")
          ->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_flag("--force", opts.force, "allow overwriting outputs");
    sub->add_option("--seed", opts.seed, "seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--workers", opts.workers, "worker threads");
  };

  CLI::App* influence = app.add_subcommand("influence", "influence report");
  influence->add_option("model", model_path, "model JSON file")->required();
  add_common(influence, false);

  CLI::App* gibbs = app.add_subcommand("gibbs", "draw Gibbs samples");
  add_common(gibbs, true);

  CLI::App* couple = app.add_subcommand("couple", "coupled-chain experiment");
  add_common(couple, true);

  CLI::App* complexity =
      app.add_subcommand("complexity", "complexity estimation");
  add_common(complexity, true);

  CLI::App* learn = app.add_subcommand("learn", "generalization experiment");
  add_common(learn, true);

  CLI::App* bounds = app.add_subcommand("bounds", "bound comparison tables");
  add_common(bounds, true);

  CLI::App* verify = app.add_subcommand("verify", "lemma verification suites");
  verify->add_option("manifest", manifest_path, "manifest JSON file")
      ->required();
  add_common(verify, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (influence->parsed()) return cmd_influence(model_path, opts);
    if (gibbs->parsed()) return cmd_gibbs(opts);
    if (couple->parsed()) return cmd_couple(opts);
    if (complexity->parsed()) return cmd_complexity(opts);
    if (learn->parsed()) return cmd_learn(opts);
    if (bounds->parsed()) return cmd_bounds(opts);
    if (verify->parsed()) return cmd_verify(manifest_path, opts);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}
