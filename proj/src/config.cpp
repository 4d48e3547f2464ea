#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "attn/dense.hpp"
#include "attn/engine.hpp"
#include "attn/error.hpp"

namespace attn {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void maybe(const json& j, const std::string& key, T& into, const std::string& where) {
  if (j.contains(key)) into = get<T>(j, key, where);
}

bool valid_pauli(char c) { return c == 'x' || c == 'y' || c == 'z' || c == 'i'; }

void check_pair(const std::string& p, const std::string& where) {
  if (p.size() != 2 || !valid_pauli(p[0]) || !valid_pauli(p[1]))
    throw ConfigError(where + ": '" + p + "' is not a pair of x, y, z, i");
}

}  // namespace

std::string_view model_name(ModelKind m) {
  return m == ModelKind::kIsingSquare ? "ising-square" : "heisenberg-triangular";
}

std::string_view ansatz_name(Ansatz a) { return a == Ansatz::kTtn ? "ttn" : "attn"; }

void RunConfig::validate() const {
  if (L < 2 || (L & (L - 1)) != 0) throw ConfigError("L must be a power of two >= 2");
  if (m < 1) throw ConfigError("m must be positive");
  const auto& c = convergence;
  if (c.max_sweeps < 0) throw ConfigError("convergence.max_sweeps must be >= 0");
  if (c.lanczos_max_iter < 1) throw ConfigError("convergence.lanczos_max_iter must be positive");
  if (!(c.lanczos_tol > 0)) throw ConfigError("convergence.lanczos_tol must be positive");
  if (c.de_opt_max_iter < 1) throw ConfigError("convergence.de_opt_max_iter must be positive");
  if (!(c.de_opt_rel_deviation > 0)) throw ConfigError("convergence.de_opt_rel_deviation must be positive");
  if (c.s_ttn < 1) throw ConfigError("convergence.s_ttn must be positive");
  if (ansatz == Ansatz::kAttn && c.max_sweeps > 0 && c.s_ttn > c.max_sweeps)
    throw ConfigError("convergence.s_ttn exceeds max_sweeps");
  if (!(c.svd_cutoff > 0)) throw ConfigError("convergence.svd_cutoff must be positive");
  if (!(c.early_exit_tol > 0)) throw ConfigError("convergence.early_exit_tol must be positive");
  if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be >= 0");
  for (const auto& p : correlations) check_pair(p, "correlations");
}

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const std::string top = "config";
  reject_unknown(j,
                 {"model", "L", "J", "h", "ansatz", "m", "convergence", "output_dir", "checkpoint_interval",
                  "disentangler_budget", "init", "recompression", "correlations"},
                 top);
  for (const char* key : {"model", "L", "ansatz", "m"})
    if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  RunConfig c;
  const auto model = get<std::string>(j, "model", top);
  if (model == "ising-square") {
    c.model = ModelKind::kIsingSquare;
  } else if (model == "heisenberg-triangular") {
    c.model = ModelKind::kHeisenbergTriangular;
  } else {
    throw ConfigError("config.model: unknown model '" + model + "'");
  }
  const auto ansatz = get<std::string>(j, "ansatz", top);
  if (ansatz == "ttn") {
    c.ansatz = Ansatz::kTtn;
  } else if (ansatz == "attn") {
    c.ansatz = Ansatz::kAttn;
  } else {
    throw ConfigError("config.ansatz: unknown ansatz '" + ansatz + "'");
  }
  c.L = get<int>(j, "L", top);
  const auto m = get<long long>(j, "m", top);
  if (m < 1) throw ConfigError("m must be positive");
  c.m = static_cast<std::size_t>(m);
  maybe(j, "J", c.J, top);
  maybe(j, "h", c.h, top);
  maybe(j, "output_dir", c.output_dir, top);
  maybe(j, "checkpoint_interval", c.checkpoint_interval, top);
  if (j.contains("disentangler_budget") && !j["disentangler_budget"].is_null()) {
    const auto b = get<long long>(j, "disentangler_budget", top);
    if (b < 0) throw ConfigError("disentangler_budget must be >= 0");
    c.disentangler_budget = static_cast<std::size_t>(b);
  }
  if (j.contains("init")) {
    const auto init = get<std::string>(j, "init", top);
    if (init == "random") {
      c.init = InitKind::kRandom;
    } else if (init == "product") {
      c.init = InitKind::kProduct;
    } else {
      throw ConfigError("config.init: unknown initialization '" + init + "'");
    }
  }
  if (j.contains("recompression")) {
    const auto r = get<std::string>(j, "recompression", top);
    if (r != "qr" && r != "svd") throw ConfigError("config.recompression: expected 'qr' or 'svd'");
    c.recompress_svd = r == "svd";
  }
  maybe(j, "correlations", c.correlations, top);
  if (j.contains("convergence")) {
    const json& cj = j["convergence"];
    const std::string where = "config.convergence";
    reject_unknown(cj,
                   {"max_sweeps", "lanczos_max_iter", "lanczos_tol", "de_opt_max_iter", "de_opt_rel_deviation",
                    "s_ttn", "svd_cutoff", "seed", "early_exit", "early_exit_tol"},
                   where);
    auto& v = c.convergence;
    maybe(cj, "max_sweeps", v.max_sweeps, where);
    maybe(cj, "lanczos_max_iter", v.lanczos_max_iter, where);
    maybe(cj, "lanczos_tol", v.lanczos_tol, where);
    maybe(cj, "de_opt_max_iter", v.de_opt_max_iter, where);
    maybe(cj, "de_opt_rel_deviation", v.de_opt_rel_deviation, where);
    maybe(cj, "s_ttn", v.s_ttn, where);
    maybe(cj, "svd_cutoff", v.svd_cutoff, where);
    if (cj.contains("seed")) {
      const auto s = get<long long>(cj, "seed", where);
      if (s < 0) throw ConfigError("convergence.seed must be >= 0");
      v.seed = static_cast<std::uint64_t>(s);
    }
    maybe(cj, "early_exit", v.early_exit, where);
    maybe(cj, "early_exit_tol", v.early_exit_tol, where);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  j["model"] = model_name(c.model);
  j["L"] = c.L;
  j["J"] = c.J;
  j["h"] = c.h;
  j["ansatz"] = ansatz_name(c.ansatz);
  j["m"] = c.m;
  j["output_dir"] = c.output_dir;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["disentangler_budget"] = c.disentangler_budget ? json(*c.disentangler_budget) : json(nullptr);
  j["init"] = c.init == InitKind::kRandom ? "random" : "product";
  j["recompression"] = c.recompress_svd ? "svd" : "qr";
  j["correlations"] = c.correlations;
  const auto& v = c.convergence;
  j["convergence"] = {{"max_sweeps", v.max_sweeps},
                      {"lanczos_max_iter", v.lanczos_max_iter},
                      {"lanczos_tol", v.lanczos_tol},
                      {"de_opt_max_iter", v.de_opt_max_iter},
                      {"de_opt_rel_deviation", v.de_opt_rel_deviation},
                      {"s_ttn", v.s_ttn},
                      {"svd_cutoff", v.svd_cutoff},
                      {"seed", v.seed},
                      {"early_exit", v.early_exit},
                      {"early_exit_tol", v.early_exit_tol}};
  return j.dump();
}

TpoOperator build_model(const RunConfig& c) {
  const ModelParams params{c.J, c.h};
  if (c.model == ModelKind::kIsingSquare) return build_ising_tpo({c.L, Geometry::kSquare}, params, hilbert_map(c.L));
  return build_heisenberg_triangular_tpo({c.L, Geometry::kTriangular}, params, hilbert_map(c.L));
}

EdReport run_exact_diagonalization(const RunConfig& c) {
  const TpoOperator op = build_model(c);
  const EdOptions options;
  const EdResult ed = exact_diagonalize(op, options);
  EdReport r;
  r.energy = ed.energy;
  r.density = ed.energy / (c.L * c.L);
  r.dimension = static_cast<std::size_t>(ed.ground_state.size());
  r.dense = r.dimension <= options.dense_limit;
  return r;
}

}  // namespace attn
