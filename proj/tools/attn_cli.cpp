#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "attn/engine.hpp"
#include "attn/error.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> max_sweeps;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw attn::IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply(attn::RunConfig& c, const Overrides& o) {
  if (o.seed) c.convergence.seed = *o.seed;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.max_sweeps) c.convergence.max_sweeps = *o.max_sweeps;
  if (c.output_dir.empty()) c.output_dir = "attn_out";
  c.validate();
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

attn::RunRecord run_and_emit(const attn::RunConfig& config, const std::optional<attn::Checkpoint>& resume) {
  auto result = attn::run_ground_state_search(config, resume);
  const fs::path dir = config.output_dir;
  if (!config.correlations.empty()) {
    attn::MeasurementRequests req;
    req.correlations = config.correlations;
    const auto table = attn::measure_observables(result.state, result.layer, req);
    result.record.correlation_files = attn::emit_measurements(dir, table);
  }
  attn::save_checkpoint(dir / "checkpoint.bin", {config, result.state, result.layer, result.record});
  attn::emit_results(dir, config, result.record);
  return result.record;
}

int cmd_run(const std::string& config_path, const Overrides& o, const std::optional<std::string>& resume_path) {
  auto config = attn::load_run_config(config_path);
  apply(config, o);
  std::optional<attn::Checkpoint> resume;
  if (resume_path) resume = attn::load_checkpoint(*resume_path);
  const auto record = run_and_emit(config, resume);
  const auto e = record.final_energy();
  std::cout << fmt::format("{{\"status\":\"ok\",\"sweeps\":{},\"final_energy\":{},\"output_dir\":{}}}\n",
                           record.sweeps.size(), e ? num(*e) : "null", json(config.output_dir).dump());
  return 0;
}

int cmd_ed(const std::string& config_path, const Overrides& o) {
  auto config = attn::load_run_config(config_path);
  const bool write = o.output_dir.has_value();
  apply(config, o);
  const auto r = attn::run_exact_diagonalization(config);
  const std::string line =
      fmt::format("{{\"status\":\"ok\",\"energy\":{},\"density\":{},\"dimension\":{},\"method\":\"{}\"}}", num(r.energy),
                  num(r.density), r.dimension, r.dense ? "dense" : "lanczos");
  if (write) {
    fs::create_directories(config.output_dir);
    std::ofstream out(fs::path(config.output_dir) / "ed.json");
    out << line << "\n";
    if (!out) throw attn::IoError("cannot write ed.json");
  }
  std::cout << line << "\n";
  return 0;
}

int cmd_measure(const std::string& checkpoint_path, const std::string& requests_path, const Overrides& o) {
  auto ck = attn::load_checkpoint(checkpoint_path);
  const auto requests = attn::parse_measurement_requests(read_file(requests_path));
  const fs::path dir = o.output_dir ? fs::path(*o.output_dir) : fs::path(checkpoint_path).parent_path();
  const auto table = attn::measure_observables(ck.state, ck.layer, requests);
  const auto files = attn::emit_measurements(dir.empty() ? fs::path(".") : dir, table);
  std::cout << fmt::format("{{\"status\":\"ok\",\"files\":{}}}\n", json(files).dump());
  return 0;
}

/// Sets a dotted key such as "convergence.seed" in a config object.
void set_dotted(json& j, const std::string& key, const json& value) {
  json* at = &j;
  std::string rest = key;
  for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
    at = &(*at)[rest.substr(0, dot)];
    rest = rest.substr(dot + 1);
  }
  (*at)[rest] = value;
}

int cmd_bench(const std::string& grid_path, const Overrides& o) {
  json grid;
  try {
    grid = json::parse(read_file(grid_path));
  } catch (const json::parse_error& e) {
    throw attn::ConfigError(std::string("grid is not valid JSON: ") + e.what());
  }
  for (const auto& [key, value] : grid.items())
    if (key != "base" && key != "grid" && key != "parallel" && key != "output_dir")
      throw attn::ConfigError("grid: unknown key '" + key + "'");
  if (!grid.contains("base") || !grid["base"].is_object()) throw attn::ConfigError("grid: missing 'base' object");
  const json axes = grid.value("grid", json::object());
  if (!axes.is_object()) throw attn::ConfigError("grid.grid: expected an object of lists");
  std::vector<std::pair<std::string, std::vector<json>>> dims;
  for (const auto& [key, values] : axes.items()) {
    if (!values.is_array() || values.empty()) throw attn::ConfigError("grid." + key + ": expected a non-empty list");
    dims.emplace_back(key, values.get<std::vector<json>>());
  }
  const fs::path root = o.output_dir ? fs::path(*o.output_dir) : fs::path(grid.value("output_dir", "attn_bench"));
  std::vector<std::pair<attn::RunConfig, std::vector<json>>> runs;
  std::vector<std::size_t> idx(dims.size(), 0);
  for (bool more = true; more;) {
    json cfg = grid["base"];
    std::vector<json> point;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      set_dotted(cfg, dims[k].first, dims[k].second[idx[k]]);
      point.push_back(dims[k].second[idx[k]]);
    }
    cfg["output_dir"] = (root / fmt::format("run_{:04d}", runs.size())).string();
    auto config = attn::parse_run_config(cfg.dump());
    Overrides per_run = o;
    per_run.output_dir.reset();
    apply(config, per_run);
    runs.emplace_back(std::move(config), std::move(point));
    more = false;
    for (std::size_t k = dims.size(); k-- > 0;) {
      if (++idx[k] < dims[k].second.size()) {
        more = true;
        break;
      }
      idx[k] = 0;
    }
  }
  const int parallel = std::max(1, grid.value("parallel", 1));
  std::vector<std::optional<attn::RunRecord>> records(runs.size());
  std::vector<double> seconds(runs.size(), 0.0);
  std::vector<std::string> failures(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < runs.size();) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        records[k] = run_and_emit(runs[k].first, std::nullopt);
      } catch (const attn::Error& e) {
        failures[k] = std::string(attn::error_class_name(e.error_class()));
      }
      seconds[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < parallel; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  fs::create_directories(root);
  std::ofstream out(root / "bench.csv");
  out << "run";
  for (const auto& [key, values] : dims) out << "," << key;
  out << ",final_energy,sweeps,num_disentanglers,seconds,error\n";
  std::size_t failed = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    out << k;
    for (const auto& v : runs[k].second) out << "," << (v.is_string() ? v.get<std::string>() : v.dump());
    const auto& r = records[k];
    const auto e = r ? r->final_energy() : std::nullopt;
    out << "," << (e ? num(*e) : "") << "," << (r ? r->sweeps.size() : 0) << "," << (r ? r->placement.size() : 0)
        << "," << num(seconds[k]) << "," << failures[k] << "\n";
    failed += r ? 0 : 1;
  }
  if (!out) throw attn::IoError("cannot write bench.csv");
  std::cout << fmt::format("{{\"status\":\"{}\",\"runs\":{},\"failed\":{},\"table\":{}}}\n", failed ? "partial" : "ok",
                           runs.size(), failed, json((root / "bench.csv").string()).dump());
  return failed ? static_cast<int>(attn::ErrorClass::kNumerical) : 0;
}

int report(std::string_view cls, const std::string& message, int code) {
  std::cerr << fmt::format("{{\"status\":\"error\",\"class\":\"{}\",\"message\":{}}}\n", cls, json(message).dump());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmented tree tensor network ground-state search"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_path, checkpoint_path, requests_path, grid_path;
  std::optional<std::string> resume;

  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Override convergence.seed");
    sub->add_option("--output-dir", o.output_dir, "Override output_dir");
    sub->add_option("--max-sweeps", o.max_sweeps, "Override convergence.max_sweeps");
  };
  auto* run = app.add_subcommand("run", "Ground-state search");
  run->add_option("config", config_path, "Run config (JSON)")->required();
  run->add_option("--resume", resume, "Continue from a checkpoint");
  add_overrides(run);
  auto* ed = app.add_subcommand("ed", "Exact diagonalization of the configured model");
  ed->add_option("config", config_path, "Run config (JSON)")->required();
  add_overrides(ed);
  auto* measure = app.add_subcommand("measure", "Observables on a checkpointed state");
  measure->add_option("checkpoint", checkpoint_path)->required();
  measure->add_option("requests", requests_path, "Measurement requests (JSON)")->required();
  add_overrides(measure);
  auto* bench = app.add_subcommand("bench", "Grid of runs");
  bench->add_option("grid", grid_path, "Grid config (JSON)")->required();
  add_overrides(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(attn::error_class_name(attn::ErrorClass::kConfig), e.what(),
                  static_cast<int>(attn::ErrorClass::kConfig));
  }
  try {
    if (*run) return cmd_run(config_path, o, resume);
    if (*ed) return cmd_ed(config_path, o);
    if (*measure) return cmd_measure(checkpoint_path, requests_path, o);
    return cmd_bench(grid_path, o);
  } catch (const attn::Error& e) {
    return report(attn::error_class_name(e.error_class()), e.what(), static_cast<int>(e.error_class()));
  } catch (const fs::filesystem_error& e) {
    return report(attn::error_class_name(attn::ErrorClass::kIo), e.what(), static_cast<int>(attn::ErrorClass::kIo));
  } catch (const std::exception& e) {
    return report("internal", e.what(), 1);
  }
}
