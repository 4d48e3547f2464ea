#include "attn/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "attn/dmrg.hpp"
#include "attn/effective.hpp"
#include "attn/error.hpp"
#include "attn/measure.hpp"

#ifndef ATTN_VERSION_TAG
#define ATTN_VERSION_TAG "unknown"
#endif

namespace attn {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_resume(const RunConfig& config, const Checkpoint& c) {
  if (c.state.num_sites() != config.num_sites() || c.state.max_bond() != config.m || c.state.local_dim() != 2)
    throw ConfigError("checkpoint does not match the config (sites, bond dimension)");
  if (c.config.model != config.model || c.config.ansatz != config.ansatz)
    throw ConfigError("checkpoint does not match the config (model, ansatz)");
}

}  // namespace

std::string version_tag() { return ATTN_VERSION_TAG; }

std::optional<double> RunRecord::final_energy() const {
  if (sweeps.empty()) return std::nullopt;
  return sweeps.back().energy;
}

RunResult run_ground_state_search(const RunConfig& config, const std::optional<Checkpoint>& resume) {
  config.validate();
  const TpoOperator op = build_model(config);
  const int n = config.num_sites();
  const auto& conv = config.convergence;

  RunResult out;
  if (resume) {
    check_resume(config, *resume);
    out.state = resume->state;
    out.layer = resume->layer;
    out.record = resume->record;
  } else {
    out.state = config.init == InitKind::kRandom ? init_random_ttn(n, 2, config.m, conv.seed)
                                                 : init_product_ttn(n, 2, config.m);
    out.layer = DisentanglerLayer{n, 2, {}};
  }
  out.record.version = version_tag();
  TtnState& state = out.state;
  DisentanglerLayer& layer = out.layer;
  RunRecord& record = out.record;
  if (!state.isometry_center()) state.isometrize_towards(state.shape().top());

  const LocalSolverOptions local{conv.lanczos_max_iter, conv.lanczos_tol};
  const DisentanglerOptOptions de_opt{conv.de_opt_max_iter, conv.de_opt_rel_deviation};
  AbsorbOptions absorb;
  absorb.use_svd = config.recompress_svd;
  absorb.svd_cutoff = conv.svd_cutoff;

  std::optional<EffectiveOperators> eff;
  eff.emplace(layer.empty() ? op : contract_de_layer(op, layer, absorb), state.shape());

  const std::filesystem::path dir = config.output_dir;
  const int first = record.sweeps.empty() ? 1 : record.sweeps.back().sweep + 1;
  for (int sweep = first; sweep <= conv.max_sweeps; ++sweep) {
    SweepRecord r;
    r.sweep = sweep;
    const bool attn_sweep = config.ansatz == Ansatz::kAttn && sweep > conv.s_ttn;
    r.phase = attn_sweep ? "attn" : "ttn";
    if (attn_sweep) {
      const auto t0 = std::chrono::steady_clock::now();
      if (!record.placed) {
        layer = place_disentanglers(op, state.shape(), config.m, {config.disentangler_budget});
        record.placed = true;
        for (const auto& e : layer.entries) record.placement.emplace_back(e.site_a, e.site_b);
      }
      if (!layer.empty()) {
        const LayerOptReport report = optimize_layer(state, op, layer, de_opt);
        for (const auto& g : report.per_gate)
          record.gates.push_back({sweep, g.site_a, g.site_b, g.initial_energy, g.energy, g.iterations, g.converged,
                                  g.rejected, g.trace, g.model_trace});
        eff.emplace(contract_de_layer(op, layer, absorb), state.shape());
      }
      r.t_deopt = seconds_since(t0);
    }
    const auto t1 = std::chrono::steady_clock::now();
    const SweepResult sres = dmrg_sweep(state, *eff, local);
    r.energy = eff->energy(state);
    r.t_sweep = seconds_since(t1);
    if (!std::isfinite(r.energy)) throw NumericalError("non-finite energy in sweep " + std::to_string(sweep));
    r.density = r.energy / (config.L * config.L);
    r.num_disentanglers = layer.size();
    r.unconverged = sres.unconverged;
    const double previous = record.sweeps.empty() ? r.energy : record.sweeps.back().energy;
    const bool had_previous = !record.sweeps.empty();
    record.sweeps.push_back(r);
    if (!dir.empty() && config.checkpoint_interval > 0 && sweep % config.checkpoint_interval == 0)
      save_checkpoint(dir / "checkpoint.bin", {config, state, layer, record});
    if (conv.early_exit && had_previous &&
        std::abs(r.energy - previous) <= conv.early_exit_tol * std::abs(r.energy))
      break;
  }
  record.max_unitarity_deviation = layer.max_unitarity_deviation();
  record.max_isometry_deviation = max_isometry_deviation(state);
  return out;
}

MeasurementRequests parse_measurement_requests(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("requests are not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("requests: expected an object");
  MeasurementRequests r;
  for (const auto& [key, value] : j.items()) {
    if (key == "correlations") {
      if (!value.is_array()) throw ConfigError("requests.correlations: expected a list");
      for (const auto& p : value) {
        if (!p.is_string()) throw ConfigError("requests.correlations: expected strings");
        const auto s = p.get<std::string>();
        if (s.size() != 2 || std::string("xyzi").find(s[0]) == std::string::npos ||
            std::string("xyzi").find(s[1]) == std::string::npos)
          throw ConfigError("requests.correlations: '" + s + "' is not a pair of x, y, z, i");
        r.correlations.push_back(s);
      }
    } else if (key == "local") {
      if (!value.is_array()) throw ConfigError("requests.local: expected a list");
      for (const auto& p : value) {
        if (!p.is_string() || p.get<std::string>().size() != 1 ||
            std::string("xyzi").find(p.get<std::string>()[0]) == std::string::npos)
          throw ConfigError("requests.local: expected one of x, y, z, i");
        r.local.push_back(p.get<std::string>()[0]);
      }
    } else {
      throw ConfigError("requests: unknown key '" + key + "'");
    }
  }
  return r;
}

MeasurementTable measure_observables(TtnState& state, const DisentanglerLayer& layer,
                                     const MeasurementRequests& requests) {
  MeasurementTable table;
  for (const auto& p : requests.correlations)
    table.correlations.emplace_back(p, correlation_matrix(state, layer, pauli::by_name(p[0]), pauli::by_name(p[1])));
  AbsorbOptions absorb;
  absorb.allow_multiple_gates = true;
  for (char c : requests.local) {
    const int n = state.num_sites();
    Eigen::VectorXcd v(n);
    for (int s = 0; s < n; ++s) {
      TpoOperator o(n, state.local_dim());
      o.add_term(TpoTerm::product({s}, {pauli::by_name(c)}));
      const TpoOperator dressed = layer.empty() ? o : contract_de_layer(o, layer, absorb);
      v(s) = measure_tpo_term(state, dressed.all_terms().front());
    }
    table.local.emplace_back(c, std::move(v));
  }
  return table;
}

}  // namespace attn
