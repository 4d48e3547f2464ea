#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "attn/dense.hpp"
#include "attn/disentangler.hpp"
#include "attn/engine.hpp"
#include "attn/error.hpp"
#include "attn/lattice.hpp"

using namespace attn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every run made by the checks below, for the bound and monotonicity checks.
struct RunLog {
  std::string name;
  std::vector<double> energies;
  double ed = 0.0;
  double unitarity = 0.0;
  double isometry = 0.0;
};
std::vector<RunLog> g_runs;
std::map<std::string, double> g_ed_cache;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig ising_config(int L, std::size_t m, Ansatz ansatz, int sweeps, std::uint64_t seed) {
  RunConfig c;
  c.model = ModelKind::kIsingSquare;
  c.L = L;
  c.J = 1.0;
  c.h = 3.0;
  c.ansatz = ansatz;
  c.m = m;
  c.convergence.max_sweeps = sweeps;
  c.convergence.seed = seed;
  return c;
}

double ed_energy(const RunConfig& c) {
  const std::string key = fmt::format("{}-{}-{}-{}", static_cast<int>(c.model), c.L, c.J, c.h);
  auto it = g_ed_cache.find(key);
  if (it != g_ed_cache.end()) return it->second;
  const double e = exact_diagonalize(build_model(c)).energy;
  g_ed_cache[key] = e;
  return e;
}

RunResult logged_run(const std::string& name, const RunConfig& c) {
  RunResult r = run_ground_state_search(c);
  RunLog log{name, {}, ed_energy(c), r.record.max_unitarity_deviation, r.record.max_isometry_deviation};
  for (const auto& s : r.record.sweeps) log.energies.push_back(s.energy);
  g_runs.push_back(std::move(log));
  return r;
}

Tensor pauli_of(int k) {
  switch (k) {
    case 0:
      return pauli::x();
    case 1:
      return pauli::y();
    default:
      return pauli::z();
  }
}

// Random Hermitian operator: fields on every site plus Pauli products on
// random pairs (N = 8) or on the square-lattice bonds (N = 16).
TpoOperator random_operator(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> which(0, 2);
  std::uniform_int_distribution<int> site(0, n - 1);
  TpoOperator op(n, 2);
  for (int s = 0; s < n; ++s) {
    op.add_local(s, pauli::x(), coeff(rng));
    op.add_local(s, pauli::z(), coeff(rng));
  }
  std::vector<std::pair<int, int>> pairs;
  if (n == 16) {
    pairs = lattice_edges({4, Geometry::kSquare}, hilbert_map(4));
  } else {
    std::set<std::pair<int, int>> chosen;
    while (chosen.size() < 12) {
      const int a = site(rng), b = site(rng);
      if (a != b) chosen.emplace(std::min(a, b), std::max(a, b));
    }
    pairs.assign(chosen.begin(), chosen.end());
  }
  for (const auto& [a, b] : pairs)
    op.add_term(TpoTerm::product({a, b}, {pauli_of(which(rng)), pauli_of(which(rng))}, coeff(rng)));
  return op;
}

Tensor random_gate(std::uint64_t seed) { return random_unitary(4, seed).reshape({2, 2, 2, 2}); }

struct Instance {
  TpoOperator op;
  TtnState state;
  DisentanglerLayer layer;
};

Instance random_instance(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0;; ++attempt) {
    TpoOperator op = random_operator(n, rng);
    const std::size_t m = n == 8 ? 2 : std::size_t{2} << (seed % 3);
    TtnState state = init_random_ttn(n, 2, m, seed * 31 + static_cast<std::uint64_t>(attempt));
    DisentanglerLayer layer = place_disentanglers(op, state.shape(), m);
    if (layer.empty()) continue;
    for (std::size_t k = 0; k < layer.size(); ++k) layer.entries[k].u = random_gate(seed * 1000 + k);
    return {std::move(op), std::move(state), std::move(layer)};
  }
}

RowMatrix matrix4(const Tensor& u) { return u.as_matrix(4); }

Outcome network_energy_matches_dense() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int count = 0;
  for (int n : {8, 16})
    for (std::uint64_t k = 0; k < 20; ++k) {
      Instance inst = random_instance(n, 100 + k + static_cast<std::uint64_t>(n) * 1000);
      EffectiveOperators eff(contract_de_layer(inst.op, inst.layer), inst.state.shape());
      const double network = eff.energy(inst.state);
      const Vector phi = apply_layer_dense(inst.layer, to_state_vector(inst.state), true);
      const double dense = expectation(inst.op, phi) / phi.squaredNorm();
      worst = std::max(worst, std::abs(network - dense));
      ++count;
    }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t <= 60.0, fmt::format("{} instances, max |dE| = {:.3g}, {:.1f} s", count, worst, t)};
}

Outcome environment_trace_matches_dense() {
  double worst = 0.0;
  int count = 0;
  for (int n : {8, 16})
    for (std::uint64_t k = 0; k < 10; ++k) {
      Instance inst = random_instance(n, 500 + k + static_cast<std::uint64_t>(n) * 1000);
      const auto& gate = inst.layer.entries[k % inst.layer.size()];
      const int a = gate.site_a, b = gate.site_b;
      TpoOperator touching(n, 2);
      for (const auto& t : inst.op.all_terms())
        if (t.contains(a) || t.contains(b)) touching.add_term(t);
      const Vector psi = to_state_vector(inst.state);
      const DisentanglerEnvironment env = build_global_environment(inst.state, inst.op, a, b);
      for (std::uint64_t r = 0; r < 5; ++r) {
        const Tensor u = random_gate(7000 + 10 * k + r + static_cast<std::uint64_t>(n));
        const Tensor g = Tensor::from_matrix(matrix4(u).adjoint()).reshape({2, 2, 2, 2});
        const Vector phi = apply_two_site_gate(g, a, b, psi, n);
        const double dense = expectation(touching, phi) / phi.squaredNorm();
        worst = std::max(worst, std::abs(environment_energy(env, u) - dense));
        ++count;
      }
    }
  return {worst <= 1e-10, fmt::format("{} gate samples, max |dE| = {:.3g}", count, worst)};
}

Outcome svd_update_is_optimal() {
  double worst = -1e300;
  for (std::uint64_t k = 0; k < 10; ++k) {
    RowMatrix gamma = k == 0 ? RowMatrix(-RowMatrix::Identity(4, 4)) : random_tensor({4, 4}, 40 + k).as_matrix(4);
    const RowMatrix best = matrix4(svd_update(Tensor::from_matrix(gamma)));
    const double e_best = (best * gamma).trace().real();
    for (std::uint64_t r = 0; r < 1000; ++r) {
      const RowMatrix u = random_unitary(4, 100000 + 1000 * k + r).as_matrix(4);
      worst = std::max(worst, e_best - (u * gamma).trace().real());
    }
  }
  return {worst <= 1e-12, fmt::format("10 matrices x 1000 unitaries, max E(svd) - E(random) = {:.3g}", worst)};
}

Outcome saturated_ground_state_is_exact() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  for (auto [L, m] : {std::pair{2, std::size_t{4}}, std::pair{4, std::size_t{256}}}) {
    const RunConfig c = ising_config(L, m, Ansatz::kTtn, 10, 1);
    const RunResult r = logged_run(fmt::format("saturated L={}", L), c);
    const double ed = ed_energy(c);
    const double rel = std::abs(*r.record.final_energy() - ed) / std::abs(ed);
    pass = pass && rel <= 1e-8;
    detail += fmt::format("L={} m={}: rel err {:.3g}; ", L, m, rel);
  }
  const double t = seconds_since(t0);
  return {pass && t <= 300.0, detail + fmt::format("{:.1f} s", t)};
}

struct ImprovementRuns {
  std::vector<std::vector<double>> ttn_traces;
};
ImprovementRuns g_improvement;

Outcome attn_improves_on_ttn() {
  const auto t0 = std::chrono::steady_clock::now();
  int strictly = 0;
  bool never_worse = true;
  bool placed = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunConfig ttn = ising_config(4, 8, Ansatz::kTtn, 30, seed);
    RunConfig attn = ttn;
    attn.ansatz = Ansatz::kAttn;
    attn.convergence.s_ttn = 1;
    const RunResult a = logged_run(fmt::format("ttn seed {}", seed), ttn);
    const RunResult b = logged_run(fmt::format("attn seed {}", seed), attn);
    std::vector<double> trace;
    for (const auto& s : a.record.sweeps) trace.push_back(s.energy);
    g_improvement.ttn_traces.push_back(trace);
    const double gain = *a.record.final_energy() - *b.record.final_energy();
    never_worse = never_worse && gain >= -1e-10;
    placed = placed && !b.layer.empty();
    strictly += gain >= 1e-6 ? 1 : 0;
    detail += fmt::format("{:.3g} ", gain);
  }
  const double t = seconds_since(t0);
  return {never_worse && placed && strictly >= 3 && t <= 600.0,
          fmt::format("E_ttn - E_attn per seed: {}; {} of 5 >= 1e-6; {:.1f} s", detail, strictly, t)};
}

Outcome empty_layer_reproduces_ttn() {
  bool same = true;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    RunConfig c = ising_config(4, 8, Ansatz::kAttn, 30, seed);
    c.disentangler_budget = 0;
    const RunResult r = logged_run(fmt::format("attn budget 0 seed {}", seed), c);
    std::vector<double> trace;
    for (const auto& s : r.record.sweeps) trace.push_back(s.energy);
    same = same && trace == g_improvement.ttn_traces.at(seed - 1);
  }
  return {same, "2 seeds x 30 sweeps compared with =="};
}

// Placement oracle written from the rules directly.
std::optional<PlacementRule> expected_rule(int a, int b, int n, std::size_t m, const TpoOperator& op) {
  if ((a >> 1) == (b >> 1)) return PlacementRule::kSameTensor;
  bool on_term = false;
  for (const auto& t : op.interaction_terms()) on_term = on_term || (t.contains(a) && t.contains(b));
  if (!on_term) return PlacementRule::kNotOnTerm;
  int lca = 0;
  while ((a >> (lca + 1)) != (b >> (lca + 1))) ++lca;
  bool untruncated = true;
  for (int level = 0; level < lca; ++level) {
    const int size = 2 << level;
    untruncated = untruncated && std::pow(2.0, std::min(size, n - size)) <= static_cast<double>(m);
  }
  if (untruncated) return PlacementRule::kUntruncated;
  return std::nullopt;
}

std::optional<PlacementRule> observed_rule(const DisentanglerLayer& layer, const TpoOperator& op,
                                           const TreeShape& shape, std::size_t m) {
  try {
    validate_layer(layer, op, shape, m);
  } catch (const PlacementError& e) {
    return e.rule();
  }
  return std::nullopt;
}

Outcome placement_checker_is_exhaustive() {
  const int n = 16;
  const TreeShape shape(n);
  const Tensor id = Tensor::identity(4).reshape({2, 2, 2, 2});
  int singles = 0, doubles = 0, mismatches = 0, injected = 0;
  for (Geometry g : {Geometry::kSquare, Geometry::kTriangular}) {
    const TpoOperator op = g == Geometry::kSquare ? build_ising_tpo({4, g}, {1.0, 3.0}, hilbert_map(4))
                                                  : build_heisenberg_triangular_tpo({4, g}, {1.0, 0.0}, hilbert_map(4));
    for (std::size_t m : {4, 8, 16, 256}) {
      std::vector<std::pair<int, int>> valid;
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const auto want = expected_rule(a, b, n, m, op);
          mismatches += observed_rule({n, 2, {{a, b, id}}}, op, shape, m) != want;
          ++singles;
          if (!want) valid.emplace_back(a, b);
        }
      for (std::size_t i = 0; i < valid.size(); ++i)
        for (std::size_t j = i + 1; j < valid.size(); ++j) {
          const auto [a, b] = valid[i];
          const auto [c, d] = valid[j];
          std::optional<PlacementRule> want;
          if (a == c || a == d || b == c || b == d) {
            want = PlacementRule::kSiteOverlap;
          } else {
            for (const auto& t : op.interaction_terms())
              if ((t.contains(a) || t.contains(b)) && (t.contains(c) || t.contains(d))) want = PlacementRule::kSharedTerm;
          }
          mismatches += observed_rule({n, 2, {{a, b, id}, {c, d, id}}}, op, shape, m) != want;
          ++doubles;
        }
      const DisentanglerLayer greedy = place_disentanglers(op, shape, m);
      mismatches += observed_rule(greedy, op, shape, m).has_value();
    }
    // Injected violations of the structural rules.
    const std::size_t m = 8;
    const std::vector<std::pair<DisentanglerLayer, PlacementRule>> bad = {
        {{n, 2, {{3, 1, id}}}, PlacementRule::kSiteRange},
        {{n, 2, {{0, 16, id}}}, PlacementRule::kSiteRange},
        {{n, 2, {{1, 2, Tensor::identity(2)}}}, PlacementRule::kShape},
        {{n, 2, {{4, 5, id}}}, PlacementRule::kSameTensor},
    };
    for (const auto& [layer, rule] : bad) {
      mismatches += observed_rule(layer, op, shape, m) != rule;
      ++injected;
    }
  }
  return {mismatches == 0, fmt::format("{} single-gate layers, {} two-gate layers, {} injected; {} mismatches", singles,
                                       doubles, injected, mismatches)};
}

Outcome correlations_match_ed() {
  const RunConfig c = ising_config(2, 4, Ansatz::kTtn, 10, 3);
  RunResult r = logged_run("correlations L=2", c);
  const MeasurementTable table = measure_observables(r.state, r.layer, {{"zz", "xx"}, {}});
  const EdResult ed = exact_diagonalize(build_model(c));
  double worst = 0.0, diag = 0.0;
  for (const auto& [name, mat] : table.correlations) {
    const Tensor oa = pauli::by_name(name[0]), ob = pauli::by_name(name[1]);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const std::array<int, 1> si{i}, sj{j};
        const Vector v = apply_on_sites(oa, si, apply_on_sites(ob, sj, ed.ground_state, 4, 2), 4, 2);
        const Complex ref = ed.ground_state.dot(v) / ed.ground_state.squaredNorm();
        worst = std::max(worst, std::abs(mat(i, j) - ref));
        if (name == "zz" && i == j) diag = std::max(diag, std::abs(mat(i, i) - 1.0));
      }
  }
  return {worst <= 1e-8 && diag <= 1e-12,
          fmt::format("max |C - C_ed| = {:.3g}, max |C_zz(i,i) - 1| = {:.3g}", worst, diag)};
}

Outcome energies_respect_lower_bound() {
  double worst = 1e300;
  std::size_t count = 0;
  for (const auto& run : g_runs)
    for (double e : run.energies) {
      worst = std::min(worst, e - run.ed);
      ++count;
    }
  return {count > 0 && worst >= -1e-9, fmt::format("{} energies over {} runs, min E - E_ed = {:.3g}", count,
                                                   g_runs.size(), worst)};
}

Outcome sweeps_monotone_and_unitary() {
  double rise = -1e300, unit = 0.0, iso = 0.0;
  for (const auto& run : g_runs) {
    for (std::size_t k = 1; k < run.energies.size(); ++k) rise = std::max(rise, run.energies[k] - run.energies[k - 1]);
    unit = std::max(unit, run.unitarity);
    iso = std::max(iso, run.isometry);
  }
  return {rise <= 1e-10 && unit <= 1e-10,
          fmt::format("max sweep-to-sweep rise {:.3g}, max unitarity deviation {:.3g}, max isometry deviation {:.3g}",
                      rise, unit, iso)};
}

Outcome recompressed_bond_is_bounded() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> site(0, 15);
  std::size_t worst = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    int a = site(rng), b = site(rng);
    while (b == a) b = site(rng);
    if (a > b) std::swap(a, b);
    TpoTerm term;
    term.sites = {a, b};
    term.site_tensors = {random_tensor({1, 2, 2, 4}, 10 * k + 1), random_tensor({4, 2, 2, 1}, 10 * k + 2)};
    const int anchor = (k & 1) ? a : b;
    int other = site(rng);
    while (other == anchor) other = site(rng);
    const TpoTerm out =
        conjugate_term(term, random_gate(10 * k + 3), std::min(anchor, other), std::max(anchor, other));
    worst = std::max(worst, out.max_bond());
  }
  return {worst <= 4, fmt::format("100 terms, max horizontal bond {}", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"network_energy_matches_dense", network_energy_matches_dense},
      {"environment_trace_matches_dense", environment_trace_matches_dense},
      {"svd_update_is_optimal", svd_update_is_optimal},
      {"saturated_ground_state_is_exact", saturated_ground_state_is_exact},
      {"attn_improves_on_ttn", attn_improves_on_ttn},
      {"empty_layer_reproduces_ttn", empty_layer_reproduces_ttn},
      {"placement_checker_is_exhaustive", placement_checker_is_exhaustive},
      {"correlations_match_ed", correlations_match_ed},
      {"energies_respect_lower_bound", energies_respect_lower_bound},
      {"sweeps_monotone_and_unitary", sweeps_monotone_and_unitary},
      {"recompressed_bond_is_bounded", recompressed_bond_is_bounded},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu checks passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
