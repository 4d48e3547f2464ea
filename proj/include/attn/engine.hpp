#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attn/disentangler.hpp"
#include "attn/lattice.hpp"
#include "attn/tpo.hpp"
#include "attn/ttn.hpp"

namespace attn {

enum class ModelKind { kIsingSquare, kHeisenbergTriangular };
enum class Ansatz { kTtn, kAttn };
enum class InitKind { kRandom, kProduct };

struct ConvergenceParams {
  int max_sweeps = 30;
  int lanczos_max_iter = 100;
  double lanczos_tol = 1e-9;
  int de_opt_max_iter = 10;
  double de_opt_rel_deviation = 1e-8;
  int s_ttn = 1;  ///< plain TTN sweeps before the disentanglers are optimized
  double svd_cutoff = 1e-14;
  std::uint64_t seed = 1;
  bool early_exit = false;
  double early_exit_tol = 1e-10;  ///< on |dE| / |E| between sweeps
};

struct RunConfig {
  ModelKind model = ModelKind::kIsingSquare;
  int L = 2;
  double J = 1.0;
  double h = 0.0;
  Ansatz ansatz = Ansatz::kTtn;
  std::size_t m = 4;
  ConvergenceParams convergence;
  std::string output_dir;  ///< empty: nothing is written
  int checkpoint_interval = 0;
  std::optional<std::size_t> disentangler_budget;
  InitKind init = InitKind::kRandom;
  bool recompress_svd = false;
  std::vector<std::string> correlations;  ///< operator pairs such as "zz"

  int num_sites() const { return L * L; }
  /// Throws ConfigError.
  void validate() const;
};

/// JSON config. Unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

std::string_view model_name(ModelKind m);
std::string_view ansatz_name(Ansatz a);

TpoOperator build_model(const RunConfig& config);

struct SweepRecord {
  int sweep = 0;
  std::string phase;  ///< "ttn" or "attn"
  double energy = 0.0;
  double density = 0.0;  ///< energy / L^2
  double t_deopt = 0.0;  ///< seconds
  double t_sweep = 0.0;
  std::size_t num_disentanglers = 0;
  int unconverged = 0;  ///< local eigensolves that missed the tolerance
};

struct GateRecord {
  int sweep = 0;
  int site_a = 0;
  int site_b = 0;
  double initial_energy = 0.0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  bool rejected = false;
  std::vector<double> trace;
  std::vector<double> model_trace;
};

struct RunRecord {
  std::vector<SweepRecord> sweeps;
  std::vector<GateRecord> gates;
  std::vector<std::pair<int, int>> placement;
  bool placed = false;
  double max_unitarity_deviation = 0.0;
  double max_isometry_deviation = 0.0;
  std::vector<std::string> correlation_files;
  std::string version;

  std::optional<double> final_energy() const;
};

struct Checkpoint {
  RunConfig config;
  TtnState state;
  DisentanglerLayer layer;
  RunRecord record;
};

/// Little-endian binary with a versioned header. Throws IoError.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct RunResult {
  RunRecord record;
  TtnState state;
  DisentanglerLayer layer;
};

/// Sweeps 1..s_ttn optimize the TTN for H. For an aTTN run every later sweep
/// optimizes the layer, rebuilds H' = D H D^dagger and sweeps the TTN for H'.
/// Resumes from `resume` when given. Checkpoints go to output_dir.
RunResult run_ground_state_search(const RunConfig& config, const std::optional<Checkpoint>& resume = {});

struct MeasurementRequests {
  std::vector<std::string> correlations;  ///< "zz", "xx", ...
  std::vector<char> local;                ///< single-site operators
};

MeasurementRequests parse_measurement_requests(std::string_view text);

struct MeasurementTable {
  std::vector<std::pair<std::string, Eigen::MatrixXcd>> correlations;
  std::vector<std::pair<char, Eigen::VectorXcd>> local;
};

/// Observables on D^dagger |psi_TTN>, each dressed by the layer first.
MeasurementTable measure_observables(TtnState& state, const DisentanglerLayer& layer,
                                     const MeasurementRequests& requests);

/// sweeps.jsonl, gates.jsonl, placement.csv and summary.json.
void emit_results(const std::filesystem::path& dir, const RunConfig& config, const RunRecord& record);
/// corr_<ab>.csv and local.csv. Returns the written file names.
std::vector<std::string> emit_measurements(const std::filesystem::path& dir, const MeasurementTable& table);

struct EdReport {
  double energy = 0.0;
  double density = 0.0;
  std::size_t dimension = 0;
  bool dense = false;
};

EdReport run_exact_diagonalization(const RunConfig& config);

std::string version_tag();

}  // namespace attn
