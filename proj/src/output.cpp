#include <fstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "attn/engine.hpp"
#include "attn/error.hpp"

namespace attn {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::string num_list(const std::vector<double>& xs) {
  std::vector<std::string> parts;
  for (double x : xs) parts.push_back(num(x));
  return fmt::format("[{}]", fmt::join(parts, ","));
}

std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  auto out = open_for_write(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << num(m(i, j));
    out << "\n";
  }
  finish(out, path);
}

}  // namespace

void emit_results(const std::filesystem::path& dir, const RunConfig& config, const RunRecord& record) {
  ensure_dir(dir);
  {
    const auto path = dir / "sweeps.jsonl";
    auto out = open_for_write(path);
    out << fmt::format("{{\"type\":\"header\",\"version\":{},\"config\":{}}}\n", json_string(record.version),
                       dump_run_config(config));
    for (const auto& s : record.sweeps)
      out << fmt::format(
          "{{\"type\":\"sweep\",\"sweep\":{},\"phase\":{},\"E\":{},\"eps\":{},\"t_deopt\":{},\"t_sweep\":{},"
          "\"N_D\":{},\"unconverged\":{}}}\n",
          s.sweep, json_string(s.phase), num(s.energy), num(s.density), num(s.t_deopt), num(s.t_sweep),
          s.num_disentanglers, s.unconverged);
    finish(out, path);
  }
  {
    const auto path = dir / "gates.jsonl";
    auto out = open_for_write(path);
    for (const auto& g : record.gates)
      out << fmt::format(
          "{{\"sweep\":{},\"site_a\":{},\"site_b\":{},\"initial_energy\":{},\"energy\":{},\"iterations\":{},"
          "\"converged\":{},\"rejected\":{},\"trace\":{},\"model_trace\":{}}}\n",
          g.sweep, g.site_a, g.site_b, num(g.initial_energy), num(g.energy), g.iterations, g.converged, g.rejected,
          num_list(g.trace), num_list(g.model_trace));
    finish(out, path);
  }
  {
    const auto path = dir / "placement.csv";
    auto out = open_for_write(path);
    out << "site_a,site_b\n";
    for (const auto& [a, b] : record.placement) out << a << "," << b << "\n";
    finish(out, path);
  }
  {
    const auto path = dir / "summary.json";
    auto out = open_for_write(path);
    const auto final_energy = record.final_energy();
    const int n = config.num_sites();
    std::vector<std::string> files;
    for (const auto& f : record.correlation_files) files.push_back(json_string(f));
    out << "{\n";
    out << fmt::format("  \"version\": {},\n", json_string(record.version));
    out << fmt::format("  \"model\": {},\n", json_string(model_name(config.model)));
    out << fmt::format("  \"ansatz\": {},\n", json_string(ansatz_name(config.ansatz)));
    out << fmt::format("  \"L\": {},\n  \"m\": {},\n  \"seed\": {},\n", config.L, config.m, config.convergence.seed);
    out << fmt::format("  \"sweeps\": {},\n", record.sweeps.size());
    out << fmt::format("  \"final_energy\": {},\n", final_energy ? num(*final_energy) : "null");
    out << fmt::format("  \"final_density\": {},\n", final_energy ? num(*final_energy / n) : "null");
    out << fmt::format("  \"num_disentanglers\": {},\n", record.placement.size());
    out << fmt::format("  \"max_unitarity_deviation\": {},\n", num(record.max_unitarity_deviation));
    out << fmt::format("  \"max_isometry_deviation\": {},\n", num(record.max_isometry_deviation));
    out << fmt::format("  \"correlation_files\": [{}]\n", fmt::join(files, ", "));
    out << "}\n";
    finish(out, path);
  }
}

std::vector<std::string> emit_measurements(const std::filesystem::path& dir, const MeasurementTable& table) {
  ensure_dir(dir);
  std::vector<std::string> files;
  for (const auto& [name, c] : table.correlations) {
    const std::string file = "corr_" + name + ".csv";
    write_matrix(dir / file, c.real());
    files.push_back(file);
    if (c.imag().cwiseAbs().maxCoeff() > 1e-12) {
      const std::string imag = "corr_" + name + "_imag.csv";
      write_matrix(dir / imag, c.imag());
      files.push_back(imag);
    }
  }
  if (!table.local.empty()) {
    const auto path = dir / "local.csv";
    auto out = open_for_write(path);
    out << "site";
    for (const auto& [op, v] : table.local) out << "," << op << "_re," << op << "_im";
    out << "\n";
    const Eigen::Index n = table.local.front().second.size();
    for (Eigen::Index s = 0; s < n; ++s) {
      out << s;
      for (const auto& [op, v] : table.local) out << "," << num(v(s).real()) << "," << num(v(s).imag());
      out << "\n";
    }
    finish(out, path);
    files.push_back("local.csv");
  }
  return files;
}

}  // namespace attn
