#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "attn/engine.hpp"
#include "attn/error.hpp"

namespace attn {

namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic{'A', 'T', 'T', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void tensor(const Tensor& t) {
    u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t k = 0; k < t.rank(); ++k) u64(t.dim(k));
    for (const Complex& c : t.data()) {
      f64(c.real());
      f64(c.imag());
    }
  }
  const std::string& buffer() const { return buf_; }

 private:
  void bytes(std::uint64_t v, int n) {
    for (int k = 0; k < n; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string buf) : buf_(std::move(buf)) {}
  std::uint64_t bytes(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int k = 0; k < n; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_++])) << (8 * k);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return raw(u64()); }
  Tensor tensor() {
    const std::uint32_t rank = u32();
    if (rank > 8) throw IoError("checkpoint: implausible tensor rank");
    Shape shape(rank);
    std::size_t size = 1;
    for (auto& d : shape) {
      d = u64();
      size *= d;
    }
    need(size * 16);
    std::vector<Complex> data(size);
    for (auto& c : data) {
      const double re = f64();
      c = {re, f64()};
    }
    return Tensor(std::move(shape), std::move(data));
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw IoError("checkpoint: truncated file");
  }
  std::string buf_;
  std::size_t pos_ = 0;
};

json record_to_json(const RunRecord& r) {
  json sweeps = json::array();
  for (const auto& s : r.sweeps)
    sweeps.push_back({{"sweep", s.sweep},
                      {"phase", s.phase},
                      {"energy", s.energy},
                      {"density", s.density},
                      {"t_deopt", s.t_deopt},
                      {"t_sweep", s.t_sweep},
                      {"num_disentanglers", s.num_disentanglers},
                      {"unconverged", s.unconverged}});
  json gates = json::array();
  for (const auto& g : r.gates)
    gates.push_back({{"sweep", g.sweep},
                     {"site_a", g.site_a},
                     {"site_b", g.site_b},
                     {"initial_energy", g.initial_energy},
                     {"energy", g.energy},
                     {"iterations", g.iterations},
                     {"converged", g.converged},
                     {"rejected", g.rejected},
                     {"trace", g.trace},
                     {"model_trace", g.model_trace}});
  return {{"sweeps", sweeps}, {"gates", gates}, {"placement", r.placement}, {"placed", r.placed},
          {"version", r.version}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  for (const auto& s : j.at("sweeps")) {
    SweepRecord x;
    x.sweep = s.at("sweep");
    x.phase = s.at("phase");
    x.energy = s.at("energy");
    x.density = s.at("density");
    x.t_deopt = s.at("t_deopt");
    x.t_sweep = s.at("t_sweep");
    x.num_disentanglers = s.at("num_disentanglers");
    x.unconverged = s.at("unconverged");
    r.sweeps.push_back(std::move(x));
  }
  for (const auto& g : j.at("gates")) {
    GateRecord x;
    x.sweep = g.at("sweep");
    x.site_a = g.at("site_a");
    x.site_b = g.at("site_b");
    x.initial_energy = g.at("initial_energy");
    x.energy = g.at("energy");
    x.iterations = g.at("iterations");
    x.converged = g.at("converged");
    x.rejected = g.at("rejected");
    x.trace = g.at("trace").get<std::vector<double>>();
    x.model_trace = g.at("model_trace").get<std::vector<double>>();
    r.gates.push_back(std::move(x));
  }
  r.placement = j.at("placement").get<std::vector<std::pair<int, int>>>();
  r.placed = j.at("placed");
  r.version = j.at("version");
  return r;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const TtnState& state = c.state;
  const TreeShape& shape = state.shape();
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kFormatVersion);
  w.str(dump_run_config(c.config));
  w.str(record_to_json(c.record).dump());
  w.i32(state.num_sites());
  w.u64(state.local_dim());
  w.u64(state.max_bond());
  const auto center = state.isometry_center();
  w.i32(center ? center->level : -1);
  w.i32(center ? center->index : -1);
  w.u64(static_cast<std::uint64_t>(shape.num_nodes()));
  for (int f = 0; f < shape.num_nodes(); ++f) w.tensor(state.tensor(shape.node(f)));
  w.u64(c.layer.size());
  for (const auto& e : c.layer.entries) {
    w.i32(e.site_a);
    w.i32(e.site_b);
    w.tensor(e.u);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw IoError("failed writing checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint to " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Reader r(ss.str());
  if (r.raw(kMagic.size()) != std::string(kMagic.data(), kMagic.size()))
    throw IoError("checkpoint: bad magic in " + path.string());
  if (const auto v = r.u32(); v != kFormatVersion)
    throw IoError("checkpoint: unsupported format version " + std::to_string(v));
  Checkpoint c;
  c.config = parse_run_config(r.str());
  try {
    c.record = record_from_json(json::parse(r.str()));
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: bad run record: ") + e.what());
  }
  const int n = r.i32();
  const std::size_t d = r.u64();
  const std::size_t m = r.u64();
  const int level = r.i32();
  const int index = r.i32();
  const TreeShape shape(n);
  const std::uint64_t count = r.u64();
  if (count != static_cast<std::uint64_t>(shape.num_nodes())) throw IoError("checkpoint: tensor count mismatch");
  std::vector<Tensor> tensors;
  for (std::uint64_t k = 0; k < count; ++k) tensors.push_back(r.tensor());
  std::optional<NodeId> center;
  if (level >= 0) center = NodeId{level, index};
  c.state = TtnState(shape, d, m, std::move(tensors), center);
  c.layer = DisentanglerLayer{n, d, {}};
  const std::uint64_t gates = r.u64();
  for (std::uint64_t k = 0; k < gates; ++k) {
    Disentangler e;
    e.site_a = r.i32();
    e.site_b = r.i32();
    e.u = r.tensor();
    c.layer.entries.push_back(std::move(e));
  }
  if (!r.done()) throw IoError("checkpoint: trailing bytes");
  return c;
}

}  // namespace attn
