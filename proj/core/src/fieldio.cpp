#include "bnslab/fieldio.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "bnslab/stokes_picard.hpp"
#include "json.hpp"

namespace bnslab {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'B', 'N', 'S', 'F'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
  return v;
}

double get_f64(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(in[at + b]) << (8 * b);
  return std::bit_cast<double>(v);
}

FieldKind kind_of_rank(std::uint32_t rank, std::size_t at) {
  switch (rank) {
    case 0: return FieldKind::scalar;
    case 1: return FieldKind::vector;
    case 2: return FieldKind::tensor;
    default: throw ParseError("BNSF: unsupported rank " + std::to_string(rank), at);
  }
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

const char* kind_name(FieldKind k) {
  return k == FieldKind::scalar ? "scalar" : (k == FieldKind::vector ? "vector" : "tensor");
}

FieldKind kind_from_name(const std::string& s) {
  if (s == "scalar") return FieldKind::scalar;
  if (s == "vector") return FieldKind::vector;
  if (s == "tensor") return FieldKind::tensor;
  throw Error("trajectory sidecar: unknown kind '" + s + "'");
}

}  // namespace

// ---- BNSF ----------------------------------------------------------------------------------

std::vector<std::uint8_t> encode_field(const PhysicalField& f) {
  const GridSpec& g = f.grid();
  std::vector<std::uint8_t> out;
  out.reserve(kBnsfHeaderBytes + f.data().size() * 8);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kBnsfVersion);
  put_u32(out, 3);
  put_u32(out, static_cast<std::uint32_t>(g.n()));
  put_f64(out, g.box_len());
  put_u32(out, static_cast<std::uint32_t>(rank_of(f.kind())));
  put_u32(out, static_cast<std::uint32_t>(f.components()));
  put_u32(out, kStoragePhysicalF64);
  for (double v : f.data()) put_f64(out, v);
  return out;
}

FieldFileHeader decode_header(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  if (bytes.size() < offset + kBnsfHeaderBytes)
    throw ParseError("BNSF: truncated header", bytes.size());
  if (std::memcmp(bytes.data() + offset, kMagic, 4) != 0) throw ParseError("BNSF: bad magic", offset);
  FieldFileHeader h;
  h.version = get_u32(bytes, offset + 4);
  if (h.version != kBnsfVersion) throw ParseError("BNSF: unsupported version " + std::to_string(h.version), offset + 4);
  h.dim = get_u32(bytes, offset + 8);
  if (h.dim != 3) throw ParseError("BNSF: dimension must be 3", offset + 8);
  h.n = get_u32(bytes, offset + 12);
  if (h.n < 4 || h.n % 2 != 0 || h.n > 4096) throw ParseError("BNSF: invalid n", offset + 12);
  h.box_len = get_f64(bytes, offset + 16);
  if (!(h.box_len > 0.0) || !std::isfinite(h.box_len)) throw ParseError("BNSF: invalid box length", offset + 16);
  h.rank = get_u32(bytes, offset + 24);
  const FieldKind kind = kind_of_rank(h.rank, offset + 24);
  h.components = get_u32(bytes, offset + 28);
  if (h.components != static_cast<std::uint32_t>(components(kind)))
    throw ParseError("BNSF: component count does not match rank", offset + 28);
  h.storage = get_u32(bytes, offset + 32);
  if (h.storage != kStoragePhysicalF64) throw ParseError("BNSF: unknown storage flag", offset + 32);
  return h;
}

PhysicalField decode_field(const std::vector<std::uint8_t>& bytes, std::size_t& offset) {
  const FieldFileHeader h = decode_header(bytes, offset);
  const std::size_t start = offset + kBnsfHeaderBytes;
  if (bytes.size() - start < h.payload_bytes()) throw ParseError("BNSF: truncated payload", bytes.size());
  PhysicalField f(GridSpec(static_cast<int>(h.n), h.box_len), kind_of_rank(h.rank, offset + 24));
  auto& d = f.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = get_f64(bytes, start + 8 * i);
  offset = start + h.payload_bytes();
  return f;
}

void write_field(const std::string& path, const PhysicalField& f) { write_bytes_atomic(path, encode_field(f)); }

void write_field(const std::string& path, const SpectralField& f) { write_field(path, f.to_physical()); }

PhysicalField read_physical(const std::string& path) {
  const auto bytes = read_bytes(path);
  std::size_t offset = 0;
  PhysicalField f = decode_field(bytes, offset);
  if (offset != bytes.size()) throw ParseError("BNSF: trailing bytes after the field record", offset);
  return f;
}

SpectralField read_field(const std::string& path) { return SpectralField::from_physical(read_physical(path)); }

// ---- trajectories --------------------------------------------------------------------------

void write_trajectory(const std::string& path, const Trajectory& traj) {
  if (traj.empty()) throw Error("write_trajectory: empty trajectory");
  std::vector<std::uint8_t> bytes;
  for (const auto& f : traj.fields()) {
    const auto rec = encode_field(f.to_physical());
    bytes.insert(bytes.end(), rec.begin(), rec.end());
  }
  json side;
  side["count"] = traj.size();
  side["kind"] = kind_name(traj.kind());
  side["horizon"] = traj.horizon();
  side["times"] = traj.times();
  if (traj.has_time_grid()) {
    const TimeGrid& tg = traj.time_grid();
    side["time_grid"] = {{"octaves", tg.octaves()}, {"nodes_per_block", tg.nodes_per_block()}};
  } else {
    side["time_grid"] = nullptr;
  }
  write_bytes_atomic(path, bytes);
  write_text_atomic(path + ".json", side.dump(2) + "\n");
}

Trajectory read_trajectory(const std::string& path) {
  const std::string side_text = read_text(path + ".json");
  json side;
  try {
    side = json::parse(side_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("trajectory sidecar: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  const auto times = side.at("times").get<std::vector<double>>();
  const auto count = side.at("count").get<std::size_t>();
  if (count == 0 || times.empty()) throw Error("read_trajectory: empty trajectory");
  if (times.size() != count) throw Error("read_trajectory: sidecar lists " + std::to_string(times.size()) +
                                         " times for " + std::to_string(count) + " fields");
  const FieldKind kind = kind_from_name(side.at("kind").get<std::string>());
  const double horizon = side.at("horizon").get<double>();

  const auto bytes = read_bytes(path);
  std::size_t offset = 0;
  std::vector<PhysicalField> recs;
  while (offset < bytes.size()) recs.push_back(decode_field(bytes, offset));
  if (recs.size() != count)
    throw Error("read_trajectory: sidecar count " + std::to_string(count) + " does not match " +
                std::to_string(recs.size()) + " field records");
  const GridSpec grid = recs.front().grid();
  for (const auto& r : recs)
    if (r.grid() != grid || r.kind() != kind) throw Error("read_trajectory: records disagree on grid or kind");

  auto make = [&]() {
    if (side.contains("time_grid") && !side["time_grid"].is_null()) {
      TimeGrid tg(horizon, side["time_grid"].at("octaves").get<int>(), side["time_grid"].at("nodes_per_block").get<int>());
      if (tg.size() != count) throw Error("read_trajectory: time grid size does not match the field count");
      for (std::size_t i = 0; i < count; ++i)
        if (tg.time(i) != times[i]) throw Error("read_trajectory: sidecar times do not match the time grid");
      return Trajectory(grid, kind, tg);
    }
    return Trajectory(grid, kind, times, horizon);
  };
  Trajectory traj = make();
  for (std::size_t i = 0; i < count; ++i) traj.field(i) = SpectralField::from_physical(recs[i]);
  return traj;
}

// ---- run configuration ---------------------------------------------------------------------

int RunConfig::resolved_k() const { return k >= 0 ? k : k_of_p(p); }

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
}

template <class T>
void read_into(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_object() || doc.empty()) throw ConfigError("config: empty configuration");
  reject_unknown(doc, {"grid", "scenario", "params", "seed", "output_dir", "fault_injection"}, "the top level");

  RunConfig c;
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    reject_unknown(g, {"n", "L"}, "grid");
    read_into(g, "n", c.n, "grid");
    read_into(g, "L", c.box_len, "grid");
  }
  read_into(doc, "scenario", c.scenario, "the top level");
  read_into(doc, "seed", c.seed, "the top level");
  read_into(doc, "output_dir", c.output_dir, "the top level");
  if (doc.contains("params")) {
    const json& p = doc["params"];
    reject_unknown(p, {"p", "q", "k", "T", "octaves", "nodes_per_block", "amplitude", "forcing_amplitude", "tol",
                       "max_iter", "samples", "N_sweep", "T_sweep", "bracket_doublings"},
                   "params");
    read_into(p, "p", c.p, "params");
    read_into(p, "q", c.q, "params");
    read_into(p, "k", c.k, "params");
    read_into(p, "T", c.T, "params");
    read_into(p, "octaves", c.octaves, "params");
    read_into(p, "nodes_per_block", c.nodes_per_block, "params");
    read_into(p, "amplitude", c.amplitude, "params");
    read_into(p, "forcing_amplitude", c.forcing_amplitude, "params");
    read_into(p, "tol", c.tol, "params");
    read_into(p, "max_iter", c.max_iter, "params");
    read_into(p, "samples", c.samples, "params");
    read_into(p, "N_sweep", c.N_sweep, "params");
    read_into(p, "T_sweep", c.T_sweep, "params");
    read_into(p, "bracket_doublings", c.bracket_doublings, "params");
  }
  if (doc.contains("fault_injection")) {
    const json& f = doc["fault_injection"];
    reject_unknown(f, {"partition_defect"}, "fault_injection");
    read_into(f, "partition_defect", c.fault.partition_defect, "fault_injection");
  }

  static const std::set<std::string> scenarios{"verify", "picard", "decay", "split", "norms", "solve"};
  if (!scenarios.count(c.scenario)) throw ConfigError("config: unknown scenario '" + c.scenario + "'");
  if (c.n < 8 || (c.n & (c.n - 1)) != 0) throw ConfigError("config: grid.n must be a power of two >= 8");
  if (!(c.box_len > 0.0)) throw ConfigError("config: grid.L must be positive");
  if (!(c.p > 3.0)) throw ConfigError("config: params.p must exceed 3");
  if (!(c.T > 0.0)) throw ConfigError("config: params.T must be positive");
  if (c.octaves < 1 || c.nodes_per_block < 2) throw ConfigError("config: time grid too coarse");
  if (c.samples < 1) throw ConfigError("config: params.samples must be positive");
  if (c.bracket_doublings < 0) throw ConfigError("config: params.bracket_doublings must be >= 0");
  for (double N : c.N_sweep)
    if (!(N > 0.0)) throw ConfigError("config: N_sweep entries must be positive");
  for (double T : c.T_sweep)
    if (!(T > 0.0)) throw ConfigError("config: T_sweep entries must be positive");
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text(path)); }

std::string run_config_json(const RunConfig& c) {
  json doc;
  doc["grid"] = {{"n", c.n}, {"L", c.box_len}};
  doc["scenario"] = c.scenario;
  doc["seed"] = c.seed;
  doc["output_dir"] = c.output_dir;
  doc["params"] = {{"p", c.p},
                   {"q", c.q},
                   {"k", c.k},
                   {"T", c.T},
                   {"octaves", c.octaves},
                   {"nodes_per_block", c.nodes_per_block},
                   {"amplitude", c.amplitude},
                   {"forcing_amplitude", c.forcing_amplitude},
                   {"tol", c.tol},
                   {"max_iter", c.max_iter},
                   {"samples", c.samples},
                   {"N_sweep", c.N_sweep},
                   {"T_sweep", c.T_sweep},
                   {"bracket_doublings", c.bracket_doublings}};
  doc["fault_injection"] = {{"partition_defect", c.fault.partition_defect}};
  return doc.dump(2);
}

// ---- emission ------------------------------------------------------------------------------

void CsvTable::add(const std::string& scenario, const std::string& quantity, const std::string& indices, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  rows_.push_back(scenario + "," + quantity + "," + indices + "," + buf);
}

std::string CsvTable::str() const {
  std::string out = "scenario,quantity,indices,value\n";
  for (const auto& r : rows_) out += r + "\n";
  return out;
}

std::string certificate_json(const SplitCertificate& cert) {
  json doc;
  doc["lemma_id"] = cert.lemma_id;
  json params = json::object();
  for (const auto& [k, v] : cert.params) params[k] = std::isfinite(v) ? json(v) : json(nullptr);
  doc["params"] = params;
  json measured = json::object(), predicted = json::object(), checks = json::array();
  for (const auto& c : cert.checks) {
    measured[c.name] = std::isfinite(c.measured) ? json(c.measured) : json(nullptr);
    predicted[c.name] = std::isfinite(c.bound) ? json(c.bound) : json(nullptr);
    checks.push_back({{"name", c.name}, {"pass", c.pass}});
  }
  doc["measured_norms"] = measured;
  doc["predicted_bounds"] = predicted;
  doc["checks"] = checks;
  doc["pass"] = cert.pass();
  return doc.dump(2);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  write_bytes_atomic(path, std::vector<std::uint8_t>(content.begin(), content.end()));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bnslab
