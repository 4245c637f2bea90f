#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnslab/error.hpp"
#include "bnslab/field.hpp"
#include "bnslab/splitting.hpp"
#include "bnslab/trajectory.hpp"

namespace bnslab {

// ---- BNSF binary fields --------------------------------------------------------------------

inline constexpr std::uint32_t kBnsfVersion = 1;
inline constexpr std::uint32_t kStoragePhysicalF64 = 0;
inline constexpr std::size_t kBnsfHeaderBytes = 36;

/// "BNSF", version, dim, n, box length, rank, components, storage flag; all little-endian.
struct FieldFileHeader {
  std::uint32_t version = kBnsfVersion;
  std::uint32_t dim = 3;
  std::uint32_t n = 0;
  double box_len = 0.0;
  std::uint32_t rank = 0;
  std::uint32_t components = 0;
  std::uint32_t storage = kStoragePhysicalF64;

  std::size_t payload_bytes() const { return static_cast<std::size_t>(components) * n * n * n * 8; }
};

std::vector<std::uint8_t> encode_field(const PhysicalField& f);
/// Decodes one record starting at `offset`; advances it past the record. Throws ParseError.
PhysicalField decode_field(const std::vector<std::uint8_t>& bytes, std::size_t& offset);
FieldFileHeader decode_header(const std::vector<std::uint8_t>& bytes, std::size_t offset);

void write_field(const std::string& path, const PhysicalField& f);
void write_field(const std::string& path, const SpectralField& f);
PhysicalField read_physical(const std::string& path);
SpectralField read_field(const std::string& path);

/// Concatenated field records at `path`, times and time-grid metadata in `path + ".json"`.
void write_trajectory(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory(const std::string& path);

// ---- run configuration ---------------------------------------------------------------------

/// Test hooks; every entry defaults to "no fault".
struct FaultInjection {
  double partition_defect = 0.0;
};

struct RunConfig {
  int n = 32;
  double box_len = 6.283185307179586;
  std::string scenario = "verify";
  // scenario parameters
  double p = 6.0;
  double q = 2.0;
  int k = -1;                 // -1 selects k(p)
  double T = 1.0;
  int octaves = 12;
  int nodes_per_block = 10;
  double amplitude = 0.05;    // L^2 norm of the random initial data
  double forcing_amplitude = 0.0;
  double tol = 1e-10;
  int max_iter = 50;
  int samples = 20;           // random inputs per property check
  std::vector<double> N_sweep{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::vector<double> T_sweep{0.0625, 0.125, 0.25, 0.5, 1.0};
  int bracket_doublings = 0;  // solve: amplitude doublings past params.amplitude, 0 disables
  std::uint64_t seed = 1;
  std::string output_dir = "bnslab_out";
  FaultInjection fault;

  int resolved_k() const;
};

/// Strict schema: unknown keys, wrong types and empty documents are rejected.
/// JSON syntax errors raise ParseError with the byte offset; schema errors raise ConfigError.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_json(const RunConfig& cfg);

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---- result emission -----------------------------------------------------------------------

/// CSV with header "scenario,quantity,indices,value"; values printed with 17 significant digits.
class CsvTable {
 public:
  void add(const std::string& scenario, const std::string& quantity, const std::string& indices, double value);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> rows_;
};

/// {lemma_id, params, measured_norms, predicted_bounds, checks, pass}.
std::string certificate_json(const SplitCertificate& cert);

/// Writes via a temporary file and rename, creating parent directories.
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

/// FNV-1a of the text, hex.
std::string content_hash(const std::string& text);

}  // namespace bnslab
