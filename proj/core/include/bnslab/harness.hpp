#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bnslab/fieldio.hpp"

namespace bnslab {

/// Largest mode-wise divergence over every field flagged divergence-free that was recorded.
class DivergenceAudit {
 public:
  void record(const SpectralField& f, const std::string& label);
  void record(const Trajectory& t, const std::string& label);
  double worst() const { return worst_; }
  const std::string& worst_label() const { return worst_label_; }
  std::size_t count() const { return count_; }

 private:
  double worst_ = 0.0;
  std::string worst_label_;
  std::size_t count_ = 0;
};

struct CheckResult {
  CheckResult() = default;
  CheckResult(int i, std::string n) : id(i), name(std::move(n)) {}

  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  std::vector<std::pair<std::string, double>> measured;

  void add(const std::string& key, double value) { measured.emplace_back(key, value); }
};

struct ScenarioReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool pass() const;
  std::string to_json() const;
};

/// Shared state of one verify run.
struct VerifyContext {
  RunConfig cfg;
  DivergenceAudit audit;
  CsvTable csv;
  std::ostream* log = nullptr;
};

// Acceptance criteria 1-11; criterion 12 is the end-to-end run itself.
CheckResult check_partition(VerifyContext& ctx);
CheckResult check_retraction(VerifyContext& ctx);
CheckResult check_heat_besov(VerifyContext& ctx);
CheckResult check_interpolation(VerifyContext& ctx);
CheckResult check_splitting(VerifyContext& ctx);
CheckResult check_contraction(VerifyContext& ctx);
CheckResult check_fk_scaling(VerifyContext& ctx);
CheckResult check_decay(VerifyContext& ctx);
CheckResult check_energy(VerifyContext& ctx);
CheckResult check_scaling(VerifyContext& ctx);
CheckResult check_divergence(VerifyContext& ctx);

inline constexpr int kCriteria = 12;
inline constexpr double kVerifyBudgetSeconds = 600.0;

/// Runs all twelve criteria in order; `on_check` (may be null) sees each result as it completes.
ScenarioReport run_verify(const RunConfig& cfg, std::ostream* log = nullptr, CsvTable* csv = nullptr,
                          void (*on_check)(const CheckResult&) = nullptr);

/// One line: "[PASS] 3 heat_besov_equivalence ... (1.2 s)".
std::string format_check(const CheckResult& r);

/// Subcommands. Each writes its artifacts under cfg.output_dir/<scenario>/ and returns the exit status.
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_picard(const RunConfig& cfg, std::ostream& log);
int cmd_decay(const RunConfig& cfg, std::ostream& log);
int cmd_split(const RunConfig& cfg, std::ostream& log);
int cmd_norms(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);

/// Seeded initial data: band-limited Gaussian, slope -2, Leray-projected, L^2 norm `amplitude`
/// (zero field when amplitude is 0).
SpectralField seeded_initial_data(const GridSpec& grid, std::uint64_t seed, double amplitude);
/// Seeded tensor forcing on the time grid, F(t) = amplitude (t/T)^{-1/4} W with a fixed random W
/// (null-equivalent zero trajectory when amplitude is 0).
Trajectory seeded_forcing(const GridSpec& grid, const TimeGrid& tgrid, std::uint64_t seed, double amplitude);

}  // namespace bnslab
