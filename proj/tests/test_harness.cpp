#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "bnslab/fieldio.hpp"
#include "bnslab/harness.hpp"
#include "bnslab/random_fields.hpp"
#include "bnslab/spectral_ops.hpp"
#include "test_util.hpp"

using namespace bnslab;
using namespace bnslab::testing;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& tag) {
  RunConfig c;
  c.n = 16;
  c.octaves = 5;
  c.nodes_per_block = 4;
  c.samples = 3;
  c.T_sweep = {0.25, 0.5, 1.0};
  c.N_sweep = {0.01, 0.1, 1.0};
  c.output_dir = (fs::temp_directory_path() / ("bnslab_harness_" + std::to_string(::getpid())) / tag).string();
  return c;
}

struct CleanOutput {
  ~CleanOutput() { fs::remove_all(fs::temp_directory_path() / ("bnslab_harness_" + std::to_string(::getpid()))); }
} clean_output;

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Harness, PartitionCheckPassesAndDetectsInjectedDefect) {
  VerifyContext ok{small_config("p"), {}, {}, nullptr};
  const auto good = check_partition(ok);
  EXPECT_TRUE(good.pass);
  EXPECT_EQ(good.id, 1);
  VerifyContext bad{small_config("p"), {}, {}, nullptr};
  bad.cfg.fault.partition_defect = 1e-3;
  const auto r = check_partition(bad);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(format_check(r).rfind("[FAIL]  1 partition_of_unity", 0), 0u) << format_check(r);
}

TEST(Harness, RetractionCheckOnSmallGrid) {
  VerifyContext ctx{small_config("r"), {}, {}, nullptr};
  const auto r = check_retraction(ctx);
  EXPECT_TRUE(r.pass) << r.detail;
  EXPECT_EQ(ctx.csv.rows(), 3u);
}

TEST(Harness, DivergenceAuditTracksWorstFlaggedField) {
  const GridSpec g(16, kTwoPi);
  DivergenceAudit audit;
  audit.record(random_field(g, FieldKind::vector, 1), "clean");
  EXPECT_EQ(audit.count(), 1u);
  EXPECT_LE(audit.worst(), 1e-12);
  auto dirty = random_field(g, FieldKind::vector, 2, {.leray = false});
  audit.record(dirty, "unflagged");
  EXPECT_EQ(audit.count(), 1u);
  dirty.set_divergence_free(true);
  audit.record(dirty, "mislabelled");
  EXPECT_EQ(audit.count(), 2u);
  EXPECT_GT(audit.worst(), 1e-3);
  EXPECT_EQ(audit.worst_label(), "mislabelled");
}

TEST(Harness, SeededDataHasRequestedShape) {
  const GridSpec g(16, kTwoPi);
  EXPECT_EQ(max_coeff(seeded_initial_data(g, 1, 0.0)), 0.0);
  const auto u0 = seeded_initial_data(g, 1, 0.3);
  EXPECT_NEAR(plancherel_l2(u0), 0.3, 1e-12);
  EXPECT_TRUE(u0.divergence_free());
  EXPECT_EQ(relative_l2_error(seeded_initial_data(g, 1, 0.3), u0), 0.0);
  const TimeGrid tg(2.0, 4, 3);
  const auto F = seeded_forcing(g, tg, 4, 1.5);
  const double a = plancherel_l2(F.field(0)), b = plancherel_l2(F.field(tg.size() - 1));
  EXPECT_NEAR(a / b, std::pow(tg.time(0) / tg.time(tg.size() - 1), -0.25), 1e-12);
}

TEST(Harness, PicardWithZeroDataWritesZeroTable) {
  auto cfg = small_config("picard");
  cfg.amplitude = 0.0;
  std::ostringstream log;
  ASSERT_EQ(cmd_picard(cfg, log), 0);
  const auto rows = csv_rows(read_text(cfg.output_dir + "/picard/results.csv"));
  ASSERT_GE(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"scenario", "quantity", "indices", "value"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 4u);
    EXPECT_EQ(std::stod(rows[i][3]), 0.0) << rows[i][1];
  }
  EXPECT_TRUE(fs::exists(cfg.output_dir + "/picard/report.json"));
}

TEST(Harness, NormsTableIsByteDeterministic) {
  auto a = small_config("norms_a");
  auto b = small_config("norms_b");
  a.samples = b.samples = 2;
  std::ostringstream log;
  ASSERT_EQ(cmd_norms(a, log), 0);
  ASSERT_EQ(cmd_norms(b, log), 0);
  const std::string ta = read_text(a.output_dir + "/norms/results.csv");
  EXPECT_EQ(ta, read_text(b.output_dir + "/norms/results.csv"));
  EXPECT_EQ(csv_rows(ta).size(), 1u + 2u * 6u);
}

TEST(Harness, SolveWritesTrajectoryOrReportsDivergence) {
  auto cfg = small_config("solve");
  cfg.amplitude = 0.2;
  std::ostringstream log;
  ASSERT_EQ(cmd_solve(cfg, log), 0) << log.str();
  const auto v = read_trajectory(cfg.output_dir + "/solve/v.bnsf");
  EXPECT_EQ(v.size(), TimeGrid(1.0, 5, 4).size());

  auto big = small_config("solve_big");
  big.amplitude = 2000.0;
  big.max_iter = 20;
  EXPECT_EQ(cmd_solve(big, log), 2);
  EXPECT_NE(read_text(big.output_dir + "/solve/report.json").find("\"converged\": false"), std::string::npos);
}

TEST(Harness, SplitReportsPredictedExponents) {
  auto cfg = small_config("split");
  cfg.n = 32;
  std::ostringstream log;
  EXPECT_EQ(cmd_split(cfg, log), 0) << log.str();
  const auto rows = csv_rows(read_text(cfg.output_dir + "/split/results.csv"));
  bool found = false;
  for (const auto& r : rows)
    if (r.size() == 4 && r[1] == "slope_u_tilde_l2" && r[2] == "predicted") {
      EXPECT_NEAR(std::stod(r[3]), -20.0 / 9.0, 1e-12);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(Harness, ReportJsonListsChecks) {
  ScenarioReport rep;
  rep.scenario = "verify";
  rep.checks.emplace_back(1, "partition_of_unity");
  rep.checks.back().pass = true;
  rep.checks.back().add("residual", 0.0);
  EXPECT_TRUE(rep.pass());
  const std::string j = rep.to_json();
  EXPECT_NE(j.find("\"partition_of_unity\""), std::string::npos);
  EXPECT_NE(j.find("\"residual\""), std::string::npos);
  rep.checks.emplace_back(2, "retraction_identity");
  EXPECT_FALSE(rep.pass());
  EXPECT_FALSE(ScenarioReport{}.pass());
}
