#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stabdecomp/harness.hpp"
#include "test_support.hpp"

using namespace stabdecomp;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("stabdecomp_" + name)).string();
}

json strip_timing(json r) {
  r.erase("wall_time_s");
  if (r.contains("output")) r["output"].erase("timing");
  return r;
}

ExperimentConfig config_for(const std::string& command, const json& state) {
  return config_from_json({{"command", command}, {"state", state}, {"seed", 11}});
}

}  // namespace

TEST(GenState, BasisState) {
  RngStream rng(1);
  const auto g = gen_state(state_spec_from_json({{"kind", "basis"}, {"n", 3}, {"index", 5}}), rng);
  EXPECT_DOUBLE_EQ(std::abs(g.psi.amp[5]), 1.0);
  EXPECT_DOUBLE_EQ(g.meta.at("stab_fidelity").get<double>(), 1.0);
  ASSERT_EQ(g.components.size(), 1u);
  EXPECT_NEAR(overlap_sq(g.psi, StateVector::from_stabilizer(g.components[0])), 1.0, 1e-12);
}

TEST(GenState, WFamilyOnHighQubits) {
  RngStream rng(1);
  const auto g = gen_state(state_spec_from_json({{"kind", "w_family"}, {"n", 4}, {"m", 3}}), rng);
  for (std::uint64_t i : {2u, 4u, 8u}) EXPECT_NEAR(std::abs(g.psi.amp[i]), 1 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(std::abs(g.psi.amp[1]), 0.0, 1e-12);
  ASSERT_TRUE(g.extent_bound);
  EXPECT_NEAR(*g.extent_bound, std::sqrt(3.0), 1e-12);
}

TEST(GenState, TDopedIsSeeded) {
  const auto spec = state_spec_from_json({{"kind", "tdoped"}, {"n", 4}, {"t", 2}, {"seed", 7}});
  RngStream a(1), b(99);
  const auto g1 = gen_state(spec, a);
  const auto g2 = gen_state(spec, b);
  EXPECT_EQ(g1.psi.amp, g2.psi.amp);
  EXPECT_NEAR(g1.psi.norm(), 1.0, 1e-12);
  EXPECT_NEAR(*g1.extent_bound, std::pow(1 + 1 / std::numbers::sqrt2, 2), 1e-12);
  EXPECT_DOUBLE_EQ(g1.meta.at("stab_rank_bound").get<double>(), 4.0);
}

TEST(GenState, ZeroTGatesGiveAStabilizerState) {
  RngStream rng(3);
  const auto g = gen_state(state_spec_from_json({{"kind", "tdoped"}, {"n", 3}, {"t", 0}}), rng);
  EXPECT_NEAR(bruteforce_stab_fidelity(g.psi).value, 1.0, 1e-9);
}

TEST(GenState, ExplicitComboIsRenormalized) {
  RngStream rng(1);
  const auto g = gen_state(state_spec_from_json({{"kind", "combo"},
                                                 {"n", 1},
                                                 {"coeffs", {1.0, 1.0}},
                                                 {"stabilizers", {{"+Z"}, {"+X"}}}}),
                           rng);
  const double norm = std::sqrt(2 + std::sqrt(2.0));
  EXPECT_NEAR(g.meta.at("normalization").get<double>(), norm, 1e-12);
  EXPECT_NEAR(*g.extent_bound, 2 / norm, 1e-12);
  EXPECT_NEAR(std::abs(g.component_coeffs[0]), 1 / norm, 1e-12);
}

TEST(GenState, NoisyComboKeepsPlantWeight) {
  RngStream rng(4);
  const auto g = gen_state(
      state_spec_from_json({{"kind", "combo"}, {"n", 3}, {"components", 1}, {"noise", 0.2}}), rng);
  EXPECT_NEAR(overlap_sq(g.psi, StateVector::from_stabilizer(g.components[0])), 0.8, 1e-9);
}

TEST(GenState, RejectsBadSpecs) {
  EXPECT_THROW(state_spec_from_json({{"kind", "w_family"}, {"n", 2}, {"m", 3}}), std::invalid_argument);
  EXPECT_THROW(state_spec_from_json({{"kind", "basis"}, {"n", 2}, {"index", 4}}), std::invalid_argument);
  EXPECT_THROW(state_spec_from_json({{"kind", "nope"}, {"n", 2}}), std::invalid_argument);
  EXPECT_THROW(state_spec_from_json({{"kind", "combo"}, {"n", 2}, {"components", 1}, {"noise", 1.0}}),
               std::invalid_argument);
}

TEST(Config, RoundTrip) {
  auto c = config_for("decompose", {{"kind", "haar"}, {"n", 3}});
  c.params.xi = 2.0;
  c.estimator = OverlapEstimator::adversarial;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(config_from_json({{"command", "fly"}, {"state", {{"kind", "haar"}, {"n", 2}}}}),
               std::invalid_argument);
}

TEST(Run, AnalyzeTState) {
  const double r = 1 / std::sqrt(2.0);
  auto c = config_for("analyze", {{"kind", "combo"},
                                  {"n", 1},
                                  {"coeffs", {json::array({r, 0.0}), json::array({0.5, 0.5})}},
                                  {"stabilizers", {{"+Z"}, {"-Z"}}}});
  const auto out = run(c).at(0).at("output");
  EXPECT_NEAR(out.at("proxy").get<double>(), 5.0 / 8, 1e-12);
  EXPECT_NEAR(out.at("u3pow8").get<double>(), 3.0 / 4, 1e-12);
  EXPECT_NEAR(out.at("stab_fidelity").get<double>(), (2 + std::sqrt(2.0)) / 4, 1e-9);
}

TEST(Run, RecordsCarrySchemaAndLedger) {
  auto c = config_for("test", {{"kind", "random_stabilizer"}, {"n", 3}});
  c.trials = 3;
  const auto records = run(c);
  ASSERT_EQ(records.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    const auto& r = records[i];
    EXPECT_EQ(r.at("schema_version"), kSchemaVersion);
    EXPECT_EQ(r.at("trial"), i);
    EXPECT_TRUE(r.at("output").at("accept").get<bool>());
    CostCounts sum;
    for (const auto& [name, v] : r.at("ledger").at("by_subroutine").items()) {
      sum += CostCounts{v.at("copies"), v.at("queries_u"), v.at("queries_con_u"), v.at("gates")};
    }
    const auto& t = r.at("ledger").at("totals");
    EXPECT_EQ(sum, (CostCounts{t.at("copies"), t.at("queries_u"), t.at("queries_con_u"), t.at("gates")}));
  }
}

TEST(Run, ReproducibleAcrossThreads) {
  auto c = config_for("selfcorrect", {{"kind", "combo"}, {"n", 3}, {"components", 1}, {"noise", 0.1}});
  c.trials = 4;
  const auto a = run(c);
  c.threads = 3;
  const auto b = run(c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(strip_timing(a[i]), strip_timing(b[i]));
}

TEST(Run, SelfCorrectOnPlantedState) {
  auto c = config_for("selfcorrect", {{"kind", "combo"}, {"n", 3}, {"components", 1}, {"noise", 0.2}});
  c.trials = 3;
  for (const auto& r : run(c)) {
    const auto& out = r.at("output");
    EXPECT_NEAR(out.at("optimum").get<double>(), 0.8, 1e-9);
    EXPECT_TRUE(out.at("within_tolerance").get<bool>());
  }
}

TEST(Run, DecomposeMeetsResidualContract) {
  auto c = config_for("decompose", {{"kind", "combo"}, {"n", 3}, {"components", 2}});
  c.params.epsilon = 0.3;
  for (const auto& r : run(c)) EXPECT_TRUE(r.at("output").at("contract_ok").get<bool>());
}

TEST(Run, OracleReportsPlantedGroup) {
  auto c = config_for("oracle", {{"kind", "random_stabilizer"}, {"n", 3}});
  const auto out = run(c).at(0).at("output");
  EXPECT_EQ(out.at("rank"), 3);
  EXPECT_NEAR(out.at("mass").get<double>(), 1.0, 1e-9);
}

TEST(Run, BenchMatchesNaiveConvolution) {
  auto c = config_for("bench", {{"kind", "haar"}, {"n", 4}});
  const auto out = run(c).at(0).at("output");
  EXPECT_LT(out.at("max_abs_diff").get<double>(), 1e-9);
  EXPECT_NEAR(out.at("q_total").get<double>(), 1.0, 1e-9);
  EXPECT_TRUE(out.at("timing").contains("naive_s"));
}

TEST(Emit, JsonlRoundTrip) {
  auto c = config_for("analyze", {{"kind", "haar"}, {"n", 2}});
  c.trials = 2;
  const auto records = run(c);
  const auto path = temp_path("rt.jsonl");
  emit_results(records, OutputFormat::jsonl, path);
  EXPECT_EQ(read_jsonl(path), records);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}

TEST(Emit, CsvFlattensScalars) {
  auto c = config_for("analyze", {{"kind", "haar"}, {"n", 2}});
  c.trials = 2;
  const auto path = temp_path("out.csv");
  emit_results(run(c), OutputFormat::csv, path);
  std::ifstream f(path);
  std::string header, line;
  std::getline(f, header);
  EXPECT_NE(header.find("output.proxy"), std::string::npos);
  EXPECT_NE(header.find("schema_version"), std::string::npos);
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 2);
  std::filesystem::remove(path);
}

TEST(Emit, EmptyCsvStillHasHeader) {
  const auto path = temp_path("empty.csv");
  emit_results({}, OutputFormat::csv, path);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header.rfind("schema_version", 0), 0u);
  std::filesystem::remove(path);
}
