#include <gtest/gtest.h>

#include "mnar/config.hpp"
#include "mnar/errors.hpp"
#include "mnar/report.hpp"

using namespace mnar;

namespace {

std::string field_of(const KeyValues& kv) {
  try {
    resolve_experiments(kv);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(KeyValues, ParseAndFormatRoundTrip) {
  const auto kv = parse_key_values("# comment\n\nkappa = 3\n  delta=0.25  \nseed = 9\n");
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("delta"), "0.25");
  EXPECT_EQ(parse_key_values(format_key_values(kv)), kv);
  EXPECT_EQ(format_key_values(kv), "delta = 0.25\nkappa = 3\nseed = 9\n");
}

TEST(KeyValues, ErrorsNameTheLine) {
  try {
    parse_key_values("kappa = 3\nnot a pair\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "line 2");
  }
  try {
    parse_key_values("kappa = 3\nkappa = 4\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "line 2");
  }
}

TEST(Resolve, DefaultsAndOverrides) {
  const auto d = resolve_experiments({});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].id, "custom");
  EXPECT_EQ(d[0].model.kappa, 4);
  EXPECT_EQ(std::get<TwoTypePopulation>(d[0].population.kind).delta, 0.2);
  EXPECT_EQ(d[0].seed, kDefaultSeed);

  const auto c = resolve_experiments({{"population", "uniform_mix"},
                                      {"range_a", "0.2, 0.5"},
                                      {"kappa", "2"},
                                      {"mode", "truncated"},
                                      {"n_strata", "40"},
                                      {"reps", "3"},
                                      {"tol", "1e-5"},
                                      {"max_iter", "100"},
                                      {"grid_res", "10"},
                                      {"seed", "12"},
                                      {"id", "mine"}});
  ASSERT_EQ(c.size(), 1u);
  const auto& u = std::get<UniformMixPopulation>(c[0].population.kind);
  EXPECT_EQ(u.range_a, (std::pair<double, double>{0.2, 0.5}));
  EXPECT_EQ(u.range_b, (std::pair<double, double>{0.4, 0.9}));
  EXPECT_EQ(c[0].mode, Mode::Truncated);
  EXPECT_EQ(c[0].population.n_strata, 40);
  EXPECT_EQ(c[0].replications, 3);
  EXPECT_EQ(c[0].solver.tol, 1e-5);
  EXPECT_EQ(c[0].solver.max_iter, 100);
  EXPECT_EQ(c[0].grid_resolution, 10);
  EXPECT_EQ(c[0].seed, 12u);
  EXPECT_EQ(c[0].id, "mine");
}

TEST(Resolve, PresetWithOverrides) {
  const auto c = resolve_experiments({{"preset", "table2"}, {"reps", "4"}});
  ASSERT_EQ(c.size(), 5u);
  for (const auto& e : c) EXPECT_EQ(e.replications, 4);
  EXPECT_EQ(c[4].id, "table2_kappa5");
}

TEST(Resolve, ErrorsNameTheField) {
  EXPECT_EQ(field_of({{"kappa", "0"}}), "kappa");
  EXPECT_EQ(field_of({{"kappa", "two"}}), "kappa");
  EXPECT_EQ(field_of({{"delta", "0.7"}}), "delta");
  EXPECT_EQ(field_of({{"population", "uniform_mix"}, {"delta", "0.1"}}), "delta");
  EXPECT_EQ(field_of({{"range_a", "0.1,0.2"}}), "range_a");
  EXPECT_EQ(field_of({{"population", "uniform_mix"}, {"range_b", "0.5"}}), "range_b");
  EXPECT_EQ(field_of({{"family", "poisson"}}), "family");
  EXPECT_EQ(field_of({{"mode", "both"}}), "mode");
  EXPECT_EQ(field_of({{"reps", "0"}}), "reps");
  EXPECT_EQ(field_of({{"tol", "-1"}}), "tol");
  EXPECT_EQ(field_of({{"seed", "-3"}}), "seed");
  EXPECT_EQ(field_of({{"n_strata", "7"}}), "n_strata");
  EXPECT_EQ(field_of({{"colour", "red"}}), "colour");
  EXPECT_EQ(field_of({{"preset", "table9"}}), "preset");
  EXPECT_EQ(field_of({{"preset", "table1"}, {"id", "x"}}), "id");
}

TEST(Report, CsvAndTableLayout) {
  ExperimentReport r;
  r.config.id = "cfg";
  r.summary = {{"naive", 0.5770123456789, 0.0106, 50, 0}, {"gmle", 0.4996, 0.0172, 50, 0}};
  RunManifest m;
  m.subcommand = "simulate";
  m.config = {{"preset", "table1"}};
  m.seed = 5;
  const auto csv = summary_csv({r}, m);
  EXPECT_EQ(csv.rfind("# manifest: {", 0), 0u);
  EXPECT_NE(csv.find("\nconfig_id,estimator,mean,sd,n_reps,n_failed\n"), std::string::npos);
  EXPECT_NE(csv.find("cfg,naive,0.5770123457,0.0106,50,0\n"), std::string::npos);
  const auto table = format_table({r});
  EXPECT_NE(table.find("0.577, (0.011)"), std::string::npos) << table;
  EXPECT_NE(table.find("0.500, (0.017)"), std::string::npos) << table;
  EXPECT_EQ(format_number(0.1), "0.1");
}
