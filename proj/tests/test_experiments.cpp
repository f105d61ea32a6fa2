#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ridl/experiments.hpp"

using namespace ridl;

namespace {

ExperimentSpec spec_for(Family f, std::vector<std::size_t> sizes, std::vector<double> ps = {0.9}) {
  ExperimentSpec s;
  s.families = {f};
  s.sizes = std::move(sizes);
  s.p_values = std::move(ps);
  return s;
}

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v;
  for (auto n = a; n <= b; ++n) v.push_back(n);
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Parses CSV text and checks every row has the header's width and that
/// numeric columns parse.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::vector<std::string>& header) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(split_line(line), header);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    auto fields = split_line(line);
    EXPECT_EQ(fields.size(), header.size()) << line;
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void expect_sandwich(const Table& t) {
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double rl = *t.number(i, "j_res_lb"), lb = *t.number(i, "j_lb");
    const double ub = *t.number(i, "j_ub"), ru = *t.number(i, "j_res_ub");
    EXPECT_LE(rl, lb + Tolerances::sandwich_slack) << i;
    EXPECT_LE(lb, ub + Tolerances::sandwich_slack) << i;
    EXPECT_LE(ub, ru + Tolerances::sandwich_slack) << i;
    const bool has_exact = std::find(t.columns.begin(), t.columns.end(), "j_exact") != t.columns.end();
    if (auto ex = has_exact ? t.number(i, "j_exact") : std::nullopt) {
      EXPECT_LE(lb, *ex + Tolerances::sandwich_slack) << i;
      EXPECT_LE(*ex, ub + Tolerances::sandwich_slack) << i;
    }
  }
}

}  // namespace

TEST(Bounds, StarSweepMatchesClosedForms) {
  const Table t = run_bounds(spec_for(Family::star, range(3, 100)));
  ASSERT_EQ(t.rows.size(), 98u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto n = static_cast<std::size_t>(*t.number(i, "n"));
    const auto g = make_star(n);
    const auto b = star_bounds(n, RidlConfig::from_k(g, 0.9, 0.8, 1.0));
    EXPECT_NEAR(*t.number(i, "j_lb"), b.lower, 1e-10 * b.lower);
    EXPECT_NEAR(*t.number(i, "j_ub"), b.upper, 1e-10 * b.upper);
  }
  expect_sandwich(t);
}

TEST(Bounds, TwoNodeSingleRow) {
  auto s = spec_for(Family::complete, {2}, {0.5});
  s.epsilon = 0.4;
  const Table t = run_bounds(s);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_NEAR(*t.number(0, "j_lb"), 25.0 / 18.0, 1e-12);
  EXPECT_NEAR(*t.number(0, "j_ub"), 25.0 / 12.0, 1e-12);
  EXPECT_NEAR(*t.number(0, "k"), 0.4, 1e-15);
}

TEST(Bounds, CompleteApproachesLimits) {
  const Table t = run_bounds(spec_for(Family::complete, {100}));
  EXPECT_NEAR(*t.number(0, "j_lb"), 1.1414, 0.02 * 1.1414);
  EXPECT_NEAR(*t.number(0, "j_ub"), 1.2056, 0.02 * 1.2056);
}

TEST(Bounds, DisconnectedFileGraphRejected) {
  const auto path = std::filesystem::temp_directory_path() / "ridl_split_graph.txt";
  {
    std::ofstream out(path);
    out << "4 2\n0 1\n2 3\n";
  }
  ExperimentSpec s;
  s.families = {Family::file};
  s.graph_file = path.string();
  EXPECT_THROW(run_bounds(s), ValidationError);
  std::filesystem::remove(path);
}

TEST(Exact, CapExceededSuggestsBounds) {
  auto s = spec_for(Family::path, {20});
  s.exact_cap = 10;
  try {
    run_exact(s);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bounds"), std::string::npos);
  }
}

TEST(Exact, FullActivationHasNoBoundError) {
  for (auto f : {Family::star, Family::path, Family::complete}) {
    const Table t = run_exact(spec_for(f, range(3, 8), {1.0}));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_NEAR(*t.number(i, "rel_lb"), 0.0, 1e-9);
      EXPECT_NEAR(*t.number(i, "rel_ub"), 0.0, 1e-9);
    }
  }
}

TEST(Exact, CompleteUpperBoundIsTight) {
  const Table t = run_exact(spec_for(Family::complete, range(3, 12)));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_LT(std::abs(*t.number(i, "rel_ub")), 1e-8);
    EXPECT_GT(*t.number(i, "rel_lb"), 0.01);
  }
  expect_sandwich(t);
}

TEST(Exact, SparseFamiliesRelativeErrorsMeasured) {
  // Recorded, not asserted in either direction: at small N with p = 0.9 the
  // upper bound is the closer one for star and path.
  for (auto f : {Family::star, Family::path}) {
    const Table t = run_exact(spec_for(f, range(3, 12)));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double rl = *t.number(i, "rel_lb"), ru = *t.number(i, "rel_ub");
      EXPECT_GE(rl, -1e-9);
      EXPECT_GE(ru, -1e-9);
      EXPECT_LT(rl, 1.0);
    }
    expect_sandwich(t);
  }
}

TEST(SweepN, GridSizesSnapAndDeduplicate) {
  const Table t = run_sweep_n(spec_for(Family::grid2d, range(3, 20)));
  std::vector<std::string> dims;
  for (const auto& row : t.rows) dims.push_back(std::get<std::string>(row[t.column("dims")]));
  EXPECT_EQ(dims, (std::vector<std::string>{"2x2", "3x3", "4x4"}));
  expect_sandwich(t);

  auto explicit_dims = spec_for(Family::grid2d, {});
  explicit_dims.dims = {2, 5};
  const Table t2 = run_sweep_n(explicit_dims);
  ASSERT_EQ(t2.rows.size(), 1u);
  EXPECT_EQ(*t2.number(0, "n"), 10.0);
}

TEST(SweepN, ErdosRenyiRealizationsAndSummaries) {
  auto s = spec_for(Family::erdos_renyi, {8, 10});
  s.realizations = 3;
  s.seed = 5;
  const Table t = run_sweep_n(s);
  // Three draws plus mean and sd per N.
  ASSERT_EQ(t.rows.size(), 10u);
  const auto rc = t.column("realization");
  EXPECT_EQ(std::get<std::string>(t.rows[3][rc]), "mean");
  EXPECT_EQ(std::get<std::string>(t.rows[4][rc]), "sd");
  const double mean = (*t.number(0, "j_lb") + *t.number(1, "j_lb") + *t.number(2, "j_lb")) / 3.0;
  EXPECT_NEAR(*t.number(3, "j_lb"), mean, 1e-12 * mean);
  EXPECT_EQ(table_to_string(run_sweep_n(s), OutputFormat::csv), table_to_string(t, OutputFormat::csv));
}

TEST(SweepP, EndpointMatchesSweepN) {
  auto sp = spec_for(Family::star, {30}, {0.1, 0.5, 0.9});
  sp.exact_cap = 12;
  const Table p = run_sweep_p(sp);
  ASSERT_EQ(p.rows.size(), 3u);
  auto sn = spec_for(Family::star, {30});
  sn.exact_cap = 12;
  const Table n = run_sweep_n(sn);
  for (const char* col : {"j_lb", "j_ub", "j_res_lb", "j_res_ub", "r_ave", "lambda2"}) {
    EXPECT_EQ(*p.number(2, col), *n.number(0, col)) << col;
  }
  // N = 30 is above the cap, so the exact index comes from the reduced size.
  EXPECT_EQ(*p.number(0, "n_exact"), 12.0);
  EXPECT_TRUE(p.number(0, "j_exact").has_value());
  // Lower bound falls as p grows for a fixed spectrum.
  EXPECT_GT(*p.number(0, "j_lb"), *p.number(1, "j_lb"));
  EXPECT_GT(*p.number(1, "j_lb"), *p.number(2, "j_lb"));
}

TEST(SweepP, ReducedGridSizes) {
  EXPECT_EQ(reduced_exact_size(Family::grid2d, 100, 64), 64u);
  EXPECT_EQ(reduced_exact_size(Family::grid2d, 100, 50), 49u);
  EXPECT_EQ(reduced_exact_size(Family::grid3d, 125, 64), 64u);
  EXPECT_EQ(reduced_exact_size(Family::grid3d, 125, 63), 27u);
  EXPECT_EQ(reduced_exact_size(Family::path, 10, 64), 10u);
}

TEST(Simulate, ReferenceAndZeroNoise) {
  auto s = spec_for(Family::complete, {2}, {0.5});
  s.epsilon = 0.4;
  s.sim.horizon = 200;
  s.sim.ensemble = 20000;
  const auto out = run_simulate(s);
  ASSERT_EQ(out.table.rows.size(), 1u);
  EXPECT_LE(std::abs(*out.table.number(0, "j_hat") - 25.0 / 12.0), 3.0 * *out.table.number(0, "std_error"));
  EXPECT_TRUE(out.all_converged);

  s.sigma2 = 0.0;
  s.sim.ensemble = 100;
  EXPECT_EQ(*run_simulate(s).table.number(0, "j_hat"), 0.0);
}

TEST(Simulate, PathEstimateInsideResistanceBracket) {
  auto s = spec_for(Family::path, {10});
  s.sim.ensemble = 2000;
  const Table t = run_simulate(s).table;
  const double j = *t.number(0, "j_hat");
  EXPECT_GE(j, *t.number(0, "j_res_lb"));
  EXPECT_LE(j, *t.number(0, "j_res_ub"));
}

TEST(Output, CsvSchemaParses) {
  const Table t = run_sweep_n(spec_for(Family::path, range(3, 6)));
  const auto rows = parse_csv(table_to_string(t, OutputFormat::csv), schema::sweep_n());
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r[0], "path");
    for (const char* col : {"j_lb", "j_ub", "j_exact", "rel_lb"}) {
      const auto idx = t.column(col);
      EXPECT_NO_THROW((void)std::stod(r[idx])) << col;
    }
  }
}

TEST(Output, JsonHasNullsForEmptyCells) {
  const Table t = run_bounds(spec_for(Family::star, {5}));
  const auto j = nlohmann::json::parse(table_to_string(t, OutputFormat::json));
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["family"], "star");
  EXPECT_EQ(j[0]["n"], 5);
  EXPECT_TRUE(j[0]["graph_seed"].is_null());
  EXPECT_NEAR(j[0]["j_lb"].get<double>(), *t.number(0, "j_lb"), 1e-12 * *t.number(0, "j_lb"));
}

TEST(Output, FormatDoubleHasTwelveSignificantDigits) {
  EXPECT_EQ(format_double(25.0 / 12.0), "2.08333333333e+00");
  EXPECT_EQ(format_double(0.1), "1.00000000000e-01");
  for (double v : {0.1, 25.0 / 12.0, 1e-300, 123456.789, -7.25}) {
    EXPECT_NEAR(std::stod(format_double(v)), v, 5e-12 * std::abs(v));
  }
}

TEST(Spec, Validation) {
  auto s = spec_for(Family::star, {5});
  s.epsilon = 0.1;
  s.k = 0.5;
  EXPECT_THROW(s.validate(), ValidationError);
  auto p0 = spec_for(Family::star, {5}, {0.0});
  EXPECT_THROW(p0.validate(), ValidationError);
  auto nosize = spec_for(Family::path, {});
  EXPECT_THROW(nosize.validate(), ValidationError);
  auto big_eps = spec_for(Family::path, {5});
  big_eps.epsilon = 0.5;
  EXPECT_THROW(run_bounds(big_eps), ValidationError);
  EXPECT_THROW(parse_family("hypercube"), ValidationError);
  EXPECT_EQ(parse_family("erdos-renyi"), Family::erdos_renyi);
}

TEST(Report, WritesDeterministicDirectory) {
  const auto root = std::filesystem::temp_directory_path() / "ridl_report_test";
  std::filesystem::remove_all(root);
  ExperimentSpec base;
  base.exact_cap = 9;
  ReportOptions opt;
  opt.n_min = 3;
  opt.n_max = 10;
  opt.sweep_p_n = 12;
  opt.sweep_p_values = {0.3, 0.9};
  const auto a = root / "nested" / "a";
  const auto b = root / "b";
  const auto manifest = run_report(base, a, opt);
  run_report(base, b, opt);
  EXPECT_EQ(manifest["files"].size(), 7u);
  for (const auto& entry : manifest["files"]) {
    const std::string name = entry["file"];
    ASSERT_TRUE(std::filesystem::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_TRUE(std::filesystem::exists(a / "manifest.json"));
  const auto sweep_p = slurp(a / "sweep_p.csv");
  parse_csv(sweep_p, schema::sweep_p());
  std::filesystem::remove_all(root);
}

TEST(Report, UnwritableDirectoryIsIoError) {
  ExperimentSpec base;
  EXPECT_THROW(run_report(base, "/proc/ridl_cannot_create/x", ReportOptions{3, 4, 4, {0.9}}), IoError);
}
