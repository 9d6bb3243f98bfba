#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <unistd.h>
#include <random>
#include <sstream>

#include "kdl/analysis.hpp"
#include "kdl/report.hpp"
#include "kdl/svg.hpp"
#include "kdl/sweep.hpp"

using namespace kdl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kdl_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Csv, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
  std::ostringstream os;
  write_csv_record(os, {"x", "", "y,z"});
  EXPECT_EQ(os.str(), "x,,\"y,z\"\r\n");
}

TEST(Csv, ParseRoundTrip) {
  const std::vector<std::vector<std::string>> recs{
      {"a", "b,c", ""}, {"q\"uote", "multi\r\nline", "end"}, {"", "", ""}, {"last"}};
  std::ostringstream os;
  for (const auto& r : recs) write_csv_record(os, r);
  EXPECT_EQ(parse_csv(os.str()), recs);
  EXPECT_EQ(parse_csv("a,b\nc,d"), (std::vector<std::vector<std::string>>{{"a", "b"}, {"c", "d"}}));
  EXPECT_THROW(parse_csv("\"open"), Error);
}

TEST(Csv, NumbersRoundTripExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = U(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1.5), "1.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(Results, WriteReadRoundTrip) {
  std::vector<ResultRow> rows(3);
  rows[0] = {"rooms", "neck=0.25;m=2", 64, "K_p", "2", 23.5, "two_sided", "lanczos", 1.25, "ok", "a,b"};
  rows[1] = {"disk", "", 32, "C_J_lower", "", std::nan(""), "", "", 0.0, "error: boom, \"quoted\"", ""};
  rows[2] = {"x", "", 16, "end_ratio_max", "", INFINITY, "lower", "m", 0.5, "ok", "line\nbreak"};
  std::stringstream ss;
  write_results(ss, rows);
  const auto back = read_results(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].key(), rows[i].key());
    EXPECT_EQ(back[i].status, rows[i].status);
    EXPECT_EQ(back[i].note, rows[i].note);
    EXPECT_EQ(back[i].wall_time, rows[i].wall_time);
    if (std::isnan(rows[i].value))
      EXPECT_TRUE(std::isnan(back[i].value));
    else
      EXPECT_EQ(back[i].value, rows[i].value);
  }
  std::ostringstream no_time;
  write_results(no_time, rows, false);
  EXPECT_EQ(no_time.str().find("1.25"), std::string::npos);
}

TEST(Results, RejectsForeignHeader) {
  std::istringstream is("a,b,c\r\n1,2,3\r\n");
  EXPECT_THROW(read_results(is), Error);
}

TEST(Analyses, ParseLabels) {
  EXPECT_EQ(parse_analysis("john").kind, AnalysisKind::John);
  EXPECT_EQ(parse_analysis("end-measure").kind, AnalysisKind::EndMeasure);
  const auto k = parse_analysis("korn 1.5");
  EXPECT_EQ(k.kind, AnalysisKind::Korn);
  EXPECT_EQ(k.p, 1.5);
  EXPECT_EQ(parse_analysis("div=3").p, 3.0);
  EXPECT_EQ(parse_analysis("duality").p, 2.0);
  EXPECT_EQ(parse_analysis("korn 2").label(), "korn 2");
  for (const char* bad : {"korn 1", "korn x", "john 2", "magic", "korn 2 3", "div inf"})
    EXPECT_THROW(parse_analysis(bad), Error) << bad;
  EXPECT_EQ(analysis_constants(parse_analysis("duality 2")).size(), 7u);
  EXPECT_EQ(analysis_constants(parse_analysis("duality 3")).size(), 5u);
}

TEST(SweepConfigParse, RepeatedKeysAndComments) {
  std::istringstream is(
      "# rooms sweep\n"
      "generator = rooms\n"
      "neck = 0.25   # widest\n"
      "neck = 0.125\n"
      "resolution = 16\n"
      "resolution = 24\n"
      "analysis = john\n"
      "analysis = korn 2\n"
      "workers = 2\n"
      "seed = 9\n"
      "cs = 2\n");
  const auto c = parse_sweep_config(is);
  EXPECT_EQ(c.necks, (std::vector<double>{0.25, 0.125}));
  EXPECT_EQ(c.room_counts, std::vector<int>{2});
  EXPECT_EQ(c.resolutions, (std::vector<int>{16, 24}));
  EXPECT_EQ(c.analyses.size(), 2u);
  EXPECT_EQ(c.workers, 2);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.C_s, 2.0);
  const auto specs = sweep_domains(c);
  ASSERT_EQ(specs.size(), 4u);
  EXPECT_EQ(specs[0].neck_width, 0.25);
  EXPECT_EQ(specs[1].resolution, 24);
  EXPECT_EQ(specs[2].neck_width, 0.125);
  EXPECT_EQ(spec_params(specs[2]), "neck=0.125;m=2");
}

TEST(SweepConfigParse, Errors) {
  const char* bad[] = {
      "generator = rooms\nresolution = 32\nresolution = 16\nanalysis = john\n",
      "generator = rooms\nresolution = 16\n",
      "generator = moon\nresolution = 16\nanalysis = john\n",
      "generator = rooms\nresolution = 16\nanalysis = korn 0.5\n",
      "generator = rooms\nresolution = 16\nanalysis = john\ncolour = red\n",
      "generator = rooms\nneck = 2\nresolution = 16\nanalysis = john\n",
      "generator = rooms\nresolution = sixteen\nanalysis = john\n",
      "just text\n",
  };
  for (const char* text : bad) {
    std::istringstream is(text);
    EXPECT_THROW(parse_sweep_config(is), ConfigError) << text;
  }
}

TEST(Sweep, RowCountDeterminismAndResume) {
  const fs::path out = scratch("sweep");
  SweepConfig c;
  c.generators = {Generator::RoomsAndCorridors};
  c.necks = {0.25, 0.125, 0.0625};
  c.resolutions = {32, 48};
  for (const char* a : {"john", "end-measure", "korn 2", "infsup"}) c.analyses.push_back(parse_analysis(a));
  c.output = out.string();
  c.workers = 1;
  c.budget = 128;
  const auto first = run_sweep(c);
  EXPECT_EQ(first.rows.size(), 24u);
  EXPECT_EQ(first.failed, 0u);
  EXPECT_EQ(first.computed, 24u);
  const std::string bytes = slurp(out / "results.csv");

  // Rerun from scratch, in parallel: identical bytes.
  fs::remove_all(out);
  c.workers = 3;
  run_sweep(c);
  EXPECT_EQ(slurp(out / "results.csv"), bytes);

  // Complete table: nothing recomputed.
  const auto again = run_sweep(c);
  EXPECT_EQ(again.computed, 0u);
  EXPECT_EQ(again.reused, 24u);
  EXPECT_EQ(slurp(out / "results.csv"), bytes);

  // Drop every other row: only those come back.
  std::ifstream is(out / "results.csv", std::ios::binary);
  auto rows = read_results(is);
  is.close();
  std::vector<ResultRow> half;
  for (std::size_t i = 0; i < rows.size(); i += 2) half.push_back(rows[i]);
  {
    std::ofstream os(out / "results.csv", std::ios::binary);
    write_results(os, half, false);
  }
  const auto resumed = run_sweep(c);
  EXPECT_EQ(resumed.computed, 12u);
  EXPECT_EQ(slurp(out / "results.csv"), bytes);

  // K_2 grows as the neck narrows at each resolution.
  std::map<std::pair<int, std::string>, double> k;
  for (const auto& r : resumed.rows)
    if (r.constant == "K_p") k[{r.resolution, r.params}] = r.value;
  for (int res : {32, 48}) {
    const double wide = k[{res, "neck=0.25;m=2"}], mid = k[{res, "neck=0.125;m=2"}],
                 narrow = k[{res, "neck=0.0625;m=2"}];
    EXPECT_LT(wide, mid);
    EXPECT_LT(mid, narrow);
  }
  const std::string timings = slurp(out / "timings.csv");
  EXPECT_NE(timings.find("K_p"), std::string::npos);
  fs::remove_all(out);
}

TEST(Analysis, ErrorsBecomeRows) {
  const auto d = rasterize(DomainSpec{Generator::Square, 16});
  AnalysisContext ctx("square", "", 16, d);
  AnalysisOptions o;
  o.x0 = "0,0";  // a false cell
  const auto rows = run_analysis(ctx, parse_analysis("john"), o);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].ok());
  EXPECT_EQ(rows[0].status.rfind("error: ", 0), 0u);
  EXPECT_TRUE(std::isnan(rows[0].value));
  EXPECT_EQ(rows[0].constant, "C_J_lower");
}

TEST(Analysis, RowsCarryDomainAndConstants) {
  const auto d = rasterize(DomainSpec{Generator::LShape, 24});
  AnalysisContext ctx("l_shape", "", 24, d);
  AnalysisOptions o;
  o.budget = 64;
  for (const char* a : {"whitney", "korn 2", "korn-lower 2", "div 2", "infsup", "duality 2"}) {
    const auto an = parse_analysis(a);
    const auto rows = run_analysis(ctx, an, o);
    const auto names = analysis_constants(an);
    ASSERT_EQ(rows.size(), names.size()) << a;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_TRUE(rows[i].ok()) << a << ": " << rows[i].status;
      EXPECT_EQ(rows[i].constant, names[i].first);
      EXPECT_EQ(rows[i].domain, "l_shape");
      EXPECT_EQ(rows[i].resolution, 24);
    }
  }
  // C_d(2) from the divergence analysis is 1 / beta.
  const double cd = run_analysis(ctx, parse_analysis("div 2"), o)[0].value;
  const double beta = run_analysis(ctx, parse_analysis("infsup"), o)[0].value;
  EXPECT_NEAR(cd * beta, 1.0, 1e-12);
}

TEST(Svg, WellFormedWithOverlays) {
  DomainSpec spec{Generator::RoomsAndCorridors, 32};
  spec.neck_width = 0.125;
  const auto d = rasterize(spec);
  AnalysisContext ctx("rooms", "", 32, d);
  AnalysisOptions o;
  o.budget = 128;
  run_analysis(ctx, parse_analysis("whitney"), o);
  run_analysis(ctx, parse_analysis("end-measure"), o);
  run_analysis(ctx, parse_analysis("korn 2"), o);
  std::ostringstream os;
  write_svg(os, ctx, o);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("<?xml", 0), 0u);
  EXPECT_NE(s.find("<circle"), std::string::npos);
  EXPECT_NE(s.find("<line"), std::string::npos);
  EXPECT_EQ(s.substr(s.size() - 7), "</svg>\n");
  EXPECT_EQ(std::count(s.begin(), s.end(), '<') - std::count(s.begin(), s.end(), '>'), 0);
}

TEST(FieldCsv, OneRecordPerCell) {
  const auto d = rasterize(DomainSpec{Generator::Square, 16});
  FieldSpace s(d);
  DiscreteVectorField u(s);
  for (std::size_t k = 0; k < s.size(); ++k) u.at(k, 0) = static_cast<double>(k);
  std::ostringstream os;
  write_field_csv(os, u);
  const auto recs = parse_csv(os.str());
  ASSERT_EQ(recs.size(), s.size() + 1);
  EXPECT_EQ(recs[0], (std::vector<std::string>{"cell", "i", "j", "u1", "u2"}));
  EXPECT_EQ(recs[5][0], std::to_string(s.cell(4)));
  EXPECT_EQ(recs[5][3], "4");
}
