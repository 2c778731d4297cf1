#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "polishkrige/cli.hpp"

using namespace polishkrige;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string field_csv(const std::string& name) {
  const auto path = oracle::write_temp(name, "");
  oracle::write_grid_csv(path, oracle::synthetic_field(6, 8, 0.1, 77));
  return path.string();
}

std::string constant_csv(const std::string& name, std::size_t n) {
  std::ostringstream s;
  s << "x,y,z\n";
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) s << l << ',' << k << ",7\n";
  }
  return oracle::write_temp(name, s.str()).string();
}

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / "polishkrige_tests" / name).string(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("fit then surface") {
    const auto input = field_csv("cli_field.csv");
    const auto model = tmp("cli_field.pkm");
    auto r = run({"fit", input, "-o", model, "--method", "impk"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("method: IMPK") != std::string::npos);
    CHECK(r.out.find("nugget=") != std::string::npos);
    CHECK(r.out.find("sill=") != std::string::npos);
    CHECK(r.out.find("range=") != std::string::npos);

    const auto values = tmp("cli_values.csv");
    const auto variances = tmp("cli_variances.csv");
    r = run({"surface", model, "--resolution", "2x2", "-o", values, "--variance-out", variances, "--pgm"});
    REQUIRE(r.code == 0);
    const auto v = lines_of(slurp(values));
    CHECK(v.size() == 5);
    CHECK(v[0] == "x,y,value");
    CHECK(lines_of(slurp(variances)).size() == 5);
    CHECK(std::filesystem::exists(std::filesystem::path(values).replace_extension(".pgm")));
    CHECK(slurp(values).back() == '\n');
  }

  TEST_CASE("MPK and IMPK value surfaces differ off the lattice") {
    const auto input = field_csv("cli_var.csv");
    std::string files[2];
    int i = 0;
    for (const char* m : {"mpk", "impk"}) {
      const auto model = tmp(std::string("cli_var_") + m + ".pkm");
      REQUIRE(run({"fit", input, "-o", model, "--method", m}).code == 0);
      const auto values = tmp(std::string("cli_val_") + m + ".csv");
      REQUIRE(run({"surface", model, "--resolution", "12x16", "-o", values}).code == 0);
      files[i] = slurp(values);
      ++i;
    }
    CHECK(files[0] != files[1]);
  }

  TEST_CASE("constant grid warns about the degenerate variogram") {
    const auto input = constant_csv("cli_constant.csv", 10);
    const auto model = tmp("cli_constant.pkm");
    auto r = run({"fit", input, "-o", model});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("warning: degenerate-variogram") != std::string::npos);
    const auto values = tmp("cli_constant_values.csv");
    r = run({"surface", model, "--resolution", "10x10", "-o", values});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(slurp(values));
    REQUIRE(lines.size() == 101);
    for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i].ends_with(",7.000000"));

    r = run({"cv", input, "--method", "mpk"});
    REQUIRE(r.code == 0);
    CHECK(lines_of(r.out).back() == "RMSE,MPK,0.000000");
  }

  TEST_CASE("duplicate locations exit with status 1") {
    const auto input = oracle::write_temp("cli_dups.csv", "x,y,z\n0,0,1\n1,0,2\n0,0,3\n1,1,4\n");
    const auto r = run({"fit", input, "-o", tmp("never.pkm")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: duplicate-location:", 0) == 0);
  }

  TEST_CASE("usage errors exit with status 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"fit"}).code == 2);
    CHECK(run({"cv", "x.csv", "--method", "kriging"}).code == 2);
    CHECK(run({"surface", "m.pkm", "-o", "v.csv", "--resolution", "7"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("missing input and bad model files") {
    auto r = run({"cv", "/nonexistent/dir/input.csv"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: io:", 0) == 0);
    const auto junk = oracle::write_temp("junk.pkm", "hello\n");
    r = run({"surface", junk.string(), "-o", tmp("junk.csv")});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error: bad-model:", 0) == 0);
  }

  TEST_CASE("config file supplies defaults and flags override it") {
    const auto input = field_csv("cli_cfg.csv");
    const auto cfg = oracle::write_temp("cli.ini", "method=mpk\nvariogram=exponential\n");
    auto r = run({"--config", cfg.string(), "fit", input, "-o", tmp("cfg.pkm")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("method: MPK") != std::string::npos);
    CHECK(r.out.find("family=exponential") != std::string::npos);
    r = run({"--config", cfg.string(), "--method", "impk", "fit", input, "-o", tmp("cfg2.pkm")});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("method: IMPK") != std::string::npos);
  }

  TEST_CASE("column remapping") {
    std::ostringstream csv;
    csv << "e,n,ash\n";
    for (int k = 0; k < 5; ++k) {
      for (int l = 0; l < 6; ++l) csv << l << ',' << k << ',' << (k * l % 7) + 0.5 * l << '\n';
    }
    const auto input = oracle::write_temp("cli_cols.csv", csv.str());
    const auto r = run({"fit", input.string(), "-o", tmp("cols.pkm"), "--x-col", "e", "--y-col", "n", "--z-col", "ash",
                        "--method", "mpk"});
    CHECK(r.code == 0);
    CHECK(r.out.find("grid: 5 rows x 6 columns, 30 observed cells") != std::string::npos);
    CHECK(run({"fit", input.string(), "-o", tmp("cols.pkm")}).err.rfind("error: parse:", 0) == 0);
  }

  TEST_CASE("cv output is byte-identical across runs and thread counts") {
    const auto input = field_csv("cli_det.csv");
    const auto a = run({"cv", input, "--both", "--threads", "1"});
    const auto b = run({"cv", input, "--both"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto lines = lines_of(a.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "method,rmse,folds,skipped");
    CHECK(lines[1].rfind("MPK,", 0) == 0);
    CHECK(lines[2].rfind("IMPK,", 0) == 0);

    const auto prefix = tmp("cli_det_out");
    REQUIRE(run({"cv", input, "--both", "-o", prefix}).code == 0);
    const auto first = slurp(prefix + "_impk.csv");
    REQUIRE(run({"cv", input, "--both", "-o", prefix}).code == 0);
    CHECK(slurp(prefix + "_impk.csv") == first);
    CHECK(lines_of(first).back().rfind("RMSE,IMPK,", 0) == 0);
  }
}
