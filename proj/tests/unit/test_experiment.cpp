#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfcs/experiment.hpp"

using namespace cfcs;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small campaign
scenario = gaussian
m = 40
n = 80
indices = 0.2, 0.5
sigma = 0.01
runs = 3
seed = 99

[method]
name = csp
preset = paper-small
max_sweeps = 40

[method]
name = gauss-csp
label = gcsp
max_sweeps = 40

[method]
name = omp
support_factor = 1.5
)";

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment(in, "cfg");
}

std::string without_time(const std::vector<ResultRow>& rows) {
  auto copy = rows;
  for (auto& r : copy) r.time_sec = 0.0;
  std::ostringstream out;
  write_results_csv(out, copy);
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cfcs_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("method and preset names") {
    for (const char* name : {"csp", "ssp", "kaczmarz", "gauss-csp", "gauss-csp-alt", "csp-ssp",
                             "omp", "omp-ls"}) {
      CHECK(std::string(to_string(parse_method(name))) == name);
    }
    CHECK_THROWS_AS(parse_method("lasso"), UsageError);
    CHECK(parse_preset("paper-large") == Preset::kPaperLarge);
    CHECK_THROWS_AS(parse_preset("fast"), UsageError);
  }

  TEST_CASE("solver_config applies presets and overrides") {
    MethodSpec ms;
    auto cfg = solver_config(ms, 512, 1024);
    CHECK(cfg.step_tolerance == 0.01);
    CHECK(cfg.alpha_at(0) == 1.8);
    CHECK(cfg.lambda_at(0) == doctest::Approx(1024.0 / 4900));
    CHECK(solver_config(ms, 1024, 2048).step_tolerance == 0.5);
    ms.gamma = 0.2;
    ms.alpha = 1.1;
    ms.block = 8;
    cfg = solver_config(ms, 1024, 2048);
    CHECK(cfg.step_tolerance == 0.2);
    CHECK(cfg.alpha_at(5) == 1.1);
    CHECK(cfg.block_size == 8);
    ms.support_factor = 1.5;
    CHECK(support_size(ms, 7) == 11);
    ms.support = 4;
    CHECK(support_size(ms, 7) == 4);
  }

  TEST_CASE("config parsing") {
    const ExperimentConfig cfg = parse(kSmall);
    CHECK(cfg.m == 40);
    CHECK(cfg.indices == std::vector<double>{0.2, 0.5});
    CHECK(cfg.runs == 3);
    REQUIRE(cfg.methods.size() == 3);
    CHECK(cfg.methods[1].name() == "gcsp");
    CHECK(cfg.methods[0].preset == Preset::kPaperSmall);
    CHECK(cfg.methods[0].max_sweeps == std::size_t(40));
    CHECK(cfg.cells().size() == 2);

    CHECK_THROWS_AS(parse("m = 4\nbogus = 1\n[method]\nname = csp\n"), ParseError);
    CHECK_THROWS_AS(parse("m = four\n[method]\nname = csp\n"), ParseError);
    CHECK_THROWS_AS(parse("m = 4\n"), ParseError);
    CHECK_THROWS_AS(parse("[method]\npreset = paper\n"), ParseError);
    CHECK_THROWS_AS(parse("[method]\nname = nope\n"), ParseError);
    CHECK_THROWS_AS(parse("[solver]\nname = csp\n"), ParseError);
    try {
      parse("m = 4\n\nruns = x\n[method]\nname = csp\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("cfg:3") != std::string::npos);
    }
  }

  TEST_CASE("campaign rows, files and determinism") {
    const ExperimentConfig cfg = parse(kSmall);
    const fs::path out1 = scratch("bench1");
    const BenchResult a = run_bench(cfg, out1);
    CHECK(a.rows.size() == 2 * 3 * 3);
    CHECK(a.summary.size() == 2 * 3);
    for (const auto& r : a.rows) CHECK_FALSE(r.failed());
    CHECK(fs::exists(out1 / "results.csv"));
    CHECK(fs::exists(out1 / "summary.csv"));
    const std::string header = slurp(out1 / "results.csv").substr(0, 100);
    CHECK(header.rfind("scenario,method,refine_mode,m,n,s,index,run,seed,error,time_sec,"
                       "iterations,termination\n", 0) == 0);

    // Same run index, same seed, across cells and methods.
    CHECK(a.rows[0].seed == a.rows[9].seed);
    CHECK(a.rows[0].seed != a.rows[3].seed);
    CHECK(a.rows[1].method == "gcsp");
    CHECK(a.rows[1].refine_mode == "gauss-final");

    ExperimentConfig threaded = cfg;
    threaded.threads = 3;
    const BenchResult b = run_bench(threaded, scratch("bench2"));
    CHECK(without_time(a.rows) == without_time(b.rows));
    const BenchResult c = run_bench(cfg, {});
    CHECK(without_time(a.rows) == without_time(c.rows));
  }

  TEST_CASE("single run summary equals the run") {
    ExperimentConfig cfg = parse(kSmall);
    cfg.runs = 1;
    cfg.indices = {0.3};
    const BenchResult r = run_bench(cfg, {});
    REQUIRE(r.rows.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(r.summary[k].rms_error == doctest::Approx(r.rows[k].error).epsilon(1e-15));
      CHECK(r.summary[k].median_time_sec == r.rows[k].time_sec);
      CHECK(r.summary[k].std_error == 0.0);
    }
  }

  TEST_CASE("failures become tagged rows") {
    ExperimentConfig cfg = parse(kSmall);
    cfg.methods[1].support = 40;  // N >= m
    const BenchResult r = run_bench(cfg, {});
    CHECK(r.rows.size() == 18);
    for (const auto& row : r.rows) {
      CHECK(row.failed() == (row.method == "gcsp"));
      if (row.failed()) CHECK(row.termination == "error:usage");
    }
    CHECK(r.summary[1].failures == 3);
    CHECK(r.summary[0].failures == 0);

    cfg = parse(kSmall);
    cfg.sigma = 0.0;  // ideal error needs sigma > 0
    for (const auto& row : run_bench(cfg, {}).rows) CHECK(row.termination == "error:usage");
  }

  TEST_CASE("traces are written per method, cell and run") {
    ExperimentConfig cfg = parse(kSmall);
    cfg.runs = 2;
    cfg.trace = true;
    const fs::path out = scratch("bench_trace");
    run_bench(cfg, out);
    const fs::path t = out / "traces" / "csp" / "index_0.2" / "trace_1.csv";
    REQUIRE(fs::exists(t));
    CHECK(slurp(t).rfind("sweep,residual_l2,l1_norm,step_l2\n1,", 0) == 0);
    CHECK_FALSE(fs::exists(out / "traces" / "omp"));
  }

  TEST_CASE("shipped configs load") {
    std::size_t count = 0;
    for (const auto& e : fs::directory_iterator(CFCS_CONFIG_DIR)) {
      if (e.path().extension() != ".cfg") continue;
      CAPTURE(e.path().string());
      const ExperimentConfig cfg = load_experiment(e.path().string());
      CHECK_FALSE(cfg.methods.empty());
      CHECK_FALSE(cfg.cells().empty());
      ++count;
    }
    CHECK(count >= 4);
  }

  TEST_CASE("median and formatting") {
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    CHECK_THROWS_AS(median({}), UsageError);
    CHECK(format_float(1.0 / 3.0) == "0.333333333");
    CHECK(format_float(2.0) == "2");
  }
}
