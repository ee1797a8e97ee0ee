// cfcs: generate | solve | bench | phantom

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cfcs/error.hpp"
#include "cfcs/experiment.hpp"
#include "cfcs/metrics.hpp"
#include "cfcs/problem_io.hpp"
#include "cfcs/scenarios.hpp"

namespace fs = std::filesystem;
using namespace cfcs;

namespace {

fs::path meta_path(const fs::path& problem) { return fs::path(problem.string() + ".meta"); }

void write_meta(const fs::path& path, const ScenarioSpec& spec, const ScenarioSummary& sum,
                SignalKind kind) {
  std::ofstream out(path);
  out << "family = " << to_string(spec.family) << '\n'
      << "m = " << spec.m << '\n'
      << "n = " << spec.n << '\n'
      << "sigma = " << format_float(spec.noise_sigma) << '\n'
      << "seed = " << spec.seed << '\n'
      << "s = " << sum.sparsity << '\n'
      << "index = " << format_float(sum.recovery_index) << '\n'
      << "kind = " << to_string(kind) << '\n';
  if (spec.family == ScenarioFamily::kDftUndersampled) {
    out << "frequency_count = " << spec.frequency_count << '\n';
  }
  if (spec.family == ScenarioFamily::kPhantomRadial) {
    out << "side = " << spec.side << '\n'
        << "lines = " << spec.lines << '\n'
        << "full_mask = " << (spec.full_mask ? "true" : "false") << '\n';
  }
  if (!out) throw UsageError("cannot write " + path.string());
}

std::map<std::string, std::string> read_meta(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(no) + ": expected key = value");
    }
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

void write_estimate(const fs::path& path, const VectorXd& x) {
  std::ofstream out(path);
  out << "index,value\n";
  char buf[64];
  for (Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", x(i));
    out << i << ',' << buf << '\n';
  }
  if (!out) throw UsageError("cannot write " + path.string());
}

void write_pgm(const fs::path& path, const VectorXd& img, int side) {
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << side << ' ' << side << "\n255\n";
  for (Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img(i), 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  if (!out) throw UsageError("cannot write " + path.string());
}

void add_method_options(CLI::App* app, MethodSpec& ms, std::string& preset) {
  app->add_option("--preset", preset, "paper, paper-small, paper-large or plain")
      ->capture_default_str();
  app->add_option_function<double>("--alpha", [&ms](double v) { ms.alpha = v; },
                                   "hyperplane relaxation");
  app->add_option_function<double>("--lambda", [&ms](double v) { ms.lambda = v; },
                                   "l1 relaxation (constant)");
  app->add_option_function<double>("--epsilon", [&ms](double v) { ms.epsilon = v; },
                                   "l1 budget");
  app->add_option_function<double>("--gamma", [&ms](double v) { ms.gamma = v; },
                                   "step tolerance");
  app->add_option_function<std::size_t>("--max-sweeps", [&ms](std::size_t v) { ms.max_sweeps = v; },
                                        "sweep cap K");
  app->add_option_function<std::size_t>("--block", [&ms](std::size_t v) { ms.block = v; },
                                        "rows per block");
}

int cmd_generate(const std::string& family, ScenarioSpec spec, std::optional<double> index,
                 std::optional<Index> sparsity, const fs::path& out) {
  spec.family = parse_family(family);
  spec.recovery_index = index;
  spec.sparsity = sparsity;
  if (spec.family == ScenarioFamily::kGaussianSparse && !index && !sparsity) {
    throw UsageError("gaussian scenario needs --index or --sparsity");
  }
  const Problemd p = generate(spec);
  const ScenarioSummary sum = summarize(spec, p);
  save_problem(p, out);
  if (spec.family == ScenarioFamily::kPhantomRadial) {
    spec.m = p.rows();
    spec.n = p.cols();
  }
  write_meta(meta_path(out), spec, sum, p.truth()->kind);
  std::cout << "wrote " << out.string() << " m=" << p.rows() << " n=" << p.cols()
            << " s=" << sum.sparsity << " index=" << format_float(sum.recovery_index) << '\n';
  return 0;
}

int cmd_solve(const fs::path& problem_path, const std::string& method, MethodSpec ms,
              const std::string& preset, std::optional<Index> s_override,
              const std::string& estimate_out, const std::string& trace_out) {
  ms.method = parse_method(method);
  ms.preset = parse_preset(preset);
  const auto meta = read_meta(meta_path(problem_path));
  SignalKind kind = SignalKind::kSparse;
  if (auto it = meta.find("kind"); it != meta.end() && it->second == "compressible") {
    kind = SignalKind::kCompressible;
  }
  const Problemd p = load_problem(problem_path, kind);
  if (!p.underdetermined()) {
    std::cerr << "warning: m = " << p.rows() << " >= n = " << p.cols()
              << ", the system is not underdetermined\n";
  }

  Index s = 0;
  if (s_override) {
    s = *s_override;
  } else if (auto it = meta.find("s"); it != meta.end()) {
    s = std::stoll(it->second);
  }
  const bool needs_support = ms.method == Method::kGaussCsp || ms.method == Method::kGaussCspAlt ||
                             ms.method == Method::kOmp || ms.method == Method::kOmpLs;
  if (needs_support && !ms.support && s == 0) {
    throw UsageError(std::string(to_string(ms.method)) +
                     " needs --support, --sparsity or a sidecar with s");
  }

  const MethodOutcome o = run_method(ms, p, s, !trace_out.empty());
  std::string err = "n/a";
  if (p.truth()) err = format_float(recovery_error(*p.truth(), o.estimate, p.noise_sigma()));
  std::cout << "method=" << ms.name() << " error=" << err << " time=" << format_float(o.wall_time)
            << " iterations=" << o.iterations << " termination=" << o.termination << '\n';
  if (!estimate_out.empty()) write_estimate(estimate_out, o.estimate);
  if (!trace_out.empty()) {
    std::ofstream t(trace_out);
    write_trace_csv(t, o.trace);
    if (!t) throw UsageError("cannot write " + trace_out);
  }
  return 0;
}

int cmd_bench(const fs::path& config, std::optional<std::size_t> threads,
              const std::string& output) {
  ExperimentConfig cfg = load_experiment(config);
  if (threads) cfg.threads = *threads;
  fs::path dir = output;
  if (dir.empty()) dir = cfg.output;
  if (dir.empty()) {
    const char* env = std::getenv("CFCS_OUTPUT_DIR");
    dir = env && *env ? env : "results";
  }
  cfg.validate();
  const BenchResult r = run_bench(cfg, dir);
  std::size_t failures = 0;
  for (const auto& row : r.rows) failures += row.failed() ? 1 : 0;
  write_summary_csv(std::cout, r.summary);
  std::cerr << r.rows.size() << " rows (" << failures << " failed) written to " << dir.string()
            << '\n';
  return 0;
}

int cmd_phantom(int side, int lines, bool full, std::uint64_t seed, double sigma,
                const std::string& preset, const std::string& out) {
  ScenarioSpec spec;
  spec.family = ScenarioFamily::kPhantomRadial;
  spec.side = side;
  spec.lines = lines;
  spec.full_mask = full;
  spec.seed = seed;
  spec.noise_sigma = sigma;
  const Problemd p = generate(spec);

  MethodSpec ms;
  ms.method = Method::kCsp;
  ms.preset = parse_preset(preset);
  if (full) {
    // Complete data: plain row projections, no l1 constraint.
    ms.alpha = 1.0;
    ms.epsilon = std::numeric_limits<double>::max();
  }
  const MethodOutcome o = run_method(ms, p, 0);
  const double e = recovery_error(*p.truth(), o.estimate, 0.0);
  if (!out.empty()) write_pgm(out, o.estimate, side);
  std::cout << "side=" << side << " lines=" << (full ? std::string("all") : std::to_string(lines))
            << " m=" << p.rows() << " error=" << format_float(e)
            << " time=" << format_float(o.wall_time) << " iterations=" << o.iterations
            << " termination=" << o.termination << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex feasibility solvers for compressed sensing"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a scenario problem file and .meta sidecar");
  std::string family;
  ScenarioSpec gspec;
  std::optional<double> gindex;
  std::optional<Index> gsparsity;
  std::string gout;
  gen->add_option("family", family, "gaussian, dft or phantom")->required();
  gen->add_option("--m", gspec.m, "measurements (gaussian, dft)");
  gen->add_option("--n", gspec.n, "unknowns (gaussian) or series length (dft)");
  gen->add_option("--index", gindex, "recovery index (gaussian)");
  gen->add_option("--sparsity", gsparsity, "s (gaussian)");
  gen->add_option("--sigma", gspec.noise_sigma, "noise standard deviation");
  gen->add_option("--seed", gspec.seed, "seed");
  gen->add_option("--nf", gspec.frequency_count, "frequency count (dft)");
  gen->add_option("--side", gspec.side, "image side (phantom)");
  gen->add_option("--lines", gspec.lines, "radial lines (phantom)");
  gen->add_flag("--full", gspec.full_mask, "keep every frequency (phantom)");
  gen->add_option("-o,--out", gout, "output problem file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "run one method on a problem file");
  std::string problem_path, method = "csp", spreset = "paper", estimate_out, trace_out;
  MethodSpec sms;
  std::optional<Index> ssparsity;
  solve->add_option("problem", problem_path, "problem file")->required();
  solve->add_option("--method", method,
                    "csp, ssp, kaczmarz, gauss-csp, gauss-csp-alt, csp-ssp, omp, omp-ls")
      ->capture_default_str();
  add_method_options(solve, sms, spreset);
  solve->add_option("--support-factor", sms.support_factor, "N = ceil(factor * s)")
      ->capture_default_str();
  solve->add_option_function<Index>("--support", [&sms](Index v) { sms.support = v; },
                                    "fixed support size N");
  solve->add_option("--sparsity", ssparsity, "s, when there is no sidecar");
  solve->add_option("--period", sms.period, "sweeps between LS stages (gauss-csp-alt)")
      ->capture_default_str();
  solve->add_option("--ssp-tail", sms.ssp_tail, "SSP iterations after CSP (csp-ssp)")
      ->capture_default_str();
  solve->add_option("--estimate-out", estimate_out, "write the estimate as CSV");
  solve->add_option("--trace-out", trace_out, "write the per-sweep trace as CSV");

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment campaign");
  std::string config_path, bench_out;
  std::optional<std::size_t> threads;
  bench->add_option("config", config_path, "experiment config")->required();
  bench->add_option("--threads", threads, "maximum concurrent runs");
  bench->add_option("--output", bench_out, "output directory (else config, CFCS_OUTPUT_DIR, results)");

  // phantom
  auto* ph = app.add_subcommand("phantom", "Shepp-Logan recovery from radial Fourier samples");
  int side = 64, lines = 64;
  bool full = false;
  std::uint64_t pseed = 1;
  double psigma = 0.0;
  std::string ppreset = "paper", pout;
  ph->add_option("--side", side, "image side")->capture_default_str();
  ph->add_option("--lines", lines, "radial lines")->capture_default_str();
  ph->add_flag("--full", full, "all frequencies, plain projections");
  ph->add_option("--seed", pseed, "seed")->capture_default_str();
  ph->add_option("--sigma", psigma, "noise standard deviation")->capture_default_str();
  ph->add_option("--preset", ppreset, "solver preset")->capture_default_str();
  ph->add_option("--out", pout, "reconstruction as a PGM image");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*gen) return cmd_generate(family, gspec, gindex, gsparsity, gout);
    if (*solve) {
      return cmd_solve(problem_path, method, sms, spreset, ssparsity, estimate_out, trace_out);
    }
    if (*bench) return cmd_bench(config_path, threads, bench_out);
    if (*ph) return cmd_phantom(side, lines, full, pseed, psigma, ppreset, pout);
  } catch (const Error& e) {
    std::cerr << "error (" << e.tag() << "): " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
