#include "cfcs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cfcs/metrics.hpp"
#include "cfcs/omp.hpp"
#include "cfcs/random.hpp"

namespace cfcs {

const char* to_string(Method method) {
  switch (method) {
    case Method::kCsp: return "csp";
    case Method::kSsp: return "ssp";
    case Method::kKaczmarz: return "kaczmarz";
    case Method::kGaussCsp: return "gauss-csp";
    case Method::kGaussCspAlt: return "gauss-csp-alt";
    case Method::kCspSsp: return "csp-ssp";
    case Method::kOmp: return "omp";
    case Method::kOmpLs: return "omp-ls";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kCsp, Method::kSsp, Method::kKaczmarz, Method::kGaussCsp,
                   Method::kGaussCspAlt, Method::kCspSsp, Method::kOmp, Method::kOmpLs}) {
    if (name == to_string(m)) return m;
  }
  throw UsageError("unknown method '" + name +
                   "' (expected csp, ssp, kaczmarz, gauss-csp, gauss-csp-alt, csp-ssp, omp "
                   "or omp-ls)");
}

RefineMode refine_mode_of(Method method) {
  switch (method) {
    case Method::kGaussCsp:
    case Method::kOmpLs: return RefineMode::kGaussFinal;
    case Method::kGaussCspAlt: return RefineMode::kGaussAlternating;
    case Method::kCspSsp: return RefineMode::kCspThenSsp;
    default: return RefineMode::kNone;
  }
}

const char* to_string(Preset preset) {
  switch (preset) {
    case Preset::kPaper: return "paper";
    case Preset::kPaperSmall: return "paper-small";
    case Preset::kPaperLarge: return "paper-large";
    case Preset::kPlain: return "plain";
  }
  return "?";
}

Preset parse_preset(const std::string& name) {
  for (Preset p : {Preset::kPaper, Preset::kPaperSmall, Preset::kPaperLarge, Preset::kPlain}) {
    if (name == to_string(p)) return p;
  }
  throw UsageError("unknown preset '" + name +
                   "' (expected paper, paper-small, paper-large or plain)");
}

SolverConfig<double> solver_config(const MethodSpec& spec, Index m, Index n) {
  SolverConfig<double> cfg;
  switch (spec.preset) {
    case Preset::kPaper: cfg = paper_for(m, n).config(n); break;
    case Preset::kPaperSmall: cfg = paper_small().config(n); break;
    case Preset::kPaperLarge: cfg = paper_large().config(n); break;
    case Preset::kPlain: break;
  }
  if (spec.alpha) cfg.alpha = constant_schedule(*spec.alpha);
  if (spec.lambda) cfg.lambda = constant_schedule(*spec.lambda);
  if (spec.epsilon) cfg.l1_budget = *spec.epsilon;
  if (spec.gamma) cfg.step_tolerance = *spec.gamma;
  if (spec.max_sweeps) cfg.max_iterations = *spec.max_sweeps;
  if (spec.block) cfg.block_size = *spec.block;
  cfg.record_trace = false;
  return cfg;
}

Index support_size(const MethodSpec& spec, Index s) {
  if (spec.support) return *spec.support;
  if (!(spec.support_factor > 0)) throw UsageError("support factor must be > 0");
  return static_cast<Index>(std::ceil(spec.support_factor * static_cast<double>(s)));
}

namespace {

using Clock = std::chrono::steady_clock;

MethodOutcome from_report(SolveReport<double>&& r) {
  MethodOutcome out;
  out.estimate = std::move(r.estimate);
  out.wall_time = r.wall_time;
  out.iterations = r.sweeps_run;
  out.termination = to_string(r.termination);
  out.trace = std::move(r.trace);
  return out;
}

MethodOutcome run_omp(const Problemd& p, Index n_support, bool augment) {
  const auto start = Clock::now();
  OmpResult<double> r = omp_detailed(p, OmpConfig{n_support, 0.0});
  VectorXd est = augment ? ls_augment(p, r.estimate, n_support) : std::move(r.estimate);
  MethodOutcome out;
  out.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  out.estimate = std::move(est);
  out.iterations = r.support.size();
  out.termination = r.support.size() == static_cast<std::size_t>(n_support)
                        ? "max-support"
                        : "dependent-column";
  return out;
}

}  // namespace

MethodOutcome run_method(const MethodSpec& spec, const Problemd& p, Index s, bool record_trace) {
  if (spec.method == Method::kOmp || spec.method == Method::kOmpLs) {
    return run_omp(p, support_size(spec, s), spec.method == Method::kOmpLs);
  }
  SolverConfig<double> cfg = solver_config(spec, p.rows(), p.cols());
  cfg.record_trace = record_trace;
  RefinePolicy policy;
  policy.mode = refine_mode_of(spec.method);
  policy.alternation_period = spec.period;
  policy.ssp_tail_iterations = spec.ssp_tail;
  switch (spec.method) {
    case Method::kCsp: return from_report(csp_cs(p, cfg));
    case Method::kSsp: return from_report(ssp_cs(p, cfg));
    case Method::kKaczmarz: return from_report(kaczmarz(p, cfg));
    case Method::kGaussCsp:
      policy.max_support = support_size(spec, s);
      return from_report(gauss_csp(p, cfg, policy));
    case Method::kGaussCspAlt:
      policy.max_support = support_size(spec, s);
      return from_report(gauss_csp_alternating(p, cfg, policy));
    case Method::kCspSsp: return from_report(csp_then_ssp(p, cfg, policy));
    default: break;
  }
  throw UsageError("unhandled method");
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (methods.empty()) throw UsageError("experiment needs at least one [method] block");
  if (runs < 1) throw UsageError("runs must be >= 1");
  if (threads < 1) throw UsageError("threads must be >= 1");
  if (sigma < 0) throw UsageError("sigma must be >= 0");
  switch (family) {
    case ScenarioFamily::kGaussianSparse:
      if (indices.empty()) throw UsageError("gaussian scenario needs indices");
      break;
    case ScenarioFamily::kDftUndersampled:
      if (frequency_counts.empty()) throw UsageError("dft scenario needs frequency_counts");
      break;
    case ScenarioFamily::kPhantomRadial:
      if (!full_mask && lines.empty()) throw UsageError("phantom scenario needs lines");
      break;
  }
}

std::vector<ScenarioSpec> ExperimentConfig::cells() const {
  ScenarioSpec base;
  base.family = family;
  base.m = m;
  base.n = n;
  base.noise_sigma = sigma;
  base.side = side;
  base.full_mask = full_mask;
  std::vector<ScenarioSpec> out;
  switch (family) {
    case ScenarioFamily::kGaussianSparse:
      for (double idx : indices) {
        ScenarioSpec c = base;
        c.recovery_index = idx;
        out.push_back(c);
      }
      break;
    case ScenarioFamily::kDftUndersampled:
      for (int nf : frequency_counts) {
        ScenarioSpec c = base;
        c.frequency_count = nf;
        out.push_back(c);
      }
      break;
    case ScenarioFamily::kPhantomRadial:
      if (full_mask) {
        out.push_back(base);
        break;
      }
      for (int l : lines) {
        ScenarioSpec c = base;
        c.lines = l;
        out.push_back(c);
      }
      break;
  }
  return out;
}

std::string ExperimentConfig::cell_name(const ScenarioSpec& c) {
  switch (c.family) {
    case ScenarioFamily::kGaussianSparse:
      if (c.sparsity) return "s_" + std::to_string(*c.sparsity);
      return "index_" + format_float(c.recovery_index.value_or(0.0));
    case ScenarioFamily::kDftUndersampled: return "nf_" + std::to_string(c.frequency_count);
    case ScenarioFamily::kPhantomRadial:
      return c.full_mask ? std::string("full") : "lines_" + std::to_string(c.lines);
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ConfigReader {
 public:
  ConfigReader(std::string source, std::size_t line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }

  template <typename T>
  T number(const std::string& key, const std::string& text) const {
    T v{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail("invalid value '" + text + "' for " + key);
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(v)) fail("non-finite value for " + key);
    }
    return v;
  }

  template <typename T>
  std::vector<T> list(const std::string& key, const std::string& text) const {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(number<T>(key, trim(item)));
    if (out.empty()) fail("empty list for " + key);
    return out;
  }

  bool boolean(const std::string& key, const std::string& text) const {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail("invalid boolean '" + text + "' for " + key);
  }

 private:
  std::string source_;
  std::size_t line_;
};

void set_global(ExperimentConfig& cfg, const ConfigReader& r, const std::string& key,
                const std::string& value) {
  if (key == "scenario") {
    try {
      cfg.family = parse_family(value);
    } catch (const UsageError& e) {
      r.fail(e.what());
    }
  } else if (key == "m") {
    cfg.m = r.number<Index>(key, value);
  } else if (key == "n") {
    cfg.n = r.number<Index>(key, value);
  } else if (key == "indices") {
    cfg.indices = r.list<double>(key, value);
  } else if (key == "frequency_counts") {
    cfg.frequency_counts = r.list<int>(key, value);
  } else if (key == "lines") {
    cfg.lines = r.list<int>(key, value);
  } else if (key == "side") {
    cfg.side = r.number<int>(key, value);
  } else if (key == "full_mask") {
    cfg.full_mask = r.boolean(key, value);
  } else if (key == "sigma") {
    cfg.sigma = r.number<double>(key, value);
  } else if (key == "runs") {
    cfg.runs = r.number<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = r.number<std::uint64_t>(key, value);
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "threads") {
    cfg.threads = r.number<std::size_t>(key, value);
  } else if (key == "trace") {
    cfg.trace = r.boolean(key, value);
  } else {
    r.fail("unknown key '" + key + "'");
  }
}

void set_method(MethodSpec& m, const ConfigReader& r, const std::string& key,
                const std::string& value) {
  try {
    if (key == "name") {
      m.method = parse_method(value);
    } else if (key == "label") {
      if (value.find_first_of(",/\\ ") != std::string::npos) {
        r.fail("label may not contain commas, slashes or spaces");
      }
      m.label = value;
    } else if (key == "preset") {
      m.preset = parse_preset(value);
    } else if (key == "alpha") {
      m.alpha = r.number<double>(key, value);
    } else if (key == "lambda") {
      m.lambda = r.number<double>(key, value);
    } else if (key == "epsilon") {
      m.epsilon = r.number<double>(key, value);
    } else if (key == "gamma") {
      m.gamma = r.number<double>(key, value);
    } else if (key == "max_sweeps") {
      m.max_sweeps = r.number<std::size_t>(key, value);
    } else if (key == "block") {
      m.block = r.number<std::size_t>(key, value);
    } else if (key == "support_factor") {
      m.support_factor = r.number<double>(key, value);
    } else if (key == "support") {
      m.support = r.number<Index>(key, value);
    } else if (key == "period") {
      m.period = r.number<std::size_t>(key, value);
    } else if (key == "ssp_tail") {
      m.ssp_tail = r.number<std::size_t>(key, value);
    } else {
      r.fail("unknown method key '" + key + "'");
    }
  } catch (const UsageError& e) {
    r.fail(e.what());
  }
}

}  // namespace

ExperimentConfig parse_experiment(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::string raw;
  std::size_t line_no = 0;
  bool in_method = false;
  std::vector<bool> method_named;
  while (std::getline(in, raw)) {
    ++line_no;
    const ConfigReader reader(source, line_no);
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[method]") {
      cfg.methods.emplace_back();
      method_named.push_back(false);
      in_method = true;
      continue;
    }
    if (line.front() == '[') reader.fail("unknown section " + line);
    const auto eq = line.find('=');
    if (eq == std::string::npos) reader.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) reader.fail("missing key");
    if (value.empty()) reader.fail("missing value for " + key);
    if (in_method) {
      set_method(cfg.methods.back(), reader, key, value);
      if (key == "name") method_named.back() = true;
    } else {
      set_global(cfg, reader, key, value);
    }
  }
  for (std::size_t i = 0; i < method_named.size(); ++i) {
    if (!method_named[i]) {
      throw ParseError(source + ": [method] block " + std::to_string(i + 1) + " has no name");
    }
  }
  try {
    cfg.validate();
  } catch (const UsageError& e) {
    throw ParseError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  return parse_experiment(in, path.string());
}

// ---------------------------------------------------------------------------
// Output

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "scenario,method,refine_mode,m,n,s,index,run,seed,error,time_sec,iterations,termination\n";
  for (const ResultRow& r : rows) {
    out << r.scenario << ',' << r.method << ',' << r.refine_mode << ',' << r.m << ',' << r.n << ','
        << r.s << ',' << format_float(r.index) << ',' << r.run << ',' << r.seed << ','
        << format_float(r.error) << ',' << format_float(r.time_sec) << ',' << r.iterations << ','
        << r.termination << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "scenario,cell,method,refine_mode,m,n,index_mean,runs,failures,rms_error,std_error,"
         "median_time_sec\n";
  for (const SummaryRow& r : rows) {
    out << r.scenario << ',' << r.cell << ',' << r.method << ',' << r.refine_mode << ',' << r.m
        << ',' << r.n << ',' << format_float(r.index_mean) << ',' << r.runs << ',' << r.failures
        << ',' << format_float(r.rms_error) << ',' << format_float(r.std_error) << ','
        << format_float(r.median_time_sec) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord<double>>& trace) {
  out << "sweep,residual_l2,l1_norm,step_l2\n";
  for (const auto& t : trace) {
    out << t.sweep << ',' << format_float(t.residual_l2) << ',' << format_float(t.l1_norm) << ','
        << format_float(t.step_l2) << '\n';
  }
}

std::vector<SummaryRow> summarize_rows(const std::vector<ResultRow>& rows) {
  struct Acc {
    SummaryRow head;
    std::vector<double> errors, times;
    double index_sum = 0.0;
  };
  std::vector<Acc> groups;
  std::map<std::pair<std::string, std::string>, std::size_t> where;
  for (const ResultRow& r : rows) {
    auto key = std::make_pair(r.cell, r.method);
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, groups.size()).first;
      Acc a;
      a.head.scenario = r.scenario;
      a.head.cell = r.cell;
      a.head.method = r.method;
      a.head.refine_mode = r.refine_mode;
      a.head.m = r.m;
      a.head.n = r.n;
      groups.push_back(std::move(a));
    }
    Acc& a = groups[it->second];
    ++a.head.runs;
    if (r.failed()) {
      ++a.head.failures;
      continue;
    }
    a.errors.push_back(r.error);
    a.times.push_back(r.time_sec);
    a.index_sum += r.index;
  }
  std::vector<SummaryRow> out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Acc& a : groups) {
    SummaryRow s = a.head;
    if (a.errors.empty()) {
      s.index_mean = s.rms_error = s.std_error = s.median_time_sec = nan;
    } else {
      const ErrorSummary e = aggregate_error(a.errors);
      s.rms_error = e.rms;
      s.std_error = e.stddev;
      s.median_time_sec = median(a.times);
      s.index_mean = a.index_sum / static_cast<double>(a.errors.size());
    }
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Campaign

namespace {

struct Task {
  std::size_t cell;
  std::size_t run;
};

struct TaskOutput {
  std::vector<ResultRow> rows;
  std::vector<std::vector<TraceRecord<double>>> traces;  // per method
};

TaskOutput run_task(const ExperimentConfig& cfg, const ScenarioSpec& cell_spec, std::size_t run) {
  TaskOutput out;
  ScenarioSpec spec = cell_spec;
  spec.seed = derive_seed(cfg.seed, run);

  ResultRow base;
  base.scenario = to_string(spec.family);
  base.cell = ExperimentConfig::cell_name(cell_spec);
  base.run = run;
  base.seed = spec.seed;

  std::optional<Problemd> problem;
  std::string gen_error;
  try {
    problem.emplace(generate(spec));
    const ScenarioSummary sum = summarize(spec, *problem);
    base.m = problem->rows();
    base.n = problem->cols();
    base.s = sum.sparsity;
    base.index = sum.recovery_index;
  } catch (const Error& e) {
    gen_error = std::string("error:") + e.tag();
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const MethodSpec& ms : cfg.methods) {
    ResultRow row = base;
    row.method = ms.name();
    row.refine_mode = to_string(refine_mode_of(ms.method));
    std::vector<TraceRecord<double>> trace;
    if (!problem) {
      row.error = row.time_sec = nan;
      row.termination = gen_error;
    } else {
      try {
        MethodOutcome o = run_method(ms, *problem, base.s, cfg.trace);
        row.error = recovery_error(*problem->truth(), o.estimate, problem->noise_sigma());
        row.time_sec = o.wall_time;
        row.iterations = o.iterations;
        row.termination = o.termination;
        trace = std::move(o.trace);
      } catch (const Error& e) {
        row.error = row.time_sec = nan;
        row.termination = std::string("error:") + e.tag();
      }
    }
    out.rows.push_back(std::move(row));
    out.traces.push_back(std::move(trace));
  }
  return out;
}

}  // namespace

BenchResult run_bench(const ExperimentConfig& cfg, const std::filesystem::path& output_dir) {
  cfg.validate();
  const std::vector<ScenarioSpec> cells = cfg.cells();
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t r = 0; r < cfg.runs; ++r) tasks.push_back({c, r});
  }

  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        outputs[i] = run_task(cfg, cells[tasks[i].cell], tasks[i].run);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.threads, tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  BenchResult result;
  for (const TaskOutput& o : outputs) {
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
  }
  result.summary = summarize_rows(result.rows);

  if (!output_dir.empty()) {
    std::filesystem::create_directories(output_dir);
    std::ofstream results(output_dir / "results.csv");
    write_results_csv(results, result.rows);
    std::ofstream summary(output_dir / "summary.csv");
    write_summary_csv(summary, result.summary);
    if (!results || !summary) throw UsageError("cannot write to " + output_dir.string());
    if (cfg.trace) {
      for (const TaskOutput& o : outputs) {
        for (std::size_t k = 0; k < o.rows.size(); ++k) {
          if (o.traces[k].empty()) continue;
          const ResultRow& row = o.rows[k];
          const auto dir = output_dir / "traces" / row.method / row.cell;
          std::filesystem::create_directories(dir);
          std::ofstream t(dir / ("trace_" + std::to_string(row.run) + ".csv"));
          write_trace_csv(t, o.traces[k]);
        }
      }
    }
  }
  return result;
}

}  // namespace cfcs
