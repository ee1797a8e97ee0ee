#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cfcs/presets.hpp"
#include "cfcs/refine.hpp"
#include "cfcs/scenarios.hpp"

namespace cfcs {

enum class Method { kCsp, kSsp, kKaczmarz, kGaussCsp, kGaussCspAlt, kCspSsp, kOmp, kOmpLs };

const char* to_string(Method method);
Method parse_method(const std::string& name);
RefineMode refine_mode_of(Method method);

// paper: paper-small or paper-large chosen from the problem size.
enum class Preset { kPaper, kPaperSmall, kPaperLarge, kPlain };

const char* to_string(Preset preset);
Preset parse_preset(const std::string& name);

/// A method and its parameters. Unset overrides fall back to the preset.
struct MethodSpec {
  Method method = Method::kCsp;
  std::string label;  // column value in results.csv; method name when empty
  Preset preset = Preset::kPaper;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<double> gamma;
  std::optional<std::size_t> max_sweeps;
  std::optional<std::size_t> block;
  double support_factor = 1.5;
  std::optional<Index> support;  // fixed N, overrides support_factor
  std::size_t period = 50;
  std::size_t ssp_tail = 100;

  std::string name() const { return label.empty() ? to_string(method) : label; }
};

/// Solver configuration for an m×n problem.
SolverConfig<double> solver_config(const MethodSpec& spec, Index m, Index n);

/// N = ceil(support_factor · s) unless a fixed support was given.
Index support_size(const MethodSpec& spec, Index s);

struct MethodOutcome {
  VectorXd estimate;
  double wall_time = 0.0;
  std::size_t iterations = 0;  // sweeps, or selected atoms for OMP
  std::string termination;
  std::vector<TraceRecord<double>> trace;
};

/// Runs one method on one problem. `s` is the sparseness used for N.
MethodOutcome run_method(const MethodSpec& spec, const Problemd& problem, Index s,
                         bool record_trace = false);

struct ExperimentConfig {
  ScenarioFamily family = ScenarioFamily::kGaussianSparse;
  Index m = 512;
  Index n = 1024;
  std::vector<double> indices{0.1};       // gaussian cells
  std::vector<int> frequency_counts{1};   // dft cells
  std::vector<int> lines{64};             // phantom cells
  int side = 64;
  bool full_mask = false;
  double sigma = 0.01;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  std::string output;
  std::size_t threads = 1;
  bool trace = false;
  std::vector<MethodSpec> methods;

  void validate() const;
  /// One scenario spec per cell, seed left at 0.
  std::vector<ScenarioSpec> cells() const;
  static std::string cell_name(const ScenarioSpec& cell);
};

ExperimentConfig parse_experiment(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_experiment(const std::filesystem::path& path);

struct ResultRow {
  std::string scenario;
  std::string cell;
  std::string method;
  std::string refine_mode;
  Index m = 0;
  Index n = 0;
  Index s = 0;
  double index = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double error = 0.0;
  double time_sec = 0.0;
  std::size_t iterations = 0;
  std::string termination;  // "error:<tag>" for failed runs
  bool failed() const { return termination.rfind("error:", 0) == 0; }
};

struct SummaryRow {
  std::string scenario;
  std::string cell;
  std::string method;
  std::string refine_mode;
  Index m = 0;
  Index n = 0;
  double index_mean = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double rms_error = 0.0;
  double std_error = 0.0;
  double median_time_sec = 0.0;
};

struct BenchResult {
  std::vector<ResultRow> rows;  // cell-major, then run, then method
  std::vector<SummaryRow> summary;
};

/// Runs the campaign. Run r of every cell uses seed derive_seed(seed, r), so
/// the cells of one run share their random draws. Writes results.csv,
/// summary.csv and, with tracing on, traces/<method>/<cell>/trace_<run>.csv
/// under `output_dir` when it is non-empty.
BenchResult run_bench(const ExperimentConfig& cfg, const std::filesystem::path& output_dir);

std::vector<SummaryRow> summarize_rows(const std::vector<ResultRow>& rows);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord<double>>& trace);

/// %.9g
std::string format_float(double v);

/// Median of a non-empty list.
double median(std::vector<double> values);

}  // namespace cfcs
