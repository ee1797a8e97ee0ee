#include "cfcs/problem_io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace cfcs {
namespace {

void write_decimal(std::ostream& out, double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.write(buf, len);
}

void write_values(std::ostream& out, const VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out.put(' ');
    write_decimal(out, v(i));
  }
  out.put('\n');
}

template <typename Row>
void write_row(std::ostream& out, const Row& row) {
  for (Index j = 0; j < row.size(); ++j) {
    if (j) out.put(' ');
    write_decimal(out, row(j));
  }
  out.put('\n');
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next() {
    if (!std::getline(in_, line_)) return false;
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    return true;
  }

  const std::string& line() const { return line_; }
  std::size_t line_no() const { return line_no_; }

  [[noreturn]] void fail(const std::string& msg, std::size_t col = 0) const {
    std::string where = source_ + ":" + std::to_string(line_no_);
    if (col) where += ":" + std::to_string(col);
    throw ParseError(where + ": " + msg);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t column_of(const std::string& line, std::string_view tok) {
  return static_cast<std::size_t>(tok.data() - line.data()) + 1;
}

double parse_double(const LineReader& r, std::string_view tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    r.fail("invalid decimal '" + std::string(tok) + "'", column_of(r.line(), tok));
  }
  if (!std::isfinite(v)) {
    r.fail("non-finite value '" + std::string(tok) + "'", column_of(r.line(), tok));
  }
  return v;
}

long long parse_count(const LineReader& r, std::string_view tok, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    r.fail(std::string("invalid ") + what + " '" + std::string(tok) + "'",
           column_of(r.line(), tok));
  }
  if (v < 1) r.fail(std::string(what) + " must be >= 1", column_of(r.line(), tok));
  return v;
}

// Parses "<prefix> v1 ... vk" (prefix may be empty) into exactly `count` values.
VectorXd parse_values(const LineReader& r, std::string_view prefix, Index count) {
  std::vector<std::string_view> toks = split(r.line());
  std::size_t first = 0;
  if (!prefix.empty()) {
    if (toks.empty() || toks[0] != prefix) {
      r.fail("expected line starting with '" + std::string(prefix) + "'");
    }
    first = 1;
  }
  const auto have = static_cast<Index>(toks.size() - first);
  if (have != count) {
    r.fail("expected " + std::to_string(count) + " values, found " + std::to_string(have));
  }
  VectorXd v(count);
  for (Index k = 0; k < count; ++k) v(k) = parse_double(r, toks[first + k]);
  return v;
}

}  // namespace

void write_problem(std::ostream& out, const Problemd& p) {
  out << "CSPROB v1 " << p.rows() << ' ' << p.cols() << ' ';
  write_decimal(out, p.noise_sigma());
  out << "\ny: ";
  write_values(out, p.observations());
  for (Index i = 0; i < p.rows(); ++i) write_row(out, p.matrix().row(i));
  if (p.truth()) {
    out << "x: ";
    write_values(out, p.truth()->values);
  }
}

Problemd read_problem(std::istream& in, SignalKind truth_kind, const std::string& source) {
  LineReader r(in, source);
  if (!r.next()) r.fail("empty input, expected 'CSPROB v1 m n sigma' header");

  const std::vector<std::string_view> head = split(r.line());
  if (head.size() != 5 || head[0] != "CSPROB") r.fail("expected header 'CSPROB v1 m n sigma'");
  if (head[1] != "v1") r.fail("unsupported format version '" + std::string(head[1]) + "'");
  const Index m = parse_count(r, head[2], "row count m");
  const Index n = parse_count(r, head[3], "column count n");
  const double sigma = parse_double(r, head[4]);
  if (sigma < 0) r.fail("sigma must be >= 0", column_of(r.line(), head[4]));

  if (!r.next()) r.fail("missing 'y:' line");
  VectorXd y = parse_values(r, "y:", m);

  RowMajorMatrixXd h(m, n);
  for (Index i = 0; i < m; ++i) {
    if (!r.next()) {
      r.fail("header declares " + std::to_string(m) + " rows but only " + std::to_string(i) +
             " present");
    }
    if (r.line().rfind("x:", 0) == 0) {
      r.fail("header declares " + std::to_string(m) + " rows but only " + std::to_string(i) +
             " present");
    }
    h.row(i) = parse_values(r, "", n).transpose();
  }

  std::optional<Signald> truth;
  while (r.next()) {
    if (split(r.line()).empty()) continue;
    if (truth) r.fail("unexpected content after ground-truth line");
    if (r.line().rfind("x:", 0) != 0) {
      r.fail("unexpected content; matrix has " + std::to_string(m) + " rows");
    }
    truth = Signald{parse_values(r, "x:", n), truth_kind};
  }

  return Problemd(Matrixd(std::move(h)), std::move(y), std::move(truth), sigma);
}

void save_problem(const Problemd& problem, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path.string() + "' for writing");
  write_problem(out, problem);
  if (!out) throw UsageError("write to '" + path.string() + "' failed");
}

Problemd load_problem(const std::filesystem::path& path, SignalKind truth_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_problem(in, truth_kind, path.string());
}

}  // namespace cfcs
