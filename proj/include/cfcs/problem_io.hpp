#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cfcs/model.hpp"

namespace cfcs {

// Text problem format, one record per line:
//
//   CSPROB v1 <m> <n> <sigma>
//   y: <m decimals>
//   <n decimals>            (m lines, one matrix row each)
//   x: <n decimals>         (optional ground truth)
//
// Decimals are written with 17 significant digits, so finite values
// round-trip exactly. The truth's kind is not part of the format and is
// supplied by the caller on load.

void write_problem(std::ostream& out, const Problemd& problem);
Problemd read_problem(std::istream& in, SignalKind truth_kind = SignalKind::kSparse,
                      const std::string& source_name = "<stream>");

void save_problem(const Problemd& problem, const std::filesystem::path& path);
Problemd load_problem(const std::filesystem::path& path,
                      SignalKind truth_kind = SignalKind::kSparse);

}  // namespace cfcs
