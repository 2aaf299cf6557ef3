#pragma once

#include <ostream>
#include <string>
#include <string_view>

#include "pairpref/session.hpp"

namespace pairpref {

/// Bumped whenever a column is added, removed or renamed.
inline constexpr std::string_view kRunSchema = "pairpref.run/1";
inline constexpr std::string_view kBenchmarkSchema = "pairpref.benchmark/1";

/// Shortest round-trip decimal form; NaN and infinities render as "".
std::string format_number(double v);

/// RFC-4180 field: quoted when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

std::string run_csv_header(Index dims);
std::string benchmark_csv_header();

/// One header line plus one CRLF-terminated line per step.
void write_run_csv(std::ostream& os, const RunRecord& record);
/// One JSON object per step, newline separated.
void write_run_ndjson(std::ostream& os, const RunRecord& record);

void write_benchmark_csv(std::ostream& os, const BenchmarkResult& result);
void write_benchmark_ndjson(std::ostream& os, const BenchmarkResult& result);

}  // namespace pairpref
