#include "pairpref/record_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "pairpref/normal.hpp"

namespace pairpref {

namespace {

constexpr std::string_view kEol = "\r\n";

void append_indexed(std::string& header, std::string_view stem, Index dims) {
  for (Index d = 1; d <= dims; ++d) {
    header += ',';
    header += stem;
    header += '_';
    header += std::to_string(d);
  }
}

void put_values(std::ostream& os, const Eigen::Ref<const Vector>& v) {
  for (Index d = 0; d < v.size(); ++d) os << ',' << format_number(v[d]);
}

std::string json_number(double v) {
  return std::isfinite(v) ? format_number(v) : std::string("null");
}

std::string json_array(const Eigen::Ref<const Vector>& v) {
  std::string out = "[";
  for (Index d = 0; d < v.size(); ++d) {
    if (d > 0) out += ',';
    out += json_number(v[d]);
  }
  out += ']';
  return out;
}

std::string json_band(const BandStats& b) {
  return "{\"median\":" + json_number(b.median) + ",\"lo\":" + json_number(b.lo) +
         ",\"hi\":" + json_number(b.hi) + "}";
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return {};
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string run_csv_header(Index dims) {
  std::string h = "step";
  append_indexed(h, "x_ref", dims);
  append_indexed(h, "x_alt", dims);
  append_indexed(h, "ref_theta", dims);
  append_indexed(h, "alt_theta", dims);
  h += ",response,mi_bits,designed";
  append_indexed(h, "theta_pre", dims);
  append_indexed(h, "theta_hat", dims);
  append_indexed(h, "mu_alpha", dims);
  append_indexed(h, "mu_gamma", dims);
  h += ",sigma_trace,rmse_pre,rmse,rsu";
  return h;
}

std::string benchmark_csv_header() {
  return "step,runs,mi_runs,rmse_median,rmse_lo,rmse_hi,mi_median,mi_lo,mi_hi,"
         "rsu_median,rsu_lo,rsu_hi";
}

void write_run_csv(std::ostream& os, const RunRecord& record) {
  os << run_csv_header(record.dims) << kEol;
  for (const RunRow& row : record.rows) {
    os << row.step;
    put_values(os, row.trial.x_ref);
    put_values(os, row.trial.x_alt);
    put_values(os, detail::cdf(row.trial.x_ref));
    put_values(os, detail::cdf(row.trial.x_alt));
    os << ',' << to_int(row.response) << ','
       << (row.designed ? format_number(row.mi_bits) : std::string()) << ','
       << (row.designed ? 1 : 0);
    put_values(os, row.theta_pre);
    put_values(os, row.theta_post);
    put_values(os, row.mean.head(record.dims));
    put_values(os, row.mean.tail(record.dims));
    os << ',' << format_number(row.sigma_trace) << ',' << format_number(row.rmse_pre)
       << ',' << format_number(row.rmse_post) << ',' << format_number(row.rsu) << kEol;
  }
}

void write_run_ndjson(std::ostream& os, const RunRecord& record) {
  for (const RunRow& row : record.rows) {
    os << "{\"schema\":\"" << kRunSchema << "\",\"step\":" << row.step
       << ",\"x_ref\":" << json_array(row.trial.x_ref)
       << ",\"x_alt\":" << json_array(row.trial.x_alt)
       << ",\"response\":" << to_int(row.response)
       << ",\"mi_bits\":" << (row.designed ? json_number(row.mi_bits) : "null")
       << ",\"designed\":" << (row.designed ? "true" : "false")
       << ",\"theta_pre\":" << json_array(row.theta_pre)
       << ",\"theta_hat\":" << json_array(row.theta_post)
       << ",\"mu\":" << json_array(row.mean)
       << ",\"sigma_trace\":" << json_number(row.sigma_trace)
       << ",\"rmse_pre\":" << json_number(row.rmse_pre)
       << ",\"rmse\":" << json_number(row.rmse_post)
       << ",\"rsu\":" << json_number(row.rsu) << "}\n";
  }
}

void write_benchmark_csv(std::ostream& os, const BenchmarkResult& result) {
  os << benchmark_csv_header() << kEol;
  for (const BenchmarkRow& row : result.table) {
    os << row.step << ',' << row.runs << ',' << row.mi_runs;
    for (const BandStats* b : {&row.rmse, &row.mi, &row.rsu}) {
      os << ',' << format_number(b->median) << ',' << format_number(b->lo) << ','
         << format_number(b->hi);
    }
    os << kEol;
  }
}

void write_benchmark_ndjson(std::ostream& os, const BenchmarkResult& result) {
  for (const BenchmarkRow& row : result.table) {
    os << "{\"schema\":\"" << kBenchmarkSchema << "\",\"step\":" << row.step
       << ",\"runs\":" << row.runs << ",\"mi_runs\":" << row.mi_runs
       << ",\"rmse\":" << json_band(row.rmse) << ",\"mi\":" << json_band(row.mi)
       << ",\"rsu\":" << json_band(row.rsu) << "}\n";
  }
}

}  // namespace pairpref
