#include <charconv>
#include <fstream>

#include <json.hpp>

#include "simred/error.hpp"
#include "simred/harness.hpp"

namespace simred {

const char* const kCsvHeader =
    "kernel,F,n,op,result_ok,divergent_branches,barriers,global_transactions,local_accesses,"
    "bank_conflict_extra,shfl_ops,wavefront_issues,sim_cycles,speedup";

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out += r.kernel + "," + std::to_string(r.unroll) + "," + std::to_string(r.n) + "," + r.op + "," +
           (r.result_ok ? "true" : "false") + "," + std::to_string(m.divergent_branches) + "," +
           std::to_string(m.barriers) + "," + std::to_string(m.global_transactions) + "," +
           std::to_string(m.local_accesses) + "," + std::to_string(m.bank_conflict_extra) + "," +
           std::to_string(m.shfl_ops) + "," + std::to_string(m.wavefront_issues) + "," +
           format_double(r.sim_cycles) + "," + format_double(r.speedup) + "\n";
  }
  return out;
}

namespace {

using nlohmann::ordered_json;

ordered_json row_to_json(const BenchRow& r) {
  const auto& m = r.metrics;
  ordered_json j;
  j["kernel"] = r.kernel;
  j["F"] = r.unroll;
  j["n"] = r.n;
  j["op"] = r.op;
  j["dtype"] = r.dtype;
  j["result_ok"] = r.result_ok;
  j["divergent_branches"] = m.divergent_branches;
  j["barriers"] = m.barriers;
  j["global_transactions"] = m.global_transactions;
  j["local_accesses"] = m.local_accesses;
  j["bank_conflict_extra"] = m.bank_conflict_extra;
  j["shfl_ops"] = m.shfl_ops;
  j["wavefront_issues"] = m.wavefront_issues;
  j["sim_cycles"] = r.sim_cycles;
  j["speedup"] = r.speedup;
  j["value"] = r.value;
  j["error"] = r.error;
  return j;
}

BenchRow row_from_json(const ordered_json& j) {
  BenchRow r;
  r.kernel = j.at("kernel").get<std::string>();
  r.unroll = j.at("F").get<std::uint32_t>();
  r.n = j.at("n").get<std::uint64_t>();
  r.op = j.at("op").get<std::string>();
  r.dtype = j.value("dtype", "");
  r.result_ok = j.at("result_ok").get<bool>();
  auto& m = r.metrics;
  m.divergent_branches = j.at("divergent_branches").get<std::uint64_t>();
  m.barriers = j.at("barriers").get<std::uint64_t>();
  m.global_transactions = j.at("global_transactions").get<std::uint64_t>();
  m.local_accesses = j.at("local_accesses").get<std::uint64_t>();
  m.bank_conflict_extra = j.at("bank_conflict_extra").get<std::uint64_t>();
  m.shfl_ops = j.at("shfl_ops").get<std::uint64_t>();
  m.wavefront_issues = j.at("wavefront_issues").get<std::uint64_t>();
  r.sim_cycles = j.at("sim_cycles").get<double>();
  r.speedup = j.at("speedup").get<double>();
  r.value = j.value("value", "");
  r.error = j.value("error", "");
  return r;
}

}  // namespace

std::string to_json(const std::vector<BenchRow>& rows) {
  ordered_json j;
  j["rows"] = ordered_json::array();
  for (const auto& r : rows) j["rows"].push_back(row_to_json(r));
  return j.dump(2) + "\n";
}

std::vector<BenchRow> rows_from_json(std::string_view text) {
  try {
    auto j = ordered_json::parse(text);
    std::vector<BenchRow> rows;
    for (const auto& r : j.at("rows")) rows.push_back(row_from_json(r));
    return rows;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
  }
}

std::string render_report(const std::vector<BenchRow>& rows, ReportFormat format) {
  return format == ReportFormat::Csv ? to_csv(rows) : to_json(rows);
}

void emit_report(const std::vector<BenchRow>& rows, ReportFormat format, const std::string& path) {
  const std::string text = render_report(rows, format);
  std::ofstream f(path, std::ios::binary);
  if (!f || !f.write(text.data(), static_cast<std::streamsize>(text.size())))
    fail(ErrorCode::IoError, "cannot write report to '" + path + "'");
}

}  // namespace simred
