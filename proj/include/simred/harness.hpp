#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simred/kernels.hpp"
#include "simred/machine.hpp"
#include "simred/scalar.hpp"

namespace simred {

// ---------------------------------------------------------------------------
// Datasets

// Generator: std::mt19937_64 seeded with `seed`, one draw per element.
//   uniform_int:   lo + floor(draw · (hi - lo + 1) / 2^64), inclusive bounds
//   uniform_float: lo + (hi - lo) · (draw >> 11) · 2^-53, in [lo, hi); F32 rounds the double
//   constant:      every element converted from `value`
struct Distribution {
  enum class Kind : std::uint8_t { UniformInt, UniformFloat, Constant };
  Kind kind = Kind::UniformInt;
  std::int64_t int_lo = 0;
  std::int64_t int_hi = 0;
  double float_lo = 0;
  double float_hi = 0;
  double value = 0;

  static Distribution uniform_int(std::int64_t lo, std::int64_t hi);
  static Distribution uniform_float(double lo, double hi);
  static Distribution constant(double v);
};

// Throws BadRange for lo > hi or non-finite float bounds, TypeMismatch for a
// float distribution requested as i64.
Buffer generate_data(std::uint64_t n, DType type, const Distribution& dist, std::uint64_t seed);

enum class DataFormat : std::uint8_t {
  Text,   // one decimal number per line; blank lines are skipped
  RawLE,  // u64 little-endian element count, then little-endian elements (8 bytes, or 4 for f32)
};

std::optional<DataFormat> parse_data_format(std::string_view name);

// Throws IoError (unreadable, truncated or oversized raw file) and ParseError
// (text line that is not a number of the requested type; message names the line).
Buffer load_data(const std::string& path, DataFormat format, DType type);
void save_data(const std::string& path, const Buffer& data, DataFormat format);

// ---------------------------------------------------------------------------
// Cost model and verification

struct CostModel {
  double alu = 1;
  double global_transaction = 100;
  double local_access = 4;
  double barrier = 20;
  double shfl = 1;
};

// Throws InvalidConfig on a negative or non-finite cost.
void check_cost_model(const CostModel& c);

double estimate_cycles(const Counters& m, const CostModel& c);

// Int and float Min/Max must equal the sequential fold exactly. Float Add must
// lie within float_error_bound of the exact sum; float Mul within the
// matching relative bound of the sequential product.
bool verify_result(const Buffer& data, const CombineOp& op, const Scalar& result);

// ---------------------------------------------------------------------------
// Benchmarks

using KernelRunner = std::function<ReduceOutcome(const Buffer&, const KernelSpec&, const LaunchConfig&)>;

struct BenchCase {
  KernelSpec spec;
  KernelRunner runner;  // defaults to simred::reduce
};

struct BenchRow {
  std::string kernel;
  std::uint32_t unroll = 1;
  std::uint64_t n = 0;
  std::string op;
  std::string dtype;
  bool result_ok = false;
  Counters metrics;
  double sim_cycles = 0;
  double speedup = 0;
  std::string value;  // kernel result as text, empty on error
  std::string error;  // empty unless the kernel raised

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

// Runs every case over `data` and a Catanzaro baseline with the same
// operator; speedup = baseline cycles / row cycles. Rows that fail keep their
// error text and report zero cycles and speedup. `threads` > 1 runs cases
// concurrently; the rows are identical to a serial run.
std::vector<BenchRow> run_benchmark(const Buffer& data, const std::vector<BenchCase>& cases,
                                    const LaunchConfig& cfg, const CostModel& cost, unsigned threads = 1);

// Catanzaro baseline row (F=1) followed by one new-branchless row per factor.
// Throws InvalidArgument unless `factors` contains 1.
std::vector<BenchRow> sweep_unroll(const Buffer& data, const std::vector<std::uint32_t>& factors,
                                   const CombineOp& op, const LaunchConfig& cfg, const CostModel& cost,
                                   unsigned threads = 1);

bool all_ok(const std::vector<BenchRow>& rows);

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat : std::uint8_t { Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view name);

extern const char* const kCsvHeader;

std::string to_csv(const std::vector<BenchRow>& rows);
std::string to_json(const std::vector<BenchRow>& rows);
std::string render_report(const std::vector<BenchRow>& rows, ReportFormat format);
// Throws ParseError on malformed input.
std::vector<BenchRow> rows_from_json(std::string_view text);
// Throws IoError when the file cannot be written.
void emit_report(const std::vector<BenchRow>& rows, ReportFormat format, const std::string& path);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Config files: `key = value` per line, `#` starts a comment.

// Throws ParseError naming the offending line.
std::map<std::string, std::string> parse_config(std::string_view text);
std::map<std::string, std::string> load_config(const std::string& path);

}  // namespace simred
