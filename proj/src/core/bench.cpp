#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "simred/error.hpp"
#include "simred/harness.hpp"
#include "simred/oracle.hpp"

namespace simred {

void check_cost_model(const CostModel& c) {
  for (double v : {c.alu, c.global_transaction, c.local_access, c.barrier, c.shfl}) {
    if (!(v >= 0) || !std::isfinite(v)) fail(ErrorCode::InvalidConfig, "costs must be finite and non-negative");
  }
}

double estimate_cycles(const Counters& m, const CostModel& c) {
  auto d = [](std::uint64_t x) { return static_cast<double>(x); };
  return d(m.wavefront_issues) * c.alu + d(m.global_transactions) * c.global_transaction +
         d(m.local_accesses) * c.local_access + d(m.bank_conflict_extra) * c.local_access +
         d(m.barriers) * c.barrier + d(m.shfl_ops) * c.shfl;
}

namespace {

bool all_finite(const Buffer& data) {
  if (data.dtype() == DType::F32)
    return std::all_of(data.f32().begin(), data.f32().end(), [](float x) { return std::isfinite(x); });
  return std::all_of(data.f64().begin(), data.f64().end(), [](double x) { return std::isfinite(x); });
}

bool same_float(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool verify_result(const Buffer& data, const CombineOp& op, const Scalar& result) {
  if (result.type() != op.dtype()) return false;
  const Scalar expected = reduce_sequential(data, op);
  if (!is_float(op.dtype())) return result == expected;

  const double r = result.to_double();
  const double s = expected.to_double();
  switch (op.kind()) {
    case CombineKind::Min:
    case CombineKind::Max: return same_float(r, s);
    case CombineKind::Add: {
      if (!all_finite(data)) return same_float(r, s);
      const auto bound = float_error_bound(data.size(), data.max_abs(), op.dtype());
      return exact_abs_error(data, r) <= bound.bound;
    }
    case CombineKind::Mul: {
      if (same_float(r, s)) return true;
      if (!std::isfinite(r) || !std::isfinite(s)) return false;
      // Both orderings are within (n-1)·u relative error of the exact product;
      // results that underflow are only compared against the smallest normal.
      const double n = static_cast<double>(data.size());
      const double u = unit_roundoff(op.dtype());
      const double tiny = op.dtype() == DType::F32 ? std::numeric_limits<float>::min()
                                                   : std::numeric_limits<double>::min();
      const double scale = std::max({std::fabs(r), std::fabs(s), tiny});
      return std::fabs(r - s) <= 2.0 * n * u * scale * 1.01 + tiny;
    }
    default: return false;
  }
}

namespace {

struct Outcome {
  bool ok = false;
  bool has_value = false;
  Scalar value;
  Counters metrics;
  std::string error;
};

Outcome run_case(const Buffer& data, const BenchCase& c, const LaunchConfig& cfg) {
  Outcome out;
  try {
    ReduceOutcome r = c.runner ? c.runner(data, c.spec, cfg) : reduce(data, c.spec, cfg);
    out.value = r.value;
    out.has_value = true;
    out.metrics = r.metrics;
    out.ok = verify_result(data, c.spec.op, r.value);
    if (!out.ok) out.error = "result " + r.value.to_string() + " fails verification";
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

std::vector<BenchRow> run_benchmark(const Buffer& data, const std::vector<BenchCase>& cases,
                                    const LaunchConfig& cfg, const CostModel& cost, unsigned threads) {
  check_cost_model(cost);
  for (const auto& c : cases) {
    if (c.spec.op.kind() != cases.front().spec.op.kind() || c.spec.op.dtype() != cases.front().spec.op.dtype())
      fail(ErrorCode::InvalidArgument, "benchmark cases must share one operator");
  }
  // Reuse a plain Catanzaro case as the baseline, otherwise append one.
  std::vector<BenchCase> all = cases;
  auto is_baseline = [](const BenchCase& c) {
    return c.spec.variant == KernelVariant::Catanzaro && !c.runner && c.spec.local_size == 0 &&
           c.spec.global_size == 0;
  };
  std::size_t base_index = static_cast<std::size_t>(
      std::find_if(cases.begin(), cases.end(), is_baseline) - cases.begin());
  if (!cases.empty() && base_index == cases.size()) {
    BenchCase base;
    base.spec.variant = KernelVariant::Catanzaro;
    base.spec.op = cases.front().spec.op;
    all.push_back(base);
  }

  std::vector<Outcome> outcomes(all.size());
  parallel_for(all.size(), threads, [&](std::size_t i) { outcomes[i] = run_case(data, all[i], cfg); });

  const double baseline = base_index < outcomes.size() && outcomes[base_index].ok
                              ? estimate_cycles(outcomes[base_index].metrics, cost)
                              : 0.0;
  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto& o = outcomes[i];
    BenchRow row;
    row.kernel = std::string(to_string(c.spec.variant));
    const auto v = c.spec.variant;
    const bool unrolled = v == KernelVariant::HarrisK7 || v == KernelVariant::NewStage1 ||
                          v == KernelVariant::NewStage1WithBranchlessTree;
    row.unroll = unrolled ? c.spec.unroll : 1;
    row.n = data.size();
    row.op = std::string(to_string(c.spec.op.kind()));
    row.dtype = std::string(to_string(c.spec.op.dtype()));
    row.result_ok = o.ok;
    row.metrics = o.metrics;
    row.error = o.error;
    if (o.ok) {
      row.value = o.value.to_string();
      row.sim_cycles = estimate_cycles(o.metrics, cost);
      row.speedup = row.sim_cycles > 0 && baseline > 0 ? baseline / row.sim_cycles : 0.0;
    } else if (o.has_value) {
      row.value = o.value.to_string();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<BenchRow> sweep_unroll(const Buffer& data, const std::vector<std::uint32_t>& factors,
                                   const CombineOp& op, const LaunchConfig& cfg, const CostModel& cost,
                                   unsigned threads) {
  if (std::find(factors.begin(), factors.end(), 1u) == factors.end())
    fail(ErrorCode::InvalidArgument, "unroll factors must include 1");
  std::vector<BenchCase> cases;
  BenchCase base;
  base.spec.variant = KernelVariant::Catanzaro;
  base.spec.op = op;
  cases.push_back(base);
  for (auto f : factors) {
    if (f == 0) fail(ErrorCode::InvalidArgument, "unroll factor must be at least 1");
    BenchCase c;
    c.spec.variant = KernelVariant::NewStage1WithBranchlessTree;
    c.spec.op = op;
    c.spec.unroll = f;
    cases.push_back(c);
  }
  return run_benchmark(data, cases, cfg, cost, threads);
}

bool all_ok(const std::vector<BenchRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.result_ok; });
}

}  // namespace simred
