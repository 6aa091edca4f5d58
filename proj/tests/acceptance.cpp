// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

#include "simred/harness.hpp"
#include "simred/kernels.hpp"
#include "simred/oracle.hpp"

using namespace simred;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

LaunchConfig cfg_of(std::uint32_t ls, std::uint64_t groups, std::uint32_t w = 64) {
  LaunchConfig cfg;
  cfg.local_size = ls;
  cfg.global_size = ls * groups;
  cfg.wavefront_width = w;
  return cfg;
}

std::vector<KernelSpec> every_spec(const CombineOp& op) {
  std::vector<KernelSpec> specs;
  for (auto v : all_kernel_variants()) {
    const bool unrolled = v == KernelVariant::HarrisK7 || v == KernelVariant::NewStage1 ||
                          v == KernelVariant::NewStage1WithBranchlessTree;
    for (std::uint32_t f : unrolled ? std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6, 7, 8, 16}
                                    : std::vector<std::uint32_t>{1}) {
      KernelSpec s;
      s.variant = v;
      s.op = op;
      s.unroll = f;
      specs.push_back(s);
    }
  }
  return specs;
}

template <class F>
void parallel(std::size_t count, F&& body) {
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned t = std::max(1u, std::thread::hardware_concurrency());
  for (unsigned i = 0; i < t; ++i)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < count;) body(k);
    });
  for (auto& th : pool) th.join();
}

void oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::uint64_t> sizes{0, 1, 2, 3, 15, 16, 17, 1023, 1 << 16, (1 << 16) + 1, 1 << 20};
  const CombineKind kinds[] = {CombineKind::Add,    CombineKind::Mul,   CombineKind::Min,   CombineKind::Max,
                               CombineKind::BitAnd, CombineKind::BitOr, CombineKind::BitXor};
  struct Job {
    const Buffer* data;
    KernelSpec spec;
    Scalar want;
  };
  std::vector<Buffer> datasets;
  for (auto n : sizes) datasets.push_back(generate_data(n, DType::I64, Distribution::uniform_int(-1000, 1000), n));
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    for (auto kind : kinds) {
      CombineOp op(kind, DType::I64);
      const Scalar want = reduce_sequential(datasets[i], op);
      for (const auto& spec : every_spec(op)) jobs.push_back({&datasets[i], spec, want});
    }
  const auto cfg = cfg_of(256, 8);
  std::atomic<std::size_t> bad{0};
  std::mutex mu;
  std::string first;
  parallel(jobs.size(), [&](std::size_t k) {
    const auto& j = jobs[k];
    bool ok;
    try {
      ok = reduce(*j.data, j.spec, cfg).value == j.want;
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) {
      ++bad;
      std::lock_guard lock(mu);
      if (first.empty())
        first = std::string(to_string(j.spec.variant)) + " F=" + std::to_string(j.spec.unroll) + " op=" +
                std::string(to_string(j.spec.op.kind())) + " n=" + std::to_string(j.data->size());
    }
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << jobs.size() << " runs, " << bad << " mismatches, " << secs << " s (budget 300 s)";
  if (!first.empty()) d << ", first: " << first;
  report("oracle-equivalence", bad == 0 && secs < 300, d.str());
}

void float_ordering() {
  const double big = std::ldexp(1.0, 100);
  CombineOp add(CombineKind::Add, DType::F64);
  const double a = reduce_sequential(Buffer::of_f64({1.5, big, -big}), add).as_f64();
  const double b = reduce_sequential(Buffer::of_f64({big, -big, 1.5}), add).as_f64();
  report("float-ordering", a == 0.0 && b == 1.5,
         "[1.5,2^100,-2^100] -> " + format_double(a) + ", [2^100,-2^100,1.5] -> " + format_double(b));
}

Metrics stage1_metrics(const TwoStagePlan& plan, const LaunchConfig& cfg, const Buffer& data) {
  return launch(plan.stage1, cfg,
                {{"input", data}, {"result", Buffer(data.dtype(), plan.num_workgroups)}},
                {{"length", Scalar::i64(static_cast<std::int64_t>(data.size()))}})
      .metrics;
}

void divergence_and_barriers() {
  const CombineOp add(CombineKind::Add, DType::I64);
  const auto data = generate_data(100000, DType::I64, Distribution::uniform_int(-9, 9), 3);
  bool div_ok = true, bar_ok = true;
  std::ostringstream dd, bd;
  for (std::uint32_t ls : {64u, 128u, 256u}) {
    const auto cfg = cfg_of(ls, 8);
    const auto cat = stage1_metrics(build_catanzaro(add, ls, cfg.global_size), cfg, data);
    const auto nb = stage1_metrics(build_new_stage1(add, ls, cfg.global_size, 8, true), cfg, data);
    const std::uint64_t groups = cfg.num_workgroups();
    const std::uint64_t cat_div = cat.region("tree").divergent_branches;
    const std::uint64_t nb_div = nb.region("tree").divergent_branches;
    div_ok = div_ok && cat_div == groups * 6 && nb_div == 0;
    dd << "LS=" << ls << " catanzaro " << cat_div / groups << "/group, branchless " << nb_div << "; ";
    const std::uint64_t expect = 1 + std::countr_zero(ls);
    bar_ok = bar_ok && cat.barriers == groups * expect && nb.region("tree").barriers == 0 && nb.barriers == groups;
    bd << "LS=" << ls << " catanzaro " << cat.barriers / groups << "/group (want " << expect << "), new tree "
       << nb.region("tree").barriers << ", new total " << nb.barriers / groups << "/group; ";
  }
  report("divergence-elimination", div_ok, dd.str() + "log2(W)=6");
  report("barrier-elimination", bar_ok, bd.str());
}

void shuffle_kernel() {
  KernelSpec spec;
  spec.variant = KernelVariant::Shuffle;
  std::vector<std::int64_t> series(64);
  for (int i = 0; i < 64; ++i) series[i] = i + 1;
  const auto one = reduce(Buffer::of_i64(series), spec, cfg_of(64, 1));
  const auto data = generate_data(100000, DType::I64, Distribution::uniform_int(-100000, 100000), 5);
  const auto many = reduce(data, spec, cfg_of(256, 8));
  const bool ok = one.value.as_i64() == 2080 && one.stage1.local_accesses == 0 && one.stage1.barriers == 0 &&
                  many.stage1.local_accesses == 0 && many.stage1.barriers == 0 &&
                  many.stage2.local_accesses == 0 && many.value == reduce_sequential(data, spec.op);
  std::ostringstream d;
  d << "[1..64] -> " << one.value.to_string() << "; n=1e5 local " << many.stage1.local_accesses << ", barriers "
    << many.stage1.barriers << ", shfl " << many.stage1.shfl_ops << ", matches oracle "
    << (many.value == reduce_sequential(data, spec.op));
  report("shuffle-kernel", ok, d.str());
}

std::size_t hazard_count(KernelVariant v, std::uint32_t ls) {
  auto cfg = cfg_of(ls, 4);
  cfg.scheduler = Scheduler::WavefrontRoundRobin;
  cfg.hazard_detection = true;
  KernelSpec spec;
  spec.variant = v;
  const auto data = generate_data(5000, DType::I64, Distribution::uniform_int(-9, 9), 1);
  return reduce(data, spec, cfg).stage1.hazards.size();
}

void hazard_audit() {
  const auto a = hazard_count(KernelVariant::NewStage1WithBranchlessTree, 128);
  const auto b = hazard_count(KernelVariant::NewStage1WithBranchlessTree, 64);
  const auto c = hazard_count(KernelVariant::Catanzaro, 128);
  report("hazard-audit", a > 0 && b == 0 && c == 0,
         "branchless LS=128: " + std::to_string(a) + ", branchless LS=64: " + std::to_string(b) +
             ", catanzaro LS=128: " + std::to_string(c));
}

std::vector<BenchRow> speedup_rows(const CostModel& cost) {
  const auto data = generate_data(1 << 20, DType::I64, Distribution::uniform_int(-1000, 1000), 1);
  return sweep_unroll(data, {1, 2, 4, 8, 16}, CombineOp(CombineKind::Add, DType::I64), cfg_of(256, 8), cost,
                      std::max(1u, std::thread::hardware_concurrency()));
}

void speedup_trend() {
  auto rows = speedup_rows(CostModel{});
  // rows: catanzaro, then F = 1, 2, 4, 8, 16
  std::vector<double> s;
  for (std::size_t i = 1; i < rows.size(); ++i) s.push_back(rows[i].speedup);
  const bool monotone = s[0] <= s[1] && s[1] <= s[2] && s[2] <= s[3];
  const double gain16 = s[4] / s[3] - 1;
  std::ostringstream d;
  d << "F=1,2,4,8,16 -> ";
  for (double x : s) d << format_double(std::round(x * 10000) / 10000) << " ";
  d << "| non-decreasing " << monotone << ", speedup(8) >= 1.5 " << (s[3] >= 1.5) << ", gain 8->16 "
    << format_double(std::round(gain16 * 10000) / 100) << "% <= 15% " << (gain16 <= 0.15);
  report("speedup-trend", monotone && s[3] >= 1.5 && gain16 <= 0.15 && all_ok(rows), d.str());

  // Informational only: the same sweep with global memory traffic priced
  // like an ALU issue, to show the shape once bandwidth stops dominating.
  CostModel cheap;
  cheap.global_transaction = 1;
  auto alt = speedup_rows(cheap);
  std::ostringstream i;
  i << "INFO speedup-trend with global_transaction=1: F=1,2,4,8,16 -> ";
  for (std::size_t k = 1; k < alt.size(); ++k) i << format_double(std::round(alt[k].speedup * 1000) / 1000) << " ";
  std::printf("%s\n", i.str().c_str());
}

void float_accuracy() {
  std::size_t runs = 0, bad = 0;
  for (auto type : {DType::F32, DType::F64})
    for (std::uint64_t n : {1000ull, 65537ull}) {
      const auto data = generate_data(n, type, Distribution::uniform_float(-1000, 1000), n + 1);
      const double bound = float_error_bound(n, data.max_abs(), type).bound;
      for (const auto& spec : every_spec(CombineOp(CombineKind::Add, type))) {
        ++runs;
        const auto v = reduce(data, spec, cfg_of(256, 8)).value;
        if (!(exact_abs_error(data, v.to_double()) <= bound)) ++bad;
      }
    }
  std::size_t kahan_runs = 0, kahan_bad = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed)
    for (auto type : {DType::F32, DType::F64}) {
      const std::uint64_t n = 1 + (seed * 2473) % 10000;
      const auto data = generate_data(n, type, Distribution::uniform_float(-1e6, 1e6), seed);
      const double naive = reduce_sequential(data, CombineOp(CombineKind::Add, type)).to_double();
      const double k = kahan_sum(data).to_double();
      ++kahan_runs;
      if (exact_abs_error(data, k) > exact_abs_error(data, naive)) ++kahan_bad;
    }
  report("float-accuracy", bad == 0 && kahan_bad == 0,
         std::to_string(runs - bad) + "/" + std::to_string(runs) + " kernel runs within bound, Kahan <= naive on " +
             std::to_string(kahan_runs - kahan_bad) + "/" + std::to_string(kahan_runs));
}

std::string capture(const std::string& cmd, int& code) {
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    code = -1;
    return {};
  }
  std::string out;
  char buf[4096];
  while (std::size_t k = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, k);
  const int status = pclose(pipe);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

void determinism(const char* cli) {
  if (!cli) {
    report("determinism", false, "path to the simred binary not given");
    return;
  }
  const std::string cmd = std::string(cli) + " sweep --n 200000 --seed 3 --factors 1,2,3,4,5,6,7,8,16";
  int c1 = 0, c2 = 0;
  const auto a = capture(cmd, c1);
  const auto b = capture(cmd, c2);
  report("determinism", c1 == 0 && c2 == 0 && !a.empty() && a == b,
         "two sweeps, " + std::to_string(a.size()) + " bytes, identical " + std::to_string(a == b));
}

}  // namespace

int main(int argc, char** argv) {
  float_ordering();
  divergence_and_barriers();
  shuffle_kernel();
  hazard_audit();
  float_accuracy();
  determinism(argc > 1 ? argv[1] : nullptr);
  speedup_trend();
  oracle_equivalence();
  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
