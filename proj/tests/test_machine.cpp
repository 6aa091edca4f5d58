#include <doctest.h>

#include <bit>
#include <numeric>

#include "simred/error.hpp"
#include "simred/kernels.hpp"
#include "simred/machine.hpp"
#include "simred/oracle.hpp"

using namespace simred;
using namespace simred::ir;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

LaunchConfig small(std::uint64_t gs, std::uint32_t ls, std::uint32_t w) {
  LaunchConfig cfg;
  cfg.global_size = gs;
  cfg.local_size = ls;
  cfg.wavefront_width = w;
  return cfg;
}

Buffer iota_i64(std::size_t n, std::int64_t first = 1) {
  std::vector<std::int64_t> v(n);
  std::iota(v.begin(), v.end(), first);
  return Buffer::of_i64(std::move(v));
}

// Single-buffer program writing one value per work-item.
Program per_lane(Block body) {
  Program p;
  p.name = "t";
  p.buffers = {{"out", DType::I64, true}};
  p.body = std::move(body);
  return p;
}

Buffer run_per_lane(const Program& p, const LaunchConfig& cfg, Metrics* m = nullptr) {
  auto r = launch(p, cfg, {{"out", Buffer(DType::I64, cfg.global_size)}}, {});
  if (m) *m = r.metrics;
  return r.buffers.at("out");
}

}  // namespace

TEST_CASE("launch config checks") {
  CHECK_NOTHROW(check_launch_config(small(8, 4, 4)));
  CHECK(code_of([] { check_launch_config(small(8, 3, 1)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { check_launch_config(small(8, 4, 8)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { check_launch_config(small(6, 4, 4)); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { check_launch_config(small(0, 4, 4)); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("catanzaro sums 1..16 on two tiny groups") {
  KernelSpec spec;
  auto out = reduce(iota_i64(16), spec, small(8, 4, 4));
  CHECK(out.value.as_i64() == 136);
  CHECK(out.launches == 2);
}

TEST_CASE("catanzaro min of a short buffer") {
  KernelSpec spec;
  spec.op = CombineOp(CombineKind::Min, DType::I64);
  CHECK(reduce(Buffer::of_i64({5, 3, 9}), spec, small(8, 4, 4)).value.as_i64() == 3);
}

TEST_CASE("catanzaro tree divergence equals log2(W) per group") {
  for (std::uint32_t ls : {64u, 128u, 256u}) {
    auto cfg = small(ls * 4, ls, 64);
    auto plan = build_catanzaro(CombineOp(CombineKind::Add, DType::I64), ls, cfg.global_size);
    auto r = launch(plan.stage1, cfg,
                    {{"input", iota_i64(5000)}, {"result", Buffer(DType::I64, plan.num_workgroups)}},
                    {{"length", Scalar::i64(5000)}});
    CAPTURE(ls);
    CHECK(r.metrics.region("tree").divergent_branches == 6 * plan.num_workgroups);
    CHECK(r.metrics.barriers == plan.num_workgroups * (1 + std::countr_zero(ls)));
  }
}

TEST_CASE("branchless tree never diverges and has one barrier") {
  auto cfg = small(1024, 256, 64);
  auto plan = build_new_stage1(CombineOp(CombineKind::Add, DType::I64), 256, 1024, 4, true);
  auto r = launch(plan.stage1, cfg,
                  {{"input", iota_i64(10000)}, {"result", Buffer(DType::I64, plan.num_workgroups)}},
                  {{"length", Scalar::i64(10000)}});
  CHECK(r.metrics.region("tree").divergent_branches == 0);
  CHECK(r.metrics.region("tree").barriers == 0);
  CHECK(r.metrics.barriers == plan.num_workgroups);
}

TEST_CASE("masked-off lanes have no side effects") {
  // Lanes 0..3 take the then-branch, others the else-branch; a mask bug
  // would let one side overwrite the other.
  Program p = per_lane({
      let("g", global_id()),
      if_(var("g") < lit(4), {store_global("out", var("g"), lit(100))},
          {store_global("out", var("g"), lit(-1))}),
  });
  for (auto s : {Scheduler::LockstepWorkgroup, Scheduler::WavefrontRoundRobin, Scheduler::WavefrontSerial}) {
    auto cfg = small(16, 8, 4);
    cfg.scheduler = s;
    Metrics m;
    auto out = run_per_lane(p, cfg, &m);
    for (std::size_t i = 0; i < 16; ++i) CHECK(out.i64()[i] == (i < 4 ? 100 : -1));
    CHECK(m.divergent_branches == 0);  // every slice is uniform at W=4
  }
  auto cfg = small(16, 8, 8);
  Metrics m;
  run_per_lane(p, cfg, &m);
  CHECK(m.divergent_branches == 1);
}

TEST_CASE("nested loops with per-lane trip counts") {
  // out[g] = sum_{i<g} i, computed with a lane-dependent while loop.
  Program p = per_lane({
      let("g", global_id()),
      let("i", lit(0)),
      let("acc", lit(0)),
      while_(var("i") < var("g"), {assign("acc", var("acc") + var("i")), assign("i", var("i") + lit(1))}),
      store_global("out", var("g"), var("acc")),
  });
  auto out = run_per_lane(p, small(32, 16, 8));
  for (std::int64_t g = 0; g < 32; ++g) CHECK(out.i64()[g] == g * (g - 1) / 2);
}

TEST_CASE("schedulers agree on barrier-correct kernels") {
  auto data = iota_i64(3000, -1000);
  for (auto v : all_kernel_variants()) {
    KernelSpec spec;
    spec.variant = v;
    spec.unroll = 3;
    auto base = small(1024, 128, 32);
    auto ref = reduce(data, spec, base);
    for (auto s : {Scheduler::WavefrontRoundRobin, Scheduler::WavefrontSerial}) {
      auto cfg = base;
      cfg.scheduler = s;
      if (v == KernelVariant::NewStage1WithBranchlessTree || v == KernelVariant::HarrisK5 ||
          v == KernelVariant::HarrisK6)
        continue;  // these rely on lockstep within the group
      auto got = reduce(data, spec, cfg);
      CAPTURE(to_string(v));
      CHECK(got.value == ref.value);
      CHECK(static_cast<const Counters&>(got.metrics) == static_cast<const Counters&>(ref.metrics));
    }
  }
}

TEST_CASE("barrier inside divergent code is rejected") {
  Program p = per_lane({
      let("g", local_id()),
      if_(var("g") < lit(2), {barrier()}),
      store_global("out", global_id(), lit(1)),
  });
  CHECK(code_of([&] { run_per_lane(p, small(8, 8, 8)); }) == ErrorCode::BarrierDivergence);
  // Whole wavefronts skipping the barrier while another waits.
  Program q = per_lane({
      let("g", local_id()),
      if_(var("g") < lit(4), {barrier()}),
      store_global("out", global_id(), lit(1)),
  });
  auto cfg = small(8, 8, 4);
  cfg.scheduler = Scheduler::WavefrontRoundRobin;
  CHECK(code_of([&] { run_per_lane(q, cfg); }) == ErrorCode::BarrierDivergence);
}

TEST_CASE("out-of-bounds global access is an error") {
  Program p = per_lane({store_global("out", global_id() + lit(1), lit(1))});
  CHECK(code_of([&] { run_per_lane(p, small(8, 4, 4)); }) == ErrorCode::OutOfBounds);
}

TEST_CASE("launch binding errors") {
  auto plan = build_catanzaro(CombineOp(CombineKind::Add, DType::I64), 4, 8);
  auto cfg = small(8, 4, 4);
  CHECK(code_of([&] { launch(plan.stage1, cfg, {{"input", iota_i64(4)}}, {{"length", Scalar::i64(4)}}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          launch(plan.stage1, cfg, {{"input", Buffer::of_f64({1.0})}, {"result", Buffer(DType::I64, 2)}},
                 {{"length", Scalar::i64(1)}});
        }) == ErrorCode::TypeMismatch);
  auto tiny = cfg;
  tiny.local_mem_words = 2;
  CHECK(code_of([&] {
          launch(plan.stage1, tiny, {{"input", iota_i64(4)}, {"result", Buffer(DType::I64, 2)}},
                 {{"length", Scalar::i64(4)}});
        }) == ErrorCode::LocalMemOverflow);
}

TEST_CASE("shuffle edge lanes keep their own value") {
  Program p = per_lane({
      let("v", global_id()),
      store_global("out", global_id(), shfl_down("v", 1)),
  });
  auto out = run_per_lane(p, small(128, 128, 64));
  CHECK(out.i64()[0] == 1);
  CHECK(out.i64()[62] == 63);
  CHECK(out.i64()[63] == 63);  // edge of wavefront 0
  CHECK(out.i64()[64] == 65);
  CHECK(out.i64()[127] == 127);
}

TEST_CASE("integer arithmetic edge cases") {
  Program p = per_lane({
      store_global("out", lit(0), lit(7) / lit(0)),
      store_global("out", lit(1), lit(7) % lit(0)),
      store_global("out", lit(2), lit(1) << lit(65)),
      store_global("out", lit(3), unary(UnaryOp::ToI64, lit(Scalar::f64(-2.5)))),
      store_global("out", lit(4), lit(-7) / lit(2)),
  });
  auto out = run_per_lane(p, small(8, 8, 8));
  CHECK(out.i64()[0] == 0);
  CHECK(out.i64()[1] == 0);
  CHECK(out.i64()[2] == 2);
  CHECK(out.i64()[3] == -2);
  CHECK(out.i64()[4] == -3);
}

TEST_CASE("runs are deterministic") {
  KernelSpec spec;
  spec.variant = KernelVariant::HarrisK7;
  spec.unroll = 4;
  auto data = iota_i64(7777);
  auto cfg = small(2048, 256, 64);
  cfg.hazard_detection = true;
  auto a = reduce(data, spec, cfg);
  auto b = reduce(data, spec, cfg);
  CHECK(a.value == b.value);
  CHECK(a.metrics == b.metrics);
}

TEST_CASE("issue and barrier accounting on a straight-line program") {
  Program p = per_lane({
      let("g", global_id()),
      barrier(),
      store_global("out", var("g"), lit(1)),
  });
  Metrics m;
  run_per_lane(p, small(32, 16, 4), &m);
  CHECK(m.barriers == 2);            // once per group
  CHECK(m.divergent_branches == 0);
  CHECK(m.wavefront_issues == 3 * 8);  // 3 ops x 8 wavefronts
  CHECK(m.global_transactions == 8);   // each 4-lane slice stores 16 contiguous bytes
}
