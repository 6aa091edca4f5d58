#include <doctest.h>

#include <numeric>
#include <random>

#include "simred/error.hpp"
#include "simred/harness.hpp"
#include "simred/kernels.hpp"
#include "simred/oracle.hpp"

using namespace simred;

namespace {

constexpr CombineKind kAllKinds[] = {CombineKind::Add,    CombineKind::Mul,   CombineKind::Min,   CombineKind::Max,
                                     CombineKind::BitAnd, CombineKind::BitOr, CombineKind::BitXor};

LaunchConfig cfg_of(std::uint32_t ls, std::uint64_t groups, std::uint32_t w = 64) {
  LaunchConfig cfg;
  cfg.local_size = ls;
  cfg.global_size = ls * groups;
  cfg.wavefront_width = w;
  return cfg;
}

Buffer iota_i64(std::size_t n, std::int64_t first = 1) {
  std::vector<std::int64_t> v(n);
  std::iota(v.begin(), v.end(), first);
  return Buffer::of_i64(std::move(v));
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

}  // namespace

TEST_CASE("every kernel matches the sequential fold on Int data") {
  const auto cfg = cfg_of(128, 8, 32);
  for (std::uint64_t n : {0ull, 1ull, 2ull, 3ull, 15ull, 16ull, 17ull, 1023ull}) {
    // Small values keep Mul away from constant zero after wrap.
    auto data = generate_data(n, DType::I64, Distribution::uniform_int(-3, 3), 100 + n);
    for (auto kind : kAllKinds) {
      CombineOp op(kind, DType::I64);
      const Scalar want = reduce_sequential(data, op);
      for (const auto& spec : every_spec(op)) {
        CAPTURE(n);
        CAPTURE(to_string(spec.variant));
        CAPTURE(spec.unroll);
        CAPTURE(to_string(kind));
        CHECK(reduce(data, spec, cfg).value == want);
      }
    }
  }
}

TEST_CASE("every kernel matches the sequential fold at 2^16 + 1") {
  const auto cfg = cfg_of(256, 8);
  auto data = generate_data(65537, DType::I64, Distribution::uniform_int(-1000000, 1000000), 9);
  for (auto kind : {CombineKind::Add, CombineKind::Max, CombineKind::BitXor}) {
    CombineOp op(kind, DType::I64);
    const Scalar want = reduce_sequential(data, op);
    for (const auto& spec : every_spec(op)) {
      CAPTURE(to_string(spec.variant));
      CAPTURE(spec.unroll);
      CHECK(reduce(data, spec, cfg).value == want);
    }
  }
}

TEST_CASE("n = 0 returns the identity without launching") {
  KernelSpec spec;
  spec.op = CombineOp(CombineKind::Min, DType::I64);
  auto out = reduce(Buffer(DType::I64, 0), spec, cfg_of(64, 2));
  CHECK(out.value == spec.op.identity());
  CHECK(out.launches == 0);
}

TEST_CASE("single element") {
  for (auto v : all_kernel_variants()) {
    KernelSpec spec;
    spec.variant = v;
    CHECK(reduce(Buffer::of_i64({42}), spec, cfg_of(64, 2)).value.as_i64() == 42);
  }
}

TEST_CASE("unrolled masked loads handle a ragged tail") {
  KernelSpec spec;
  spec.variant = KernelVariant::NewStage1;
  spec.unroll = 4;
  CHECK(reduce(iota_i64(10), spec, cfg_of(4, 2, 4)).value.as_i64() == 55);
  spec.variant = KernelVariant::NewStage1WithBranchlessTree;
  CHECK(reduce(iota_i64(10), spec, cfg_of(4, 2, 4)).value.as_i64() == 55);
}

TEST_CASE("F = 1 reproduces catanzaro bit for bit") {
  auto data = generate_data(5000, DType::I64, Distribution::uniform_int(-50, 50), 4);
  KernelSpec base;
  KernelSpec f1;
  f1.variant = KernelVariant::NewStage1;
  for (auto kind : kAllKinds) {
    base.op = f1.op = CombineOp(kind, DType::I64);
    CHECK(reduce(data, base, cfg_of(128, 4)).value.identical(reduce(data, f1, cfg_of(128, 4)).value));
  }
}

TEST_CASE("K1 diverges more than K3") {
  auto data = iota_i64(4096);
  KernelSpec k1, k3;
  k1.variant = KernelVariant::HarrisK1;
  k3.variant = KernelVariant::HarrisK3;
  auto a = reduce(data, k1, cfg_of(256, 8));
  auto b = reduce(data, k3, cfg_of(256, 8));
  CHECK(a.value == b.value);
  CHECK(a.metrics.divergent_branches > b.metrics.divergent_branches);
}

TEST_CASE("K2 has bank conflicts and K3 has none") {
  auto data = iota_i64(4096);
  KernelSpec k2, k3;
  k2.variant = KernelVariant::HarrisK2;
  k3.variant = KernelVariant::HarrisK3;
  auto cfg = cfg_of(256, 8);
  cfg.num_banks = 32;
  CHECK(reduce(data, k2, cfg).metrics.bank_conflict_extra > 0);
  CHECK(reduce(data, k3, cfg).metrics.bank_conflict_extra == 0);
}

TEST_CASE("K5 and K6 drop tree barriers") {
  auto data = iota_i64(4096);
  KernelSpec k4, k5, k6;
  k4.variant = KernelVariant::HarrisK4;
  k5.variant = KernelVariant::HarrisK5;
  k6.variant = KernelVariant::HarrisK6;
  auto cfg = cfg_of(256, 8);
  auto b4 = reduce(data, k4, cfg).metrics.barriers;
  auto b5 = reduce(data, k5, cfg).metrics.barriers;
  auto b6 = reduce(data, k6, cfg).metrics.barriers;
  CHECK(b5 < b4);
  CHECK(b6 <= b5);
}

TEST_CASE("K7 with four elements per work-item") {
  KernelSpec spec;
  spec.variant = KernelVariant::HarrisK7;
  spec.unroll = 4;
  CHECK(reduce(iota_i64(16), spec, cfg_of(4, 2, 4)).value.as_i64() == 136);
}

TEST_CASE("shuffle on a single wavefront uses no local memory") {
  KernelSpec spec;
  spec.variant = KernelVariant::Shuffle;
  auto out = reduce(iota_i64(64), spec, cfg_of(64, 1));
  CHECK(out.value.as_i64() == 2080);
  CHECK(out.stage1.local_accesses == 0);
  CHECK(out.stage1.barriers == 0);
  CHECK(out.metrics.local_accesses == 0);
  CHECK(out.metrics.barriers == 0);
  CHECK(out.stage1.shfl_ops == 6);
}

TEST_CASE("shuffle matches the oracle on random data") {
  KernelSpec spec;
  spec.variant = KernelVariant::Shuffle;
  auto data = generate_data(100000, DType::I64, Distribution::uniform_int(-1 << 20, 1 << 20), 77);
  CHECK(reduce(data, spec, cfg_of(256, 8)).value == reduce_sequential(data, spec.op));
}

TEST_CASE("algebraic select is min") {
  CHECK(algebraic_select(Scalar::i64(3), Scalar::i64(5)).as_i64() == 3);
  CHECK(algebraic_select(Scalar::i64(4), Scalar::i64(4)).as_i64() == 4);
  for (std::int64_t a = -8; a <= 8; ++a)
    for (std::int64_t b = -8; b <= 8; ++b)
      CHECK(algebraic_select(Scalar::i64(a), Scalar::i64(b)).as_i64() == std::min(a, b));
  CHECK(algebraic_select(Scalar::f64(2.5), Scalar::f64(-1)).as_f64() == -1);
  CHECK_THROWS_AS(algebraic_select(Scalar::i64(1), Scalar::f64(1)), Error);
}

TEST_CASE("masked loads past the end contribute the identity") {
  // Every lane but one is out of range; Min and Mul would be poisoned by a
  // zero contribution.
  for (auto kind : {CombineKind::Min, CombineKind::Mul, CombineKind::BitAnd}) {
    KernelSpec spec;
    spec.variant = KernelVariant::NewStage1WithBranchlessTree;
    spec.op = CombineOp(kind, DType::I64);
    spec.unroll = 8;
    CHECK(reduce(Buffer::of_i64({5, 7}), spec, cfg_of(64, 4)).value ==
          reduce_sequential(Buffer::of_i64({5, 7}), spec.op));
  }
}

TEST_CASE("geometry errors") {
  CombineOp add(CombineKind::Add, DType::I64);
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code([&] { build_catanzaro(add, 4, 64); }) == ErrorCode::GeometryError);  // 16 partials > 4 lanes
  CHECK(code([&] { build_catanzaro(add, 6, 12); }) == ErrorCode::GeometryError);
  CHECK(code([&] { build_new_stage1(add, 64, 128, 0, true); }) == ErrorCode::GeometryError);
  KernelSpec spec;
  spec.op = CombineOp(CombineKind::Add, DType::F64);
  CHECK(code([&] { reduce(Buffer::of_i64({1}), spec, cfg_of(64, 2)); }) == ErrorCode::TypeMismatch);
}

TEST_CASE("float kernels stay within the worst-case fold bound") {
  auto cfg = cfg_of(128, 8);
  for (auto type : {DType::F32, DType::F64}) {
    auto data = generate_data(20000, type, Distribution::uniform_float(-1000, 1000), 12);
    auto bound = float_error_bound(data.size(), data.max_abs(), type);
    for (const auto& base : every_spec(CombineOp(CombineKind::Add, type))) {
      auto value = reduce(data, base, cfg).value;
      CAPTURE(to_string(base.variant));
      CHECK(exact_abs_error(data, value.to_double()) <= bound.bound);
    }
  }
}

TEST_CASE("float min/max are exact") {
  auto data = generate_data(3000, DType::F32, Distribution::uniform_float(-1, 1), 8);
  for (auto kind : {CombineKind::Min, CombineKind::Max}) {
    CombineOp op(kind, DType::F32);
    for (const auto& spec : every_spec(op)) CHECK(reduce(data, spec, cfg_of(64, 4)).value == reduce_sequential(data, op));
  }
}

TEST_CASE("kernel names round-trip") {
  for (auto v : all_kernel_variants()) CHECK(parse_kernel_variant(to_string(v)) == v);
  CHECK_FALSE(parse_kernel_variant("k9").has_value());
}

TEST_CASE("unrolled kernel at the full benchmark size") {
  auto data = generate_data(5533214, DType::I64, Distribution::uniform_int(-1000000, 1000000), 2024);
  KernelSpec spec;
  spec.variant = KernelVariant::NewStage1;
  spec.unroll = 8;
  LaunchConfig cfg;
  CHECK(reduce(data, spec, cfg).value == reduce_sequential(data, spec.op));
}
