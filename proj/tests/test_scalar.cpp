#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "simred/error.hpp"
#include "simred/scalar.hpp"

using namespace simred;

namespace {

constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();
constexpr CombineKind kAllKinds[] = {CombineKind::Add,    CombineKind::Mul,   CombineKind::Min,   CombineKind::Max,
                                     CombineKind::BitAnd, CombineKind::BitOr, CombineKind::BitXor};

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("scalars carry their type and reject the wrong accessor") {
  CHECK(Scalar::i64(3).type() == DType::I64);
  CHECK(Scalar::f32(1.5f).type() == DType::F32);
  CHECK(Scalar::f64(2.5).as_f64() == 2.5);
  CHECK(code_of([] { Scalar::i64(1).as_f64(); }) == ErrorCode::TypeMismatch);
  CHECK(code_of([] { Scalar::f64(1).as_i64(); }) == ErrorCode::TypeMismatch);
}

TEST_CASE("identical distinguishes signed zeros, equality does not") {
  CHECK(Scalar::f64(0.0) == Scalar::f64(-0.0));
  CHECK_FALSE(Scalar::f64(0.0).identical(Scalar::f64(-0.0)));
  CHECK_FALSE(Scalar::f64(1.0) == Scalar::f32(1.0f));
}

TEST_CASE("from_double saturates into i64") {
  CHECK(Scalar::from_double(DType::I64, 2.9).as_i64() == 2);
  CHECK(Scalar::from_double(DType::I64, -2.9).as_i64() == -2);
  CHECK(Scalar::from_double(DType::I64, 1e30).as_i64() == kMax);
  CHECK(Scalar::from_double(DType::I64, -1e30).as_i64() == kMin);
  CHECK(Scalar::from_double(DType::I64, NAN).as_i64() == 0);
}

TEST_CASE("scalar text round-trips") {
  CHECK(Scalar::i64(-42).to_string() == "-42");
  CHECK(Scalar::f64(0.1).to_string() == "0.1");
  CHECK(Scalar::f32(0.1f).to_string() == "0.1");
}

TEST_CASE("buffers check indices and element types") {
  Buffer b(DType::I64, 3);
  CHECK(b.size() == 3);
  b.set(1, Scalar::i64(9));
  CHECK(b.at(1).as_i64() == 9);
  CHECK(code_of([&] { b.at(3); }) == ErrorCode::OutOfBounds);
  CHECK(code_of([&] { b.set(0, Scalar::f64(1)); }) == ErrorCode::TypeMismatch);
  CHECK(code_of([&] { (void)b.f32(); }) == ErrorCode::TypeMismatch);
  CHECK(Buffer::of_f64({-3.0, 2.0}).max_abs() == 3.0);
  CHECK(Buffer::of_i64({}).max_abs() == 0.0);
  CHECK(Buffer::of_i64({1, 2}).identical(Buffer::of_i64({1, 2})));
  CHECK_FALSE(Buffer::of_i64({1, 2}).identical(Buffer::of_i64({1, 3})));
}

TEST_CASE("combine: basic values") {
  CombineOp add(CombineKind::Add, DType::I64);
  CHECK(combine(add, Scalar::i64(3), Scalar::i64(4)).as_i64() == 7);
  CHECK(combine(CombineOp(CombineKind::Min, DType::F64), Scalar::f64(2), Scalar::f64(-1)).as_f64() == -1);
  CHECK(combine(CombineOp(CombineKind::BitXor, DType::I64), Scalar::i64(6), Scalar::i64(3)).as_i64() == 5);
  CHECK(code_of([&] { combine(add, Scalar::i64(1), Scalar::f64(1)); }) == ErrorCode::TypeMismatch);
  CHECK(code_of([] { CombineOp(CombineKind::BitAnd, DType::F32); }) == ErrorCode::TypeMismatch);
}

TEST_CASE("combine: Int add and mul wrap modulo 2^64") {
  CombineOp add(CombineKind::Add, DType::I64);
  CombineOp mul(CombineKind::Mul, DType::I64);
  // Independent modular arithmetic on unsigned integers.
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t a = rng(), b = rng();
    CHECK(combine(add, Scalar::i64(static_cast<std::int64_t>(a)), Scalar::i64(static_cast<std::int64_t>(b)))
              .as_i64() == static_cast<std::int64_t>(a + b));
    CHECK(combine(mul, Scalar::i64(static_cast<std::int64_t>(a)), Scalar::i64(static_cast<std::int64_t>(b)))
              .as_i64() == static_cast<std::int64_t>(a * b));
  }
  CHECK(combine(add, Scalar::i64(kMax), Scalar::i64(1)).as_i64() == kMin);
}

TEST_CASE("identities: documented values") {
  CHECK(CombineOp(CombineKind::Add, DType::I64).identity().as_i64() == 0);
  CHECK(CombineOp(CombineKind::Min, DType::I64).identity().as_i64() == kMax);
  CHECK(CombineOp(CombineKind::Max, DType::I64).identity().as_i64() == kMin);
  CHECK(std::isinf(CombineOp(CombineKind::Min, DType::F32).identity().as_f32()));
  CHECK(CombineOp(CombineKind::Min, DType::F64).identity().as_f64() > 0);
  CHECK(CombineOp(CombineKind::Max, DType::F64).identity().as_f64() == -INFINITY);
  CHECK(CombineOp(CombineKind::BitAnd, DType::I64).identity().as_i64() == -1);
}

TEST_CASE("identity law over small Int domains and special floats") {
  for (auto kind : kAllKinds) {
    CombineOp op(kind, DType::I64);
    for (std::int64_t x = -64; x <= 64; ++x) {
      CHECK(combine(op, op.identity(), Scalar::i64(x)).as_i64() == x);
      CHECK(combine(op, Scalar::i64(x), op.identity()).as_i64() == x);
    }
    for (std::int64_t x : {kMin, kMax, kMin + 1, kMax - 1})
      CHECK(combine(op, op.identity(), Scalar::i64(x)).as_i64() == x);
  }
  const double floats[] = {0.0, -0.5, 1.25, 1e300, -1e-300, INFINITY, -INFINITY};
  for (auto kind : {CombineKind::Add, CombineKind::Mul, CombineKind::Min, CombineKind::Max}) {
    CombineOp op(kind, DType::F64);
    for (double x : floats) {
      if (kind == CombineKind::Add && x == 0.0) continue;  // -0 + 0 is +0
      CHECK(combine(op, op.identity(), Scalar::f64(x)).identical(Scalar::f64(x)));
    }
  }
}

TEST_CASE("Int combiners are associative and commutative") {
  std::mt19937_64 rng(5);
  for (auto kind : kAllKinds) {
    CombineOp op(kind, DType::I64);
    for (int i = 0; i < 500; ++i) {
      Scalar a = Scalar::i64(static_cast<std::int64_t>(rng()));
      Scalar b = Scalar::i64(static_cast<std::int64_t>(rng()));
      Scalar c = Scalar::i64(static_cast<std::int64_t>(rng() % 200) - 100);
      CHECK(combine(op, a, b) == combine(op, b, a));
      CHECK(combine(op, combine(op, a, b), c) == combine(op, a, combine(op, b, c)));
    }
  }
}

TEST_CASE("names parse back") {
  for (auto kind : kAllKinds) CHECK(parse_combine_kind(to_string(kind)) == kind);
  for (auto t : {DType::I64, DType::F32, DType::F64}) CHECK(parse_dtype(to_string(t)) == t);
  CHECK_FALSE(parse_combine_kind("sum").has_value());
}
