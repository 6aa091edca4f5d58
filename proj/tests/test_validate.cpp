#include <doctest.h>

#include <algorithm>

#include "simred/kernels.hpp"
#include "simred/machine.hpp"

using namespace simred;
using namespace simred::ir;

namespace {

bool mentions(const ValidationReport& r, const std::string& needle) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

Program skeleton() {
  Program p;
  p.name = "t";
  p.buffers = {{"input", DType::I64, false}, {"result", DType::I64, true}};
  p.scalars = {{"length", DType::I64}};
  p.locals = {{"scratch", DType::I64, 8}};
  return p;
}

}  // namespace

TEST_CASE("stock kernels validate") {
  LaunchConfig cfg;
  for (auto v : all_kernel_variants()) {
    KernelSpec spec;
    spec.variant = v;
    spec.unroll = v == KernelVariant::HarrisK7 || v == KernelVariant::NewStage1 ? 4 : 1;
    auto plan = build_plan(spec, cfg);
    CAPTURE(to_string(v));
    CHECK(validate_launch(plan.stage1, cfg).ok());
    CHECK(validate_program(plan.stage2).ok());
  }
}

TEST_CASE("undeclared buffer is reported") {
  Program p = skeleton();
  p.body = {store_global("result", lit(0), load_global("xs", lit(0)))};
  auto r = validate_program(p);
  CHECK_FALSE(r.ok());
  CHECK(mentions(r, "xs"));
}

TEST_CASE("use before let is reported") {
  Program p = skeleton();
  p.body = {store_global("result", lit(0), var("nope"))};
  CHECK(mentions(validate_program(p), "nope"));
}

TEST_CASE("operand type mismatch is reported") {
  Program p = skeleton();
  p.body = {let("x", lit(Scalar::f64(1.0)) + lit(1))};
  CHECK_FALSE(validate_program(p).ok());
}

TEST_CASE("float index is reported") {
  Program p = skeleton();
  p.body = {store_global("result", lit(Scalar::f64(0.0)), lit(1))};
  CHECK_FALSE(validate_program(p).ok());
}

TEST_CASE("writes to read-only buffers and scalars are reported") {
  Program p = skeleton();
  p.body = {store_global("input", lit(0), lit(1))};
  CHECK_FALSE(validate_program(p).ok());
  Program q = skeleton();
  q.body = {assign("length", lit(1))};
  CHECK_FALSE(validate_program(q).ok());
}

TEST_CASE("local arrays beyond capacity fail launch validation") {
  Program p = skeleton();
  p.locals[0].length = 1'000'000'000;
  LaunchConfig cfg;
  CHECK(validate_program(p).ok());
  CHECK(mentions(validate_launch(p, cfg), "local"));
}
