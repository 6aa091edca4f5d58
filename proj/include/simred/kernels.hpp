#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "simred/ir.hpp"
#include "simred/machine.hpp"
#include "simred/scalar.hpp"

namespace simred {

enum class KernelVariant : std::uint8_t {
  HarrisK1,  // interleaved addressing, divergent modulo guard
  HarrisK2,  // interleaved addressing, strided index (bank conflicts)
  HarrisK3,  // sequential addressing
  HarrisK4,  // first combine during the global load
  HarrisK5,  // last wavefront unrolled without barriers
  HarrisK6,  // tree completely unrolled
  HarrisK7,  // multiple elements per work-item, persistent groups
  Shuffle,
  Catanzaro,
  NewStage1,                    // unrolled masked load, barrier tree
  NewStage1WithBranchlessTree,  // unrolled masked load, flag-multiplied tree
};

std::string_view to_string(KernelVariant v);
std::optional<KernelVariant> parse_kernel_variant(std::string_view name);
const std::vector<KernelVariant>& all_kernel_variants();

struct KernelSpec {
  KernelVariant variant = KernelVariant::Catanzaro;
  CombineOp op{CombineKind::Add, DType::I64};
  std::uint32_t unroll = 1;
  // 0 means "take it from the launch config".
  std::uint32_t local_size = 0;
  std::uint64_t global_size = 0;
};

// Programs read `input[0, length)` and write one partial per work-group to
// `result`; `scratch` is the local array. All take a single Int scalar `length`.
struct TwoStagePlan {
  ir::Program stage1;
  ir::Program stage2;
  std::uint64_t num_workgroups = 0;  // of stage 1
  std::uint64_t intermediate_length = 0;
  std::uint32_t stage2_local_size = 0;
  // Stage 1 is sized from the input length (one or two elements per
  // work-item) and stage 2 is re-launched until a single value remains.
  bool multi_pass = false;
};

// Building blocks shared by the builders.
ir::Expr combine_expr(const CombineOp& op, ir::Expr a, ir::Expr b);
// flag ? a : b without control flow; flag is Int 0/1. Float values go through
// their bit patterns so that infinities survive.
ir::Expr select_expr(DType type, ir::Expr flag, ir::Expr a, ir::Expr b);
// Masked element load: index·flag is always in bounds when length > 0, and a
// zero flag contributes op's identity.
ir::Expr masked_load(const CombineOp& op, const std::string& buffer, ir::Expr index, ir::Expr length);

// (a < b)·a + (a >= b)·b evaluated on scalars.
Scalar algebraic_select(const Scalar& a, const Scalar& b);

TwoStagePlan build_catanzaro(const CombineOp& op, std::uint32_t local_size, std::uint64_t global_size);
TwoStagePlan build_harris(KernelVariant variant, const CombineOp& op, std::uint32_t local_size,
                          std::uint64_t global_size, std::uint32_t unroll, std::uint32_t wavefront_width);
TwoStagePlan build_shuffle(const CombineOp& op, std::uint32_t local_size, std::uint64_t global_size,
                           std::uint32_t wavefront_width);
TwoStagePlan build_new_stage1(const CombineOp& op, std::uint32_t local_size, std::uint64_t global_size,
                              std::uint32_t unroll, bool branchless_tree);

TwoStagePlan build_plan(const KernelSpec& spec, const LaunchConfig& cfg);

struct ReduceOutcome {
  Scalar value;
  Metrics metrics;  // stage1 + stage2
  Metrics stage1;
  Metrics stage2;
  std::uint32_t launches = 0;
};

ReduceOutcome reduce(const Buffer& data, const KernelSpec& spec, const LaunchConfig& cfg);

}  // namespace simred
