#include <algorithm>

#include "kernel_common.hpp"
#include "simred/error.hpp"
#include "simred/kernels.hpp"

namespace simred {

using namespace ir;

namespace {

Instr combine_into(const CombineOp& op, Expr dst, Expr src) {
  return store_local("scratch", dst, combine_expr(op, load_local("scratch", dst), load_local("scratch", src)));
}

// Offsets below `half` run inside one wavefront and need neither guards nor
// barriers between steps.
Instr wavefront_tail(const CombineOp& op, std::int64_t half) {
  Block steps;
  for (std::int64_t off = half; off > 0; off /= 2)
    steps.push_back(combine_into(op, var("tid"), var("tid") + lit(off)));
  return if_(var("tid") < lit(half), std::move(steps));
}

Block tree(KernelVariant v, const CombineOp& op, std::int64_t ls, std::int64_t half) {
  Expr tid = var("tid");
  Expr s = var("s");
  switch (v) {
    case KernelVariant::HarrisK1:
      return {
          let("s", lit(1)),
          while_(s < local_size(), {
                                       if_(eq(tid % (lit(2) * s), lit(0)), {combine_into(op, tid, tid + s)}),
                                       barrier(),
                                       assign("s", s * lit(2)),
                                   }),
      };
    case KernelVariant::HarrisK2:
      return {
          let("s", lit(1)),
          while_(s < local_size(), {
                                       let("index", lit(2) * s * tid),
                                       if_(var("index") < local_size(),
                                           {combine_into(op, var("index"), var("index") + s)}),
                                       barrier(),
                                       assign("s", s * lit(2)),
                                   }),
      };
    case KernelVariant::HarrisK3:
    case KernelVariant::HarrisK4: return detail::barrier_tree(op, "tid");
    case KernelVariant::HarrisK5:
      return {
          let("s", local_size() / lit(2)),
          while_(s > lit(half), {
                                    if_(tid < s, {combine_into(op, tid, tid + s)}),
                                    barrier(),
                                    assign("s", s >> lit(1)),
                                }),
          wavefront_tail(op, half),
      };
    default: {
      Block b;
      for (std::int64_t step = ls / 2; step > half; step /= 2) {
        b.push_back(if_(tid < lit(step), {combine_into(op, tid, tid + lit(step))}));
        b.push_back(barrier());
      }
      b.push_back(wavefront_tail(op, half));
      return b;
    }
  }
}

Block load(KernelVariant v, const CombineOp& op, std::int64_t unroll) {
  Expr i = var("i");
  Expr len = var("length");
  Expr vv = var("v");
  auto accumulate = [&](Expr index) { return assign("v", combine_expr(op, vv, load_global("input", index))); };
  switch (v) {
    case KernelVariant::HarrisK1:
    case KernelVariant::HarrisK2:
    case KernelVariant::HarrisK3:
      return {
          let("i", global_id()),
          if_(i < len, {assign("v", load_global("input", i))}),
      };
    case KernelVariant::HarrisK7: {
      Block body{accumulate(i)};
      for (std::int64_t k = 1; k < unroll; ++k) {
        Expr ik = i + lit(k) * local_size();
        body.push_back(if_(ik < len, {accumulate(ik)}));
      }
      body.push_back(assign("i", i + var("grid_size")));
      return {
          let("i", group_id() * (local_size() * lit(unroll)) + var("tid")),
          let("grid_size", global_size() * lit(unroll)),
          while_(i < len, std::move(body)),
      };
    }
    default:
      return {
          let("i", group_id() * (local_size() * lit(2)) + var("tid")),
          if_(i < len, {assign("v", load_global("input", i))}),
          if_(i + local_size() < len, {accumulate(i + local_size())}),
      };
  }
}

}  // namespace

TwoStagePlan build_harris(KernelVariant variant, const CombineOp& op, std::uint32_t local_size,
                          std::uint64_t global_size, std::uint32_t unroll, std::uint32_t wavefront_width) {
  const auto k = static_cast<int>(variant) - static_cast<int>(KernelVariant::HarrisK1);
  if (k < 0 || k > 6) fail(ErrorCode::InvalidArgument, "not a Harris variant: " + std::string(to_string(variant)));
  if (variant == KernelVariant::HarrisK7 && unroll == 0)
    fail(ErrorCode::GeometryError, "unroll factor must be at least 1");
  detail::check_geometry(local_size, global_size);
  if (wavefront_width == 0)
    fail(ErrorCode::GeometryError, "wavefront width must be positive");

  const auto ls = static_cast<std::int64_t>(local_size);
  const std::int64_t half = std::min<std::int64_t>(wavefront_width, ls / 2);

  Program p = detail::reduction_program(std::string(to_string(variant)), op, local_size);
  p.body = {let("tid", local_id()), let("v", lit(op.identity()))};
  p.body.push_back(region("load", load(variant, op, unroll)));
  p.body.push_back(store_local("scratch", var("tid"), var("v")));
  p.body.push_back(barrier());
  p.body.push_back(region("tree", tree(variant, op, ls, half)));
  p.body.push_back(if_(eq(var("tid"), lit(0)), {store_global("result", group_id(), load_local("scratch", lit(0)))}));

  TwoStagePlan plan;
  plan.stage1 = p;
  plan.stage2 = std::move(p);
  plan.num_workgroups = global_size / local_size;
  plan.intermediate_length = plan.num_workgroups;
  plan.stage2_local_size = local_size;
  if (variant == KernelVariant::HarrisK7) {
    detail::check_single_group_stage2(plan.num_workgroups, local_size);
  } else {
    plan.multi_pass = true;
  }
  return plan;
}

}  // namespace simred
