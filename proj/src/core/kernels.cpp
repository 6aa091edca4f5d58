#include "simred/kernels.hpp"

#include <algorithm>
#include <array>
#include <bit>

#include "kernel_common.hpp"
#include "simred/error.hpp"

namespace simred {

using namespace ir;

namespace {

constexpr std::array<std::pair<KernelVariant, std::string_view>, 11> kNames{{
    {KernelVariant::HarrisK1, "harris-k1"},
    {KernelVariant::HarrisK2, "harris-k2"},
    {KernelVariant::HarrisK3, "harris-k3"},
    {KernelVariant::HarrisK4, "harris-k4"},
    {KernelVariant::HarrisK5, "harris-k5"},
    {KernelVariant::HarrisK6, "harris-k6"},
    {KernelVariant::HarrisK7, "harris-k7"},
    {KernelVariant::Shuffle, "shuffle"},
    {KernelVariant::Catanzaro, "catanzaro"},
    {KernelVariant::NewStage1, "new"},
    {KernelVariant::NewStage1WithBranchlessTree, "new-branchless"},
}};

}  // namespace

std::string_view to_string(KernelVariant v) {
  for (const auto& [k, name] : kNames)
    if (k == v) return name;
  return "?";
}

std::optional<KernelVariant> parse_kernel_variant(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  return std::nullopt;
}

const std::vector<KernelVariant>& all_kernel_variants() {
  static const std::vector<KernelVariant> all = [] {
    std::vector<KernelVariant> v;
    for (const auto& [k, name] : kNames) v.push_back(k);
    return v;
  }();
  return all;
}

Expr combine_expr(const CombineOp& op, Expr a, Expr b) {
  switch (op.kind()) {
    case CombineKind::Add: return std::move(a) + std::move(b);
    case CombineKind::Mul: return std::move(a) * std::move(b);
    case CombineKind::Min: return min(std::move(a), std::move(b));
    case CombineKind::Max: return max(std::move(a), std::move(b));
    case CombineKind::BitAnd: return std::move(a) & std::move(b);
    case CombineKind::BitOr: return std::move(a) | std::move(b);
    case CombineKind::BitXor: return std::move(a) ^ std::move(b);
  }
  fail(ErrorCode::InvalidArgument, "unknown combine kind");
}

Expr select_expr(DType type, Expr flag, Expr a, Expr b) {
  Expr keep = lit(1) - flag;
  if (type == DType::I64) return flag * std::move(a) + keep * std::move(b);
  Expr bits = flag * unary(UnaryOp::Bits, std::move(a)) + keep * unary(UnaryOp::Bits, std::move(b));
  return unary(type == DType::F32 ? UnaryOp::FromBitsF32 : UnaryOp::FromBitsF64, std::move(bits));
}

Expr masked_load(const CombineOp& op, const std::string& buffer, Expr index, Expr length) {
  Expr flag = index < std::move(length);
  Expr value = load_global(buffer, std::move(index) * flag);
  if (op.kind() == CombineKind::Add && op.dtype() == DType::I64) return flag * std::move(value);
  return select_expr(op.dtype(), flag, std::move(value), lit(op.identity()));
}

Scalar algebraic_select(const Scalar& a, const Scalar& b) {
  if (a.type() != b.type()) {
    fail(ErrorCode::TypeMismatch, "algebraic_select on " + std::string(to_string(a.type())) + " and " +
                                      std::string(to_string(b.type())));
  }
  auto pick = [](std::uint64_t lt, std::uint64_t x, std::uint64_t y) { return lt * x + (1 - lt) * y; };
  switch (a.type()) {
    case DType::I64: {
      std::int64_t x = a.as_i64(), y = b.as_i64();
      return Scalar::i64(wrapping::add(wrapping::mul(x < y, x), wrapping::mul(x >= y, y)));
    }
    case DType::F32: {
      float x = a.as_f32(), y = b.as_f32();
      auto r = pick(x < y, std::bit_cast<std::uint32_t>(x), std::bit_cast<std::uint32_t>(y));
      return Scalar::f32(std::bit_cast<float>(static_cast<std::uint32_t>(r)));
    }
    case DType::F64: {
      double x = a.as_f64(), y = b.as_f64();
      return Scalar::f64(std::bit_cast<double>(
          pick(x < y, std::bit_cast<std::uint64_t>(x), std::bit_cast<std::uint64_t>(y))));
    }
  }
  return a;
}

namespace detail {

void check_geometry(std::uint32_t local_size, std::uint64_t global_size) {
  if (local_size == 0 || !std::has_single_bit(local_size))
    fail(ErrorCode::GeometryError, "local size must be a power of two, got " + std::to_string(local_size));
  if (global_size == 0 || global_size % local_size != 0) {
    fail(ErrorCode::GeometryError, "global size " + std::to_string(global_size) +
                                       " is not a positive multiple of local size " +
                                       std::to_string(local_size));
  }
}

void check_single_group_stage2(std::uint64_t partials, std::uint32_t local_size) {
  if (partials > local_size) {
    fail(ErrorCode::GeometryError, std::to_string(partials) +
                                       " partial results do not fit a single stage-2 work-group of " +
                                       std::to_string(local_size));
  }
}

Program reduction_program(std::string name, const CombineOp& op, std::uint32_t local_words) {
  Program p;
  p.name = std::move(name);
  p.buffers = {{"input", op.dtype(), false}, {"result", op.dtype(), true}};
  p.scalars = {{"length", DType::I64}};
  if (local_words) p.locals = {{"scratch", op.dtype(), local_words}};
  return p;
}

// for (offset = local_size/2; offset > 0; offset /= 2) { if (li < offset) ...; barrier }
Block barrier_tree(const CombineOp& op, const std::string& li) {
  Block loop_body{
      if_(var(li) < var("offset"),
          {
              let("other", load_local("scratch", var(li) + var("offset"))),
              let("mine", load_local("scratch", var(li))),
              store_local("scratch", var(li), combine_expr(op, var("mine"), var("other"))),
          }),
      barrier(),
      assign("offset", var("offset") / lit(2)),
  };
  return {
      let("offset", local_size() / lit(2)),
      while_(var("offset") > lit(0), std::move(loop_body)),
  };
}

}  // namespace detail

namespace {

using detail::barrier_tree;
using detail::check_geometry;
using detail::check_single_group_stage2;
using detail::reduction_program;

// scratch[li] = scratch[li] ⊗ (flag ? scratch[li + flag·ipos] : identity)
Block branchless_tree(const CombineOp& op, const std::string& li) {
  Expr flag = var("flag");
  Expr partner = load_local("scratch", var(li) + flag * var("ipos"));
  Expr contribution = op.kind() == CombineKind::Add && op.dtype() == DType::I64
                          ? flag * partner
                          : select_expr(op.dtype(), flag, partner, lit(op.identity()));
  return {
      let("ipos", local_size() >> lit(1)),
      while_(var("ipos") > lit(0),
             {
                 let("flag", var(li) < var("ipos")),
                 store_local("scratch", var(li),
                             combine_expr(op, load_local("scratch", var(li)), contribution)),
                 assign("ipos", var("ipos") >> lit(1)),
             }),
  };
}

Program catanzaro_program(const CombineOp& op, std::uint32_t local_size) {
  Program p = reduction_program("catanzaro", op, local_size);
  p.body = {
      let("global_index", global_id()),
      let("accumulator", lit(op.identity())),
      region("load",
             {while_(var("global_index") < var("length"),
                     {
                         let("element", load_global("input", var("global_index"))),
                         assign("accumulator", combine_expr(op, var("accumulator"), var("element"))),
                         assign("global_index", var("global_index") + global_size()),
                     })}),
      let("local_index", local_id()),
      store_local("scratch", var("local_index"), var("accumulator")),
      barrier(),
      region("tree", barrier_tree(op, "local_index")),
      if_(eq(var("local_index"), lit(0)),
          {store_global("result", group_id(), load_local("scratch", lit(0)))}),
  };
  return p;
}

Program new_program(const CombineOp& op, std::uint32_t local_size, std::uint32_t unroll, bool branchless) {
  const auto f = static_cast<std::int64_t>(unroll);
  Block body;
  std::optional<Expr> terms;
  for (std::int64_t k = 0; k < f; ++k) {
    std::string name = "i" + std::to_string(k);
    body.push_back(let(name, var("pos") + lit(k)));
    Expr term = masked_load(op, "input", var(name), var("length"));
    terms = terms ? combine_expr(op, *terms, term) : term;
  }
  body.push_back(assign("accumulator", combine_expr(op, var("accumulator"), *terms)));
  body.push_back(assign("pos", var("pos") + global_size() * lit(f)));

  Program p = reduction_program(branchless ? "new-branchless" : "new", op, local_size);
  p.body = {
      let("accumulator", lit(op.identity())),
      region("load",
             {
                 let("pos", global_id() * lit(f)),
                 while_(var("pos") < var("length"), std::move(body)),
             }),
      let("li", local_id()),
      store_local("scratch", var("li"), var("accumulator")),
      barrier(),
      region("tree", branchless ? branchless_tree(op, "li") : barrier_tree(op, "li")),
      if_(eq(var("li"), lit(0)), {store_global("result", group_id(), load_local("scratch", lit(0)))}),
  };
  return p;
}

Program shuffle_program(const CombineOp& op, std::uint32_t wavefront_width) {
  Block tree;
  for (std::uint32_t d = wavefront_width / 2; d > 0; d /= 2)
    tree.push_back(assign("v", combine_expr(op, var("v"), shfl_down("v", d))));
  const auto w = static_cast<std::int64_t>(wavefront_width);

  Program p = reduction_program("shuffle", op, 0);
  p.body = {
      let("gi", global_id()),
      let("v", lit(op.identity())),
      region("load", {while_(var("gi") < var("length"),
                             {
                                 assign("v", combine_expr(op, var("v"), load_global("input", var("gi")))),
                                 assign("gi", var("gi") + global_size()),
                             })}),
      region("shuffle", std::move(tree)),
      if_(eq(local_id() % lit(w), lit(0)), {store_global("result", global_id() / lit(w), var("v"))}),
  };
  return p;
}

}  // namespace

TwoStagePlan build_catanzaro(const CombineOp& op, std::uint32_t local_size, std::uint64_t global_size) {
  check_geometry(local_size, global_size);
  TwoStagePlan plan;
  plan.num_workgroups = global_size / local_size;
  check_single_group_stage2(plan.num_workgroups, local_size);
  plan.stage1 = catanzaro_program(op, local_size);
  plan.stage2 = plan.stage1;
  plan.intermediate_length = plan.num_workgroups;
  plan.stage2_local_size = local_size;
  return plan;
}

TwoStagePlan build_new_stage1(const CombineOp& op, std::uint32_t local_size, std::uint64_t global_size,
                              std::uint32_t unroll, bool branchless_tree) {
  if (unroll == 0) fail(ErrorCode::GeometryError, "unroll factor must be at least 1");
  check_geometry(local_size, global_size);
  TwoStagePlan plan;
  plan.num_workgroups = global_size / local_size;
  check_single_group_stage2(plan.num_workgroups, local_size);
  plan.stage1 = new_program(op, local_size, unroll, branchless_tree);
  plan.stage2 = plan.stage1;
  plan.intermediate_length = plan.num_workgroups;
  plan.stage2_local_size = local_size;
  return plan;
}

TwoStagePlan build_shuffle(const CombineOp& op, std::uint32_t local_size, std::uint64_t global_size,
                           std::uint32_t wavefront_width) {
  check_geometry(local_size, global_size);
  if (wavefront_width == 0 || !std::has_single_bit(wavefront_width) || wavefront_width > local_size) {
    fail(ErrorCode::GeometryError, "wavefront width " + std::to_string(wavefront_width) +
                                       " does not divide local size " + std::to_string(local_size));
  }
  TwoStagePlan plan;
  plan.num_workgroups = global_size / local_size;
  plan.stage1 = shuffle_program(op, wavefront_width);
  plan.stage2 = plan.stage1;
  plan.intermediate_length = global_size / wavefront_width;
  plan.stage2_local_size = wavefront_width;
  return plan;
}

TwoStagePlan build_plan(const KernelSpec& spec, const LaunchConfig& cfg) {
  const std::uint32_t ls = spec.local_size ? spec.local_size : cfg.local_size;
  const std::uint64_t gs = spec.global_size ? spec.global_size : cfg.global_size;
  switch (spec.variant) {
    case KernelVariant::Catanzaro: return build_catanzaro(spec.op, ls, gs);
    case KernelVariant::NewStage1: return build_new_stage1(spec.op, ls, gs, spec.unroll, false);
    case KernelVariant::NewStage1WithBranchlessTree:
      return build_new_stage1(spec.op, ls, gs, spec.unroll, true);
    case KernelVariant::Shuffle: return build_shuffle(spec.op, ls, gs, cfg.wavefront_width);
    default: return build_harris(spec.variant, spec.op, ls, gs, spec.unroll, cfg.wavefront_width);
  }
}

namespace {

struct Pass {
  Scalar first;
  std::uint64_t out_length;
  Buffer out;
  Metrics metrics;
};

Pass run_pass(const Program& program, LaunchConfig cfg, std::uint32_t local_size, std::uint64_t global_size,
              const Buffer& input, std::uint64_t out_length) {
  cfg.local_size = local_size;
  cfg.global_size = global_size;
  std::map<std::string, Buffer> buffers;
  buffers.emplace("input", input);
  buffers.emplace("result", Buffer(input.dtype(), out_length));
  auto r = launch(program, cfg, std::move(buffers),
                  {{"length", Scalar::i64(static_cast<std::int64_t>(input.size()))}});
  Buffer out = std::move(r.buffers.at("result"));
  return Pass{out.at(0), out_length, std::move(out), std::move(r.metrics)};
}

// Work-items per element in the first pass of the per-element Harris kernels.
std::uint64_t elements_per_item(KernelVariant v) {
  switch (v) {
    case KernelVariant::HarrisK1:
    case KernelVariant::HarrisK2:
    case KernelVariant::HarrisK3: return 1;
    default: return 2;
  }
}

}  // namespace

ReduceOutcome reduce(const Buffer& data, const KernelSpec& spec, const LaunchConfig& cfg) {
  if (data.dtype() != spec.op.dtype()) {
    fail(ErrorCode::TypeMismatch, "data is " + std::string(to_string(data.dtype())) + ", operator expects " +
                                      std::string(to_string(spec.op.dtype())));
  }
  ReduceOutcome out;
  out.value = spec.op.identity();
  if (data.empty()) return out;

  KernelSpec s = spec;
  if (!s.local_size) s.local_size = cfg.local_size;
  if (!s.global_size) s.global_size = cfg.global_size;
  TwoStagePlan plan = build_plan(s, cfg);

  if (!plan.multi_pass) {
    Pass p1 = run_pass(plan.stage1, cfg, s.local_size, s.global_size, data, plan.intermediate_length);
    Pass p2 = run_pass(plan.stage2, cfg, plan.stage2_local_size, plan.stage2_local_size, p1.out, 1);
    out.value = p2.first;
    out.stage1 = std::move(p1.metrics);
    out.stage2 = std::move(p2.metrics);
    out.launches = 2;
  } else {
    const std::uint64_t per_group = s.local_size * elements_per_item(s.variant);
    Buffer current = data;
    bool first = true;
    do {
      const std::uint64_t groups = (current.size() + per_group - 1) / per_group;
      Pass p = run_pass(first ? plan.stage1 : plan.stage2, cfg, s.local_size, groups * s.local_size, current,
                        groups);
      (first ? out.stage1 : out.stage2) += p.metrics;
      current = std::move(p.out);
      first = false;
      ++out.launches;
    } while (current.size() > 1);
    out.value = current.at(0);
  }
  out.metrics = out.stage1;
  out.metrics += out.stage2;
  return out;
}

}  // namespace simred
