#pragma once

// Lowered form of an ir::Program: names resolved to slots, every expression
// node typed, structured control flow flattened to branch/loop-guard/jump
// operations with explicit reconvergence points.

#include <cstdint>
#include <string>
#include <vector>

#include "simred/ir.hpp"
#include "simred/machine.hpp"

namespace simred::detail {

union Raw {
  std::int64_t i;
  float f;
  double d;
};

Raw to_raw(const Scalar& s);

enum class NodeKind : std::uint8_t { Const, Builtin, Var, LoadGlobal, LoadLocal, Shfl, Unary, Binary };

struct Node {
  NodeKind kind;
  DType type;          // result type
  DType operand_type;  // Unary/Binary operand type
  std::uint8_t op = 0; // ir::Builtin / ir::UnaryOp / ir::BinaryOp
  std::int32_t a = -1; // child node indices (absolute)
  std::int32_t b = -1;
  std::int32_t ref = -1;  // slot, buffer or local-array index
  std::uint32_t delta = 0;
  Raw imm{};
};

enum class OpKind : std::uint8_t { Set, StoreGlobal, StoreLocal, Barrier, Branch, LoopGuard, Jump };

struct FlatOp {
  OpKind kind;
  std::int32_t node_begin = 0;  // nodes [node_begin, node_end) in post-order
  std::int32_t node_end = 0;
  std::int32_t index_root = -1;
  std::int32_t value_root = -1;  // also the condition of Branch/LoopGuard
  std::int32_t target = -1;      // Set: slot; stores: buffer / local array
  std::int32_t else_pc = -1;     // Branch
  std::int32_t join_pc = -1;     // Branch: reconvergence point; LoopGuard: exit; Jump: destination
  std::int32_t region = -1;
};

struct CompiledProgram {
  std::vector<Node> nodes;
  std::vector<FlatOp> code;
  std::vector<DType> slot_types;
  // Scalar parameter i lives in slot param_slots[i].
  std::vector<std::int32_t> param_slots;
  std::vector<std::string> region_names;
  std::vector<ir::BufferParam> buffers;
  std::vector<ir::LocalArray> locals;
  std::int32_t max_nodes_per_op = 0;
};

// Fills `report` with violations; the returned program is only usable when
// report.ok().
CompiledProgram compile(const ir::Program& program, ValidationReport& report);

}  // namespace simred::detail
