#include <algorithm>
#include <map>
#include <optional>

#include "compiled.hpp"

namespace simred::detail {

Raw to_raw(const Scalar& s) {
  Raw r{};
  switch (s.type()) {
    case DType::I64: r.i = s.as_i64(); break;
    case DType::F32: r.f = s.as_f32(); break;
    case DType::F64: r.d = s.as_f64(); break;
  }
  return r;
}

namespace {

using namespace simred::ir;

std::string type_name(DType t) { return std::string(to_string(t)); }

bool is_int_only(BinaryOp op) {
  switch (op) {
    case BinaryOp::And:
    case BinaryOp::Or:
    case BinaryOp::Shr:
    case BinaryOp::Shl:
    case BinaryOp::Mod:
    case BinaryOp::BitAnd:
    case BinaryOp::BitOr:
    case BinaryOp::BitXor: return true;
    default: return false;
  }
}

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
    case BinaryOp::Eq:
    case BinaryOp::Ne: return true;
    default: return false;
  }
}

class Compiler {
public:
  Compiler(const Program& p, ValidationReport& report) : program_(p), report_(report) {
    out_.buffers = p.buffers;
    out_.locals = p.locals;
  }

  CompiledProgram run() {
    check_declarations();
    scopes_.emplace_back();
    for (const auto& s : program_.scalars) {
      std::int32_t slot = new_slot(s.type);
      out_.param_slots.push_back(slot);
      scopes_.back()[s.name] = Binding{slot, true};
    }
    lower_block(program_.body);
    scopes_.pop_back();
    return std::move(out_);
  }

private:
  struct Binding {
    std::int32_t slot;
    bool read_only;
  };

  void violation(std::string msg) { report_.violations.push_back(std::move(msg)); }

  void check_declarations() {
    std::map<std::string, int> seen;
    auto note = [&](const std::string& name, const char* what) {
      if (name.empty()) violation(std::string("empty ") + what + " name");
      if (++seen[name] == 2) violation("duplicate declaration '" + name + "'");
    };
    for (const auto& b : program_.buffers) note(b.name, "buffer");
    for (const auto& s : program_.scalars) note(s.name, "scalar parameter");
    for (const auto& l : program_.locals) {
      note(l.name, "local array");
      if (l.length == 0) violation("local array '" + l.name + "' has zero length");
    }
  }

  std::int32_t new_slot(DType t) {
    out_.slot_types.push_back(t);
    return static_cast<std::int32_t>(out_.slot_types.size() - 1);
  }

  std::optional<Binding> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return std::nullopt;
  }

  std::int32_t find_buffer(const std::string& name) const {
    for (std::size_t i = 0; i < program_.buffers.size(); ++i)
      if (program_.buffers[i].name == name) return static_cast<std::int32_t>(i);
    return -1;
  }

  std::int32_t find_local(const std::string& name) const {
    for (std::size_t i = 0; i < program_.locals.size(); ++i)
      if (program_.locals[i].name == name) return static_cast<std::int32_t>(i);
    return -1;
  }

  std::int32_t push(Node n) {
    out_.nodes.push_back(n);
    return static_cast<std::int32_t>(out_.nodes.size() - 1);
  }

  void require_index(std::int32_t idx, const std::string& what) {
    if (out_.nodes[idx].type != DType::I64) {
      violation("index into '" + what + "' must be i64, got " + type_name(out_.nodes[idx].type));
    }
  }

  std::int32_t lower_expr(const Expr& e) {
    return std::visit(
        [&](const auto& x) -> std::int32_t {
          using T = std::decay_t<decltype(x)>;
          Node n{};
          if constexpr (std::is_same_v<T, ConstExpr>) {
            n.kind = NodeKind::Const;
            n.type = x.value.type();
            n.imm = to_raw(x.value);
          } else if constexpr (std::is_same_v<T, BuiltinExpr>) {
            n.kind = NodeKind::Builtin;
            n.type = DType::I64;
            n.op = static_cast<std::uint8_t>(x.kind);
          } else if constexpr (std::is_same_v<T, VarExpr>) {
            n.kind = NodeKind::Var;
            auto b = lookup(x.name);
            if (!b) {
              violation("undeclared variable '" + x.name + "'");
              n.type = DType::I64;
              n.ref = new_slot(DType::I64);
            } else {
              n.ref = b->slot;
              n.type = out_.slot_types[static_cast<std::size_t>(b->slot)];
            }
          } else if constexpr (std::is_same_v<T, LoadGlobalExpr>) {
            std::int32_t idx = lower_expr(x.index);
            require_index(idx, x.buffer);
            n.kind = NodeKind::LoadGlobal;
            n.a = idx;
            n.ref = find_buffer(x.buffer);
            if (n.ref < 0) {
              violation("undeclared buffer '" + x.buffer + "'");
              n.type = DType::I64;
            } else {
              n.type = program_.buffers[static_cast<std::size_t>(n.ref)].type;
            }
          } else if constexpr (std::is_same_v<T, LoadLocalExpr>) {
            std::int32_t idx = lower_expr(x.index);
            require_index(idx, x.array);
            n.kind = NodeKind::LoadLocal;
            n.a = idx;
            n.ref = find_local(x.array);
            if (n.ref < 0) {
              violation("undeclared local array '" + x.array + "'");
              n.type = DType::I64;
            } else {
              n.type = program_.locals[static_cast<std::size_t>(n.ref)].type;
            }
          } else if constexpr (std::is_same_v<T, ShflDownExpr>) {
            n.kind = NodeKind::Shfl;
            n.delta = x.delta;
            auto b = lookup(x.var);
            if (!b) {
              violation("shfl_down of undeclared variable '" + x.var + "'");
              n.type = DType::I64;
              n.ref = new_slot(DType::I64);
            } else {
              n.ref = b->slot;
              n.type = out_.slot_types[static_cast<std::size_t>(b->slot)];
            }
          } else if constexpr (std::is_same_v<T, UnaryExpr>) {
            std::int32_t a = lower_expr(x.operand);
            n.kind = NodeKind::Unary;
            n.op = static_cast<std::uint8_t>(x.op);
            n.a = a;
            n.operand_type = out_.nodes[a].type;
            n.type = unary_type(x.op, n.operand_type);
          } else if constexpr (std::is_same_v<T, BinaryExpr>) {
            std::int32_t a = lower_expr(x.lhs);
            std::int32_t b = lower_expr(x.rhs);
            n.kind = NodeKind::Binary;
            n.op = static_cast<std::uint8_t>(x.op);
            n.a = a;
            n.b = b;
            DType ta = out_.nodes[a].type, tb = out_.nodes[b].type;
            n.operand_type = ta;
            if (ta != tb) {
              violation("type mismatch in '" + std::string(to_string(x.op)) + "': " + type_name(ta) +
                        " vs " + type_name(tb));
            }
            if (is_int_only(x.op) && (ta != DType::I64 || tb != DType::I64)) {
              violation("operator '" + std::string(to_string(x.op)) + "' requires i64 operands");
            }
            n.type = is_comparison(x.op) ? DType::I64 : ta;
          }
          return push(n);
        },
        e.node().v);
  }

  DType unary_type(UnaryOp op, DType t) {
    switch (op) {
      case UnaryOp::Neg: return t;
      case UnaryOp::Not:
      case UnaryOp::BitNot:
        if (t != DType::I64) violation("operator '" + std::string(to_string(op)) + "' requires i64");
        return DType::I64;
      case UnaryOp::ToI64: return DType::I64;
      case UnaryOp::ToF32: return DType::F32;
      case UnaryOp::ToF64: return DType::F64;
      case UnaryOp::Bits:
        if (t == DType::I64) violation("bits() requires a float operand");
        return DType::I64;
      case UnaryOp::FromBitsF32:
        if (t != DType::I64) violation("f32_from_bits() requires i64");
        return DType::F32;
      case UnaryOp::FromBitsF64:
        if (t != DType::I64) violation("f64_from_bits() requires i64");
        return DType::F64;
    }
    return t;
  }

  // Starts a new op; expressions lowered until finish_op belong to it.
  FlatOp begin_op(OpKind kind) {
    FlatOp op{};
    op.kind = kind;
    op.node_begin = static_cast<std::int32_t>(out_.nodes.size());
    op.region = regions_.empty() ? -1 : regions_.back();
    return op;
  }

  std::int32_t finish_op(FlatOp op) {
    op.node_end = static_cast<std::int32_t>(out_.nodes.size());
    out_.max_nodes_per_op = std::max(out_.max_nodes_per_op, op.node_end - op.node_begin);
    out_.code.push_back(op);
    return static_cast<std::int32_t>(out_.code.size() - 1);
  }

  std::int32_t pc() const { return static_cast<std::int32_t>(out_.code.size()); }

  void lower_block(const Block& block) {
    scopes_.emplace_back();
    for (const auto& instr : block) lower_instr(instr);
    scopes_.pop_back();
  }

  void lower_instr(const Instr& instr) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, LetInstr>) {
            FlatOp op = begin_op(OpKind::Set);
            op.value_root = lower_expr(x.value);
            if (scopes_.back().count(x.name)) {
              violation("duplicate let '" + x.name + "' in one scope");
            }
            op.target = new_slot(out_.nodes[op.value_root].type);
            scopes_.back()[x.name] = Binding{op.target, false};
            finish_op(op);
          } else if constexpr (std::is_same_v<T, AssignInstr>) {
            FlatOp op = begin_op(OpKind::Set);
            op.value_root = lower_expr(x.value);
            auto b = lookup(x.name);
            if (!b) {
              violation("assignment to undeclared variable '" + x.name + "'");
              op.target = new_slot(out_.nodes[op.value_root].type);
            } else {
              if (b->read_only) violation("assignment to scalar parameter '" + x.name + "'");
              op.target = b->slot;
              DType want = out_.slot_types[static_cast<std::size_t>(b->slot)];
              DType got = out_.nodes[op.value_root].type;
              if (want != got) {
                violation("type mismatch assigning " + type_name(got) + " to '" + x.name + "' (" +
                          type_name(want) + ")");
              }
            }
            finish_op(op);
          } else if constexpr (std::is_same_v<T, StoreGlobalInstr>) {
            FlatOp op = begin_op(OpKind::StoreGlobal);
            op.index_root = lower_expr(x.index);
            op.value_root = lower_expr(x.value);
            require_index(op.index_root, x.buffer);
            op.target = find_buffer(x.buffer);
            if (op.target < 0) {
              violation("undeclared buffer '" + x.buffer + "'");
              op.target = 0;
            } else {
              const auto& bp = program_.buffers[static_cast<std::size_t>(op.target)];
              if (!bp.writable) violation("store to read-only buffer '" + x.buffer + "'");
              if (bp.type != out_.nodes[op.value_root].type) {
                violation("type mismatch storing " + type_name(out_.nodes[op.value_root].type) +
                          " into buffer '" + x.buffer + "' (" + type_name(bp.type) + ")");
              }
            }
            finish_op(op);
          } else if constexpr (std::is_same_v<T, StoreLocalInstr>) {
            FlatOp op = begin_op(OpKind::StoreLocal);
            op.index_root = lower_expr(x.index);
            op.value_root = lower_expr(x.value);
            require_index(op.index_root, x.array);
            op.target = find_local(x.array);
            if (op.target < 0) {
              violation("undeclared local array '" + x.array + "'");
              op.target = 0;
            } else {
              const auto& la = program_.locals[static_cast<std::size_t>(op.target)];
              if (la.type != out_.nodes[op.value_root].type) {
                violation("type mismatch storing " + type_name(out_.nodes[op.value_root].type) +
                          " into local array '" + x.array + "' (" + type_name(la.type) + ")");
              }
            }
            finish_op(op);
          } else if constexpr (std::is_same_v<T, BarrierInstr>) {
            finish_op(begin_op(OpKind::Barrier));
          } else if constexpr (std::is_same_v<T, IfInstr>) {
            FlatOp op = begin_op(OpKind::Branch);
            op.value_root = lower_expr(x.cond);
            check_condition(op.value_root, "if");
            std::int32_t branch_pc = finish_op(op);
            lower_block(x.then_body);
            std::int32_t jump_pc = -1;
            if (!x.else_body.empty()) jump_pc = finish_op(begin_op(OpKind::Jump));
            std::int32_t else_pc = pc();
            lower_block(x.else_body);
            std::int32_t join = pc();
            out_.code[static_cast<std::size_t>(branch_pc)].else_pc = else_pc;
            out_.code[static_cast<std::size_t>(branch_pc)].join_pc = join;
            if (jump_pc >= 0) out_.code[static_cast<std::size_t>(jump_pc)].join_pc = join;
          } else if constexpr (std::is_same_v<T, WhileInstr>) {
            FlatOp op = begin_op(OpKind::LoopGuard);
            op.value_root = lower_expr(x.cond);
            check_condition(op.value_root, "while");
            std::int32_t head = finish_op(op);
            lower_block(x.body);
            FlatOp back = begin_op(OpKind::Jump);
            back.join_pc = head;
            finish_op(back);
            out_.code[static_cast<std::size_t>(head)].join_pc = pc();
          } else if constexpr (std::is_same_v<T, RegionInstr>) {
            auto it = std::find(out_.region_names.begin(), out_.region_names.end(), x.name);
            std::int32_t id = static_cast<std::int32_t>(it - out_.region_names.begin());
            if (it == out_.region_names.end()) out_.region_names.push_back(x.name);
            regions_.push_back(id);
            lower_block(x.body);
            regions_.pop_back();
          }
        },
        instr.v);
  }

  void check_condition(std::int32_t node, const char* what) {
    if (out_.nodes[node].type != DType::I64) {
      violation(std::string(what) + " condition must be i64, got " + type_name(out_.nodes[node].type));
    }
  }

  const Program& program_;
  ValidationReport& report_;
  CompiledProgram out_;
  std::vector<std::map<std::string, Binding>> scopes_;
  std::vector<std::int32_t> regions_;
};

}  // namespace

CompiledProgram compile(const ir::Program& program, ValidationReport& report) {
  return Compiler(program, report).run();
}

}  // namespace simred::detail
