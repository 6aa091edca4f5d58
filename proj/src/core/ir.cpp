#include "simred/ir.hpp"

#include <sstream>

namespace simred::ir {

std::string_view to_string(Builtin b) {
  switch (b) {
    case Builtin::GlobalId: return "global_id";
    case Builtin::LocalId: return "local_id";
    case Builtin::GroupId: return "group_id";
    case Builtin::GlobalSize: return "global_size";
    case Builtin::LocalSize: return "local_size";
  }
  return "?";
}

std::string_view to_string(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Not: return "!";
    case UnaryOp::BitNot: return "~";
    case UnaryOp::ToI64: return "i64";
    case UnaryOp::ToF32: return "f32";
    case UnaryOp::ToF64: return "f64";
    case UnaryOp::Bits: return "bits";
    case UnaryOp::FromBitsF32: return "f32_from_bits";
    case UnaryOp::FromBitsF64: return "f64_from_bits";
  }
  return "?";
}

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Min: return "min";
    case BinaryOp::Max: return "max";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
    case BinaryOp::Shr: return ">>";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Mod: return "%";
    case BinaryOp::BitAnd: return "&";
    case BinaryOp::BitOr: return "|";
    case BinaryOp::BitXor: return "^";
  }
  return "?";
}

namespace {
Expr make(ExprNode node) { return Expr(std::make_shared<const ExprNode>(std::move(node))); }
}  // namespace

Expr lit(const Scalar& value) { return make({ConstExpr{value}}); }
Expr lit(std::int64_t value) { return lit(Scalar::i64(value)); }
Expr builtin(Builtin kind) { return make({BuiltinExpr{kind}}); }
Expr var(std::string name) { return make({VarExpr{std::move(name)}}); }
Expr load_global(std::string buffer, Expr index) {
  return make({LoadGlobalExpr{std::move(buffer), std::move(index)}});
}
Expr load_local(std::string array, Expr index) {
  return make({LoadLocalExpr{std::move(array), std::move(index)}});
}
Expr shfl_down(std::string v, std::uint32_t delta) { return make({ShflDownExpr{std::move(v), delta}}); }
Expr unary(UnaryOp op, Expr operand) { return make({UnaryExpr{op, std::move(operand)}}); }
Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
  return make({BinaryExpr{op, std::move(lhs), std::move(rhs)}});
}

Instr let(std::string name, Expr value) { return {LetInstr{std::move(name), std::move(value)}}; }
Instr assign(std::string name, Expr value) {
  return {AssignInstr{std::move(name), std::move(value)}};
}
Instr store_global(std::string buffer, Expr index, Expr value) {
  return {StoreGlobalInstr{std::move(buffer), std::move(index), std::move(value)}};
}
Instr store_local(std::string array, Expr index, Expr value) {
  return {StoreLocalInstr{std::move(array), std::move(index), std::move(value)}};
}
Instr barrier() { return {BarrierInstr{}}; }
Instr if_(Expr cond, Block then_body, Block else_body) {
  return {IfInstr{std::move(cond), std::move(then_body), std::move(else_body)}};
}
Instr while_(Expr cond, Block body) { return {WhileInstr{std::move(cond), std::move(body)}}; }
Instr region(std::string name, Block body) { return {RegionInstr{std::move(name), std::move(body)}}; }

// ---------------------------------------------------------------------------

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void print_expr(std::ostream& os, const Expr& e) {
  std::visit(overloaded{
                 [&](const ConstExpr& c) {
                   os << c.value.to_string();
                   if (c.value.type() != DType::I64) os << to_string(c.value.type());
                 },
                 [&](const BuiltinExpr& b) { os << to_string(b.kind) << "()"; },
                 [&](const VarExpr& v) { os << v.name; },
                 [&](const LoadGlobalExpr& l) {
                   os << l.buffer << "[";
                   print_expr(os, l.index);
                   os << "]";
                 },
                 [&](const LoadLocalExpr& l) {
                   os << l.array << "[";
                   print_expr(os, l.index);
                   os << "]";
                 },
                 [&](const ShflDownExpr& s) { os << "shfl_down(" << s.var << ", " << s.delta << ")"; },
                 [&](const UnaryExpr& u) {
                   os << to_string(u.op) << "(";
                   print_expr(os, u.operand);
                   os << ")";
                 },
                 [&](const BinaryExpr& b) {
                   if (b.op == BinaryOp::Min || b.op == BinaryOp::Max) {
                     os << to_string(b.op) << "(";
                     print_expr(os, b.lhs);
                     os << ", ";
                     print_expr(os, b.rhs);
                     os << ")";
                     return;
                   }
                   os << "(";
                   print_expr(os, b.lhs);
                   os << " " << to_string(b.op) << " ";
                   print_expr(os, b.rhs);
                   os << ")";
                 },
             },
             e.node().v);
}

void print_block(std::ostream& os, const Block& block, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  for (const auto& instr : block) {
    std::visit(overloaded{
                   [&](const LetInstr& i) {
                     os << pad << "let " << i.name << " = ";
                     print_expr(os, i.value);
                     os << "\n";
                   },
                   [&](const AssignInstr& i) {
                     os << pad << i.name << " = ";
                     print_expr(os, i.value);
                     os << "\n";
                   },
                   [&](const StoreGlobalInstr& i) {
                     os << pad << i.buffer << "[";
                     print_expr(os, i.index);
                     os << "] = ";
                     print_expr(os, i.value);
                     os << "\n";
                   },
                   [&](const StoreLocalInstr& i) {
                     os << pad << i.array << "[";
                     print_expr(os, i.index);
                     os << "] = ";
                     print_expr(os, i.value);
                     os << "\n";
                   },
                   [&](const BarrierInstr&) { os << pad << "barrier\n"; },
                   [&](const IfInstr& i) {
                     os << pad << "if ";
                     print_expr(os, i.cond);
                     os << " {\n";
                     print_block(os, i.then_body, depth + 1);
                     if (!i.else_body.empty()) {
                       os << pad << "} else {\n";
                       print_block(os, i.else_body, depth + 1);
                     }
                     os << pad << "}\n";
                   },
                   [&](const WhileInstr& i) {
                     os << pad << "while ";
                     print_expr(os, i.cond);
                     os << " {\n";
                     print_block(os, i.body, depth + 1);
                     os << pad << "}\n";
                   },
                   [&](const RegionInstr& i) {
                     os << pad << "region " << i.name << " {\n";
                     print_block(os, i.body, depth + 1);
                     os << pad << "}\n";
                   },
               },
               instr.v);
  }
}

}  // namespace

std::string to_text(const Expr& expr) {
  std::ostringstream os;
  print_expr(os, expr);
  return os.str();
}

std::string to_text(const Program& p) {
  std::ostringstream os;
  os << "kernel " << p.name << "(";
  bool first = true;
  for (const auto& b : p.buffers) {
    os << (first ? "" : ", ") << (b.writable ? "" : "const ") << to_string(b.type) << "* " << b.name;
    first = false;
  }
  for (const auto& s : p.scalars) {
    os << (first ? "" : ", ") << to_string(s.type) << " " << s.name;
    first = false;
  }
  os << ")\n";
  for (const auto& l : p.locals) {
    os << "  local " << to_string(l.type) << " " << l.name << "[" << l.length << "]\n";
  }
  print_block(os, p.body, 1);
  return os.str();
}

}  // namespace simred::ir
