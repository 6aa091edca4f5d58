#pragma once

// Structured kernel IR: expressions, statements and whole programs.
//
// Expressions are immutable trees shared by value. Comparisons produce Int 0
// or 1 so that predicates can be used as multiplicative flags, e.g.
// `(a < b) * a + (a >= b) * b`.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "simred/scalar.hpp"

namespace simred::ir {

enum class Builtin : std::uint8_t { GlobalId, LocalId, GroupId, GlobalSize, LocalSize };

enum class UnaryOp : std::uint8_t {
  Neg,
  Not,     // logical: 1 if operand == 0
  BitNot,
  ToI64,   // numeric conversions
  ToF32,
  ToF64,
  Bits,         // float -> Int bit pattern (f32 zero-extended)
  FromBitsF32,  // Int bit pattern -> float
  FromBitsF64,
};

enum class BinaryOp : std::uint8_t {
  Add, Sub, Mul, Div, Min, Max,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,  // logical, Int only
  Shr, Shl, Mod,
  BitAnd, BitOr, BitXor,
};

std::string_view to_string(Builtin b);
std::string_view to_string(UnaryOp op);
std::string_view to_string(BinaryOp op);

struct ExprNode;

class Expr {
public:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  const ExprNode& node() const { return *node_; }

private:
  std::shared_ptr<const ExprNode> node_;
};

struct ConstExpr { Scalar value; };
struct BuiltinExpr { Builtin kind; };
struct VarExpr { std::string name; };
struct LoadGlobalExpr { std::string buffer; Expr index; };
struct LoadLocalExpr { std::string array; Expr index; };
// Lane i reads lane i+delta's copy of `var`; lanes past the wavefront edge keep their own.
struct ShflDownExpr { std::string var; std::uint32_t delta; };
struct UnaryExpr { UnaryOp op; Expr operand; };
struct BinaryExpr { BinaryOp op; Expr lhs; Expr rhs; };

struct ExprNode {
  std::variant<ConstExpr, BuiltinExpr, VarExpr, LoadGlobalExpr, LoadLocalExpr, ShflDownExpr,
               UnaryExpr, BinaryExpr>
      v;
};

Expr lit(const Scalar& value);
Expr lit(std::int64_t value);
Expr builtin(Builtin kind);
Expr var(std::string name);
Expr load_global(std::string buffer, Expr index);
Expr load_local(std::string array, Expr index);
Expr shfl_down(std::string var, std::uint32_t delta);
Expr unary(UnaryOp op, Expr operand);
Expr binary(BinaryOp op, Expr lhs, Expr rhs);

inline Expr global_id() { return builtin(Builtin::GlobalId); }
inline Expr local_id() { return builtin(Builtin::LocalId); }
inline Expr group_id() { return builtin(Builtin::GroupId); }
inline Expr global_size() { return builtin(Builtin::GlobalSize); }
inline Expr local_size() { return builtin(Builtin::LocalSize); }

inline Expr operator+(Expr a, Expr b) { return binary(BinaryOp::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return binary(BinaryOp::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return binary(BinaryOp::Mul, std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return binary(BinaryOp::Div, std::move(a), std::move(b)); }
inline Expr operator%(Expr a, Expr b) { return binary(BinaryOp::Mod, std::move(a), std::move(b)); }
inline Expr operator<(Expr a, Expr b) { return binary(BinaryOp::Lt, std::move(a), std::move(b)); }
inline Expr operator<=(Expr a, Expr b) { return binary(BinaryOp::Le, std::move(a), std::move(b)); }
inline Expr operator>(Expr a, Expr b) { return binary(BinaryOp::Gt, std::move(a), std::move(b)); }
inline Expr operator>=(Expr a, Expr b) { return binary(BinaryOp::Ge, std::move(a), std::move(b)); }
inline Expr operator>>(Expr a, Expr b) { return binary(BinaryOp::Shr, std::move(a), std::move(b)); }
inline Expr operator<<(Expr a, Expr b) { return binary(BinaryOp::Shl, std::move(a), std::move(b)); }
inline Expr operator&(Expr a, Expr b) { return binary(BinaryOp::BitAnd, std::move(a), std::move(b)); }
inline Expr operator|(Expr a, Expr b) { return binary(BinaryOp::BitOr, std::move(a), std::move(b)); }
inline Expr operator^(Expr a, Expr b) { return binary(BinaryOp::BitXor, std::move(a), std::move(b)); }
inline Expr eq(Expr a, Expr b) { return binary(BinaryOp::Eq, std::move(a), std::move(b)); }
inline Expr ne(Expr a, Expr b) { return binary(BinaryOp::Ne, std::move(a), std::move(b)); }
inline Expr min(Expr a, Expr b) { return binary(BinaryOp::Min, std::move(a), std::move(b)); }
inline Expr max(Expr a, Expr b) { return binary(BinaryOp::Max, std::move(a), std::move(b)); }

// ---------------------------------------------------------------------------

struct Instr;
using Block = std::vector<Instr>;

struct LetInstr { std::string name; Expr value; };
struct AssignInstr { std::string name; Expr value; };
struct StoreGlobalInstr { std::string buffer; Expr index; Expr value; };
struct StoreLocalInstr { std::string array; Expr index; Expr value; };
struct BarrierInstr {};
struct IfInstr { Expr cond; Block then_body; Block else_body; };
struct WhileInstr { Expr cond; Block body; };
// Transparent at execution; metrics issued inside are also booked under `name`.
struct RegionInstr { std::string name; Block body; };

struct Instr {
  std::variant<LetInstr, AssignInstr, StoreGlobalInstr, StoreLocalInstr, BarrierInstr, IfInstr,
               WhileInstr, RegionInstr>
      v;
};

Instr let(std::string name, Expr value);
Instr assign(std::string name, Expr value);
Instr store_global(std::string buffer, Expr index, Expr value);
Instr store_local(std::string array, Expr index, Expr value);
Instr barrier();
Instr if_(Expr cond, Block then_body, Block else_body = {});
Instr while_(Expr cond, Block body);
Instr region(std::string name, Block body);

// ---------------------------------------------------------------------------

struct BufferParam {
  std::string name;
  DType type;
  bool writable = false;
};

struct ScalarParam {
  std::string name;
  DType type;
};

struct LocalArray {
  std::string name;
  DType type;
  std::uint64_t length;  // words per work-group
};

struct Program {
  std::string name;
  std::vector<BufferParam> buffers;
  std::vector<ScalarParam> scalars;
  std::vector<LocalArray> locals;
  Block body;
};

// Human-readable listing of a program, one statement per line.
std::string to_text(const Program& program);
std::string to_text(const Expr& expr);

}  // namespace simred::ir
