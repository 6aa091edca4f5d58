#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace simred {

enum class DType : std::uint8_t { I64, F32, F64 };

std::string_view to_string(DType type);
std::optional<DType> parse_dtype(std::string_view name);

constexpr bool is_float(DType type) { return type != DType::I64; }

// Int wraps modulo 2^64; F32/F64 round to nearest in their own width.
class Scalar {
public:
  Scalar() : value_(std::int64_t{0}) {}

  static Scalar i64(std::int64_t v) { return Scalar(v); }
  static Scalar f32(float v) { return Scalar(v); }
  static Scalar f64(double v) { return Scalar(v); }
  static Scalar zero(DType type);
  // Converts `v` into `type`; Int truncates toward zero, saturates out of
  // range and maps NaN to 0.
  static Scalar from_double(DType type, double v);

  DType type() const { return static_cast<DType>(value_.index()); }

  std::int64_t as_i64() const;
  float as_f32() const;
  double as_f64() const;
  // Widening view used for reporting; exact for F32/F64, may round for Int.
  double to_double() const;

  // Bitwise equality: distinguishes -0.0 from 0.0 and matches NaN payloads.
  bool identical(const Scalar& other) const;
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value_ == b.value_; }

  std::string to_string() const;

private:
  explicit Scalar(std::int64_t v) : value_(v) {}
  explicit Scalar(float v) : value_(v) {}
  explicit Scalar(double v) : value_(v) {}

  std::variant<std::int64_t, float, double> value_;
};

namespace wrapping {
inline std::int64_t add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline std::int64_t sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
inline std::int64_t mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}
inline std::int64_t neg(std::int64_t a) {
  return static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(a));
}
}  // namespace wrapping

class Buffer {
public:
  Buffer() : Buffer(DType::I64, 0) {}
  Buffer(DType type, std::size_t length);

  static Buffer of_i64(std::vector<std::int64_t> values);
  static Buffer of_f32(std::vector<float> values);
  static Buffer of_f64(std::vector<double> values);

  DType dtype() const { return static_cast<DType>(data_.index()); }
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  Scalar at(std::size_t index) const;
  void set(std::size_t index, const Scalar& value);

  std::span<const std::int64_t> i64() const;
  std::span<const float> f32() const;
  std::span<const double> f64() const;
  std::span<std::int64_t> i64();
  std::span<float> f32();
  std::span<double> f64();

  // Largest |x_i| as a double (0 for an empty buffer).
  double max_abs() const;

  // Bitwise comparison of type, length and contents.
  bool identical(const Buffer& other) const;

private:
  std::variant<std::vector<std::int64_t>, std::vector<float>, std::vector<double>> data_;
};

enum class CombineKind : std::uint8_t { Add, Mul, Min, Max, BitAnd, BitOr, BitXor };

std::string_view to_string(CombineKind kind);
std::optional<CombineKind> parse_combine_kind(std::string_view name);

// The associative, commutative operator together with its identity element.
class CombineOp {
public:
  // Throws TypeMismatch for bitwise kinds on float types.
  CombineOp(CombineKind kind, DType type);

  CombineKind kind() const { return kind_; }
  DType dtype() const { return type_; }
  Scalar identity() const;

private:
  CombineKind kind_;
  DType type_;
};

// a ⊗ b; throws TypeMismatch unless both operands have the op's type.
Scalar combine(const CombineOp& op, const Scalar& a, const Scalar& b);

}  // namespace simred
