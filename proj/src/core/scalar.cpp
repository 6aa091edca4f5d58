#include "simred/scalar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

#include "simred/error.hpp"

namespace simred {

std::string_view to_string(DType type) {
  switch (type) {
    case DType::I64: return "i64";
    case DType::F32: return "f32";
    case DType::F64: return "f64";
  }
  return "?";
}

std::optional<DType> parse_dtype(std::string_view name) {
  if (name == "i64") return DType::I64;
  if (name == "f32") return DType::F32;
  if (name == "f64") return DType::F64;
  return std::nullopt;
}

Scalar Scalar::zero(DType type) { return from_double(type, 0.0); }

Scalar Scalar::from_double(DType type, double v) {
  switch (type) {
    case DType::I64:
      if (std::isnan(v)) return Scalar(std::int64_t{0});
      if (v >= 0x1p63) return Scalar(std::numeric_limits<std::int64_t>::max());
      if (v < -0x1p63) return Scalar(std::numeric_limits<std::int64_t>::min());
      return Scalar(static_cast<std::int64_t>(v));
    case DType::F32: return Scalar(static_cast<float>(v));
    case DType::F64: return Scalar(v);
  }
  return Scalar();
}

std::int64_t Scalar::as_i64() const {
  if (auto* v = std::get_if<std::int64_t>(&value_)) return *v;
  fail(ErrorCode::TypeMismatch, "expected i64 scalar, got " + std::string(simred::to_string(type())));
}

float Scalar::as_f32() const {
  if (auto* v = std::get_if<float>(&value_)) return *v;
  fail(ErrorCode::TypeMismatch, "expected f32 scalar, got " + std::string(simred::to_string(type())));
}

double Scalar::as_f64() const {
  if (auto* v = std::get_if<double>(&value_)) return *v;
  fail(ErrorCode::TypeMismatch, "expected f64 scalar, got " + std::string(simred::to_string(type())));
}

double Scalar::to_double() const {
  return std::visit([](auto v) { return static_cast<double>(v); }, value_);
}

bool Scalar::identical(const Scalar& other) const {
  if (value_.index() != other.value_.index()) return false;
  return std::visit(
      [&](auto v) {
        using T = decltype(v);
        T w = std::get<T>(other.value_);
        return std::memcmp(&v, &w, sizeof(T)) == 0;
      },
      value_);
}

std::string Scalar::to_string() const {
  char buf[64];
  auto res = std::visit([&](auto v) { return std::to_chars(buf, buf + sizeof(buf), v); }, value_);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------

Buffer::Buffer(DType type, std::size_t length) {
  switch (type) {
    case DType::I64: data_ = std::vector<std::int64_t>(length); break;
    case DType::F32: data_ = std::vector<float>(length); break;
    case DType::F64: data_ = std::vector<double>(length); break;
  }
}

Buffer Buffer::of_i64(std::vector<std::int64_t> values) {
  Buffer b;
  b.data_ = std::move(values);
  return b;
}

Buffer Buffer::of_f32(std::vector<float> values) {
  Buffer b;
  b.data_ = std::move(values);
  return b;
}

Buffer Buffer::of_f64(std::vector<double> values) {
  Buffer b;
  b.data_ = std::move(values);
  return b;
}

std::size_t Buffer::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data_);
}

Scalar Buffer::at(std::size_t index) const {
  if (index >= size()) {
    fail(ErrorCode::OutOfBounds, "buffer index " + std::to_string(index) + " >= length " +
                                     std::to_string(size()));
  }
  switch (dtype()) {
    case DType::I64: return Scalar::i64(std::get<0>(data_)[index]);
    case DType::F32: return Scalar::f32(std::get<1>(data_)[index]);
    case DType::F64: return Scalar::f64(std::get<2>(data_)[index]);
  }
  return {};
}

void Buffer::set(std::size_t index, const Scalar& value) {
  if (index >= size()) {
    fail(ErrorCode::OutOfBounds, "buffer index " + std::to_string(index) + " >= length " +
                                     std::to_string(size()));
  }
  switch (dtype()) {
    case DType::I64: std::get<0>(data_)[index] = value.as_i64(); break;
    case DType::F32: std::get<1>(data_)[index] = value.as_f32(); break;
    case DType::F64: std::get<2>(data_)[index] = value.as_f64(); break;
  }
}

namespace {
template <typename T, typename V>
std::span<T> typed_span(V& data, DType have, DType want) {
  using Vec = std::vector<std::remove_const_t<T>>;
  if (auto* v = std::get_if<Vec>(&data)) return std::span<T>(*v);
  fail(ErrorCode::TypeMismatch, "buffer holds " + std::string(to_string(have)) + ", requested " +
                                    std::string(to_string(want)));
}
}  // namespace

std::span<const std::int64_t> Buffer::i64() const {
  return typed_span<const std::int64_t>(data_, dtype(), DType::I64);
}
std::span<const float> Buffer::f32() const {
  return typed_span<const float>(data_, dtype(), DType::F32);
}
std::span<const double> Buffer::f64() const {
  return typed_span<const double>(data_, dtype(), DType::F64);
}
std::span<std::int64_t> Buffer::i64() { return typed_span<std::int64_t>(data_, dtype(), DType::I64); }
std::span<float> Buffer::f32() { return typed_span<float>(data_, dtype(), DType::F32); }
std::span<double> Buffer::f64() { return typed_span<double>(data_, dtype(), DType::F64); }

double Buffer::max_abs() const {
  return std::visit(
      [](const auto& v) {
        double m = 0.0;
        for (auto x : v) m = std::max(m, std::fabs(static_cast<double>(x)));
        return m;
      },
      data_);
}

bool Buffer::identical(const Buffer& other) const {
  if (data_.index() != other.data_.index() || size() != other.size()) return false;
  return std::visit(
      [&](const auto& v) {
        using Vec = std::decay_t<decltype(v)>;
        const auto& w = std::get<Vec>(other.data_);
        return v.empty() || std::memcmp(v.data(), w.data(), v.size() * sizeof(v[0])) == 0;
      },
      data_);
}

// ---------------------------------------------------------------------------

std::string_view to_string(CombineKind kind) {
  switch (kind) {
    case CombineKind::Add: return "add";
    case CombineKind::Mul: return "mul";
    case CombineKind::Min: return "min";
    case CombineKind::Max: return "max";
    case CombineKind::BitAnd: return "and";
    case CombineKind::BitOr: return "or";
    case CombineKind::BitXor: return "xor";
  }
  return "?";
}

std::optional<CombineKind> parse_combine_kind(std::string_view name) {
  for (auto k : {CombineKind::Add, CombineKind::Mul, CombineKind::Min, CombineKind::Max,
                 CombineKind::BitAnd, CombineKind::BitOr, CombineKind::BitXor}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

namespace {
bool is_bitwise(CombineKind kind) {
  return kind == CombineKind::BitAnd || kind == CombineKind::BitOr || kind == CombineKind::BitXor;
}
}  // namespace

CombineOp::CombineOp(CombineKind kind, DType type) : kind_(kind), type_(type) {
  if (is_bitwise(kind) && is_float(type)) {
    fail(ErrorCode::TypeMismatch, std::string("bitwise combiner '") + std::string(to_string(kind)) +
                                      "' requires i64, got " + std::string(to_string(type)));
  }
}

Scalar CombineOp::identity() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case CombineKind::Add: return Scalar::zero(type_);
    case CombineKind::Mul: return Scalar::from_double(type_, 1.0);
    case CombineKind::Min:
      return type_ == DType::I64 ? Scalar::i64(std::numeric_limits<std::int64_t>::max())
                                 : Scalar::from_double(type_, inf);
    case CombineKind::Max:
      return type_ == DType::I64 ? Scalar::i64(std::numeric_limits<std::int64_t>::min())
                                 : Scalar::from_double(type_, -inf);
    case CombineKind::BitAnd: return Scalar::i64(-1);
    case CombineKind::BitOr:
    case CombineKind::BitXor: return Scalar::i64(0);
  }
  return {};
}

namespace {
template <typename T>
T apply_float(CombineKind kind, T a, T b) {
  switch (kind) {
    case CombineKind::Add: return a + b;
    case CombineKind::Mul: return a * b;
    case CombineKind::Min: return (a < b) ? a : b;
    case CombineKind::Max: return (a > b) ? a : b;
    default: break;
  }
  fail(ErrorCode::TypeMismatch, "bitwise combiner on float operands");
}
}  // namespace

Scalar combine(const CombineOp& op, const Scalar& a, const Scalar& b) {
  if (a.type() != op.dtype() || b.type() != op.dtype()) {
    fail(ErrorCode::TypeMismatch, "combine(" + std::string(to_string(op.kind())) + ", " +
                                      std::string(to_string(op.dtype())) + ") given " +
                                      std::string(to_string(a.type())) + " and " +
                                      std::string(to_string(b.type())));
  }
  switch (op.dtype()) {
    case DType::I64: {
      std::int64_t x = a.as_i64(), y = b.as_i64();
      switch (op.kind()) {
        case CombineKind::Add: return Scalar::i64(wrapping::add(x, y));
        case CombineKind::Mul: return Scalar::i64(wrapping::mul(x, y));
        case CombineKind::Min: return Scalar::i64(x < y ? x : y);
        case CombineKind::Max: return Scalar::i64(x > y ? x : y);
        case CombineKind::BitAnd: return Scalar::i64(x & y);
        case CombineKind::BitOr: return Scalar::i64(x | y);
        case CombineKind::BitXor: return Scalar::i64(x ^ y);
      }
      break;
    }
    case DType::F32: return Scalar::f32(apply_float(op.kind(), a.as_f32(), b.as_f32()));
    case DType::F64: return Scalar::f64(apply_float(op.kind(), a.as_f64(), b.as_f64()));
  }
  return {};
}

}  // namespace simred
