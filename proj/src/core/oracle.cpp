#include "simred/oracle.hpp"

#include <cmath>
#include <gmpxx.h>

#include "simred/error.hpp"

namespace simred {

namespace {

void require_type(const Buffer& data, DType type) {
  if (data.dtype() != type) {
    fail(ErrorCode::TypeMismatch, "buffer is " + std::string(to_string(data.dtype())) + ", operator expects " +
                                      std::string(to_string(type)));
  }
}

void require_float(const Buffer& data) {
  if (!is_float(data.dtype())) fail(ErrorCode::TypeMismatch, "float buffer required, got i64");
}

template <typename T>
T neumaier(std::span<const T> xs) {
  T sum = 0;
  T c = 0;
  for (T x : xs) {
    T t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) c += (sum - t) + x;
    else c += (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

mpq_class exact(const Buffer& data) {
  mpq_class total = 0;
  auto add = [&](double v) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "exact sum of a non-finite value");
    total += mpq_class(v);
  };
  if (data.dtype() == DType::F32) {
    for (float x : data.f32()) add(x);
  } else {
    for (double x : data.f64()) add(x);
  }
  return total;
}

}  // namespace

Scalar reduce_sequential(const Buffer& data, const CombineOp& op) {
  require_type(data, op.dtype());
  Scalar acc = op.identity();
  for (std::size_t i = 0; i < data.size(); ++i) acc = combine(op, acc, data.at(i));
  return acc;
}

Scalar reduce_pairwise_tree(const Buffer& data, const CombineOp& op) {
  require_type(data, op.dtype());
  if (data.empty()) return op.identity();
  std::vector<Scalar> level;
  level.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) level.push_back(data.at(i));
  while (level.size() > 1) {
    std::vector<Scalar> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(combine(op, level[i], level[i + 1]));
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level.front();
}

Scalar kahan_sum(const Buffer& data) {
  require_float(data);
  if (data.dtype() == DType::F32) return Scalar::f32(neumaier(data.f32()));
  return Scalar::f64(neumaier(data.f64()));
}

double unit_roundoff(DType type) {
  switch (type) {
    case DType::F32: return std::ldexp(1.0, -24);
    case DType::F64: return std::ldexp(1.0, -53);
    case DType::I64: return 0.0;
  }
  return 0.0;
}

ErrorBound float_error_bound(std::uint64_t n, double max_abs, DType width) {
  ErrorBound b{n, max_abs, 0.0};
  if (n > 1) {
    const auto nd = static_cast<double>(n);
    b.bound = (nd - 1) * unit_roundoff(width) * (nd * std::fabs(max_abs));
  }
  return b;
}

double exact_sum(const Buffer& data) {
  require_float(data);
  return exact(data).get_d();
}

double exact_abs_error(const Buffer& data, double value) {
  require_float(data);
  if (!std::isfinite(value)) return INFINITY;
  mpq_class diff = mpq_class(value) - exact(data);
  return std::fabs(diff.get_d());
}

}  // namespace simred
