#pragma once

#include <cstdint>

#include "simred/scalar.hpp"

namespace simred {

// Left-to-right fold from op's identity.
Scalar reduce_sequential(const Buffer& data, const CombineOp& op);

// Adjacent pairs combined level by level; an odd last element is carried to
// the next level unchanged.
Scalar reduce_pairwise_tree(const Buffer& data, const CombineOp& op);

// Compensated sum (Neumaier's variant of Kahan summation), accumulated in the
// buffer's own precision.
Scalar kahan_sum(const Buffer& data);

struct ErrorBound {
  std::uint64_t n = 0;
  double max_abs = 0;
  double bound = 0;
};

// Unit roundoff of the declared width: 2^-24 for F32, 2^-53 for F64.
double unit_roundoff(DType type);

// Worst-case fold bound (n-1)·u·(n·max_abs).
ErrorBound float_error_bound(std::uint64_t n, double max_abs, DType width);

// Exact rational sum of a float buffer, converted to double (toward zero).
double exact_sum(const Buffer& data);

// |value - exact sum of data|, computed exactly, converted to double (toward zero).
double exact_abs_error(const Buffer& data, double value);

}  // namespace simred
