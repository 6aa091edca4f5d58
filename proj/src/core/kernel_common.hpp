#pragma once

#include <cstdint>
#include <string>

#include "simred/ir.hpp"
#include "simred/scalar.hpp"

namespace simred::detail {

void check_geometry(std::uint32_t local_size, std::uint64_t global_size);
void check_single_group_stage2(std::uint64_t partials, std::uint32_t local_size);

// Program with buffers input/result, scalar `length` and, if local_words > 0,
// a `scratch` local array.
ir::Program reduction_program(std::string name, const CombineOp& op, std::uint32_t local_words);

ir::Block barrier_tree(const CombineOp& op, const std::string& li);

}  // namespace simred::detail
