#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simred/ir.hpp"
#include "simred/scalar.hpp"

namespace simred {

enum class Scheduler : std::uint8_t {
  // The whole work-group advances one instruction at a time as a single
  // SIMD unit: every lane reads before any lane writes.
  LockstepWorkgroup,
  // Each wavefront keeps its own program counter; one instruction per
  // wavefront per turn, in wavefront order.
  WavefrontRoundRobin,
  // Each wavefront runs until it blocks at a barrier or finishes.
  WavefrontSerial,
};

std::string_view to_string(Scheduler s);

struct LaunchConfig {
  std::uint64_t global_size = 2048;
  std::uint32_t local_size = 256;
  std::uint32_t wavefront_width = 64;
  std::uint32_t num_banks = 32;
  std::uint32_t segment_bytes = 128;
  std::uint32_t elem_bytes = 4;
  std::uint64_t local_mem_words = 4096;
  Scheduler scheduler = Scheduler::LockstepWorkgroup;
  bool hazard_detection = false;

  std::uint64_t num_workgroups() const { return local_size ? global_size / local_size : 0; }
  std::uint32_t wavefronts_per_group() const {
    return wavefront_width ? local_size / wavefront_width : 0;
  }
};

// Throws InvalidConfig unless the geometry invariants hold (power-of-two local
// size and wavefront width, W <= local size, GS a positive multiple of the
// local size, non-zero banks/segment/element sizes).
void check_launch_config(const LaunchConfig& cfg);

struct Counters {
  std::uint64_t wavefront_issues = 0;
  std::uint64_t divergent_branches = 0;
  std::uint64_t barriers = 0;
  std::uint64_t global_transactions = 0;
  std::uint64_t local_accesses = 0;
  std::uint64_t bank_conflict_extra = 0;
  std::uint64_t shfl_ops = 0;

  Counters& operator+=(const Counters& o);
  friend bool operator==(const Counters&, const Counters&) = default;
};

// One local-memory word written by wavefront `writer` and read or written by
// a different wavefront `other` within the same barrier epoch.
struct Hazard {
  std::uint64_t group = 0;
  std::uint64_t epoch = 0;
  std::string array;
  std::uint64_t address = 0;
  std::uint32_t writer = 0;
  std::uint32_t other = 0;
  bool other_writes = false;

  friend bool operator==(const Hazard&, const Hazard&) = default;
  friend auto operator<=>(const Hazard&, const Hazard&) = default;
};

struct Metrics : Counters {
  // Counters booked inside each named region (see ir::region).
  std::map<std::string, Counters> regions;
  std::vector<Hazard> hazards;

  Counters region(const std::string& name) const;
  Metrics& operator+=(const Metrics& o);
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Static checks: declared names, let-before-use, operand types, Int indices,
// writes to read-only buffers or scalar parameters.
ValidationReport validate_program(const ir::Program& program);
// validate_program plus checks that need the launch geometry (local memory capacity).
ValidationReport validate_launch(const ir::Program& program, const LaunchConfig& cfg);

struct LaunchResult {
  std::map<std::string, Buffer> buffers;
  Metrics metrics;
};

// Runs every work-group of `program` in group order. Buffers are bound by
// parameter name and returned after mutation.
LaunchResult launch(const ir::Program& program, const LaunchConfig& cfg,
                    std::map<std::string, Buffer> buffers,
                    const std::map<std::string, Scalar>& scalars);

// Number of distinct aligned `segment_bytes` segments touched by the given
// element indices.
std::uint64_t coalesce_transactions(std::span<const std::uint64_t> element_indices,
                                    std::uint32_t elem_bytes, std::uint32_t segment_bytes);

// Largest number of distinct word addresses that map onto a single bank.
// Identical addresses broadcast and count once.
std::uint32_t bank_conflict_degree(std::span<const std::uint64_t> word_addresses,
                                   std::uint32_t num_banks);

struct AccessRecord {
  std::uint64_t group;
  std::uint64_t epoch;  // barriers completed by the group before the access
  std::uint32_t array;
  std::uint64_t address;
  std::uint32_t wavefront;
  bool write;
};

// Cross-wavefront conflicts within each (group, epoch). Derived from access
// sets only, so the result does not depend on the order of `log`.
std::vector<Hazard> detect_hazards(std::span<const AccessRecord> log,
                                   std::span<const std::string> array_names);

}  // namespace simred
