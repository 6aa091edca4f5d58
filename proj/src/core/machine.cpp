#include "simred/machine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "compiled.hpp"
#include "simred/error.hpp"

namespace simred {

std::string_view to_string(Scheduler s) {
  switch (s) {
    case Scheduler::LockstepWorkgroup: return "lockstep";
    case Scheduler::WavefrontRoundRobin: return "rr";
    case Scheduler::WavefrontSerial: return "serial";
  }
  return "?";
}

void check_launch_config(const LaunchConfig& cfg) {
  auto bad = [](const std::string& m) { fail(ErrorCode::InvalidConfig, m); };
  if (cfg.local_size == 0 || !std::has_single_bit(cfg.local_size))
    bad("local size must be a power of two, got " + std::to_string(cfg.local_size));
  if (cfg.wavefront_width == 0 || !std::has_single_bit(cfg.wavefront_width))
    bad("wavefront width must be a power of two, got " + std::to_string(cfg.wavefront_width));
  if (cfg.wavefront_width > cfg.local_size)
    bad("wavefront width " + std::to_string(cfg.wavefront_width) + " exceeds local size " +
        std::to_string(cfg.local_size));
  if (cfg.global_size == 0 || cfg.global_size % cfg.local_size != 0)
    bad("global size " + std::to_string(cfg.global_size) + " is not a positive multiple of local size " +
        std::to_string(cfg.local_size));
  if (cfg.num_banks == 0) bad("num_banks must be positive");
  if (cfg.segment_bytes == 0) bad("segment_bytes must be positive");
  if (cfg.elem_bytes == 0) bad("elem_bytes must be positive");
}

Counters& Counters::operator+=(const Counters& o) {
  wavefront_issues += o.wavefront_issues;
  divergent_branches += o.divergent_branches;
  barriers += o.barriers;
  global_transactions += o.global_transactions;
  local_accesses += o.local_accesses;
  bank_conflict_extra += o.bank_conflict_extra;
  shfl_ops += o.shfl_ops;
  return *this;
}

Counters Metrics::region(const std::string& name) const {
  auto it = regions.find(name);
  return it == regions.end() ? Counters{} : it->second;
}

Metrics& Metrics::operator+=(const Metrics& o) {
  Counters::operator+=(o);
  for (const auto& [name, c] : o.regions) regions[name] += c;
  hazards.insert(hazards.end(), o.hazards.begin(), o.hazards.end());
  return *this;
}

ValidationReport validate_program(const ir::Program& program) {
  ValidationReport report;
  detail::compile(program, report);
  return report;
}

ValidationReport validate_launch(const ir::Program& program, const LaunchConfig& cfg) {
  ValidationReport report = validate_program(program);
  std::uint64_t words = 0;
  for (const auto& l : program.locals) words += l.length;
  if (words > cfg.local_mem_words) {
    report.violations.push_back("local array overflow: " + std::to_string(words) +
                                " words requested, capacity " + std::to_string(cfg.local_mem_words));
  }
  return report;
}

namespace {

using detail::FlatOp;
using detail::Node;
using detail::NodeKind;
using detail::OpKind;
using detail::Raw;

class LaneMask {
public:
  LaneMask() = default;
  explicit LaneMask(std::uint32_t width, bool value = false)
      : width_(width), words_((width + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    trim();
  }

  bool test(std::uint32_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::uint32_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }

  bool any() const {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
  }
  std::uint32_t count() const {
    std::uint32_t c = 0;
    for (auto w : words_) c += static_cast<std::uint32_t>(std::popcount(w));
    return c;
  }
  bool full() const { return count() == width_; }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w) {
        int bit = std::countr_zero(w);
        f(static_cast<std::uint32_t>(k * 64 + static_cast<std::size_t>(bit)));
        w &= w - 1;
      }
    }
  }

  std::uint32_t width() const { return width_; }

private:
  void trim() {
    if (width_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (width_ % 64)) - 1;
  }

  std::uint32_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

struct StackEntry {
  std::int32_t pc;
  std::int32_t rpc;  // reconvergence pc; -1 for the bottom entry
  LaneMask mask;
  bool loop;
};

enum class WaveState : std::uint8_t { Running, AtBarrier, Done };

// A SIMD execution context: one wavefront, or the whole work-group under the
// lockstep scheduler.
struct Wave {
  std::uint32_t first_lane = 0;
  std::uint32_t width = 0;
  std::vector<Raw> regs;  // slot-major: regs[slot * width + lane]
  std::vector<StackEntry> stack;
  WaveState state = WaveState::Running;
  std::int32_t barrier_pc = -1;
};

struct BoundBuffer {
  std::string name;
  DType type;
  void* data;
  std::uint64_t size;
};

template <typename T>
T& field(Raw& r);
template <>
float& field<float>(Raw& r) { return r.f; }
template <>
double& field<double>(Raw& r) { return r.d; }

template <typename T>
T cfield(const Raw& r) {
  if constexpr (std::is_same_v<T, std::int64_t>) return r.i;
  else if constexpr (std::is_same_v<T, float>) return r.f;
  else return r.d;
}

Raw load_raw(const BoundBuffer& b, std::uint64_t i) {
  Raw r{};
  switch (b.type) {
    case DType::I64: r.i = static_cast<const std::int64_t*>(b.data)[i]; break;
    case DType::F32: r.f = static_cast<const float*>(b.data)[i]; break;
    case DType::F64: r.d = static_cast<const double*>(b.data)[i]; break;
  }
  return r;
}

void store_raw(BoundBuffer& b, std::uint64_t i, Raw v) {
  switch (b.type) {
    case DType::I64: static_cast<std::int64_t*>(b.data)[i] = v.i; break;
    case DType::F32: static_cast<float*>(b.data)[i] = v.f; break;
    case DType::F64: static_cast<double*>(b.data)[i] = v.d; break;
  }
}

std::int64_t float_to_i64(double v) {
  if (std::isnan(v)) return 0;
  if (v >= 9.2233720368547758e18) return std::numeric_limits<std::int64_t>::max();
  if (v <= -9.2233720368547758e18) return std::numeric_limits<std::int64_t>::min();
  return static_cast<std::int64_t>(v);
}

std::int64_t int_div(std::int64_t a, std::int64_t b) {
  if (b == 0) return 0;
  if (b == -1) return wrapping::neg(a);
  return a / b;
}

std::int64_t int_mod(std::int64_t a, std::int64_t b) {
  if (b == 0 || b == -1) return 0;
  return a % b;
}

class Executor {
public:
  Executor(const detail::CompiledProgram& prog, const LaunchConfig& cfg,
           std::vector<BoundBuffer> buffers, std::vector<Raw> params)
      : prog_(prog), cfg_(cfg), buffers_(std::move(buffers)), params_(std::move(params)),
        region_counters_(prog.region_names.size()) {
    const std::uint32_t width = lockstep() ? cfg.local_size : cfg.wavefront_width;
    temps_.resize(static_cast<std::size_t>(std::max(prog.max_nodes_per_op, 1)) * width);
    const std::uint32_t slices = width / cfg.wavefront_width;
    load_segments_.resize(slices);
    store_segments_.resize(slices);
    slice_active_.resize(slices);
    bank_load_.resize(cfg.num_banks);
  }

  void run_group(std::uint64_t group) {
    group_ = group;
    epoch_ = 0;
    local_mem_.clear();
    for (const auto& l : prog_.locals) local_mem_.emplace_back(l.length, Raw{});

    std::vector<Wave> waves;
    if (lockstep()) {
      waves.push_back(make_wave(0, cfg_.local_size));
    } else {
      for (std::uint32_t w = 0; w < cfg_.wavefronts_per_group(); ++w)
        waves.push_back(make_wave(w * cfg_.wavefront_width, cfg_.wavefront_width));
    }

    const bool serial = cfg_.scheduler == Scheduler::WavefrontSerial;
    for (;;) {
      for (auto& w : waves) {
        if (serial) {
          while (w.state == WaveState::Running) step(w);
        } else if (w.state == WaveState::Running) {
          step(w);
        }
      }
      bool all_done = std::all_of(waves.begin(), waves.end(),
                                  [](const Wave& w) { return w.state == WaveState::Done; });
      if (all_done) break;
      bool any_running = std::any_of(waves.begin(), waves.end(),
                                     [](const Wave& w) { return w.state == WaveState::Running; });
      if (!any_running) release_barrier(waves);
    }
  }

  Metrics finish() {
    Metrics m;
    static_cast<Counters&>(m) = totals_;
    for (std::size_t i = 0; i < region_counters_.size(); ++i)
      m.regions[prog_.region_names[i]] += region_counters_[i];
    if (cfg_.hazard_detection) {
      std::vector<std::string> names;
      for (const auto& l : prog_.locals) names.push_back(l.name);
      m.hazards = detect_hazards(log_, names);
    }
    return m;
  }

private:
  bool lockstep() const { return cfg_.scheduler == Scheduler::LockstepWorkgroup; }

  Wave make_wave(std::uint32_t first_lane, std::uint32_t width) {
    Wave w;
    w.first_lane = first_lane;
    w.width = width;
    w.regs.assign(prog_.slot_types.size() * width, Raw{});
    for (std::size_t p = 0; p < prog_.param_slots.size(); ++p) {
      auto base = static_cast<std::size_t>(prog_.param_slots[p]) * width;
      std::fill_n(w.regs.begin() + static_cast<std::ptrdiff_t>(base), width, params_[p]);
    }
    w.stack.push_back(StackEntry{0, -1, LaneMask(width, true), false});
    settle(w);
    return w;
  }

  template <typename F>
  void book(std::int32_t region, F&& f) {
    f(totals_);
    if (region >= 0) f(region_counters_[static_cast<std::size_t>(region)]);
  }

  // Pops reconverged entries and marks the wave done at the end of the code.
  void settle(Wave& w) {
    while (w.stack.back().pc == w.stack.back().rpc) w.stack.pop_back();
    if (w.stack.back().pc >= static_cast<std::int32_t>(prog_.code.size())) w.state = WaveState::Done;
  }

  // Executes the next issued operation of `w` (jumps are free).
  void step(Wave& w) {
    for (;;) {
      StackEntry& top = w.stack.back();
      const FlatOp& op = prog_.code[static_cast<std::size_t>(top.pc)];
      if (op.kind == OpKind::Jump) {
        top.pc = op.join_pc;
        settle(w);
        if (w.state == WaveState::Done) return;
        continue;
      }
      execute(w, op);
      if (w.state == WaveState::Running) settle(w);
      return;
    }
  }

  void release_barrier(std::vector<Wave>& waves) {
    std::int32_t pc = -1;
    for (std::size_t i = 0; i < waves.size(); ++i) {
      const Wave& w = waves[i];
      if (w.state == WaveState::Done) {
        fail(ErrorCode::BarrierDivergence,
             "wavefront " + std::to_string(i) + " of group " + std::to_string(group_) +
                 " finished while other wavefronts wait at a barrier");
      }
      if (pc < 0) pc = w.barrier_pc;
      if (w.barrier_pc != pc) {
        fail(ErrorCode::BarrierDivergence, "wavefronts of group " + std::to_string(group_) +
                                               " wait at different barriers (pc " + std::to_string(pc) +
                                               " and " + std::to_string(w.barrier_pc) + ")");
      }
    }
    book(prog_.code[static_cast<std::size_t>(pc)].region, [](Counters& c) { ++c.barriers; });
    ++epoch_;
    for (auto& w : waves) {
      w.stack.back().pc = pc + 1;
      w.state = WaveState::Running;
      settle(w);
    }
  }

  Raw* temp(const FlatOp& op, std::int32_t node, std::uint32_t width) {
    return &temps_[static_cast<std::size_t>(node - op.node_begin) * width];
  }

  std::uint32_t wavefront_of(const Wave& w, std::uint32_t lane) const {
    return (w.first_lane + lane) / cfg_.wavefront_width;
  }

  std::uint32_t slice_of(std::uint32_t lane) const { return lane / cfg_.wavefront_width; }

  void execute(Wave& w, const FlatOp& op) {
    StackEntry& top = w.stack.back();
    const std::int32_t pc = top.pc;

    lanes_.clear();
    top.mask.for_each([&](std::uint32_t l) { lanes_.push_back(l); });
    std::fill(slice_active_.begin(), slice_active_.end(), 0);
    for (auto l : lanes_) slice_active_[slice_of(l)] = 1;
    active_slices_ = static_cast<std::uint32_t>(std::count(slice_active_.begin(), slice_active_.end(), 1));
    book(op.region, [&](Counters& c) { c.wavefront_issues += active_slices_; });

    if (op.kind == OpKind::Barrier) {
      if (!top.mask.full()) {
        fail(ErrorCode::BarrierDivergence,
             "barrier at pc " + std::to_string(pc) + " reached by " + std::to_string(top.mask.count()) +
                 " of " + std::to_string(w.width) + " lanes in group " + std::to_string(group_));
      }
      if (lockstep()) {
        book(op.region, [](Counters& c) { ++c.barriers; });
        ++epoch_;
        top.pc = pc + 1;
      } else {
        w.state = WaveState::AtBarrier;
        w.barrier_pc = pc;
      }
      return;
    }

    for (std::int32_t n = op.node_begin; n < op.node_end; ++n) eval_node(w, op, n);

    switch (op.kind) {
      case OpKind::Set: {
        const Raw* v = temp(op, op.value_root, w.width);
        Raw* dst = &w.regs[static_cast<std::size_t>(op.target) * w.width];
        for (auto l : lanes_) dst[l] = v[l];
        top.pc = pc + 1;
        break;
      }
      case OpKind::StoreGlobal: {
        const Raw* idx = temp(op, op.index_root, w.width);
        const Raw* v = temp(op, op.value_root, w.width);
        BoundBuffer& b = buffers_[static_cast<std::size_t>(op.target)];
        for (auto l : lanes_) {
          std::uint64_t i = check_index(b.name, b.size, idx[l].i, w, l);
          store_raw(b, i, v[l]);
          store_segments_[slice_of(l)].push_back(i * cfg_.elem_bytes / cfg_.segment_bytes);
        }
        top.pc = pc + 1;
        break;
      }
      case OpKind::StoreLocal: {
        const Raw* idx = temp(op, op.index_root, w.width);
        const Raw* v = temp(op, op.value_root, w.width);
        auto& mem = local_mem_[static_cast<std::size_t>(op.target)];
        const auto& name = prog_.locals[static_cast<std::size_t>(op.target)].name;
        for (auto l : lanes_) check_index(name, mem.size(), idx[l].i, w, l);
        account_local(w, op, op.target, idx, true);
        for (auto l : lanes_) mem[static_cast<std::size_t>(idx[l].i)] = v[l];
        top.pc = pc + 1;
        break;
      }
      case OpKind::Branch: {
        const Raw* cond = temp(op, op.value_root, w.width);
        LaneMask taken(w.width), not_taken(w.width);
        for (auto l : lanes_) (cond[l].i != 0 ? taken : not_taken).set(l);
        count_divergence(op, cond);
        top.pc = op.join_pc;
        if (not_taken.any() && op.else_pc != op.join_pc)
          w.stack.push_back(StackEntry{op.else_pc, op.join_pc, std::move(not_taken), false});
        if (taken.any()) w.stack.push_back(StackEntry{pc + 1, op.join_pc, std::move(taken), false});
        break;
      }
      case OpKind::LoopGuard: {
        const Raw* cond = temp(op, op.value_root, w.width);
        count_divergence(op, cond);
        if (!(top.loop && top.rpc == op.join_pc)) {
          LaneMask entry = top.mask;
          top.pc = op.join_pc;
          w.stack.push_back(StackEntry{pc, op.join_pc, std::move(entry), true});
        }
        StackEntry& loop = w.stack.back();
        LaneMask stay(w.width);
        for (auto l : lanes_) if (cond[l].i != 0) stay.set(l);
        if (!stay.any()) {
          w.stack.pop_back();
        } else {
          loop.mask = std::move(stay);
          loop.pc = pc + 1;
        }
        break;
      }
      case OpKind::Barrier:
      case OpKind::Jump: break;
    }

    flush_transactions(op);
  }

  void count_divergence(const FlatOp& op, const Raw* cond) {
    std::uint64_t divergent = 0;
    std::size_t i = 0;
    while (i < lanes_.size()) {
      std::uint32_t s = slice_of(lanes_[i]);
      bool seen_true = false, seen_false = false;
      for (; i < lanes_.size() && slice_of(lanes_[i]) == s; ++i) {
        (cond[lanes_[i]].i != 0 ? seen_true : seen_false) = true;
      }
      if (seen_true && seen_false) ++divergent;
    }
    if (divergent) book(op.region, [&](Counters& c) { c.divergent_branches += divergent; });
  }

  void flush_transactions(const FlatOp& op) {
    std::uint64_t total = 0;
    auto drain = [&](std::vector<std::uint64_t>& segs) {
      if (segs.empty()) return;
      std::sort(segs.begin(), segs.end());
      total += static_cast<std::uint64_t>(std::unique(segs.begin(), segs.end()) - segs.begin());
      segs.clear();
    };
    for (auto& s : load_segments_) drain(s);
    for (auto& s : store_segments_) drain(s);
    if (total) book(op.region, [&](Counters& c) { c.global_transactions += total; });
  }

  std::uint64_t check_index(const std::string& name, std::uint64_t size, std::int64_t index,
                            const Wave& w, std::uint32_t lane) {
    if (index < 0 || static_cast<std::uint64_t>(index) >= size) {
      fail(ErrorCode::OutOfBounds, "'" + name + "' index " + std::to_string(index) + " outside [0, " +
                                       std::to_string(size) + ") at group " + std::to_string(group_) +
                                       " local lane " + std::to_string(w.first_lane + lane));
    }
    return static_cast<std::uint64_t>(index);
  }

  // One local access per active wavefront; bank conflicts are resolved per
  // group of num_banks consecutive lanes.
  void account_local(const Wave& w, const FlatOp& op, std::int32_t array, const Raw* idx, bool write) {
    std::uint64_t extra = 0;
    std::size_t i = 0;
    const std::uint32_t banks = cfg_.num_banks;
    while (i < lanes_.size()) {
      const std::uint32_t l0 = lanes_[i];
      const std::uint32_t slice = slice_of(l0);
      const std::uint32_t group_key = (l0 % cfg_.wavefront_width) / banks;
      words_.clear();
      for (; i < lanes_.size(); ++i) {
        std::uint32_t l = lanes_[i];
        if (slice_of(l) != slice || (l % cfg_.wavefront_width) / banks != group_key) break;
        words_.push_back(static_cast<std::uint64_t>(idx[l].i));
      }
      std::sort(words_.begin(), words_.end());
      words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
      std::uint32_t degree = 0;
      std::fill(bank_load_.begin(), bank_load_.end(), 0);
      for (auto word : words_) degree = std::max(degree, ++bank_load_[word % banks]);
      extra += degree - 1;
    }
    book(op.region, [&](Counters& c) {
      c.local_accesses += active_slices_;
      c.bank_conflict_extra += extra;
    });
    if (cfg_.hazard_detection) {
      for (auto l : lanes_) {
        log_.push_back(AccessRecord{group_, epoch_, static_cast<std::uint32_t>(array),
                                    static_cast<std::uint64_t>(idx[l].i), wavefront_of(w, l), write});
      }
    }
  }

  void eval_node(Wave& w, const FlatOp& op, std::int32_t n) {
    const Node& node = prog_.nodes[static_cast<std::size_t>(n)];
    const std::uint32_t width = w.width;
    Raw* out = temp(op, n, width);
    switch (node.kind) {
      case NodeKind::Const:
        for (auto l : lanes_) out[l] = node.imm;
        break;
      case NodeKind::Builtin: {
        const auto kind = static_cast<ir::Builtin>(node.op);
        for (auto l : lanes_) {
          const std::int64_t local = w.first_lane + l;
          std::int64_t v = 0;
          switch (kind) {
            case ir::Builtin::GlobalId:
              v = static_cast<std::int64_t>(group_ * cfg_.local_size) + local;
              break;
            case ir::Builtin::LocalId: v = local; break;
            case ir::Builtin::GroupId: v = static_cast<std::int64_t>(group_); break;
            case ir::Builtin::GlobalSize: v = static_cast<std::int64_t>(cfg_.global_size); break;
            case ir::Builtin::LocalSize: v = cfg_.local_size; break;
          }
          out[l].i = v;
        }
        break;
      }
      case NodeKind::Var: {
        const Raw* src = &w.regs[static_cast<std::size_t>(node.ref) * width];
        for (auto l : lanes_) out[l] = src[l];
        break;
      }
      case NodeKind::Shfl: {
        const Raw* src = &w.regs[static_cast<std::size_t>(node.ref) * width];
        const std::uint32_t wf = cfg_.wavefront_width;
        for (auto l : lanes_) {
          const std::uint32_t in_wave = l % wf;
          const std::uint64_t from = in_wave + static_cast<std::uint64_t>(node.delta) < wf ? l + node.delta : l;
          out[l] = src[from];
        }
        book(op.region, [&](Counters& c) { c.shfl_ops += active_slices_; });
        break;
      }
      case NodeKind::LoadGlobal: {
        const Raw* idx = temp(op, node.a, width);
        const BoundBuffer& b = buffers_[static_cast<std::size_t>(node.ref)];
        for (auto l : lanes_) {
          std::uint64_t i = check_index(b.name, b.size, idx[l].i, w, l);
          out[l] = load_raw(b, i);
          load_segments_[slice_of(l)].push_back(i * cfg_.elem_bytes / cfg_.segment_bytes);
        }
        break;
      }
      case NodeKind::LoadLocal: {
        const Raw* idx = temp(op, node.a, width);
        const auto& mem = local_mem_[static_cast<std::size_t>(node.ref)];
        const auto& name = prog_.locals[static_cast<std::size_t>(node.ref)].name;
        for (auto l : lanes_) out[l] = mem[check_index(name, mem.size(), idx[l].i, w, l)];
        account_local(w, op, node.ref, idx, false);
        break;
      }
      case NodeKind::Unary: eval_unary(node, temp(op, node.a, width), out); break;
      case NodeKind::Binary:
        eval_binary(node, temp(op, node.a, width), temp(op, node.b, width), out);
        break;
    }
  }

  void eval_unary(const Node& node, const Raw* a, Raw* out) {
    using ir::UnaryOp;
    const auto op = static_cast<UnaryOp>(node.op);
    const DType t = node.operand_type;
    auto as_double = [t](const Raw& r) {
      switch (t) {
        case DType::I64: return static_cast<double>(r.i);
        case DType::F32: return static_cast<double>(r.f);
        case DType::F64: return r.d;
      }
      return 0.0;
    };
    for (auto l : lanes_) {
      const Raw& x = a[l];
      Raw& r = out[l];
      switch (op) {
        case UnaryOp::Neg:
          if (t == DType::I64) r.i = wrapping::neg(x.i);
          else if (t == DType::F32) r.f = -x.f;
          else r.d = -x.d;
          break;
        case UnaryOp::Not: r.i = x.i == 0; break;
        case UnaryOp::BitNot: r.i = ~x.i; break;
        case UnaryOp::ToI64: r.i = t == DType::I64 ? x.i : float_to_i64(as_double(x)); break;
        case UnaryOp::ToF32:
          r.f = t == DType::I64 ? static_cast<float>(x.i) : static_cast<float>(as_double(x));
          break;
        case UnaryOp::ToF64: r.d = t == DType::I64 ? static_cast<double>(x.i) : as_double(x); break;
        case UnaryOp::Bits:
          if (t == DType::F32) r.i = static_cast<std::int64_t>(std::bit_cast<std::uint32_t>(x.f));
          else r.i = std::bit_cast<std::int64_t>(x.d);
          break;
        case UnaryOp::FromBitsF32:
          r.f = std::bit_cast<float>(static_cast<std::uint32_t>(static_cast<std::uint64_t>(x.i)));
          break;
        case UnaryOp::FromBitsF64: r.d = std::bit_cast<double>(x.i); break;
      }
    }
  }

  template <typename T>
  void eval_binary_float(ir::BinaryOp op, const Raw* a, const Raw* b, Raw* out) {
    using ir::BinaryOp;
    auto arith = [&](auto f) {
      for (auto l : lanes_) field<T>(out[l]) = f(cfield<T>(a[l]), cfield<T>(b[l]));
    };
    auto cmp = [&](auto f) {
      for (auto l : lanes_) out[l].i = f(cfield<T>(a[l]), cfield<T>(b[l])) ? 1 : 0;
    };
    switch (op) {
      case BinaryOp::Add: arith([](T x, T y) { return x + y; }); break;
      case BinaryOp::Sub: arith([](T x, T y) { return x - y; }); break;
      case BinaryOp::Mul: arith([](T x, T y) { return x * y; }); break;
      case BinaryOp::Div: arith([](T x, T y) { return x / y; }); break;
      case BinaryOp::Min: arith([](T x, T y) { return x < y ? x : y; }); break;
      case BinaryOp::Max: arith([](T x, T y) { return x > y ? x : y; }); break;
      case BinaryOp::Lt: cmp([](T x, T y) { return x < y; }); break;
      case BinaryOp::Le: cmp([](T x, T y) { return x <= y; }); break;
      case BinaryOp::Gt: cmp([](T x, T y) { return x > y; }); break;
      case BinaryOp::Ge: cmp([](T x, T y) { return x >= y; }); break;
      case BinaryOp::Eq: cmp([](T x, T y) { return x == y; }); break;
      case BinaryOp::Ne: cmp([](T x, T y) { return x != y; }); break;
      default: break;  // rejected by validation
    }
  }

  void eval_binary(const Node& node, const Raw* a, const Raw* b, Raw* out) {
    using ir::BinaryOp;
    const auto op = static_cast<BinaryOp>(node.op);
    if (node.operand_type == DType::F32) return eval_binary_float<float>(op, a, b, out);
    if (node.operand_type == DType::F64) return eval_binary_float<double>(op, a, b, out);
    auto apply = [&](auto f) {
      for (auto l : lanes_) out[l].i = f(a[l].i, b[l].i);
    };
    using I = std::int64_t;
    switch (op) {
      case BinaryOp::Add: apply([](I x, I y) { return wrapping::add(x, y); }); break;
      case BinaryOp::Sub: apply([](I x, I y) { return wrapping::sub(x, y); }); break;
      case BinaryOp::Mul: apply([](I x, I y) { return wrapping::mul(x, y); }); break;
      case BinaryOp::Div: apply([](I x, I y) { return int_div(x, y); }); break;
      case BinaryOp::Mod: apply([](I x, I y) { return int_mod(x, y); }); break;
      case BinaryOp::Min: apply([](I x, I y) { return x < y ? x : y; }); break;
      case BinaryOp::Max: apply([](I x, I y) { return x > y ? x : y; }); break;
      case BinaryOp::Lt: apply([](I x, I y) -> I { return x < y; }); break;
      case BinaryOp::Le: apply([](I x, I y) -> I { return x <= y; }); break;
      case BinaryOp::Gt: apply([](I x, I y) -> I { return x > y; }); break;
      case BinaryOp::Ge: apply([](I x, I y) -> I { return x >= y; }); break;
      case BinaryOp::Eq: apply([](I x, I y) -> I { return x == y; }); break;
      case BinaryOp::Ne: apply([](I x, I y) -> I { return x != y; }); break;
      case BinaryOp::And: apply([](I x, I y) -> I { return x != 0 && y != 0; }); break;
      case BinaryOp::Or: apply([](I x, I y) -> I { return x != 0 || y != 0; }); break;
      case BinaryOp::Shr: apply([](I x, I y) { return x >> (y & 63); }); break;
      case BinaryOp::Shl:
        apply([](I x, I y) {
          return static_cast<I>(static_cast<std::uint64_t>(x) << (y & 63));
        });
        break;
      case BinaryOp::BitAnd: apply([](I x, I y) { return x & y; }); break;
      case BinaryOp::BitOr: apply([](I x, I y) { return x | y; }); break;
      case BinaryOp::BitXor: apply([](I x, I y) { return x ^ y; }); break;
    }
  }

  const detail::CompiledProgram& prog_;
  const LaunchConfig& cfg_;
  std::vector<BoundBuffer> buffers_;
  std::vector<Raw> params_;

  Counters totals_;
  std::vector<Counters> region_counters_;
  std::vector<AccessRecord> log_;

  std::uint64_t group_ = 0;
  std::uint64_t epoch_ = 0;
  std::vector<std::vector<Raw>> local_mem_;

  std::vector<Raw> temps_;
  std::vector<std::uint32_t> lanes_;
  std::vector<std::uint8_t> slice_active_;
  std::uint32_t active_slices_ = 0;
  std::vector<std::vector<std::uint64_t>> load_segments_;
  std::vector<std::vector<std::uint64_t>> store_segments_;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint32_t> bank_load_;
};

void* buffer_data(Buffer& b) {
  switch (b.dtype()) {
    case DType::I64: return b.i64().data();
    case DType::F32: return b.f32().data();
    case DType::F64: return b.f64().data();
  }
  return nullptr;
}

}  // namespace

LaunchResult launch(const ir::Program& program, const LaunchConfig& cfg,
                    std::map<std::string, Buffer> buffers,
                    const std::map<std::string, Scalar>& scalars) {
  check_launch_config(cfg);
  ValidationReport report;
  auto compiled = detail::compile(program, report);
  if (!report.ok()) {
    std::string msg = "program '" + program.name + "' is invalid:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    fail(ErrorCode::ValidationError, msg);
  }
  std::uint64_t words = 0;
  for (const auto& l : program.locals) words += l.length;
  if (words > cfg.local_mem_words) {
    fail(ErrorCode::LocalMemOverflow, "program '" + program.name + "' needs " + std::to_string(words) +
                                          " local words, capacity " + std::to_string(cfg.local_mem_words));
  }

  std::vector<BoundBuffer> bound;
  for (const auto& p : program.buffers) {
    auto it = buffers.find(p.name);
    if (it == buffers.end()) fail(ErrorCode::InvalidArgument, "no buffer bound to '" + p.name + "'");
    if (it->second.dtype() != p.type) {
      fail(ErrorCode::TypeMismatch, "buffer '" + p.name + "' holds " +
                                        std::string(to_string(it->second.dtype())) + ", kernel expects " +
                                        std::string(to_string(p.type)));
    }
    bound.push_back(BoundBuffer{p.name, p.type, buffer_data(it->second), it->second.size()});
  }
  std::vector<Raw> params;
  for (const auto& p : program.scalars) {
    auto it = scalars.find(p.name);
    if (it == scalars.end()) fail(ErrorCode::InvalidArgument, "no value for scalar '" + p.name + "'");
    if (it->second.type() != p.type) {
      fail(ErrorCode::TypeMismatch, "scalar '" + p.name + "' is " +
                                        std::string(to_string(it->second.type())) + ", kernel expects " +
                                        std::string(to_string(p.type)));
    }
    params.push_back(detail::to_raw(it->second));
  }

  Executor exec(compiled, cfg, std::move(bound), std::move(params));
  for (std::uint64_t g = 0; g < cfg.num_workgroups(); ++g) exec.run_group(g);
  return LaunchResult{std::move(buffers), exec.finish()};
}

}  // namespace simred
