#include "simred/simred.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <new>
#include <string>
#include <vector>

#include "simred/error.hpp"
#include "simred/harness.hpp"
#include "simred/kernels.hpp"
#include "simred/machine.hpp"
#include "simred/oracle.hpp"

struct simred_buffer {
  simred::Buffer data;
};

struct simred_report {
  std::vector<simred::BenchRow> rows;
};

struct simred_hazard_list {
  std::vector<std::pair<std::uint32_t, simred::Hazard>> items;
};

struct simred_config {
  std::vector<std::pair<std::string, std::string>> entries;
};

namespace {

using namespace simred;

thread_local std::string g_last_error;

simred_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return SIMRED_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidConfig: return SIMRED_ERR_INVALID_CONFIG;
    case ErrorCode::ValidationError: return SIMRED_ERR_VALIDATION;
    case ErrorCode::TypeMismatch: return SIMRED_ERR_TYPE_MISMATCH;
    case ErrorCode::OutOfBounds: return SIMRED_ERR_OUT_OF_BOUNDS;
    case ErrorCode::BarrierDivergence: return SIMRED_ERR_BARRIER_DIVERGENCE;
    case ErrorCode::LocalMemOverflow: return SIMRED_ERR_LOCAL_MEM_OVERFLOW;
    case ErrorCode::GeometryError: return SIMRED_ERR_GEOMETRY;
    case ErrorCode::ParseError: return SIMRED_ERR_PARSE;
    case ErrorCode::IoError: return SIMRED_ERR_IO;
    case ErrorCode::BadRange: return SIMRED_ERR_BAD_RANGE;
  }
  return SIMRED_ERR_INTERNAL;
}

// Runs `f`, translating exceptions into status codes.
template <typename F>
simred_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SIMRED_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  }
  return SIMRED_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

template <typename E>
E checked_enum(int v, int count, const char* what) {
  if (v < 0 || v >= count) fail(ErrorCode::InvalidArgument, "invalid " + std::string(what) + " " + std::to_string(v));
  return static_cast<E>(v);
}

DType to_dtype(simred_dtype t) { return checked_enum<DType>(t, 3, "dtype"); }
CombineKind to_kind(simred_op op) { return checked_enum<CombineKind>(op, 7, "op"); }

LaunchConfig to_cfg(const simred_launch_config* c) {
  require(c, "launch config");
  LaunchConfig cfg;
  cfg.global_size = c->global_size;
  cfg.local_size = c->local_size;
  cfg.wavefront_width = c->wavefront_width;
  cfg.num_banks = c->num_banks;
  cfg.segment_bytes = c->segment_bytes;
  cfg.elem_bytes = c->elem_bytes;
  cfg.local_mem_words = c->local_mem_words;
  cfg.scheduler = checked_enum<Scheduler>(c->scheduler, 3, "scheduler");
  cfg.hazard_detection = c->hazard_detection != 0;
  return cfg;
}

CostModel to_cost(const simred_cost_model* c) {
  require(c, "cost model");
  return CostModel{c->alu, c->global_transaction, c->local_access, c->barrier, c->shfl};
}

KernelSpec to_spec(const simred_kernel_spec* s) {
  require(s, "kernel spec");
  KernelSpec spec;
  spec.variant = checked_enum<KernelVariant>(s->kernel, static_cast<int>(all_kernel_variants().size()), "kernel");
  spec.op = CombineOp(to_kind(s->op), to_dtype(s->dtype));
  spec.unroll = s->unroll;
  spec.local_size = s->local_size;
  spec.global_size = s->global_size;
  return spec;
}

simred_metrics to_c(const Counters& m) {
  return simred_metrics{m.wavefront_issues,      m.divergent_branches, m.barriers,  m.global_transactions,
                        m.local_accesses,        m.bank_conflict_extra, m.shfl_ops};
}

Counters from_c(const simred_metrics& m) {
  Counters c;
  c.wavefront_issues = m.wavefront_issues;
  c.divergent_branches = m.divergent_branches;
  c.barriers = m.barriers;
  c.global_transactions = m.global_transactions;
  c.local_accesses = m.local_accesses;
  c.bank_conflict_extra = m.bank_conflict_extra;
  c.shfl_ops = m.shfl_ops;
  return c;
}

simred_scalar to_c(const Scalar& s) {
  simred_scalar out{};
  out.dtype = static_cast<simred_dtype>(s.type());
  if (s.type() == DType::I64) {
    out.i64 = s.as_i64();
    out.f64 = static_cast<double>(out.i64);
  } else {
    out.f64 = s.to_double();
  }
  return out;
}

Scalar from_c(const simred_scalar& s) {
  switch (to_dtype(s.dtype)) {
    case DType::I64: return Scalar::i64(s.i64);
    case DType::F32: return Scalar::f32(static_cast<float>(s.f64));
    case DType::F64: return Scalar::f64(s.f64);
  }
  return Scalar();
}

const Buffer& buf(const simred_buffer* b) {
  require(b, "buffer");
  return b->data;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

template <typename T>
simred_status make_buffer(const T* values, uint64_t n, simred_buffer** out, Buffer (*factory)(std::vector<T>)) {
  return guarded([&] {
    require(out, "out");
    if (n) require(values, "values");
    *out = new simred_buffer{factory(std::vector<T>(values, values + n))};
  });
}

template <typename Enum, typename Parse>
simred_status from_name(const char* name, Enum* out, Parse parse, const char* what) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    auto v = parse(name);
    if (!v) fail(ErrorCode::InvalidArgument, "unknown " + std::string(what) + " '" + name + "'");
    *out = static_cast<Enum>(*v);
  });
}

std::optional<Scheduler> parse_scheduler(std::string_view name) {
  for (auto s : {Scheduler::LockstepWorkgroup, Scheduler::WavefrontRoundRobin, Scheduler::WavefrontSerial})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

}  // namespace

extern "C" {

const char* simred_version(void) { return "0.1.0"; }
const char* simred_last_error(void) { return g_last_error.c_str(); }

const char* simred_status_name(simred_status status) {
  switch (status) {
    case SIMRED_OK: return "ok";
    case SIMRED_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case SIMRED_ERR_INVALID_CONFIG: return "InvalidConfig";
    case SIMRED_ERR_VALIDATION: return "ValidationError";
    case SIMRED_ERR_TYPE_MISMATCH: return "TypeMismatch";
    case SIMRED_ERR_OUT_OF_BOUNDS: return "OutOfBounds";
    case SIMRED_ERR_BARRIER_DIVERGENCE: return "BarrierDivergence";
    case SIMRED_ERR_LOCAL_MEM_OVERFLOW: return "LocalMemOverflow";
    case SIMRED_ERR_GEOMETRY: return "GeometryError";
    case SIMRED_ERR_PARSE: return "ParseError";
    case SIMRED_ERR_IO: return "IoError";
    case SIMRED_ERR_BAD_RANGE: return "BadRange";
    case SIMRED_ERR_INTERNAL: return "Internal";
  }
  return "unknown";
}

void simred_launch_config_default(simred_launch_config* c) {
  if (!c) return;
  LaunchConfig d;
  c->global_size = d.global_size;
  c->local_size = d.local_size;
  c->wavefront_width = d.wavefront_width;
  c->num_banks = d.num_banks;
  c->segment_bytes = d.segment_bytes;
  c->elem_bytes = d.elem_bytes;
  c->local_mem_words = d.local_mem_words;
  c->scheduler = static_cast<simred_scheduler>(d.scheduler);
  c->hazard_detection = d.hazard_detection;
}

void simred_cost_model_default(simred_cost_model* c) {
  if (!c) return;
  CostModel d;
  *c = simred_cost_model{d.alu, d.global_transaction, d.local_access, d.barrier, d.shfl};
}

void simred_kernel_spec_default(simred_kernel_spec* s) {
  if (!s) return;
  *s = simred_kernel_spec{SIMRED_CATANZARO, SIMRED_OP_ADD, SIMRED_I64, 1, 0, 0};
}

const char* simred_kernel_name(simred_kernel k) {
  if (k < 0 || static_cast<std::size_t>(k) >= all_kernel_variants().size()) return nullptr;
  return to_string(static_cast<KernelVariant>(k)).data();
}

simred_status simred_kernel_from_name(const char* name, simred_kernel* out) {
  return from_name(name, out, parse_kernel_variant, "kernel");
}

const char* simred_op_name(simred_op op) {
  if (op < 0 || op > SIMRED_OP_XOR) return nullptr;
  return to_string(static_cast<CombineKind>(op)).data();
}

simred_status simred_op_from_name(const char* name, simred_op* out) {
  return from_name(name, out, parse_combine_kind, "op");
}

const char* simred_dtype_name(simred_dtype t) {
  if (t < 0 || t > SIMRED_F64) return nullptr;
  return to_string(static_cast<DType>(t)).data();
}

simred_status simred_dtype_from_name(const char* name, simred_dtype* out) {
  return from_name(name, out, parse_dtype, "dtype");
}

const char* simred_scheduler_name(simred_scheduler s) {
  if (s < 0 || s > SIMRED_SERIAL) return nullptr;
  return to_string(static_cast<Scheduler>(s)).data();
}

simred_status simred_scheduler_from_name(const char* name, simred_scheduler* out) {
  return from_name(name, out, parse_scheduler, "scheduler");
}

simred_status simred_buffer_from_i64(const int64_t* values, uint64_t n, simred_buffer** out) {
  return make_buffer<std::int64_t>(values, n, out, &Buffer::of_i64);
}
simred_status simred_buffer_from_f32(const float* values, uint64_t n, simred_buffer** out) {
  return make_buffer<float>(values, n, out, &Buffer::of_f32);
}
simred_status simred_buffer_from_f64(const double* values, uint64_t n, simred_buffer** out) {
  return make_buffer<double>(values, n, out, &Buffer::of_f64);
}

simred_status simred_buffer_generate_uniform_int(uint64_t n, simred_dtype dtype, int64_t lo, int64_t hi,
                                                 uint64_t seed, simred_buffer** out) {
  return guarded([&] {
    require(out, "out");
    *out = new simred_buffer{generate_data(n, to_dtype(dtype), Distribution::uniform_int(lo, hi), seed)};
  });
}

simred_status simred_buffer_generate_uniform_float(uint64_t n, simred_dtype dtype, double lo, double hi,
                                                   uint64_t seed, simred_buffer** out) {
  return guarded([&] {
    require(out, "out");
    *out = new simred_buffer{generate_data(n, to_dtype(dtype), Distribution::uniform_float(lo, hi), seed)};
  });
}

simred_status simred_buffer_generate_constant(uint64_t n, simred_dtype dtype, double value, simred_buffer** out) {
  return guarded([&] {
    require(out, "out");
    *out = new simred_buffer{generate_data(n, to_dtype(dtype), Distribution::constant(value), 0)};
  });
}

simred_status simred_buffer_load(const char* path, simred_data_format format, simred_dtype dtype,
                                 simred_buffer** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto f = checked_enum<DataFormat>(format, 2, "data format");
    *out = new simred_buffer{load_data(path, f, to_dtype(dtype))};
  });
}

simred_status simred_buffer_save(const simred_buffer* b, const char* path, simred_data_format format) {
  return guarded([&] {
    require(path, "path");
    save_data(path, buf(b), checked_enum<DataFormat>(format, 2, "data format"));
  });
}

uint64_t simred_buffer_length(const simred_buffer* b) { return b ? b->data.size() : 0; }
simred_dtype simred_buffer_dtype(const simred_buffer* b) {
  return b ? static_cast<simred_dtype>(b->data.dtype()) : SIMRED_I64;
}

simred_status simred_buffer_get(const simred_buffer* b, uint64_t index, simred_scalar* out) {
  return guarded([&] {
    require(out, "out");
    const Buffer& data = buf(b);
    if (index >= data.size()) {
      fail(ErrorCode::OutOfBounds,
           "index " + std::to_string(index) + " outside buffer of length " + std::to_string(data.size()));
    }
    *out = to_c(data.at(index));
  });
}

void simred_buffer_free(simred_buffer* b) { delete b; }

simred_status simred_scalar_format(const simred_scalar* value, char* out, size_t capacity) {
  return guarded([&] {
    require(value, "value");
    require(out, "buffer");
    std::string s = from_c(*value).to_string();
    if (capacity < s.size() + 1) fail(ErrorCode::InvalidArgument, "buffer too small for '" + s + "'");
    std::memcpy(out, s.c_str(), s.size() + 1);
  });
}

simred_status simred_reduce(const simred_buffer* data, const simred_kernel_spec* spec,
                            const simred_launch_config* cfg, simred_reduce_result* out) {
  return guarded([&] {
    require(out, "out");
    ReduceOutcome r = reduce(buf(data), to_spec(spec), to_cfg(cfg));
    out->value = to_c(r.value);
    out->total = to_c(r.metrics);
    out->stage1 = to_c(r.stage1);
    out->stage2 = to_c(r.stage2);
    out->stage1_tree = to_c(r.stage1.region("tree"));
    out->launches = r.launches;
  });
}

simred_status simred_hazards(const simred_buffer* data, const simred_kernel_spec* spec,
                             const simred_launch_config* cfg, simred_hazard_list** out) {
  return guarded([&] {
    require(out, "out");
    LaunchConfig c = to_cfg(cfg);
    c.hazard_detection = true;
    ReduceOutcome r = reduce(buf(data), to_spec(spec), c);
    auto list = std::make_unique<simred_hazard_list>();
    for (const auto& h : r.stage1.hazards) list->items.emplace_back(1, h);
    for (const auto& h : r.stage2.hazards) list->items.emplace_back(2, h);
    *out = list.release();
  });
}

size_t simred_hazard_count(const simred_hazard_list* list) { return list ? list->items.size() : 0; }

simred_status simred_hazard_get(const simred_hazard_list* list, size_t index, simred_hazard* out) {
  return guarded([&] {
    require(list, "hazard list");
    require(out, "out");
    if (index >= list->items.size()) fail(ErrorCode::OutOfBounds, "hazard index " + std::to_string(index));
    const auto& [stage, h] = list->items[index];
    *out = simred_hazard{stage, h.group, h.epoch, h.array.c_str(), h.address, h.writer, h.other, h.other_writes};
  });
}

void simred_hazard_list_free(simred_hazard_list* list) { delete list; }

simred_status simred_kernel_listing(const simred_kernel_spec* spec, const simred_launch_config* cfg, char** out) {
  return guarded([&] {
    require(out, "out");
    KernelSpec s = to_spec(spec);
    TwoStagePlan plan = build_plan(s, to_cfg(cfg));
    std::string text = "// stage 1\n" + ir::to_text(plan.stage1);
    if (plan.multi_pass) {
      text += "\n// later passes re-run stage 1 on the partial results\n";
    } else {
      text += "\n// stage 2 (one work-group of " + std::to_string(plan.stage2_local_size) + ")\n" +
              ir::to_text(plan.stage2);
    }
    *out = dup_string(text);
  });
}

simred_status simred_reduce_sequential(const simred_buffer* data, simred_op op, simred_scalar* out) {
  return guarded([&] {
    require(out, "out");
    const Buffer& d = buf(data);
    *out = to_c(reduce_sequential(d, CombineOp(to_kind(op), d.dtype())));
  });
}

simred_status simred_reduce_pairwise(const simred_buffer* data, simred_op op, simred_scalar* out) {
  return guarded([&] {
    require(out, "out");
    const Buffer& d = buf(data);
    *out = to_c(reduce_pairwise_tree(d, CombineOp(to_kind(op), d.dtype())));
  });
}

simred_status simred_kahan_sum(const simred_buffer* data, simred_scalar* out) {
  return guarded([&] {
    require(out, "out");
    *out = to_c(kahan_sum(buf(data)));
  });
}

double simred_float_error_bound(uint64_t n, double max_abs, simred_dtype width) {
  if (width < 0 || width > SIMRED_F64) return 0.0;
  return float_error_bound(n, max_abs, static_cast<DType>(width)).bound;
}

simred_status simred_verify(const simred_buffer* data, simred_op op, const simred_scalar* value, int* ok) {
  return guarded([&] {
    require(value, "value");
    require(ok, "ok");
    const Buffer& d = buf(data);
    *ok = verify_result(d, CombineOp(to_kind(op), d.dtype()), from_c(*value));
  });
}

simred_status simred_coalesce_transactions(const uint64_t* idx, size_t count, uint32_t elem_bytes,
                                           uint32_t segment_bytes, uint64_t* out) {
  return guarded([&] {
    require(out, "out");
    if (count) require(idx, "element indices");
    if (segment_bytes == 0) fail(ErrorCode::InvalidArgument, "segment_bytes must be positive");
    *out = coalesce_transactions({idx, count}, elem_bytes, segment_bytes);
  });
}

simred_status simred_bank_conflict_degree(const uint64_t* words, size_t count, uint32_t num_banks, uint32_t* out) {
  return guarded([&] {
    require(out, "out");
    if (count) require(words, "word addresses");
    if (num_banks == 0) fail(ErrorCode::InvalidArgument, "num_banks must be positive");
    *out = bank_conflict_degree({words, count}, num_banks);
  });
}

double simred_estimate_cycles(const simred_metrics* m, const simred_cost_model* c) {
  if (!m || !c) return 0.0;
  return estimate_cycles(from_c(*m), to_cost(c));
}

simred_status simred_benchmark(const simred_buffer* data, const simred_kernel_spec* specs, size_t count,
                               const simred_launch_config* cfg, const simred_cost_model* cost, unsigned threads,
                               simred_report** out) {
  return guarded([&] {
    require(out, "out");
    if (count) require(specs, "specs");
    std::vector<BenchCase> cases;
    for (size_t i = 0; i < count; ++i) cases.push_back(BenchCase{to_spec(&specs[i]), {}});
    auto rows = run_benchmark(buf(data), cases, to_cfg(cfg), to_cost(cost), threads);
    *out = new simred_report{std::move(rows)};
  });
}

simred_status simred_sweep(const simred_buffer* data, const uint32_t* factors, size_t count, simred_op op,
                           const simred_launch_config* cfg, const simred_cost_model* cost, unsigned threads,
                           simred_report** out) {
  return guarded([&] {
    require(out, "out");
    if (count) require(factors, "factors");
    const Buffer& d = buf(data);
    auto rows = sweep_unroll(d, std::vector<std::uint32_t>(factors, factors + count),
                             CombineOp(to_kind(op), d.dtype()), to_cfg(cfg), to_cost(cost), threads);
    *out = new simred_report{std::move(rows)};
  });
}

size_t simred_report_row_count(const simred_report* r) { return r ? r->rows.size() : 0; }

simred_status simred_report_row(const simred_report* r, size_t index, simred_bench_row* out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    if (index >= r->rows.size()) fail(ErrorCode::OutOfBounds, "row index " + std::to_string(index));
    const BenchRow& row = r->rows[index];
    *out = simred_bench_row{row.kernel.c_str(), row.unroll,       row.n,           row.op.c_str(),
                            row.dtype.c_str(),  row.result_ok,    to_c(row.metrics), row.sim_cycles,
                            row.speedup,        row.value.c_str(), row.error.c_str()};
  });
}

int simred_report_all_ok(const simred_report* r) { return r ? all_ok(r->rows) : 0; }

simred_status simred_report_render(const simred_report* r, simred_report_format format, char** out) {
  return guarded([&] {
    require(r, "report");
    require(out, "out");
    *out = dup_string(render_report(r->rows, checked_enum<ReportFormat>(format, 2, "report format")));
  });
}

simred_status simred_report_write(const simred_report* r, simred_report_format format, const char* path) {
  return guarded([&] {
    require(r, "report");
    require(path, "path");
    emit_report(r->rows, checked_enum<ReportFormat>(format, 2, "report format"), path);
  });
}

void simred_report_free(simred_report* r) { delete r; }

simred_status simred_config_load(const char* path, simred_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto cfg = std::make_unique<simred_config>();
    for (auto& [k, v] : load_config(path)) cfg->entries.emplace_back(k, v);
    *out = cfg.release();
  });
}

size_t simred_config_count(const simred_config* c) { return c ? c->entries.size() : 0; }

simred_status simred_config_entry(const simred_config* c, size_t index, const char** key, const char** value) {
  return guarded([&] {
    require(c, "config");
    require(key, "key");
    require(value, "value");
    if (index >= c->entries.size()) fail(ErrorCode::OutOfBounds, "config index " + std::to_string(index));
    *key = c->entries[index].first.c_str();
    *value = c->entries[index].second.c_str();
  });
}

void simred_config_free(simred_config* c) { delete c; }

void simred_string_free(char* s) { std::free(s); }

}  // extern "C"
