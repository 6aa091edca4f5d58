#ifndef SIMRED_H
#define SIMRED_H

/* C interface to the simred simulator. Every fallible call returns a
 * simred_status; on failure simred_last_error() describes the cause for the
 * calling thread. Handles are opaque and released with their _free call. */

#include <stddef.h>
#include <stdint.h>

#if defined(SIMRED_BUILDING_LIBRARY)
#define SIMRED_API __attribute__((visibility("default")))
#else
#define SIMRED_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum simred_status {
  SIMRED_OK = 0,
  SIMRED_ERR_INVALID_ARGUMENT,
  SIMRED_ERR_INVALID_CONFIG,
  SIMRED_ERR_VALIDATION,
  SIMRED_ERR_TYPE_MISMATCH,
  SIMRED_ERR_OUT_OF_BOUNDS,
  SIMRED_ERR_BARRIER_DIVERGENCE,
  SIMRED_ERR_LOCAL_MEM_OVERFLOW,
  SIMRED_ERR_GEOMETRY,
  SIMRED_ERR_PARSE,
  SIMRED_ERR_IO,
  SIMRED_ERR_BAD_RANGE,
  SIMRED_ERR_INTERNAL
} simred_status;

typedef enum simred_dtype { SIMRED_I64 = 0, SIMRED_F32, SIMRED_F64 } simred_dtype;

typedef enum simred_op {
  SIMRED_OP_ADD = 0,
  SIMRED_OP_MUL,
  SIMRED_OP_MIN,
  SIMRED_OP_MAX,
  SIMRED_OP_AND,
  SIMRED_OP_OR,
  SIMRED_OP_XOR
} simred_op;

typedef enum simred_kernel {
  SIMRED_HARRIS_K1 = 0,
  SIMRED_HARRIS_K2,
  SIMRED_HARRIS_K3,
  SIMRED_HARRIS_K4,
  SIMRED_HARRIS_K5,
  SIMRED_HARRIS_K6,
  SIMRED_HARRIS_K7,
  SIMRED_SHUFFLE,
  SIMRED_CATANZARO,
  SIMRED_NEW,
  SIMRED_NEW_BRANCHLESS
} simred_kernel;

typedef enum simred_scheduler {
  SIMRED_LOCKSTEP = 0,
  SIMRED_ROUND_ROBIN,
  SIMRED_SERIAL
} simred_scheduler;

typedef enum simred_data_format { SIMRED_TEXT = 0, SIMRED_RAW_LE } simred_data_format;
typedef enum simred_report_format { SIMRED_CSV = 0, SIMRED_JSON } simred_report_format;

typedef struct simred_launch_config {
  uint64_t global_size;
  uint32_t local_size;
  uint32_t wavefront_width;
  uint32_t num_banks;
  uint32_t segment_bytes;
  uint32_t elem_bytes;
  uint64_t local_mem_words;
  simred_scheduler scheduler;
  int hazard_detection;
} simred_launch_config;

typedef struct simred_metrics {
  uint64_t wavefront_issues;
  uint64_t divergent_branches;
  uint64_t barriers;
  uint64_t global_transactions;
  uint64_t local_accesses;
  uint64_t bank_conflict_extra;
  uint64_t shfl_ops;
} simred_metrics;

typedef struct simred_cost_model {
  double alu;
  double global_transaction;
  double local_access;
  double barrier;
  double shfl;
} simred_cost_model;

/* local_size / global_size of 0 take the launch config's values. */
typedef struct simred_kernel_spec {
  simred_kernel kernel;
  simred_op op;
  simred_dtype dtype;
  uint32_t unroll;
  uint32_t local_size;
  uint64_t global_size;
} simred_kernel_spec;

/* F32 values are stored exactly in f64. */
typedef struct simred_scalar {
  simred_dtype dtype;
  int64_t i64;
  double f64;
} simred_scalar;

typedef struct simred_reduce_result {
  simred_scalar value;
  simred_metrics total;
  simred_metrics stage1;
  simred_metrics stage2;
  simred_metrics stage1_tree; /* counters booked inside stage 1's local tree */
  uint32_t launches;
} simred_reduce_result;

typedef struct simred_hazard {
  uint32_t stage; /* 1 or 2 */
  uint64_t group;
  uint64_t epoch;
  const char* array;
  uint64_t address;
  uint32_t writer;
  uint32_t other;
  int other_writes;
} simred_hazard;

/* Strings are owned by the report and live as long as it does. */
typedef struct simred_bench_row {
  const char* kernel;
  uint32_t unroll;
  uint64_t n;
  const char* op;
  const char* dtype;
  int result_ok;
  simred_metrics metrics;
  double sim_cycles;
  double speedup;
  const char* value;
  const char* error;
} simred_bench_row;

typedef struct simred_buffer simred_buffer;
typedef struct simred_report simred_report;
typedef struct simred_hazard_list simred_hazard_list;
typedef struct simred_config simred_config;

SIMRED_API const char* simred_version(void);
SIMRED_API const char* simred_last_error(void);
SIMRED_API const char* simred_status_name(simred_status status);

SIMRED_API void simred_launch_config_default(simred_launch_config* cfg);
SIMRED_API void simred_cost_model_default(simred_cost_model* cost);
SIMRED_API void simred_kernel_spec_default(simred_kernel_spec* spec);

SIMRED_API const char* simred_kernel_name(simred_kernel kernel);
SIMRED_API simred_status simred_kernel_from_name(const char* name, simred_kernel* out);
SIMRED_API const char* simred_op_name(simred_op op);
SIMRED_API simred_status simred_op_from_name(const char* name, simred_op* out);
SIMRED_API const char* simred_dtype_name(simred_dtype dtype);
SIMRED_API simred_status simred_dtype_from_name(const char* name, simred_dtype* out);
SIMRED_API const char* simred_scheduler_name(simred_scheduler scheduler);
SIMRED_API simred_status simred_scheduler_from_name(const char* name, simred_scheduler* out);

/* Buffers */
SIMRED_API simred_status simred_buffer_from_i64(const int64_t* values, uint64_t n, simred_buffer** out);
SIMRED_API simred_status simred_buffer_from_f32(const float* values, uint64_t n, simred_buffer** out);
SIMRED_API simred_status simred_buffer_from_f64(const double* values, uint64_t n, simred_buffer** out);
SIMRED_API simred_status simred_buffer_generate_uniform_int(uint64_t n, simred_dtype dtype, int64_t lo, int64_t hi,
                                                            uint64_t seed, simred_buffer** out);
SIMRED_API simred_status simred_buffer_generate_uniform_float(uint64_t n, simred_dtype dtype, double lo, double hi,
                                                              uint64_t seed, simred_buffer** out);
SIMRED_API simred_status simred_buffer_generate_constant(uint64_t n, simred_dtype dtype, double value,
                                                         simred_buffer** out);
SIMRED_API simred_status simred_buffer_load(const char* path, simred_data_format format, simred_dtype dtype,
                                            simred_buffer** out);
SIMRED_API simred_status simred_buffer_save(const simred_buffer* buffer, const char* path,
                                            simred_data_format format);
SIMRED_API uint64_t simred_buffer_length(const simred_buffer* buffer);
SIMRED_API simred_dtype simred_buffer_dtype(const simred_buffer* buffer);
SIMRED_API simred_status simred_buffer_get(const simred_buffer* buffer, uint64_t index, simred_scalar* out);
SIMRED_API void simred_buffer_free(simred_buffer* buffer);

/* Writes the scalar's shortest round-trip text into buf (always terminated). */
SIMRED_API simred_status simred_scalar_format(const simred_scalar* value, char* buf, size_t capacity);

/* Kernels */
SIMRED_API simred_status simred_reduce(const simred_buffer* data, const simred_kernel_spec* spec,
                                       const simred_launch_config* cfg, simred_reduce_result* out);
/* Runs both stages with hazard detection and collects the hazards of each. */
SIMRED_API simred_status simred_hazards(const simred_buffer* data, const simred_kernel_spec* spec,
                                        const simred_launch_config* cfg, simred_hazard_list** out);
SIMRED_API size_t simred_hazard_count(const simred_hazard_list* list);
SIMRED_API simred_status simred_hazard_get(const simred_hazard_list* list, size_t index, simred_hazard* out);
SIMRED_API void simred_hazard_list_free(simred_hazard_list* list);
/* Text listing of both stage programs; release with simred_string_free. */
SIMRED_API simred_status simred_kernel_listing(const simred_kernel_spec* spec, const simred_launch_config* cfg,
                                               char** out);

/* Oracles */
SIMRED_API simred_status simred_reduce_sequential(const simred_buffer* data, simred_op op, simred_scalar* out);
SIMRED_API simred_status simred_reduce_pairwise(const simred_buffer* data, simred_op op, simred_scalar* out);
SIMRED_API simred_status simred_kahan_sum(const simred_buffer* data, simred_scalar* out);
SIMRED_API double simred_float_error_bound(uint64_t n, double max_abs, simred_dtype width);
SIMRED_API simred_status simred_verify(const simred_buffer* data, simred_op op, const simred_scalar* value,
                                       int* ok);

/* Machine primitives */
SIMRED_API simred_status simred_coalesce_transactions(const uint64_t* element_indices, size_t count,
                                                      uint32_t elem_bytes, uint32_t segment_bytes,
                                                      uint64_t* out);
SIMRED_API simred_status simred_bank_conflict_degree(const uint64_t* word_addresses, size_t count,
                                                     uint32_t num_banks, uint32_t* out);
SIMRED_API double simred_estimate_cycles(const simred_metrics* metrics, const simred_cost_model* cost);

/* Benchmarks and reports */
SIMRED_API simred_status simred_benchmark(const simred_buffer* data, const simred_kernel_spec* specs, size_t count,
                                          const simred_launch_config* cfg, const simred_cost_model* cost,
                                          unsigned threads, simred_report** out);
SIMRED_API simred_status simred_sweep(const simred_buffer* data, const uint32_t* factors, size_t count,
                                      simred_op op, const simred_launch_config* cfg,
                                      const simred_cost_model* cost, unsigned threads, simred_report** out);
SIMRED_API size_t simred_report_row_count(const simred_report* report);
SIMRED_API simred_status simred_report_row(const simred_report* report, size_t index, simred_bench_row* out);
SIMRED_API int simred_report_all_ok(const simred_report* report);
SIMRED_API simred_status simred_report_render(const simred_report* report, simred_report_format format,
                                              char** out);
SIMRED_API simred_status simred_report_write(const simred_report* report, simred_report_format format,
                                             const char* path);
SIMRED_API void simred_report_free(simred_report* report);

/* Config files */
SIMRED_API simred_status simred_config_load(const char* path, simred_config** out);
SIMRED_API size_t simred_config_count(const simred_config* config);
SIMRED_API simred_status simred_config_entry(const simred_config* config, size_t index, const char** key,
                                             const char** value);
SIMRED_API void simred_config_free(simred_config* config);

SIMRED_API void simred_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* SIMRED_H */
