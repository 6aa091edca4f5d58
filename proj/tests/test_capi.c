#include <math.h>
#include <stdio.h>
#include <string.h>

#include "simred/simred.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond);   \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static void test_reduce(void) {
  int64_t values[16];
  for (int i = 0; i < 16; ++i) values[i] = i + 1;
  simred_buffer* buf = NULL;
  EXPECT(simred_buffer_from_i64(values, 16, &buf) == SIMRED_OK);
  EXPECT(simred_buffer_length(buf) == 16);

  simred_launch_config cfg;
  simred_launch_config_default(&cfg);
  cfg.global_size = 8;
  cfg.local_size = 4;
  cfg.wavefront_width = 4;
  simred_kernel_spec spec;
  simred_kernel_spec_default(&spec);

  for (int k = SIMRED_HARRIS_K1; k <= SIMRED_NEW_BRANCHLESS; ++k) {
    simred_reduce_result res;
    spec.kernel = (simred_kernel)k;
    EXPECT(simred_reduce(buf, &spec, &cfg, &res) == SIMRED_OK);
    EXPECT(res.value.i64 == 136);
  }

  simred_scalar seq;
  EXPECT(simred_reduce_sequential(buf, SIMRED_OP_ADD, &seq) == SIMRED_OK && seq.i64 == 136);
  int ok = 0;
  EXPECT(simred_verify(buf, SIMRED_OP_ADD, &seq, &ok) == SIMRED_OK && ok == 1);

  spec.kernel = SIMRED_CATANZARO;
  spec.dtype = SIMRED_F64;
  simred_reduce_result res;
  EXPECT(simred_reduce(buf, &spec, &cfg, &res) == SIMRED_ERR_TYPE_MISMATCH);
  EXPECT(strlen(simred_last_error()) > 0);

  spec.kernel = (simred_kernel)99;
  EXPECT(simred_reduce(buf, &spec, &cfg, &res) == SIMRED_ERR_INVALID_ARGUMENT);
  EXPECT(simred_reduce(NULL, &spec, &cfg, &res) == SIMRED_ERR_INVALID_ARGUMENT);
  simred_buffer_free(buf);
}

static void test_names(void) {
  simred_kernel k;
  EXPECT(simred_kernel_from_name("new-branchless", &k) == SIMRED_OK && k == SIMRED_NEW_BRANCHLESS);
  EXPECT(strcmp(simred_kernel_name(SIMRED_HARRIS_K3), "harris-k3") == 0);
  EXPECT(simred_kernel_from_name("nope", &k) == SIMRED_ERR_INVALID_ARGUMENT);
  simred_op op;
  EXPECT(simred_op_from_name("xor", &op) == SIMRED_OK && op == SIMRED_OP_XOR);
  EXPECT(strcmp(simred_status_name(SIMRED_ERR_GEOMETRY), "GeometryError") == 0);
}

static void test_oracles(void) {
  double big = ldexp(1.0, 100);
  double xs[3] = {1.5, big, -big};
  simred_buffer* buf = NULL;
  EXPECT(simred_buffer_from_f64(xs, 3, &buf) == SIMRED_OK);
  simred_scalar s;
  EXPECT(simred_reduce_sequential(buf, SIMRED_OP_ADD, &s) == SIMRED_OK && s.f64 == 0.0);
  EXPECT(simred_kahan_sum(buf, &s) == SIMRED_OK && s.f64 == 1.5);
  char text[64];
  EXPECT(simred_scalar_format(&s, text, sizeof text) == SIMRED_OK && strcmp(text, "1.5") == 0);
  simred_buffer_free(buf);
  EXPECT(simred_float_error_bound(1, 3.0, SIMRED_F64) == 0.0);

  uint64_t idx[64];
  for (int i = 0; i < 64; ++i) idx[i] = (uint64_t)i;
  uint64_t tx = 0;
  EXPECT(simred_coalesce_transactions(idx, 64, 4, 128, &tx) == SIMRED_OK && tx == 2);
  uint32_t deg = 0;
  for (int i = 0; i < 32; ++i) idx[i] = 2 * (uint64_t)i;
  EXPECT(simred_bank_conflict_degree(idx, 32, 32, &deg) == SIMRED_OK && deg == 2);

  simred_metrics m;
  memset(&m, 0, sizeof m);
  m.wavefront_issues = 10;
  m.global_transactions = 2;
  simred_cost_model cost;
  simred_cost_model_default(&cost);
  EXPECT(simred_estimate_cycles(&m, &cost) == 210.0);
}

static void test_sweep_and_hazards(void) {
  simred_buffer* buf = NULL;
  EXPECT(simred_buffer_generate_uniform_int(4096, SIMRED_I64, -50, 50, 1, &buf) == SIMRED_OK);
  simred_launch_config cfg;
  simred_launch_config_default(&cfg);
  cfg.local_size = 128;
  cfg.global_size = 512;
  simred_cost_model cost;
  simred_cost_model_default(&cost);
  uint32_t factors[3] = {1, 2, 8};
  simred_report* rep = NULL;
  EXPECT(simred_sweep(buf, factors, 3, SIMRED_OP_ADD, &cfg, &cost, 2, &rep) == SIMRED_OK);
  EXPECT(simred_report_row_count(rep) == 4);
  EXPECT(simred_report_all_ok(rep) == 1);
  simred_bench_row row;
  EXPECT(simred_report_row(rep, 0, &row) == SIMRED_OK && row.speedup == 1.0);
  EXPECT(strcmp(row.kernel, "catanzaro") == 0);
  EXPECT(simred_report_row(rep, 9, &row) == SIMRED_ERR_OUT_OF_BOUNDS);
  char* csv = NULL;
  EXPECT(simred_report_render(rep, SIMRED_CSV, &csv) == SIMRED_OK);
  EXPECT(strncmp(csv, "kernel,F,n,op,result_ok", 23) == 0);
  simred_string_free(csv);
  simred_report_free(rep);

  simred_kernel_spec spec;
  simred_kernel_spec_default(&spec);
  spec.kernel = SIMRED_NEW_BRANCHLESS;
  simred_hazard_list* hz = NULL;
  EXPECT(simred_hazards(buf, &spec, &cfg, &hz) == SIMRED_OK);
  EXPECT(simred_hazard_count(hz) > 0);
  simred_hazard h;
  EXPECT(simred_hazard_get(hz, 0, &h) == SIMRED_OK && h.writer != h.other);
  simred_hazard_list_free(hz);

  spec.kernel = SIMRED_CATANZARO;
  EXPECT(simred_hazards(buf, &spec, &cfg, &hz) == SIMRED_OK);
  EXPECT(simred_hazard_count(hz) == 0);
  simred_hazard_list_free(hz);

  char* listing = NULL;
  EXPECT(simred_kernel_listing(&spec, &cfg, &listing) == SIMRED_OK && strstr(listing, "barrier") != NULL);
  simred_string_free(listing);
  simred_buffer_free(buf);
}

int main(void) {
  EXPECT(simred_version() != NULL);
  test_names();
  test_reduce();
  test_oracles();
  test_sweep_and_hazards();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  puts("capi ok");
  return 0;
}
