// simred command-line front end. Talks to the simulator only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "simred/simred.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(simred_status s) {
  if (s != SIMRED_OK) throw RuntimeError(std::string(simred_status_name(s)) + ": " + simred_last_error());
}

template <typename Enum>
Enum parse_name(simred_status (*parse)(const char*, Enum*), const std::string& name) {
  Enum v{};
  if (parse(name.c_str(), &v) != SIMRED_OK) throw UsageError(simred_last_error());
  return v;
}

struct BufferDeleter {
  void operator()(simred_buffer* b) const { simred_buffer_free(b); }
};
struct ReportDeleter {
  void operator()(simred_report* r) const { simred_report_free(r); }
};
struct HazardDeleter {
  void operator()(simred_hazard_list* h) const { simred_hazard_list_free(h); }
};
struct ConfigDeleter {
  void operator()(simred_config* c) const { simred_config_free(c); }
};
using BufferPtr = std::unique_ptr<simred_buffer, BufferDeleter>;
using ReportPtr = std::unique_ptr<simred_report, ReportDeleter>;

struct Options {
  std::string kernel = "catanzaro";
  std::uint64_t n = 1u << 20;
  std::string op = "add";
  std::string dtype = "i64";
  std::uint32_t unroll = 1;
  std::uint32_t local_size = 256;
  std::uint64_t groups = 8;
  std::uint32_t wavefront = 64;
  std::uint32_t banks = 32;
  std::uint32_t segment_bytes = 128;
  std::uint32_t elem_bytes = 4;
  std::uint64_t local_mem_words = 4096;
  std::string scheduler = "lockstep";
  std::uint64_t seed = 1;
  std::string input;
  std::string format = "text";
  std::string dist;
  std::optional<double> lo;
  std::optional<double> hi;
  double value = 1;
  std::string out;
  std::string emit = "csv";
  unsigned threads = 1;
  std::string factors = "1,2,3,4,5,6,7,8,16";
  std::size_t limit = 20;
  std::string config;
  simred_cost_model cost{};
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key = value file; flags on the command line take precedence");
  cmd->add_option("--n", o.n, "number of generated elements");
  cmd->add_option("--op", o.op, "combiner")->check(CLI::IsMember({"add", "mul", "min", "max", "and", "or", "xor"}));
  cmd->add_option("--dtype", o.dtype, "element type")->check(CLI::IsMember({"i64", "f32", "f64"}));
  cmd->add_option("--local-size", o.local_size, "work-items per work-group");
  cmd->add_option("--groups", o.groups, "work-groups in stage 1 (global size = groups x local size)");
  cmd->add_option("--wavefront", o.wavefront, "lanes per wavefront");
  cmd->add_option("--banks", o.banks, "local memory banks");
  cmd->add_option("--segment-bytes", o.segment_bytes, "coalescing segment size");
  cmd->add_option("--elem-bytes", o.elem_bytes, "bytes per element for the transaction model");
  cmd->add_option("--local-mem-words", o.local_mem_words, "local memory capacity per work-group");
  cmd->add_option("--scheduler", o.scheduler, "wavefront scheduling policy")
      ->check(CLI::IsMember({"lockstep", "rr", "serial"}));
  cmd->add_option("--seed", o.seed, "generator seed");
  cmd->add_option("--dist", o.dist, "generated distribution (default: uniform-int for i64, uniform-float otherwise)")
      ->check(CLI::IsMember({"uniform-int", "uniform-float", "constant"}));
  cmd->add_option("--lo", o.lo, "distribution lower bound");
  cmd->add_option("--hi", o.hi, "distribution upper bound");
  cmd->add_option("--value", o.value, "value of the constant distribution");
  cmd->add_option("--input", o.input, "read the dataset from a file instead of generating it");
  cmd->add_option("--format", o.format, "input file format")->check(CLI::IsMember({"text", "raw"}));
  cmd->add_option("--threads", o.threads, "benchmark rows evaluated concurrently");
  cmd->add_option("--cost-alu", o.cost.alu, "cycles per wavefront instruction issue");
  cmd->add_option("--cost-global", o.cost.global_transaction, "cycles per global memory transaction");
  cmd->add_option("--cost-local", o.cost.local_access, "cycles per local access and per bank-conflict replay");
  cmd->add_option("--cost-barrier", o.cost.barrier, "cycles per barrier");
  cmd->add_option("--cost-shfl", o.cost.shfl, "cycles per shuffle");
}

void add_report(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "report path (default: standard output)");
  cmd->add_option("--emit", o.emit, "report format")->check(CLI::IsMember({"csv", "json"}));
}

simred_launch_config launch_config(const Options& o) {
  simred_launch_config cfg;
  simred_launch_config_default(&cfg);
  cfg.local_size = o.local_size;
  cfg.global_size = o.groups * o.local_size;
  cfg.wavefront_width = o.wavefront;
  cfg.num_banks = o.banks;
  cfg.segment_bytes = o.segment_bytes;
  cfg.elem_bytes = o.elem_bytes;
  cfg.local_mem_words = o.local_mem_words;
  cfg.scheduler = parse_name(simred_scheduler_from_name, o.scheduler);
  return cfg;
}

BufferPtr dataset(const Options& o) {
  const simred_dtype dtype = parse_name(simred_dtype_from_name, o.dtype);
  simred_buffer* b = nullptr;
  if (!o.input.empty()) {
    check(simred_buffer_load(o.input.c_str(), o.format == "raw" ? SIMRED_RAW_LE : SIMRED_TEXT, dtype, &b));
    return BufferPtr(b);
  }
  std::string dist = o.dist.empty() ? (dtype == SIMRED_I64 ? "uniform-int" : "uniform-float") : o.dist;
  if (dist == "constant") {
    check(simred_buffer_generate_constant(o.n, dtype, o.value, &b));
  } else if (dist == "uniform-int") {
    check(simred_buffer_generate_uniform_int(o.n, dtype, static_cast<std::int64_t>(o.lo.value_or(-1000)),
                                             static_cast<std::int64_t>(o.hi.value_or(1000)), o.seed, &b));
  } else {
    check(simred_buffer_generate_uniform_float(o.n, dtype, o.lo.value_or(-1.0), o.hi.value_or(1.0), o.seed, &b));
  }
  return BufferPtr(b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) parts.push_back(item);
  return parts;
}

std::vector<simred_kernel_spec> kernel_specs(const Options& o) {
  std::vector<std::string> names = split(o.kernel, ',');
  if (names.size() == 1 && names[0] == "all") {
    names.clear();
    for (int k = SIMRED_HARRIS_K1; k <= SIMRED_NEW_BRANCHLESS; ++k)
      names.emplace_back(simred_kernel_name(static_cast<simred_kernel>(k)));
  }
  if (names.empty()) throw UsageError("--kernel needs at least one kernel name");
  std::vector<simred_kernel_spec> specs;
  for (const auto& name : names) {
    simred_kernel_spec s;
    simred_kernel_spec_default(&s);
    s.kernel = parse_name(simred_kernel_from_name, name);
    s.op = parse_name(simred_op_from_name, o.op);
    s.dtype = parse_name(simred_dtype_from_name, o.dtype);
    s.unroll = o.unroll;
    specs.push_back(s);
  }
  return specs;
}

int finish_report(const Options& o, simred_report* report) {
  const simred_report_format fmt = o.emit == "json" ? SIMRED_JSON : SIMRED_CSV;
  if (o.out.empty()) {
    char* text = nullptr;
    check(simred_report_render(report, fmt, &text));
    std::fputs(text, stdout);
    simred_string_free(text);
  } else {
    check(simred_report_write(report, fmt, o.out.c_str()));
    for (std::size_t i = 0; i < simred_report_row_count(report); ++i) {
      simred_bench_row row;
      check(simred_report_row(report, i, &row));
      std::printf("%-15s F=%-3u %s  cycles=%.0f  speedup=%.4f\n", row.kernel, row.unroll,
                  row.result_ok ? "ok  " : "FAIL", row.sim_cycles, row.speedup);
    }
  }
  bool ok = simred_report_all_ok(report);
  bool raised = false;  // a kernel threw instead of producing a value
  if (!ok) {
    for (std::size_t i = 0; i < simred_report_row_count(report); ++i) {
      simred_bench_row row;
      check(simred_report_row(report, i, &row));
      if (row.result_ok) continue;
      std::fprintf(stderr, "simred: %s F=%u: %s\n", row.kernel, row.unroll, row.error);
      raised = raised || row.value[0] == '\0';
    }
  }
  if (raised) return kExitRuntime;
  return ok ? kExitOk : kExitVerification;
}

int cmd_run(const Options& o) {
  auto cfg = launch_config(o);
  auto specs = kernel_specs(o);
  auto data = dataset(o);
  simred_report* r = nullptr;
  check(simred_benchmark(data.get(), specs.data(), specs.size(), &cfg, &o.cost, o.threads, &r));
  ReportPtr report(r);
  return finish_report(o, report.get());
}

int cmd_sweep(const Options& o) {
  auto cfg = launch_config(o);
  std::vector<std::uint32_t> factors;
  for (const auto& f : split(o.factors, ',')) {
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(f, &used);
      if (used != f.size() || v == 0 || v > 4096) throw std::invalid_argument(f);
      factors.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--factors: '" + f + "' is not a positive integer");
    }
  }
  const simred_op op = parse_name(simred_op_from_name, o.op);
  auto data = dataset(o);
  simred_report* r = nullptr;
  check(simred_sweep(data.get(), factors.data(), factors.size(), op, &cfg, &o.cost, o.threads, &r));
  ReportPtr report(r);
  return finish_report(o, report.get());
}

int cmd_hazards(const Options& o) {
  auto cfg = launch_config(o);
  auto specs = kernel_specs(o);
  auto data = dataset(o);
  for (const auto& spec : specs) {
    simred_hazard_list* h = nullptr;
    check(simred_hazards(data.get(), &spec, &cfg, &h));
    std::unique_ptr<simred_hazard_list, HazardDeleter> list(h);
    const std::size_t count = simred_hazard_count(list.get());
    std::printf("%s: %zu hazard%s\n", simred_kernel_name(spec.kernel), count, count == 1 ? "" : "s");
    for (std::size_t i = 0; i < count && i < o.limit; ++i) {
      simred_hazard hz;
      check(simred_hazard_get(list.get(), i, &hz));
      std::printf("  stage %u group %llu epoch %llu %s[%llu]: wavefront %u writes, wavefront %u %s\n", hz.stage,
                  static_cast<unsigned long long>(hz.group), static_cast<unsigned long long>(hz.epoch), hz.array,
                  static_cast<unsigned long long>(hz.address), hz.writer, hz.other,
                  hz.other_writes ? "also writes" : "reads");
    }
    if (count > o.limit) std::printf("  ... %zu more\n", count - o.limit);
  }
  return kExitOk;
}

int cmd_ir(const Options& o) {
  auto cfg = launch_config(o);
  for (const auto& spec : kernel_specs(o)) {
    char* text = nullptr;
    check(simred_kernel_listing(&spec, &cfg, &text));
    std::printf("=== %s ===\n%s\n", simred_kernel_name(spec.kernel), text);
    simred_string_free(text);
  }
  return kExitOk;
}

// Turns `--config FILE` entries into leading `--key=value` arguments so that
// explicit flags, which come later, override them.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  simred_config* c = nullptr;
  if (simred_config_load(path.c_str(), &c) == SIMRED_ERR_PARSE) throw UsageError(simred_last_error());
  if (!c) throw RuntimeError(simred_last_error());
  std::unique_ptr<simred_config, ConfigDeleter> cfg(c);
  std::vector<std::string> out(args.begin(), args.begin() + 2);  // program, subcommand
  for (std::size_t i = 0; i < simred_config_count(cfg.get()); ++i) {
    const char* key = nullptr;
    const char* value = nullptr;
    check(simred_config_entry(cfg.get(), i, &key, &value));
    if (std::string(key) == "config") throw UsageError("config files cannot include other config files");
    out.push_back("--" + std::string(key) + "=" + value);
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  simred_cost_model_default(&o.cost);

  CLI::App app{"simred: SIMT reduction simulator"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* run = app.add_subcommand("run", "run kernels over one dataset and report metrics");
  add_common(run, o);
  add_report(run, o);
  run->add_option("--kernel", o.kernel, "kernel name, comma-separated list, or 'all'");
  run->add_option("--unroll", o.unroll, "unroll factor F");

  auto* sweep = app.add_subcommand("sweep", "Catanzaro baseline against the branchless kernel per unroll factor");
  add_common(sweep, o);
  add_report(sweep, o);
  sweep->add_option("--factors", o.factors, "comma-separated unroll factors (must include 1)");

  auto* hazards = app.add_subcommand("hazards", "list cross-wavefront local memory hazards");
  add_common(hazards, o);
  hazards->add_option("--kernel", o.kernel, "kernel name, comma-separated list, or 'all'");
  hazards->add_option("--unroll", o.unroll, "unroll factor F");
  hazards->add_option("--limit", o.limit, "hazards printed per kernel");

  auto* ir = app.add_subcommand("ir", "print the kernel programs");
  add_common(ir, o);
  ir->add_option("--kernel", o.kernel, "kernel name, comma-separated list, or 'all'");
  ir->add_option("--unroll", o.unroll, "unroll factor F");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return kExitUsage;
    }
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*hazards) return cmd_hazards(o);
    if (*ir) return cmd_ir(o);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "simred: %s\n", e.what());
    return kExitUsage;
  } catch (const RuntimeError& e) {
    std::fprintf(stderr, "simred: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "simred: %s\n", e.what());
    return kExitRuntime;
  }
}
