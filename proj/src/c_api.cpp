#include "stpuf/stpuf.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "stpuf/calibration.hpp"
#include "stpuf/config.hpp"
#include "stpuf/error.hpp"
#include "stpuf/experiments.hpp"
#include "stpuf/metrics.hpp"
#include "stpuf/nist.hpp"

struct stpuf_context {
  stpuf::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

template <class F>
stpuf_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return STPUF_OK;
  } catch (const stpuf::Error& e) {
    last_error = e.what();
    return static_cast<stpuf_status>(static_cast<int>(e.category()));
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return STPUF_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return STPUF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return STPUF_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return STPUF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) stpuf::fail(stpuf::ErrorCategory::Argument, std::string(what) + " must not be NULL");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const nlohmann::json& j) {
  if (out) *out = duplicate(j.dump());
}

std::vector<std::string> list(const char* csv) {
  std::vector<std::string> out;
  if (!csv) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string opt(const char* s) { return s ? s : ""; }

}  // namespace

extern "C" {

const char* stpuf_version(void) { return "1.0.0"; }

const char* stpuf_status_name(int status) {
  if (status == STPUF_OK) return "ok";
  if (status < 2 || status > 9) return "unknown";
  return stpuf::category_name(static_cast<stpuf::ErrorCategory>(status)).data();
}

const char* stpuf_last_error(void) { return last_error.c_str(); }

void stpuf_string_free(char* s) { std::free(s); }

stpuf_status stpuf_context_create(stpuf_context** out) {
  return guarded([&] {
    need(out, "out");
    *out = new stpuf_context{stpuf::default_config()};
  });
}

stpuf_status stpuf_context_load(const char* path, stpuf_context** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new stpuf_context{stpuf::load_config(path)};
  });
}

stpuf_status stpuf_context_from_json(const char* json_text, stpuf_context** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      stpuf::fail(stpuf::ErrorCategory::Config, std::string("config: ") + e.what());
    }
    *out = new stpuf_context{stpuf::config_from_json(j)};
  });
}

void stpuf_context_destroy(stpuf_context* ctx) { delete ctx; }

stpuf_status stpuf_context_save(const stpuf_context* ctx, const char* path) {
  return guarded([&] {
    need(ctx, "ctx");
    need(path, "path");
    stpuf::save_config(path, ctx->config);
  });
}

stpuf_status stpuf_context_to_json(const stpuf_context* ctx, char** json_out) {
  return guarded([&] {
    need(ctx, "ctx");
    need(json_out, "json_out");
    *json_out = duplicate(stpuf::config_to_json(ctx->config).dump(2));
  });
}

stpuf_status stpuf_context_hash(const stpuf_context* ctx, char* buf, size_t len) {
  return guarded([&] {
    need(ctx, "ctx");
    need(buf, "buf");
    stpuf::require(len >= 17, "hash buffer needs at least 17 bytes");
    const std::string h = stpuf::config_hash(ctx->config);
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

stpuf_status stpuf_context_seed(const stpuf_context* ctx, uint64_t* seed) {
  return guarded([&] {
    need(ctx, "ctx");
    need(seed, "seed");
    *seed = ctx->config.seed;
  });
}

stpuf_status stpuf_context_set_seed(stpuf_context* ctx, uint64_t seed) {
  return guarded([&] {
    need(ctx, "ctx");
    ctx->config.seed = seed;
    ctx->config.variation.master_seed = seed;
  });
}

stpuf_status stpuf_parse_duration(const char* text, double* seconds) {
  return guarded([&] {
    need(text, "text");
    need(seconds, "seconds");
    *seconds = stpuf::parse_duration(text);
  });
}

stpuf_status stpuf_sensitivity_ratio(const stpuf_context* ctx, double delta_vth, double* out) {
  return guarded([&] {
    need(ctx, "ctx");
    need(out, "out");
    *out = stpuf::sensitivity_ratio(delta_vth, ctx->config.sensor.base.sense_rails, ctx->config.device);
  });
}

stpuf_status stpuf_run_experiment(const stpuf_context* ctx, const char* name, const char* out_dir,
                                  char** summary_json) {
  return guarded([&] {
    need(ctx, "ctx");
    need(name, "name");
    need(out_dir, "out_dir");
    const auto r = stpuf::run_experiment(name, ctx->config, out_dir);
    nlohmann::json j = r.summary;
    j["files"] = r.files;
    emit(summary_json, j);
  });
}

stpuf_status stpuf_calibrate(stpuf_context* ctx, char** report_json) {
  return guarded([&] {
    need(ctx, "ctx");
    const auto search = stpuf::default_search();
    auto report = stpuf::calibrate_constants(ctx->config, stpuf::default_targets(), search,
                                             stpuf::held_out_checks());
    const nlohmann::json prov = stpuf::report_to_json(report, search);
    if (report.iterations > 0 || ctx->config.provenance.is_null()) report.config.provenance = prov;
    ctx->config = report.config;
    emit(report_json, prov);
  });
}

stpuf_status stpuf_sensor_sim(const stpuf_context* ctx, const char* usages, const char* variants,
                              const char* out_csv, const char* histogram_csv, char** summary_json) {
  return guarded([&] {
    need(ctx, "ctx");
    need(out_csv, "out_csv");
    stpuf::SensorSimOptions o;
    o.usages = list(usages);
    o.variants = list(variants);
    o.out = out_csv;
    o.histogram_out = opt(histogram_csv);
    emit(summary_json, stpuf::sensor_sim(ctx->config, o));
  });
}

void stpuf_arbiter_options_default(stpuf_arbiter_options* o) {
  if (!o) return;
  o->stages = 20;
  o->kind = "st";
  o->chips = 500;
  o->challenges = 128;
  o->repeats = 11;
  o->noise = 1;
}

stpuf_status stpuf_arbiter_sim(const stpuf_context* ctx, const stpuf_arbiter_options* o,
                               const char* out_path, char** summary_json) {
  return guarded([&] {
    need(ctx, "ctx");
    need(o, "options");
    need(out_path, "out_path");
    stpuf::ArbiterSimOptions a;
    const std::string kind = opt(o->kind);
    if (kind == "inv") a.kind = stpuf::GateKind::Inverter;
    else if (kind == "st") a.kind = stpuf::GateKind::SchmittTrigger;
    else stpuf::fail(stpuf::ErrorCategory::Argument, "arbiter kind must be 'inv' or 'st', got '" + kind + "'");
    a.stages = o->stages;
    a.chips = o->chips;
    a.challenges = o->challenges;
    a.repeats = o->repeats;
    a.noise = o->noise != 0;
    a.out = out_path;
    emit(summary_json, stpuf::arbiter_sim(ctx->config, a));
  });
}

void stpuf_sram_options_default(stpuf_sram_options* o) {
  if (!o) return;
  o->kinds = nullptr;
  o->rows = 128;
  o->cols = 128;
  o->vdd_lo = 0.6;
  o->vdd_hi = 1.0;
  o->vdd_step = 0.05;
  o->cycles = 100;
}

stpuf_status stpuf_sram_sim(const stpuf_context* ctx, const stpuf_sram_options* o, const char* out_csv,
                            const char* fingerprint_path, char** summary_json) {
  return guarded([&] {
    need(ctx, "ctx");
    need(o, "options");
    need(out_csv, "out_csv");
    stpuf::SramSimOptions s;
    for (const auto& k : list(o->kinds)) s.kinds.push_back(stpuf::parse_bitcell_kind(k));
    s.rows = o->rows;
    s.cols = o->cols;
    s.vdd_lo = o->vdd_lo;
    s.vdd_hi = o->vdd_hi;
    s.vdd_step = o->vdd_step;
    s.cycles = o->cycles;
    s.out = out_csv;
    s.fingerprint_out = opt(fingerprint_path);
    emit(summary_json, stpuf::sram_sim(ctx->config, s));
  });
}

stpuf_status stpuf_metrics_report(const stpuf_context* ctx, const char* in_path, int bit_file,
                                  const char* report_path, char** report_json) {
  return guarded([&] {
    need(ctx, "ctx");
    need(in_path, "in_path");
    emit(report_json, stpuf::metrics_report(ctx->config, in_path, bit_file != 0, opt(report_path)));
  });
}

stpuf_status stpuf_nist_suite(const stpuf_context* ctx, const uint8_t* bits, size_t n,
                              stpuf_nist_row* rows, size_t capacity, size_t* count) {
  return guarded([&] {
    need(ctx, "ctx");
    need(count, "count");
    if (n) need(bits, "bits");
    const auto results = stpuf::nist_suite(std::span<const std::uint8_t>(bits, n), ctx->config.nist.params);
    *count = results.size();
    for (size_t i = 0; i < results.size() && i < capacity; ++i) {
      need(rows, "rows");
      std::memset(rows[i].test_name, 0, sizeof rows[i].test_name);
      std::strncpy(rows[i].test_name, results[i].test_name.c_str(), sizeof rows[i].test_name - 1);
      rows[i].p_value = results[i].p_value;
      rows[i].pass = results[i].pass;
      rows[i].insufficient_data = results[i].insufficient_data;
    }
  });
}

stpuf_status stpuf_hamming_distance(const uint8_t* a, const uint8_t* b, size_t n, size_t* out) {
  return guarded([&] {
    need(out, "out");
    if (n) {
      need(a, "a");
      need(b, "b");
    }
    *out = stpuf::hamming_distance(std::span<const std::uint8_t>(a, n), std::span<const std::uint8_t>(b, n));
  });
}

}  // extern "C"
