// Command-line front end. Talks to the engine only through the C API.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stpuf/stpuf.h"

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(stpuf_status s) {
  if (s != STPUF_OK) throw Failure{static_cast<int>(s), stpuf_last_error()};
}

void print_owned(char* text) {
  if (!text) return;
  std::cout << text << '\n';
  stpuf_string_free(text);
}

struct Context {
  stpuf_context* ctx = nullptr;
  ~Context() { stpuf_context_destroy(ctx); }
};

void open_context(Context& c, const std::string& path) {
  if (path.empty()) check(stpuf_context_create(&c.ctx));
  else check(stpuf_context_load(path.c_str(), &c.ctx));
}

void bad_argument(const std::string& message) { throw Failure{STPUF_ERR_ARGUMENT, message}; }

void parse_array(const std::string& text, int& rows, int& cols) {
  const auto x = text.find('x');
  if (x == std::string::npos) bad_argument("--array expects ROWSxCOLS, got '" + text + "'");
  try {
    rows = std::stoi(text.substr(0, x));
    cols = std::stoi(text.substr(x + 1));
  } catch (const std::exception&) {
    bad_argument("--array expects ROWSxCOLS, got '" + text + "'");
  }
}

void parse_grid(const std::string& text, double& lo, double& hi, double& step) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) bad_argument("--vdd-grid expects LO:HI:STEP, got '" + text + "'");
  try {
    lo = std::stod(text.substr(0, a));
    hi = std::stod(text.substr(a + 1, b - a - 1));
    step = std::stod(text.substr(b + 1));
  } catch (const std::exception&) {
    bad_argument("--vdd-grid expects LO:HI:STEP, got '" + text + "'");
  }
}

int report_failure(int code, const std::string& message) {
  nlohmann::json j{{"error", {{"category", stpuf_status_name(code)}, {"code", code}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schmitt-trigger recycling sensor and PUF simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(stpuf_version()));

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (JSON); defaults are built in")
        ->check(CLI::ExistingFile);
  };

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit free model constants and write the calibrated config");
  add_config(cal);
  std::string cal_out;
  cal->add_option("--out", cal_out, "Where to write the calibrated config")->required();

  // sensor-sim
  auto* sensor = app.add_subcommand("sensor-sim", "Recycling-sensor detection experiment");
  add_config(sensor);
  std::string usages, variants, sensor_out, hist_out;
  sensor->add_option("--usages", usages, "Comma-separated usage durations, e.g. 0.1s,10s,1.5min,15min,1day");
  sensor->add_option("--variants", variants, "Comma-separated designs (inv_uncal, inv_cal, inv_hvt_cal, st_hvt_cal_boost)");
  sensor->add_option("--out", sensor_out, "Per-chip readings CSV")->required();
  sensor->add_option("--histogram", hist_out, "Tick-delta histogram CSV");

  // arbiter-sim
  auto* arb = app.add_subcommand("arbiter-sim", "Generate an arbiter-PUF CRP dataset");
  add_config(arb);
  stpuf_arbiter_options ao;
  stpuf_arbiter_options_default(&ao);
  std::string kind = "st", arb_out;
  bool no_noise = false;
  arb->add_option("--stages", ao.stages, "Stage count")->check(CLI::Range(1, 64));
  arb->add_option("--kind", kind, "Stage gate kind")->check(CLI::IsMember({"st", "inv"}));
  arb->add_option("--chips", ao.chips, "Chip count");
  arb->add_option("--challenges", ao.challenges, "Challenges per chip");
  arb->add_option("--repeats", ao.repeats, "Evaluations per challenge");
  arb->add_flag("--no-noise", no_noise, "Evaluate every repeat at nominal conditions");
  arb->add_option("--out", arb_out, "CRP dataset path")->required();

  // sram-sim
  auto* sram = app.add_subcommand("sram-sim", "SRAM-PUF fault sweep over supply voltage");
  add_config(sram);
  stpuf_sram_options so;
  stpuf_sram_options_default(&so);
  std::string kinds = "6t,8t,7t", array = "128x128", grid = "0.6:1.0:0.05", sram_out, fingerprint;
  sram->add_option("--kind", kinds, "Bitcell kinds: 6t, 8t, 7t or a comma-separated list");
  sram->add_option("--array", array, "Array size ROWSxCOLS");
  sram->add_option("--vdd-grid", grid, "Supply grid LO:HI:STEP in volts");
  sram->add_option("--cycles", so.cycles, "Power cycles per supply point");
  sram->add_option("--out", sram_out, "Fault report CSV")->required();
  sram->add_option("--fingerprint", fingerprint, "Raw bit file of the registered responses");

  // metrics
  auto* met = app.add_subcommand("metrics", "HD statistics and NIST subset for a CRP dataset or bit file");
  add_config(met);
  std::string met_in, met_report;
  bool bits = false;
  met->add_option("--in", met_in, "CRP dataset or raw bit file")->required()->check(CLI::ExistingFile);
  met->add_flag("--bits", bits, "Treat the input as a raw bit file");
  met->add_option("--report", met_report, "JSON report path");

  // run
  auto* run = app.add_subcommand("run", "Run a named experiment pipeline");
  add_config(run);
  std::string experiment, out_dir = "results";
  run->add_option("--experiment", experiment, "fig1, fig2b, fig4a, fig4b, fig4c, fig5, fig6e or nist")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2b", "fig4a", "fig4b", "fig4c", "fig5", "fig6e", "nist"}));
  run->add_option("--out-dir", out_dir, "Output directory");

  // default-config
  auto* def = app.add_subcommand("default-config", "Write the built-in config");
  std::string def_out;
  def->add_option("--out", def_out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_failure(STPUF_ERR_ARGUMENT, e.what());
  }

  try {
    Context c;
    open_context(c, config_path);
    char* text = nullptr;
    if (*cal) {
      check(stpuf_calibrate(c.ctx, &text));
      check(stpuf_context_save(c.ctx, cal_out.c_str()));
    } else if (*sensor) {
      check(stpuf_sensor_sim(c.ctx, usages.c_str(), variants.c_str(), sensor_out.c_str(),
                             hist_out.empty() ? nullptr : hist_out.c_str(), &text));
    } else if (*arb) {
      ao.kind = kind.c_str();
      ao.noise = no_noise ? 0 : 1;
      check(stpuf_arbiter_sim(c.ctx, &ao, arb_out.c_str(), &text));
    } else if (*sram) {
      so.kinds = kinds.c_str();
      parse_array(array, so.rows, so.cols);
      parse_grid(grid, so.vdd_lo, so.vdd_hi, so.vdd_step);
      check(stpuf_sram_sim(c.ctx, &so, sram_out.c_str(), fingerprint.empty() ? nullptr : fingerprint.c_str(),
                           &text));
    } else if (*met) {
      check(stpuf_metrics_report(c.ctx, met_in.c_str(), bits ? 1 : 0,
                                 met_report.empty() ? nullptr : met_report.c_str(), &text));
    } else if (*run) {
      check(stpuf_run_experiment(c.ctx, experiment.c_str(), out_dir.c_str(), &text));
    } else if (*def) {
      check(stpuf_context_save(c.ctx, def_out.c_str()));
    }
    print_owned(text);
  } catch (const Failure& f) {
    return report_failure(f.code, f.message);
  }
  return 0;
}
