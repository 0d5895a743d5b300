// Command-line simulator for the compressive phase retrieval pipeline.
// All library access goes through the C interface in cpr/cpr.h; experiment
// configuration travels as JSON strings built from the parsed flags.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpr/cpr.h"

namespace {

using nlohmann::json;

struct Destroy {
  void operator()(cpr_signal* p) const { cpr_signal_destroy(p); }
  void operator()(cpr_measurements* p) const { cpr_measurements_destroy(p); }
  void operator()(cpr_recovery* p) const { cpr_recovery_destroy(p); }
  void operator()(cpr_table* p) const { cpr_table_destroy(p); }
};
template <typename T>
using Handle = std::unique_ptr<T, Destroy>;

void check(cpr_status status) {
  if (status != CPR_OK) {
    std::fprintf(stderr, "error: %s\n", cpr_last_error());
    std::exit(1);
  }
}

std::string take_string(char* owned) {
  std::string out(owned);
  cpr_string_destroy(owned);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    std::exit(1);
  }
}

std::string sibling_path(const std::string& out, const char* suffix) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + suffix;
}

cpr_render_format parse_format(const std::string& name) {
  if (name == "csv") return CPR_FORMAT_CSV;
  if (name == "json") return CPR_FORMAT_JSON;
  return CPR_FORMAT_GNUPLOT;
}

// ---- measure ---------------------------------------------------------

struct MeasureOptions {
  std::size_t n = 512;
  std::size_t k = 12;
  std::size_t measurements = 256;
  double snr_db = 0.0;
  std::string mode = "fourier";
  std::string anchor = "in-support";
  std::uint64_t seed = 1;
  std::string in;
  std::string out;
  std::string truth_out;
  bool binary = false;

  CLI::Option* snr_opt = nullptr;
  CLI::Option* in_opt = nullptr;
};

int run_measure(const MeasureOptions& o) {
  if (o.measurements % 4 != 0 || o.measurements == 0) {
    std::fprintf(stderr, "error: --measurements must be a positive multiple of 4\n");
    return 1;
  }
  const std::size_t blocks = o.measurements / 4;

  Handle<cpr_signal> x;
  if (!o.in.empty()) {
    cpr_signal* raw = nullptr;
    check(cpr_signal_load(o.in.c_str(), &raw));
    x.reset(raw);
  } else {
    cpr_anchor_mode anchor = CPR_ANCHOR_IN_SUPPORT;
    if (o.anchor == "uniform") anchor = CPR_ANCHOR_UNIFORM;
    else if (o.anchor == "fixed-unit") anchor = CPR_ANCHOR_FIXED_UNIT;
    cpr_signal* raw = nullptr;
    check(cpr_signal_random_sparse(o.n, o.k, o.seed, anchor, &raw));
    x.reset(raw);
  }

  Handle<cpr_measurements> m;
  cpr_measurements* raw = nullptr;
  if (o.mode == "fourier") {
    const double snr = o.snr_opt->count() > 0 ? o.snr_db
                                              : std::numeric_limits<double>::infinity();
    check(cpr_measure_fourier(x.get(), blocks, snr, o.seed, &raw));
  } else {
    if (o.snr_opt->count() > 0) {
      std::fprintf(stderr, "error: --snr-db applies to fourier measurements only\n");
      return 1;
    }
    const cpr_sensing_mode mode =
        o.mode == "gaussian" ? CPR_SENSING_GAUSSIAN : CPR_SENSING_BERNOULLI;
    check(cpr_measure_dense(x.get(), blocks, mode, o.seed, &raw));
  }
  m.reset(raw);

  check(cpr_measurements_save(m.get(), o.out.c_str(), o.binary ? 1 : 0));
  if (!o.truth_out.empty()) check(cpr_signal_save(x.get(), o.truth_out.c_str()));

  std::printf("wrote %s (mode %s, n %zu, blocks %zu, sigma2 %g)\n", o.out.c_str(),
              o.mode.c_str(), cpr_measurements_dimension(m.get()),
              cpr_measurements_blocks(m.get()), cpr_measurements_noise_variance(m.get()));
  return 0;
}

// ---- recover ---------------------------------------------------------

struct RecoverOptions {
  std::string in;
  std::string out;
  std::string truth;
  std::string epsilon_mode = "estimated";
  double fixed_epsilon = 0.0;
  double confidence = 0.9;
  bool anchor_row = false;
  double threshold = 1e-5;
  std::size_t max_ops = 0;
  double gap_tol = 0.0;
  double feasibility_tol = 0.0;
  std::string method = "auto";

  CLI::Option* epsilon_mode_opt = nullptr;
  CLI::Option* fixed_epsilon_opt = nullptr;
  CLI::Option* confidence_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* max_ops_opt = nullptr;
  CLI::Option* gap_tol_opt = nullptr;
  CLI::Option* feasibility_tol_opt = nullptr;
  CLI::Option* method_opt = nullptr;
};

int run_recover(const RecoverOptions& o) {
  cpr_measurements* mraw = nullptr;
  check(cpr_measurements_load(o.in.c_str(), &mraw));
  Handle<cpr_measurements> m(mraw);

  json opts = json::object();
  if (o.epsilon_mode_opt->count() > 0) opts["epsilon_mode"] = o.epsilon_mode;
  if (o.fixed_epsilon_opt->count() > 0) {
    opts["epsilon_mode"] = "fixed";
    opts["fixed_epsilon"] = o.fixed_epsilon;
  }
  if (o.confidence_opt->count() > 0) opts["epsilon_confidence"] = o.confidence;
  if (o.anchor_row) opts["append_anchor_row"] = true;
  if (o.threshold_opt->count() > 0) opts["success_threshold"] = o.threshold;
  if (o.max_ops_opt->count() > 0) opts["solver_max_ops"] = o.max_ops;
  if (o.gap_tol_opt->count() > 0) opts["solver_gap_tol"] = o.gap_tol;
  if (o.feasibility_tol_opt->count() > 0) opts["solver_feasibility_tol"] = o.feasibility_tol;
  if (o.method_opt->count() > 0) opts["solver_method"] = o.method;

  cpr_recovery* rraw = nullptr;
  const std::string opts_text = opts.dump();
  check(cpr_recover(m.get(), opts_text.c_str(), &rraw));
  Handle<cpr_recovery> r(rraw);

  std::printf("stage1 residual  %.6g\n", cpr_recovery_stage1_residual(r.get()));
  std::printf("epsilon          %.6g\n", cpr_recovery_epsilon(r.get()));
  std::printf("objective        %.6g\n", cpr_recovery_objective(r.get()));
  std::printf("solver residual  %.6g\n", cpr_recovery_solver_residual(r.get()));
  std::printf("iterations       %zu\n", cpr_recovery_iterations(r.get()));
  std::printf("converged        %s\n", cpr_recovery_converged(r.get()) ? "yes" : "no");

  if (!o.truth.empty()) {
    cpr_signal* traw = nullptr;
    check(cpr_signal_load(o.truth.c_str(), &traw));
    Handle<cpr_signal> truth(traw);
    double mse = 0.0;
    check(cpr_recovery_align(r.get(), truth.get(), &mse));
    std::printf("aligned mse      %.6g\n", mse);
    std::printf("success          %s\n", mse <= o.threshold ? "yes" : "no");
  }

  if (!o.out.empty()) {
    cpr_signal* eraw = nullptr;
    check(cpr_recovery_signal(r.get(), &eraw));
    Handle<cpr_signal> estimate(eraw);
    check(cpr_signal_save(estimate.get(), o.out.c_str()));
    std::printf("wrote %s\n", o.out.c_str());
  }
  return 0;
}

// ---- experiments -----------------------------------------------------

struct ExperimentOptions {
  std::size_t n = 512;
  std::vector<std::size_t> k{12};
  std::vector<std::size_t> m{256};
  std::size_t trials = 200;
  double snr_db = 0.0;
  std::vector<double> snr_grid;
  std::string variants = "both";
  std::string mode = "fourier";
  bool fix_first = false;
  std::vector<double> targets{0.95};
  std::size_t m_min = 16;
  std::size_t m_max = 0;
  std::size_t m_step = 4;
  double threshold = 1e-5;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool record_trials = false;
  bool full_scale = false;
  std::string epsilon_mode = "estimated";
  double fixed_epsilon = 0.0;
  double confidence = 0.9;
  std::size_t max_ops = 8000;
  std::string method = "auto";

  std::string out;
  std::string format = "csv";

  // Options that default inside the library are forwarded only when set.
  CLI::Option* n_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* m_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* snr_opt = nullptr;
  CLI::Option* snr_grid_opt = nullptr;
  CLI::Option* variants_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* fix_first_opt = nullptr;
  CLI::Option* targets_opt = nullptr;
  CLI::Option* m_min_opt = nullptr;
  CLI::Option* m_max_opt = nullptr;
  CLI::Option* m_step_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* full_scale_opt = nullptr;
  CLI::Option* epsilon_mode_opt = nullptr;
  CLI::Option* fixed_epsilon_opt = nullptr;
  CLI::Option* confidence_opt = nullptr;
  CLI::Option* max_ops_opt = nullptr;
  CLI::Option* method_opt = nullptr;
};

void add_experiment_options(CLI::App* cmd, ExperimentOptions& o, bool noise_sweep) {
  o.n_opt = cmd->add_option("-n,--n", o.n, "Signal dimension");
  o.k_opt = cmd->add_option("-k,--k", o.k, "Sparsity level(s)")->delimiter(',');
  if (!noise_sweep) {
    o.m_opt = cmd->add_option("-m,--measurements", o.m,
                              "Total measurement count(s), multiples of 4")
                  ->delimiter(',');
    o.snr_opt = cmd->add_option("--snr-db", o.snr_db,
                                "Add noise at this SNR (default: noiseless)");
  } else {
    o.m_opt = cmd->add_option("-m,--measurements", o.m,
                              "Total measurement count, a multiple of 4");
    o.snr_grid_opt =
        cmd->add_option("--snr", o.snr_grid, "SNR grid in dB")->delimiter(',');
    o.variants_opt = cmd->add_option("--variants", o.variants,
                                     "Anchor magnitude policy: fixed|random|both");
  }
  o.trials_opt = cmd->add_option("-t,--trials", o.trials, "Monte Carlo trials per point");
  o.mode_opt = cmd->add_option("--mode", o.mode, "Sensing mode: fourier|gaussian|bernoulli");
  o.fix_first_opt = cmd->add_flag("--fix-first", o.fix_first,
                                  "Pin the anchor entry to unit magnitude");
  o.threshold_opt =
      cmd->add_option("--threshold", o.threshold, "Aligned MSE counted as success");
  o.seed_opt = cmd->add_option("--seed", o.seed, "Master seed");
  o.threads_opt = cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  cmd->add_flag("--record-trials", o.record_trials,
                "Also write the per-trial table next to --out");
  o.full_scale_opt =
      cmd->add_flag("--full-scale", o.full_scale, "Raise trials to at least 1000");
  o.epsilon_mode_opt = cmd->add_option("--epsilon-mode", o.epsilon_mode,
                                       "Ball radius policy: zero|estimated|fixed");
  o.fixed_epsilon_opt =
      cmd->add_option("--epsilon", o.fixed_epsilon, "Fixed ball radius (implies fixed mode)");
  o.confidence_opt =
      cmd->add_option("--confidence", o.confidence, "Radius estimate confidence level");
  o.max_ops_opt =
      cmd->add_option("--max-ops", o.max_ops, "Solver operator application budget per trial");
  o.method_opt = cmd->add_option("--method", o.method, "Solver: auto|dr|fista");

  cmd->add_option("-o,--out", o.out, "Write the aggregate table here (default: stdout)");
  cmd->add_option("--format", o.format, "Table format")
      ->check(CLI::IsMember({"csv", "json", "gnuplot"}));
  cmd->set_config("--config", "", "Read options from an INI file");
}

json experiment_config(const ExperimentOptions& o) {
  json cfg = json::object();
  auto on = [](const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
  if (on(o.n_opt)) cfg["n"] = o.n;
  if (on(o.k_opt)) cfg["k"] = o.k;
  if (on(o.m_opt)) cfg["m"] = o.m;
  if (on(o.trials_opt)) cfg["trials"] = o.trials;
  if (on(o.snr_opt)) cfg["snr_db"] = o.snr_db;
  if (on(o.snr_grid_opt)) cfg["snr_grid"] = o.snr_grid;
  if (on(o.variants_opt)) cfg["variants"] = o.variants;
  if (on(o.mode_opt)) cfg["mode"] = o.mode;
  if (on(o.fix_first_opt)) cfg["fix_first"] = o.fix_first;
  if (on(o.targets_opt)) cfg["targets"] = o.targets;
  if (on(o.m_min_opt)) cfg["m_min"] = o.m_min;
  if (on(o.m_max_opt)) cfg["m_max"] = o.m_max;
  if (on(o.m_step_opt)) cfg["m_step"] = o.m_step;
  if (on(o.threshold_opt)) cfg["success_threshold"] = o.threshold;
  if (on(o.seed_opt)) cfg["seed"] = o.seed;
  if (on(o.threads_opt)) cfg["threads"] = o.threads;
  if (o.record_trials) cfg["record_trials"] = true;
  if (on(o.full_scale_opt)) cfg["full_scale"] = o.full_scale;
  if (on(o.epsilon_mode_opt)) cfg["epsilon_mode"] = o.epsilon_mode;
  if (on(o.fixed_epsilon_opt)) {
    cfg["epsilon_mode"] = "fixed";
    cfg["fixed_epsilon"] = o.fixed_epsilon;
  }
  if (on(o.confidence_opt)) cfg["epsilon_confidence"] = o.confidence;
  if (on(o.max_ops_opt)) cfg["solver_max_ops"] = o.max_ops;
  if (on(o.method_opt)) cfg["solver_method"] = o.method;
  return cfg;
}

int run_experiment_command(const ExperimentOptions& o, const char* name,
                           cpr_status (*runner)(const char*, cpr_table**, cpr_table**),
                           int* all_reached_out) {
  if (o.record_trials && o.out.empty()) {
    std::fprintf(stderr, "error: --record-trials needs --out\n");
    return 1;
  }
  const std::string cfg = experiment_config(o).dump();

  char* manifest_raw = nullptr;
  check(cpr_experiment_manifest(cfg.c_str(), name, &manifest_raw));
  const std::string manifest = take_string(manifest_raw);

  cpr_table* araw = nullptr;
  cpr_table* traw = nullptr;
  if (all_reached_out != nullptr) {
    check(cpr_run_phase_transition(cfg.c_str(), &araw, &traw, all_reached_out));
  } else {
    check(runner(cfg.c_str(), &araw, &traw));
  }
  Handle<cpr_table> aggregate(araw);
  Handle<cpr_table> trials(traw);

  char* rendered_raw = nullptr;
  check(cpr_table_render(aggregate.get(), parse_format(o.format), &rendered_raw));
  const std::string rendered = take_string(rendered_raw);

  if (o.out.empty()) {
    std::fputs(rendered.c_str(), stdout);
  } else {
    write_file(o.out, rendered);
    write_file(sibling_path(o.out, ".manifest.json"), manifest);
    std::printf("wrote %s (%zu rows)\n", o.out.c_str(), cpr_table_rows(aggregate.get()));
    if (trials) {
      char* trials_raw = nullptr;
      check(cpr_table_render(trials.get(), CPR_FORMAT_CSV, &trials_raw));
      const std::string trials_path = sibling_path(o.out, ".trials.csv");
      write_file(trials_path, take_string(trials_raw));
      std::printf("wrote %s (%zu rows)\n", trials_path.c_str(), cpr_table_rows(trials.get()));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive phase retrieval simulator"};
  app.set_version_flag("--version", std::string(cpr_version()));
  app.require_subcommand(1);

  MeasureOptions mo;
  CLI::App* measure = app.add_subcommand(
      "measure", "Generate a sparse signal and write its intensity measurements");
  measure->add_option("-n,--n", mo.n, "Signal dimension");
  measure->add_option("-k,--k", mo.k, "Sparsity level");
  measure->add_option("-m,--measurements", mo.measurements,
                      "Total measurement count, a multiple of 4");
  mo.snr_opt = measure->add_option("--snr-db", mo.snr_db,
                                   "Add noise at this SNR (default: noiseless)");
  measure->add_option("--mode", mo.mode, "Sensing mode: fourier|gaussian|bernoulli")
      ->check(CLI::IsMember({"fourier", "gaussian", "bernoulli"}));
  measure->add_option("--anchor", mo.anchor, "First entry policy")
      ->check(CLI::IsMember({"uniform", "in-support", "fixed-unit"}));
  measure->add_option("--seed", mo.seed, "Master seed");
  mo.in_opt = measure->add_option("--in", mo.in, "Measure this signal file instead");
  measure->add_option("-o,--out", mo.out, "Measurement file to write")->required();
  measure->add_option("--truth-out", mo.truth_out, "Also write the signal here");
  measure->add_flag("--binary", mo.binary, "Write the binary measurement format");

  RecoverOptions ro;
  CLI::App* recover =
      app.add_subcommand("recover", "Run the two-stage recovery on a measurement file");
  recover->add_option("--in", ro.in, "Measurement file")->required();
  recover->add_option("-o,--out", ro.out, "Write the recovered signal here");
  recover->add_option("--truth", ro.truth, "Score against this signal file");
  ro.epsilon_mode_opt =
      recover->add_option("--epsilon-mode", ro.epsilon_mode,
                          "Ball radius policy: zero|estimated|fixed");
  ro.fixed_epsilon_opt = recover->add_option("--epsilon", ro.fixed_epsilon,
                                             "Fixed ball radius (implies fixed mode)");
  ro.confidence_opt =
      recover->add_option("--confidence", ro.confidence, "Radius estimate confidence level");
  recover->add_flag("--anchor-row", ro.anchor_row,
                    "Constrain the anchor row in the sparse stage");
  ro.threshold_opt =
      recover->add_option("--threshold", ro.threshold, "Aligned MSE counted as success");
  ro.max_ops_opt =
      recover->add_option("--max-ops", ro.max_ops, "Solver operator application budget");
  ro.gap_tol_opt = recover->add_option("--gap-tol", ro.gap_tol, "Duality gap tolerance");
  ro.feasibility_tol_opt = recover->add_option("--feasibility-tol", ro.feasibility_tol,
                                               "Constraint slack tolerance");
  ro.method_opt = recover->add_option("--method", ro.method, "Solver: auto|dr|fista");

  ExperimentOptions so;
  CLI::App* success =
      app.add_subcommand("success-rate", "Recovery success rate over a (k, m) grid");
  add_experiment_options(success, so, false);

  ExperimentOptions po;
  CLI::App* transition = app.add_subcommand(
      "phase-transition", "Minimal measurement count reaching target success rates");
  add_experiment_options(transition, po, false);
  po.targets_opt =
      transition->add_option("--targets", po.targets, "Target success rates")->delimiter(',');
  po.m_min_opt = transition->add_option("--m-min", po.m_min, "Search range lower end");
  po.m_max_opt =
      transition->add_option("--m-max", po.m_max, "Search range upper end (0 = maximal)");
  po.m_step_opt = transition->add_option("--m-step", po.m_step,
                                         "Search grid step, a multiple of 4");

  ExperimentOptions no;
  CLI::App* noise =
      app.add_subcommand("noise-sweep", "Aligned MSE versus SNR at one operating point");
  add_experiment_options(noise, no, true);

  CLI11_PARSE(app, argc, argv);

  if (*measure) {
    if (mo.in_opt->count() == 0 && (measure->count("--n") == 0 || measure->count("--k") == 0)) {
      std::fprintf(stderr, "error: measure needs --n and --k, or --in\n");
      return 1;
    }
    return run_measure(mo);
  }
  if (*recover) return run_recover(ro);
  if (*success) return run_experiment_command(so, "success-rate", &cpr_run_success_rate, nullptr);
  if (*transition) {
    int all_reached = 1;
    const int rc = run_experiment_command(po, "phase-transition", nullptr, &all_reached);
    if (rc != 0) return rc;
    if (all_reached == 0) {
      std::fprintf(stderr, "warning: some target rates were not reached in the search range\n");
      return 2;
    }
    return 0;
  }
  if (*noise) return run_experiment_command(no, "noise-sweep", &cpr_run_noise_sweep, nullptr);
  return 0;
}
