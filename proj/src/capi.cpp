#include "cpr/cpr.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "cpr/experiment.hpp"
#include "cpr/measurement_io.hpp"
#include "cpr/pipeline.hpp"
#include "cpr/rng.hpp"
#include "cpr/version.hpp"

struct cpr_signal {
  cpr::ComplexSignal data;
};

struct cpr_measurements {
  cpr::IntensityMeasurements m;
};

struct cpr_recovery {
  cpr::RecoveryOutcome outcome;
};

struct cpr_table {
  cpr::Table table;
};

namespace {

thread_local std::string t_error;

void set_error(const std::string& message) { t_error = message; }

// Runs `body`, translating exceptions into status codes and the
// thread-local error message.  Out-parameters must be written inside
// `body` only after every throwing step has completed.
template <typename F>
cpr_status guarded(F&& body) {
  try {
    return body();
  } catch (const cpr::ModelViolation& e) {
    set_error(e.what());
    return CPR_ERROR_MODEL;
  } catch (const cpr::IoError& e) {
    set_error(e.what());
    return CPR_ERROR_IO;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return CPR_ERROR_INVALID_ARGUMENT;
  } catch (const std::out_of_range& e) {
    set_error(e.what());
    return CPR_ERROR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return CPR_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return CPR_ERROR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return CPR_ERROR_INTERNAL;
  }
}

cpr_status require(bool ok, const char* message) {
  if (!ok) {
    set_error(message);
    return CPR_ERROR_INVALID_ARGUMENT;
  }
  return CPR_OK;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(::operator new(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cpr::PipelineOptions options_from_json(const char* options_json) {
  cpr::PipelineOptions opts;
  if (options_json == nullptr || *options_json == '\0') return opts;

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(options_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("options: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("options: expected a JSON object");

  auto number = [](const nlohmann::json& v, const char* key) {
    if (!v.is_number()) throw std::invalid_argument(std::string("options: ") + key + " must be a number");
    return v.get<double>();
  };
  auto text = [](const nlohmann::json& v, const char* key) {
    if (!v.is_string()) throw std::invalid_argument(std::string("options: ") + key + " must be a string");
    return v.get<std::string>();
  };

  for (const auto& [key, value] : j.items()) {
    if (key == "epsilon_mode") {
      const std::string s = text(value, "epsilon_mode");
      if (s == "zero") opts.epsilon_mode = cpr::EpsilonMode::Zero;
      else if (s == "estimated") opts.epsilon_mode = cpr::EpsilonMode::Estimated;
      else if (s == "fixed") opts.epsilon_mode = cpr::EpsilonMode::Fixed;
      else throw std::invalid_argument("options: unknown epsilon_mode: " + s);
    } else if (key == "fixed_epsilon") {
      opts.fixed_epsilon = number(value, "fixed_epsilon");
    } else if (key == "epsilon_confidence") {
      opts.epsilon_confidence = number(value, "epsilon_confidence");
    } else if (key == "append_anchor_row") {
      if (!value.is_boolean()) throw std::invalid_argument("options: append_anchor_row must be a boolean");
      opts.append_anchor_row = value.get<bool>();
    } else if (key == "success_threshold") {
      opts.success_threshold = number(value, "success_threshold");
    } else if (key == "solver_max_ops") {
      const double v = number(value, "solver_max_ops");
      if (v < 0 || v != std::floor(v)) throw std::invalid_argument("options: solver_max_ops must be a nonnegative integer");
      opts.solver.max_operator_applications = static_cast<std::size_t>(v);
    } else if (key == "solver_gap_tol") {
      opts.solver.gap_tol = number(value, "solver_gap_tol");
    } else if (key == "solver_feasibility_tol") {
      opts.solver.feasibility_tol = number(value, "solver_feasibility_tol");
    } else if (key == "solver_method") {
      const std::string s = text(value, "solver_method");
      if (s == "auto") opts.solver.method = cpr::SolverMethod::Auto;
      else if (s == "dr") opts.solver.method = cpr::SolverMethod::DouglasRachford;
      else if (s == "fista") opts.solver.method = cpr::SolverMethod::Fista;
      else throw std::invalid_argument("options: unknown solver_method: " + s);
    } else {
      throw std::invalid_argument("options: unknown key: " + key);
    }
  }
  return opts;
}

cpr_status run_experiment(const char* config_json, cpr_table** aggregate_out,
                          cpr_table** trials_out, int* all_reached_out,
                          cpr::ExperimentResult (*runner)(const cpr::ExperimentConfig&)) {
  if (cpr_status s = require(config_json != nullptr, "config_json is NULL")) return s;
  if (cpr_status s = require(aggregate_out != nullptr, "aggregate_out is NULL")) return s;
  return guarded([&] {
    const cpr::ExperimentConfig cfg = cpr::config_from_json(config_json);
    cpr::ExperimentResult result = runner(cfg);
    auto* aggregate = new cpr_table{std::move(result.aggregate)};
    cpr_table* trials = nullptr;
    if (trials_out != nullptr && result.trials.has_value()) {
      trials = new cpr_table{std::move(*result.trials)};
    }
    *aggregate_out = aggregate;
    if (trials_out != nullptr) *trials_out = trials;
    if (all_reached_out != nullptr) *all_reached_out = result.all_targets_reached ? 1 : 0;
    return CPR_OK;
  });
}

}  // namespace

extern "C" {

const char* cpr_version(void) { return cpr::kVersion; }

const char* cpr_last_error(void) { return t_error.c_str(); }

void cpr_string_destroy(char* s) { ::operator delete(s); }

/* ---- signals ---------------------------------------------------------- */

cpr_status cpr_signal_create(size_t n, cpr_signal** out) {
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  if (cpr_status s = require(n > 0, "signal length must be positive")) return s;
  return guarded([&] {
    *out = new cpr_signal{cpr::ComplexSignal(n)};
    return CPR_OK;
  });
}

cpr_status cpr_signal_random_sparse(size_t n, size_t k, uint64_t seed,
                                    cpr_anchor_mode anchor, cpr_signal** out) {
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    cpr::FirstEntryMode mode;
    switch (anchor) {
      case CPR_ANCHOR_UNIFORM: mode = cpr::FirstEntryMode::Uniform; break;
      case CPR_ANCHOR_IN_SUPPORT: mode = cpr::FirstEntryMode::InSupport; break;
      case CPR_ANCHOR_FIXED_UNIT: mode = cpr::FirstEntryMode::FixedUnit; break;
      default: throw std::invalid_argument("unknown anchor mode");
    }
    cpr::Rng rng(seed);
    cpr::SparseSignal sparse = cpr::random_sparse_signal(n, k, rng, mode);
    *out = new cpr_signal{std::move(sparse.values)};
    return CPR_OK;
  });
}

size_t cpr_signal_length(const cpr_signal* s) { return s == nullptr ? 0 : s->data.size(); }

cpr_status cpr_signal_set(cpr_signal* s, size_t index, double re, double im) {
  if (cpr_status st = require(s != nullptr, "signal is NULL")) return st;
  if (cpr_status st = require(index < s->data.size(), "index out of range")) return st;
  s->data[index] = cpr::Complex(re, im);
  return CPR_OK;
}

cpr_status cpr_signal_get(const cpr_signal* s, size_t index, double* re, double* im) {
  if (cpr_status st = require(s != nullptr, "signal is NULL")) return st;
  if (cpr_status st = require(index < s->data.size(), "index out of range")) return st;
  if (re != nullptr) *re = s->data[index].real();
  if (im != nullptr) *im = s->data[index].imag();
  return CPR_OK;
}

cpr_status cpr_signal_save(const cpr_signal* s, const char* path) {
  if (cpr_status st = require(s != nullptr, "signal is NULL")) return st;
  if (cpr_status st = require(path != nullptr, "path is NULL")) return st;
  return guarded([&] {
    cpr::save_signal(s->data, path);
    return CPR_OK;
  });
}

cpr_status cpr_signal_load(const char* path, cpr_signal** out) {
  if (cpr_status st = require(path != nullptr, "path is NULL")) return st;
  if (cpr_status st = require(out != nullptr, "out is NULL")) return st;
  return guarded([&] {
    *out = new cpr_signal{cpr::load_signal(path)};
    return CPR_OK;
  });
}

void cpr_signal_destroy(cpr_signal* s) { delete s; }

/* ---- measurement ------------------------------------------------------ */

cpr_status cpr_measure_fourier(const cpr_signal* x, size_t blocks, double snr_db,
                               uint64_t seed, cpr_measurements** out) {
  if (cpr_status s = require(x != nullptr, "signal is NULL")) return s;
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    const std::size_t n = x->data.size();
    if (blocks == 0 || blocks > n - 1) {
      throw std::invalid_argument("blocks must be in [1, n - 1]");
    }
    cpr::Rng sampling_rng(cpr::derive_seed(seed, "sampling"));
    const std::vector<std::size_t> sampling = sampling_rng.sample(n, blocks);
    const cpr::MaskSet masks = cpr::build_masks(n);

    cpr::IntensityMeasurements m;
    if (std::isfinite(snr_db)) {
      const double sigma = cpr::sigma_for_snr(x->data, masks, sampling, snr_db);
      cpr::Rng noise_rng(cpr::derive_seed(seed, "noise"));
      m = cpr::measure_fourier(x->data, masks, sampling, sigma, noise_rng);
    } else {
      m = cpr::measure_fourier(x->data, masks, sampling);
    }
    m.seed = seed;
    *out = new cpr_measurements{std::move(m)};
    return CPR_OK;
  });
}

cpr_status cpr_measure_dense(const cpr_signal* x, size_t blocks, cpr_sensing_mode mode,
                             uint64_t seed, cpr_measurements** out) {
  if (cpr_status s = require(x != nullptr, "signal is NULL")) return s;
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    if (blocks == 0) throw std::invalid_argument("blocks must be positive");
    const std::size_t n = x->data.size();
    const std::uint64_t op_seed = cpr::derive_seed(seed, "operator");
    cpr::SensingOperator op = [&] {
      switch (mode) {
        case CPR_SENSING_GAUSSIAN: return cpr::SensingOperator::gaussian(blocks + 1, n, op_seed);
        case CPR_SENSING_BERNOULLI: return cpr::SensingOperator::bernoulli(blocks + 1, n, op_seed);
        case CPR_SENSING_FOURIER:
          throw std::invalid_argument("fourier measurements come from cpr_measure_fourier");
        default: throw std::invalid_argument("unknown sensing mode");
      }
    }();
    *out = new cpr_measurements{cpr::measure_operator(x->data, op)};
    return CPR_OK;
  });
}

size_t cpr_measurements_dimension(const cpr_measurements* m) {
  return m == nullptr ? 0 : m->m.n;
}

size_t cpr_measurements_blocks(const cpr_measurements* m) {
  return m == nullptr ? 0 : m->m.blocks;
}

cpr_sensing_mode cpr_measurements_mode(const cpr_measurements* m) {
  if (m == nullptr) return CPR_SENSING_FOURIER;
  switch (m->m.mode) {
    case cpr::SensingMode::Gaussian: return CPR_SENSING_GAUSSIAN;
    case cpr::SensingMode::Bernoulli: return CPR_SENSING_BERNOULLI;
    default: return CPR_SENSING_FOURIER;
  }
}

double cpr_measurements_noise_variance(const cpr_measurements* m) {
  return m == nullptr ? 0.0 : m->m.sigma2;
}

cpr_status cpr_measurements_value(const cpr_measurements* m, size_t mask, size_t block,
                                  double* value) {
  if (cpr_status s = require(m != nullptr, "measurements is NULL")) return s;
  if (cpr_status s = require(value != nullptr, "value is NULL")) return s;
  if (cpr_status s = require(mask < 4, "mask index out of range")) return s;
  if (cpr_status s = require(block < m->m.blocks, "block index out of range")) return s;
  *value = m->m.at(mask, block);
  return CPR_OK;
}

cpr_status cpr_measurements_save(const cpr_measurements* m, const char* path,
                                 int binary_format) {
  if (cpr_status s = require(m != nullptr, "measurements is NULL")) return s;
  if (cpr_status s = require(path != nullptr, "path is NULL")) return s;
  return guarded([&] {
    if (binary_format != 0) {
      cpr::save_measurements_binary(m->m, path);
    } else {
      cpr::save_measurements_text(m->m, path);
    }
    return CPR_OK;
  });
}

cpr_status cpr_measurements_load(const char* path, cpr_measurements** out) {
  if (cpr_status s = require(path != nullptr, "path is NULL")) return s;
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    *out = new cpr_measurements{cpr::load_measurements(path)};
    return CPR_OK;
  });
}

void cpr_measurements_destroy(cpr_measurements* m) { delete m; }

/* ---- recovery --------------------------------------------------------- */

cpr_status cpr_recover(const cpr_measurements* m, const char* options_json,
                       cpr_recovery** out) {
  if (cpr_status s = require(m != nullptr, "measurements is NULL")) return s;
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    const cpr::PipelineOptions opts = options_from_json(options_json);
    *out = new cpr_recovery{cpr::recover(m->m, opts)};
    return CPR_OK;
  });
}

cpr_status cpr_recovery_signal(const cpr_recovery* r, cpr_signal** out) {
  if (cpr_status s = require(r != nullptr, "recovery is NULL")) return s;
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    *out = new cpr_signal{r->outcome.estimate};
    return CPR_OK;
  });
}

double cpr_recovery_stage1_residual(const cpr_recovery* r) {
  return r == nullptr ? 0.0 : r->outcome.stage1_residual;
}

double cpr_recovery_epsilon(const cpr_recovery* r) {
  return r == nullptr ? 0.0 : r->outcome.epsilon;
}

double cpr_recovery_objective(const cpr_recovery* r) {
  return r == nullptr ? 0.0 : r->outcome.solver.objective;
}

double cpr_recovery_solver_residual(const cpr_recovery* r) {
  return r == nullptr ? 0.0 : r->outcome.solver.residual_norm;
}

size_t cpr_recovery_iterations(const cpr_recovery* r) {
  return r == nullptr ? 0 : r->outcome.solver.iterations;
}

int cpr_recovery_converged(const cpr_recovery* r) {
  return (r != nullptr && r->outcome.solver.converged) ? 1 : 0;
}

cpr_status cpr_recovery_align(const cpr_recovery* r, const cpr_signal* truth, double* mse) {
  if (cpr_status s = require(r != nullptr, "recovery is NULL")) return s;
  if (cpr_status s = require(truth != nullptr, "truth is NULL")) return s;
  if (cpr_status s = require(mse != nullptr, "mse is NULL")) return s;
  return guarded([&] {
    *mse = cpr::align_phase(truth->data, r->outcome.estimate).mse;
    return CPR_OK;
  });
}

void cpr_recovery_destroy(cpr_recovery* r) { delete r; }

/* ---- experiments ------------------------------------------------------ */

cpr_status cpr_run_success_rate(const char* config_json, cpr_table** aggregate_out,
                                cpr_table** trials_out) {
  return run_experiment(config_json, aggregate_out, trials_out, nullptr,
                        &cpr::run_success_rate);
}

cpr_status cpr_run_noise_sweep(const char* config_json, cpr_table** aggregate_out,
                               cpr_table** trials_out) {
  return run_experiment(config_json, aggregate_out, trials_out, nullptr,
                        &cpr::run_noise_sweep);
}

cpr_status cpr_run_phase_transition(const char* config_json, cpr_table** aggregate_out,
                                    cpr_table** trials_out, int* all_reached_out) {
  return run_experiment(config_json, aggregate_out, trials_out, all_reached_out,
                        &cpr::run_phase_transition);
}

cpr_status cpr_experiment_manifest(const char* config_json, const char* experiment,
                                   char** out) {
  if (cpr_status s = require(config_json != nullptr, "config_json is NULL")) return s;
  if (cpr_status s = require(experiment != nullptr, "experiment is NULL")) return s;
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    const cpr::ExperimentConfig cfg = cpr::config_from_json(config_json);
    *out = copy_string(cpr::manifest_json(cfg, experiment));
    return CPR_OK;
  });
}

/* ---- tables ----------------------------------------------------------- */

size_t cpr_table_rows(const cpr_table* t) { return t == nullptr ? 0 : t->table.rows(); }

size_t cpr_table_cols(const cpr_table* t) { return t == nullptr ? 0 : t->table.cols(); }

const char* cpr_table_column(const cpr_table* t, size_t col) {
  if (t == nullptr || col >= t->table.cols()) return nullptr;
  return t->table.columns()[col].c_str();
}

const char* cpr_table_cell(const cpr_table* t, size_t row, size_t col) {
  if (t == nullptr || row >= t->table.rows() || col >= t->table.cols()) return nullptr;
  return t->table.cell(row, col).c_str();
}

cpr_status cpr_table_render(const cpr_table* t, cpr_render_format format, char** out) {
  if (cpr_status s = require(t != nullptr, "table is NULL")) return s;
  if (cpr_status s = require(out != nullptr, "out is NULL")) return s;
  return guarded([&] {
    std::string text;
    switch (format) {
      case CPR_FORMAT_CSV: text = t->table.to_csv(); break;
      case CPR_FORMAT_JSON: text = t->table.to_json(); break;
      case CPR_FORMAT_GNUPLOT: text = t->table.to_gnuplot(); break;
      default: throw std::invalid_argument("unknown render format");
    }
    *out = copy_string(text);
    return CPR_OK;
  });
}

void cpr_table_destroy(cpr_table* t) { delete t; }

}  // extern "C"
