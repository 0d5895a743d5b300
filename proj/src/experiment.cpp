#include "cpr/experiment.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "cpr/measurement.hpp"
#include "cpr/rng.hpp"
#include "cpr/version.hpp"

namespace cpr {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t snr_bits(double snr_db) {
  // Canonical encoding of the SNR coordinate for seed derivation; all NaNs
  // (the "noiseless" marker) collapse to one value.
  if (std::isnan(snr_db)) return ~std::uint64_t{0};
  return std::bit_cast<std::uint64_t>(snr_db);
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, std::size_t k, std::size_t m,
                         double snr_db, bool fixed_anchor, std::size_t trial) {
  return derive_seed(cfg.seed, "trial",
                     {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(m),
                      snr_bits(snr_db), fixed_anchor ? std::uint64_t{1} : std::uint64_t{0},
                      static_cast<std::uint64_t>(trial)});
}

std::size_t effective_trials(const ExperimentConfig& cfg) {
  return cfg.full_scale ? std::max<std::size_t>(cfg.trials, 1000) : cfg.trials;
}

void validate_common(const ExperimentConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("experiment: n must be at least 2");
  if (cfg.trials == 0) throw std::invalid_argument("experiment: trials must be positive");
  if (!(cfg.success_threshold > 0.0))
    throw std::invalid_argument("experiment: success threshold must be positive");
  if (cfg.k_grid.empty()) throw std::invalid_argument("experiment: empty sparsity grid");
  for (std::size_t k : cfg.k_grid)
    if (k == 0 || k > cfg.n) throw std::invalid_argument("experiment: sparsity outside [1, n]");
}

void validate_measurement_count(const ExperimentConfig& cfg, std::size_t m) {
  if (m < 4 || m % 4 != 0)
    throw std::invalid_argument("experiment: measurement counts must be positive multiples of 4");
  if (m / 4 > cfg.n - 1)
    throw std::invalid_argument("experiment: more than 4(n-1) measurements requested");
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  std::size_t t = threads != 0 ? threads : std::thread::hardware_concurrency();
  t = std::clamp<std::size_t>(t, 1, count);
  if (t == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

const std::vector<std::string>& trial_columns() {
  static const std::vector<std::string> cols = {
      "k",           "m",       "snr_db",          "variant",
      "trial",       "seed",    "model_violation", "success",
      "aligned_mse", "stage1_residual", "solver_iterations", "solver_converged",
      "wall_ms"};
  return cols;
}

void append_trial_row(Table& t, const TrialRecord& r) {
  t.add_row({Table::num(r.k), Table::num(r.m),
             std::isnan(r.snr_db) ? std::string("none") : Table::num(r.snr_db),
             r.fixed_anchor ? "fixed" : "random", Table::num(r.trial), Table::num(r.seed),
             Table::boolean(r.model_violation), Table::boolean(r.success),
             Table::num(r.aligned_mse), Table::num(r.stage1_residual),
             Table::num(r.solver_iterations), Table::boolean(r.solver_converged),
             Table::num(r.wall_ms)});
}

struct BatchStats {
  std::size_t successes = 0;
  double mean_mse = 0.0;
  double stderr_mse = 0.0;
};

BatchStats summarize(const TrialRecord* records, std::size_t count) {
  BatchStats s;
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    if (records[i].success) ++s.successes;
    sum += records[i].aligned_mse;
  }
  s.mean_mse = sum / static_cast<double>(count);
  if (count > 1 && std::isfinite(s.mean_mse)) {
    double ss = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = records[i].aligned_mse - s.mean_mse;
      ss += d * d;
    }
    s.stderr_mse = std::sqrt(ss / (static_cast<double>(count) * (static_cast<double>(count) - 1.0)));
  }
  return s;
}

}  // namespace

const char* to_string(VariantPolicy v) {
  switch (v) {
    case VariantPolicy::Fixed: return "fixed";
    case VariantPolicy::Random: return "random";
    case VariantPolicy::Both: return "both";
  }
  return "both";
}

VariantPolicy variant_policy_from_string(const std::string& name) {
  if (name == "fixed") return VariantPolicy::Fixed;
  if (name == "random") return VariantPolicy::Random;
  if (name == "both") return VariantPolicy::Both;
  throw std::invalid_argument("unknown variant policy: " + name);
}

TrialRecord run_single_trial(const ExperimentConfig& cfg, std::size_t k, std::size_t m,
                             double snr_db_point, bool fixed_anchor, std::size_t trial_index,
                             std::uint64_t seed) {
  TrialRecord rec;
  rec.k = k;
  rec.m = m;
  rec.snr_db = snr_db_point;
  rec.fixed_anchor = fixed_anchor;
  rec.trial = trial_index;
  rec.seed = seed;

  const std::size_t blocks = m / 4;
  Rng signal_rng(derive_seed(seed, "signal"));
  const FirstEntryMode fem = cfg.mode == SensingMode::Fourier
                                 ? (fixed_anchor ? FirstEntryMode::FixedUnit
                                                 : FirstEntryMode::InSupport)
                                 : FirstEntryMode::Uniform;
  const SparseSignal x = random_sparse_signal(cfg.n, k, signal_rng, fem);

  PipelineOptions popts = cfg.pipeline;
  popts.success_threshold = cfg.success_threshold;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    IntensityMeasurements meas;
    if (cfg.mode == SensingMode::Fourier) {
      const MaskSet masks = build_masks(cfg.n);
      Rng sampling_rng(derive_seed(seed, "sampling"));
      const std::vector<std::size_t> rows = sampling_rng.sample(cfg.n, blocks);
      double sigma = 0.0;
      if (std::isfinite(snr_db_point))
        sigma = sigma_for_snr(x.values, masks, rows, snr_db_point);
      Rng noise_rng(derive_seed(seed, "noise"));
      meas = measure_fourier(x.values, masks, rows, sigma, noise_rng);
    } else {
      const std::uint64_t op_seed = derive_seed(seed, "operator");
      const SensingOperator op = cfg.mode == SensingMode::Gaussian
                                     ? SensingOperator::gaussian(blocks + 1, cfg.n, op_seed)
                                     : SensingOperator::bernoulli(blocks + 1, cfg.n, op_seed);
      meas = measure_operator(x.values, op);
    }

    RecoveryOutcome out = recover(meas, popts);
    score_outcome(out, x.values, cfg.success_threshold);
    rec.success = out.success;
    rec.aligned_mse = out.aligned_mse;
    rec.stage1_residual = out.stage1_residual;
    rec.solver_iterations = out.solver.iterations;
    rec.solver_converged = out.solver.converged;
  } catch (const ModelViolation&) {
    rec.model_violation = true;
    rec.success = false;
    rec.aligned_mse = std::numeric_limits<double>::infinity();
    rec.stage1_residual = std::numeric_limits<double>::infinity();
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rec;
}

ExperimentResult run_success_rate(const ExperimentConfig& cfg) {
  validate_common(cfg);
  if (cfg.m_grid.empty()) throw std::invalid_argument("experiment: empty measurement grid");
  for (std::size_t m : cfg.m_grid) validate_measurement_count(cfg, m);

  const std::size_t trials = effective_trials(cfg);
  struct Point {
    std::size_t k, m;
  };
  std::vector<Point> points;
  for (std::size_t k : cfg.k_grid)
    for (std::size_t m : cfg.m_grid) points.push_back({k, m});

  std::vector<TrialRecord> records(points.size() * trials);
  parallel_for(records.size(), cfg.threads, [&](std::size_t idx) {
    const Point& pt = points[idx / trials];
    const std::size_t t = idx % trials;
    records[idx] = run_single_trial(cfg, pt.k, pt.m, cfg.snr_db, cfg.fix_first, t,
                                    trial_seed(cfg, pt.k, pt.m, cfg.snr_db, cfg.fix_first, t));
  });

  ExperimentResult res;
  res.aggregate = Table({"k", "m", "trials", "successes", "success_rate", "mean_mse"});
  for (std::size_t p = 0; p < points.size(); ++p) {
    const BatchStats s = summarize(&records[p * trials], trials);
    res.aggregate.add_row({Table::num(points[p].k), Table::num(points[p].m), Table::num(trials),
                           Table::num(s.successes),
                           Table::num(static_cast<double>(s.successes) / static_cast<double>(trials)),
                           Table::num(s.mean_mse)});
  }
  if (cfg.record_trials) {
    Table t(trial_columns());
    for (const TrialRecord& r : records) append_trial_row(t, r);
    res.trials = std::move(t);
  }
  return res;
}

ExperimentResult run_phase_transition(const ExperimentConfig& cfg) {
  validate_common(cfg);
  if (cfg.targets.empty()) throw std::invalid_argument("experiment: no target rates");
  for (double t : cfg.targets)
    if (!(t > 0.0 && t <= 1.0))
      throw std::invalid_argument("experiment: target rates must be in (0, 1]");
  const std::size_t m_max = cfg.m_max == 0 ? 4 * (cfg.n - 1) : cfg.m_max;
  if (cfg.m_min < 4 || cfg.m_min % 4 != 0 || cfg.m_step == 0 || cfg.m_step % 4 != 0)
    throw std::invalid_argument("experiment: transition grid must run in multiples of 4");
  if (m_max < cfg.m_min) throw std::invalid_argument("experiment: m_max below m_min");
  validate_measurement_count(cfg, m_max);

  std::vector<std::size_t> grid;
  for (std::size_t m = cfg.m_min; m <= m_max; m += cfg.m_step) grid.push_back(m);

  const std::size_t trials = effective_trials(cfg);
  std::optional<Table> trial_table;
  if (cfg.record_trials) trial_table.emplace(trial_columns());

  std::map<std::pair<std::size_t, std::size_t>, double> rate_cache;
  const auto rate_at = [&](std::size_t k, std::size_t m) {
    const auto key = std::make_pair(k, m);
    if (const auto it = rate_cache.find(key); it != rate_cache.end()) return it->second;
    std::vector<TrialRecord> records(trials);
    parallel_for(trials, cfg.threads, [&](std::size_t t) {
      records[t] = run_single_trial(cfg, k, m, cfg.snr_db, cfg.fix_first, t,
                                    trial_seed(cfg, k, m, cfg.snr_db, cfg.fix_first, t));
    });
    if (trial_table)
      for (const TrialRecord& r : records) append_trial_row(*trial_table, r);
    const BatchStats s = summarize(records.data(), trials);
    const double rate = static_cast<double>(s.successes) / static_cast<double>(trials);
    rate_cache.emplace(key, rate);
    return rate;
  };

  ExperimentResult res;
  res.aggregate = Table({"k", "target_rate", "m_min", "reached"});
  for (std::size_t k : cfg.k_grid) {
    for (double target : cfg.targets) {
      // First grid index whose success rate reaches the target, assuming the
      // rate grows with the measurement count.
      std::size_t lo = 0, hi = grid.size() - 1;
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (rate_at(k, grid[mid]) >= target)
          hi = mid;
        else
          lo = mid + 1;
      }
      const bool reached = rate_at(k, grid[lo]) >= target;
      if (!reached) res.all_targets_reached = false;
      res.aggregate.add_row({Table::num(k), Table::num(target),
                             Table::num(reached ? grid[lo] : std::size_t{0}),
                             Table::boolean(reached)});
    }
  }
  res.trials = std::move(trial_table);
  return res;
}

ExperimentResult run_noise_sweep(const ExperimentConfig& cfg) {
  validate_common(cfg);
  if (cfg.mode != SensingMode::Fourier)
    throw std::invalid_argument("experiment: the noise model applies to fourier sensing only");
  if (cfg.m_grid.empty()) throw std::invalid_argument("experiment: empty measurement grid");
  if (cfg.snr_grid.empty()) throw std::invalid_argument("experiment: empty SNR grid");
  for (double s : cfg.snr_grid)
    if (!std::isfinite(s)) throw std::invalid_argument("experiment: SNR values must be finite");
  const std::size_t k = cfg.k_grid.front();
  const std::size_t m = cfg.m_grid.front();
  validate_measurement_count(cfg, m);

  std::vector<bool> variant_list;
  if (cfg.variants == VariantPolicy::Fixed || cfg.variants == VariantPolicy::Both)
    variant_list.push_back(true);
  if (cfg.variants == VariantPolicy::Random || cfg.variants == VariantPolicy::Both)
    variant_list.push_back(false);

  const std::size_t trials = effective_trials(cfg);
  struct Point {
    double snr;
    bool fixed;
  };
  std::vector<Point> points;
  for (double snr : cfg.snr_grid)
    for (bool fixed : variant_list) points.push_back({snr, fixed});

  std::vector<TrialRecord> records(points.size() * trials);
  parallel_for(records.size(), cfg.threads, [&](std::size_t idx) {
    const Point& pt = points[idx / trials];
    const std::size_t t = idx % trials;
    records[idx] = run_single_trial(cfg, k, m, pt.snr, pt.fixed, t,
                                    trial_seed(cfg, k, m, pt.snr, pt.fixed, t));
  });

  ExperimentResult res;
  res.aggregate = Table({"snr_db", "variant", "trials", "success_rate", "mean_mse",
                         "mean_mse_db", "stderr_mse"});
  for (std::size_t p = 0; p < points.size(); ++p) {
    const BatchStats s = summarize(&records[p * trials], trials);
    const double mse_db = s.mean_mse > 0.0 ? 10.0 * std::log10(s.mean_mse)
                                           : -std::numeric_limits<double>::infinity();
    res.aggregate.add_row({Table::num(points[p].snr),
                           points[p].fixed ? "fixed" : "random", Table::num(trials),
                           Table::num(static_cast<double>(s.successes) / static_cast<double>(trials)),
                           Table::num(s.mean_mse), Table::num(mse_db), Table::num(s.stderr_mse)});
  }
  if (cfg.record_trials) {
    Table t(trial_columns());
    for (const TrialRecord& r : records) append_trial_row(t, r);
    res.trials = std::move(t);
  }
  return res;
}

// ---------------------------------------------------------------------------
// JSON configuration.

namespace {

std::size_t get_size(const json& v, const char* key) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw std::invalid_argument(std::string("config: ") + key + " must be an integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    throw std::invalid_argument(std::string("config: ") + key + " must be nonnegative");
  return v.get<std::size_t>();
}

double get_double(const json& v, const char* key) {
  if (!v.is_number()) throw std::invalid_argument(std::string("config: ") + key + " must be a number");
  return v.get<double>();
}

std::vector<std::size_t> get_size_list(const json& v, const char* key) {
  std::vector<std::size_t> out;
  if (v.is_array()) {
    if (v.empty()) throw std::invalid_argument(std::string("config: ") + key + " must be non-empty");
    for (const auto& e : v) out.push_back(get_size(e, key));
  } else {
    out.push_back(get_size(v, key));
  }
  return out;
}

std::vector<double> get_double_list(const json& v, const char* key) {
  std::vector<double> out;
  if (v.is_array()) {
    if (v.empty()) throw std::invalid_argument(std::string("config: ") + key + " must be non-empty");
    for (const auto& e : v) out.push_back(get_double(e, key));
  } else {
    out.push_back(get_double(v, key));
  }
  return out;
}

bool get_bool(const json& v, const char* key) {
  if (!v.is_boolean()) throw std::invalid_argument(std::string("config: ") + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& v, const char* key) {
  if (!v.is_string()) throw std::invalid_argument(std::string("config: ") + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

ExperimentConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "n") cfg.n = get_size(value, "n");
    else if (key == "k") cfg.k_grid = get_size_list(value, "k");
    else if (key == "m") cfg.m_grid = get_size_list(value, "m");
    else if (key == "trials") cfg.trials = get_size(value, "trials");
    else if (key == "snr_db") cfg.snr_db = value.is_null() ? std::numeric_limits<double>::quiet_NaN() : get_double(value, "snr_db");
    else if (key == "snr_grid") cfg.snr_grid = get_double_list(value, "snr_grid");
    else if (key == "variants") cfg.variants = variant_policy_from_string(get_string(value, "variants"));
    else if (key == "mode") cfg.mode = sensing_mode_from_string(get_string(value, "mode"));
    else if (key == "fix_first") cfg.fix_first = get_bool(value, "fix_first");
    else if (key == "targets") cfg.targets = get_double_list(value, "targets");
    else if (key == "m_min") cfg.m_min = get_size(value, "m_min");
    else if (key == "m_max") cfg.m_max = get_size(value, "m_max");
    else if (key == "m_step") cfg.m_step = get_size(value, "m_step");
    else if (key == "success_threshold") cfg.success_threshold = get_double(value, "success_threshold");
    else if (key == "seed") cfg.seed = value.is_number_unsigned() ? value.get<std::uint64_t>() : static_cast<std::uint64_t>(get_size(value, "seed"));
    else if (key == "threads") cfg.threads = get_size(value, "threads");
    else if (key == "record_trials") cfg.record_trials = get_bool(value, "record_trials");
    else if (key == "full_scale") cfg.full_scale = get_bool(value, "full_scale");
    else if (key == "epsilon_mode") {
      const std::string s = get_string(value, "epsilon_mode");
      if (s == "zero") cfg.pipeline.epsilon_mode = EpsilonMode::Zero;
      else if (s == "estimated") cfg.pipeline.epsilon_mode = EpsilonMode::Estimated;
      else if (s == "fixed") cfg.pipeline.epsilon_mode = EpsilonMode::Fixed;
      else throw std::invalid_argument("config: unknown epsilon_mode: " + s);
    } else if (key == "fixed_epsilon") cfg.pipeline.fixed_epsilon = get_double(value, "fixed_epsilon");
    else if (key == "epsilon_confidence") cfg.pipeline.epsilon_confidence = get_double(value, "epsilon_confidence");
    else if (key == "append_anchor_row") cfg.pipeline.append_anchor_row = get_bool(value, "append_anchor_row");
    else if (key == "solver_max_ops") cfg.pipeline.solver.max_operator_applications = get_size(value, "solver_max_ops");
    else if (key == "solver_gap_tol") cfg.pipeline.solver.gap_tol = get_double(value, "solver_gap_tol");
    else if (key == "solver_feasibility_tol") cfg.pipeline.solver.feasibility_tol = get_double(value, "solver_feasibility_tol");
    else if (key == "solver_method") {
      const std::string s = get_string(value, "solver_method");
      if (s == "auto") cfg.pipeline.solver.method = SolverMethod::Auto;
      else if (s == "dr") cfg.pipeline.solver.method = SolverMethod::DouglasRachford;
      else if (s == "fista") cfg.pipeline.solver.method = SolverMethod::Fista;
      else throw std::invalid_argument("config: unknown solver_method: " + s);
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  return cfg;
}

std::string manifest_json(const ExperimentConfig& cfg, const std::string& experiment) {
  ordered_json j;
  j["version"] = kVersion;
  j["experiment"] = experiment;
  j["n"] = cfg.n;
  j["k"] = cfg.k_grid;
  j["m"] = cfg.m_grid;
  j["trials"] = effective_trials(cfg);
  if (std::isnan(cfg.snr_db))
    j["snr_db"] = nullptr;
  else
    j["snr_db"] = cfg.snr_db;
  j["snr_grid"] = cfg.snr_grid;
  j["variants"] = to_string(cfg.variants);
  j["mode"] = to_string(cfg.mode);
  j["fix_first"] = cfg.fix_first;
  j["targets"] = cfg.targets;
  j["m_min"] = cfg.m_min;
  j["m_max"] = cfg.m_max;
  j["m_step"] = cfg.m_step;
  j["success_threshold"] = cfg.success_threshold;
  j["seed"] = cfg.seed;
  j["record_trials"] = cfg.record_trials;
  j["full_scale"] = cfg.full_scale;
  switch (cfg.pipeline.epsilon_mode) {
    case EpsilonMode::Zero: j["epsilon_mode"] = "zero"; break;
    case EpsilonMode::Estimated: j["epsilon_mode"] = "estimated"; break;
    case EpsilonMode::Fixed: j["epsilon_mode"] = "fixed"; break;
  }
  j["fixed_epsilon"] = cfg.pipeline.fixed_epsilon;
  j["epsilon_confidence"] = cfg.pipeline.epsilon_confidence;
  j["append_anchor_row"] = cfg.pipeline.append_anchor_row;
  j["solver_max_ops"] = cfg.pipeline.solver.max_operator_applications;
  j["solver_gap_tol"] = cfg.pipeline.solver.gap_tol;
  j["solver_feasibility_tol"] = cfg.pipeline.solver.feasibility_tol;
  return j.dump(2) + "\n";
}

}  // namespace cpr
