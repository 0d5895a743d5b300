#include <doctest.h>

#include <cmath>
#include <vector>

#include "cpr/l1.hpp"
#include "cpr/phase_retrieval.hpp"
#include "cpr/rng.hpp"
#include "support/oracles.hpp"

using cpr::Complex;
using cpr::ComplexSignal;
using cpr::L1Problem;
using cpr::SensingOperator;
using cpr::SolverOptions;
using cpr::SolverReport;

namespace {

ComplexSignal sparse_signal(std::size_t n, std::size_t k, std::uint64_t seed,
                            cpr::FirstEntryMode mode = cpr::FirstEntryMode::Uniform) {
  cpr::Rng rng(seed);
  return cpr::random_sparse_signal(n, k, rng, mode).values;
}

double max_abs_diff(const ComplexSignal& a, const ComplexSignal& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

SolverOptions tight() {
  SolverOptions o;
  o.gap_tol = 1e-10;
  o.max_operator_applications = 200000;
  return o;
}

}  // namespace

TEST_CASE("soft threshold shrinks magnitudes and keeps phases") {
  const Complex v = std::polar(2.5, 1.1);
  const Complex shrunk = cpr::soft_threshold(v, 1.0);
  CHECK(std::abs(shrunk) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(std::arg(shrunk) == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(cpr::soft_threshold(std::polar(0.3, -2.0), 0.5) == Complex(0.0, 0.0));
  CHECK(cpr::soft_threshold(v, 0.0) == v);
  CHECK_THROWS_AS(cpr::soft_threshold(v, -0.1), std::invalid_argument);
}

TEST_CASE("equality-constrained recovery matches the exhaustive sparse oracle") {
  // Small enough that every support can be enumerated: the convex program
  // must land on the same sparsest consistent point.
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t n = 12, k = 2;
    cpr::Rng sampler(900 + seed);
    const auto rows = sampler.sample(n, 8);
    const SensingOperator op = SensingOperator::partial_dft(n, rows);
    const ComplexSignal x = sparse_signal(n, k, 1000 + seed);
    const ComplexSignal rhs = op.forward(x);

    const SolverReport r = cpr::solve_bp({op, rhs, 0.0}, tight());
    const ComplexSignal oracle = oracles::sparsest_consistent(op, rhs, k);
    if (max_abs_diff(oracle, x) > 1e-8) continue;  // oracle ambiguous; skip
    CHECK(r.converged);
    CHECK(max_abs_diff(r.solution, oracle) < 1e-6);
    ++solved;
  }
  CHECK(solved >= 25);
}

TEST_CASE("gaussian equality constraints go through the dense projection") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 16, k = 2, rows = 9;
    const SensingOperator op = SensingOperator::gaussian(rows, n, 500 + seed);
    const ComplexSignal x = sparse_signal(n, k, 600 + seed);
    const ComplexSignal rhs = op.forward(x);

    const SolverReport r = cpr::solve_bp({op, rhs, 0.0}, tight());
    CHECK(r.converged);
    CHECK(r.residual_norm < 1e-8 * std::max(1.0, cpr::norm2(rhs)));
    CHECK(max_abs_diff(r.solution, x) < 1e-6);
  }
}

TEST_CASE("solutions are phase equivariant") {
  const std::size_t n = 24, k = 3;
  cpr::Rng sampler(7);
  const SensingOperator op = SensingOperator::partial_dft(n, sampler.sample(n, 14));
  const ComplexSignal x = sparse_signal(n, k, 8);
  const ComplexSignal rhs = op.forward(x);

  ComplexSignal rotated_rhs = rhs;
  const Complex phase = std::polar(1.0, -0.9);
  for (auto& v : rotated_rhs) v *= phase;

  const SolverReport a = cpr::solve_bp({op, rhs, 0.0}, tight());
  const SolverReport b = cpr::solve_bp({op, rotated_rhs, 0.0}, tight());
  for (std::size_t i = 0; i < a.solution.size(); ++i) {
    CHECK(std::abs(a.solution[i] * phase - b.solution[i]) < 1e-7);
  }
}

TEST_CASE("ball constraints trade residual for sparsity") {
  const std::size_t n = 32, k = 3;
  cpr::Rng sampler(17);
  const SensingOperator op = SensingOperator::partial_dft(n, sampler.sample(n, 20));
  const ComplexSignal x = sparse_signal(n, k, 18);
  const ComplexSignal rhs = op.forward(x);

  const SolverReport exact = cpr::solve_bp({op, rhs, 0.0}, tight());
  const double eps = 0.05 * cpr::norm2(rhs);
  const SolverReport relaxed = cpr::solve_bp({op, rhs, eps}, tight());

  CHECK(relaxed.converged);
  // Feasible up to the declared slack allowance...
  CHECK(relaxed.residual_norm <= eps + 1e-7 * std::max(1.0, cpr::norm2(rhs)));
  // ...and the extra room can only reduce the objective.
  CHECK(relaxed.objective <= exact.objective + 1e-9);
  CHECK(relaxed.residual_norm > 1e-4);  // the room is actually used
}

TEST_CASE("fista with continuation solves dense ball problems") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t n = 20, k = 2, rows = 12;
    const SensingOperator op = SensingOperator::gaussian(rows, n, 700 + seed);
    const ComplexSignal x = sparse_signal(n, k, 800 + seed);
    ComplexSignal rhs = op.forward(x);

    // Perturb within a known radius, then ask for that radius.
    cpr::Rng noise(900 + seed);
    ComplexSignal bump(rhs.size());
    for (auto& v : bump) v = noise.complex_gaussian();
    const double eps = 0.01 * cpr::norm2(rhs);
    const double scale = eps / (2.0 * cpr::norm2(bump));
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += scale * bump[i];

    SolverOptions opts;
    opts.gap_tol = 1e-6;
    opts.max_operator_applications = 300000;
    const SolverReport r = cpr::solve_bp({op, rhs, eps}, opts);
    CHECK(r.converged);
    CHECK(r.residual_norm <= eps + 1e-6 * std::max(1.0, cpr::norm2(rhs)));
    CHECK(max_abs_diff(r.solution, x) < 0.05);
  }
}

TEST_CASE("forced methods agree on orthonormal equality problems") {
  const std::size_t n = 16, k = 2;
  cpr::Rng sampler(27);
  const SensingOperator op = SensingOperator::partial_dft(n, sampler.sample(n, 10));
  const ComplexSignal x = sparse_signal(n, k, 28);
  // A touch of slack so the fista path certifies cleanly.
  const double eps = 1e-4;
  const ComplexSignal rhs = op.forward(x);

  SolverOptions dr = tight();
  dr.method = cpr::SolverMethod::DouglasRachford;
  SolverOptions fista = tight();
  fista.method = cpr::SolverMethod::Fista;
  fista.gap_tol = 1e-8;

  const SolverReport a = cpr::solve_bp({op, rhs, eps}, dr);
  const SolverReport b = cpr::solve_bp({op, rhs, eps}, fista);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-4));
  CHECK(max_abs_diff(a.solution, b.solution) < 1e-3);
}

TEST_CASE("a trivial right-hand side returns the zero solution") {
  const SensingOperator op = SensingOperator::partial_dft(8, {1, 3, 5});
  const SolverReport r = cpr::solve_bp({op, ComplexSignal(3, Complex(0.0, 0.0)), 0.0});
  CHECK(r.converged);
  CHECK(r.objective == 0.0);
  for (const Complex& v : r.solution) CHECK(v == Complex(0.0, 0.0));

  // Same when the data fits inside the ball.
  ComplexSignal tiny(3, Complex(1e-6, 0.0));
  const SolverReport s = cpr::solve_bp({op, tiny, 1.0});
  CHECK(s.converged);
  CHECK(s.objective == 0.0);
}

TEST_CASE("an exhausted budget reports rather than throws") {
  const std::size_t n = 64, k = 8;
  cpr::Rng sampler(31);
  const SensingOperator op = SensingOperator::partial_dft(n, sampler.sample(n, 40));
  const ComplexSignal rhs = op.forward(sparse_signal(n, k, 32));

  SolverOptions opts;
  opts.max_operator_applications = 24;
  const SolverReport r = cpr::solve_bp({op, rhs, 0.0}, opts);
  CHECK(!r.converged);
  // The loop stops at the budget; only the final certificate and the exit
  // re-measurement may run past it.
  CHECK(r.operator_applications <= 24 + 8);
}

TEST_CASE("malformed problems are rejected") {
  const SensingOperator op = SensingOperator::partial_dft(8, {1, 3, 5});
  const ComplexSignal rhs(3, Complex(1.0, 0.0));

  CHECK_THROWS_AS(cpr::solve_bp({op, ComplexSignal(2), 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(cpr::solve_bp({op, rhs, -1.0}), std::invalid_argument);

  SolverOptions bad;
  bad.gap_tol = 0.0;
  CHECK_THROWS_AS(cpr::solve_bp({op, rhs, 0.0}, bad), std::invalid_argument);

  // Douglas-Rachford has no exact ball projection for non-orthonormal rows.
  const SensingOperator dense = SensingOperator::gaussian(4, 8, 1);
  SolverOptions force_dr;
  force_dr.method = cpr::SolverMethod::DouglasRachford;
  CHECK_THROWS_AS(cpr::solve_bp({dense, ComplexSignal(4, Complex(1.0, 0.0)), 0.5}, force_dr),
                  std::invalid_argument);
}

TEST_CASE("noise radius estimate grows with noise and confidence") {
  CHECK(cpr::estimate_epsilon(64, 0.0, 0.9) == 0.0);

  const double lo = cpr::estimate_epsilon(64, 1e-3, 0.9);
  const double hi = cpr::estimate_epsilon(64, 2e-3, 0.9);
  CHECK(lo > 0.0);
  CHECK(hi > lo);

  const double conf90 = cpr::estimate_epsilon(64, 1e-3, 0.90);
  const double conf99 = cpr::estimate_epsilon(64, 1e-3, 0.99);
  CHECK(conf99 > conf90);

  const double few = cpr::estimate_epsilon(16, 1e-3, 0.9);
  const double many = cpr::estimate_epsilon(256, 1e-3, 0.9);
  CHECK(many > few);

  CHECK_THROWS_AS(cpr::estimate_epsilon(0, 1e-3, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(cpr::estimate_epsilon(64, -1.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(cpr::estimate_epsilon(64, 1e-3, 1.5), std::invalid_argument);
}

TEST_CASE("noise radius estimate covers the realized sketch error") {
  // Monte Carlo: recover sketches from noisy intensities and compare the
  // realized error against the predicted radius at 90% confidence.
  const std::size_t L = 64;
  const double sigma = 3e-3;
  int covered = 0;
  const int rounds = 200;
  for (int round = 0; round < rounds; ++round) {
    cpr::Rng rng(5000 + round);
    ComplexSignal y(L + 1);
    for (auto& v : y) v = rng.complex_gaussian();
    y[0] = Complex(1.0, 0.0);

    cpr::IntensityMeasurements m = cpr::measure_vectors(y);
    double s2 = 0.0;
    for (std::size_t l = 1; l < y.size(); ++l) s2 += std::norm(y[l]);
    for (double& v : m.values) {
      const Complex nu = sigma * rng.complex_gaussian();
      // |f + nu|^2 realized through the linear expansion used by the model.
      v = std::max(0.0, v + 2.0 * std::sqrt(v) * nu.real() + std::norm(nu));
    }

    ComplexSignal recovered;
    try {
      recovered = cpr::recover_phases(m).y;
    } catch (const cpr::ModelViolation&) {
      continue;
    }
    // Undo the global phase before measuring the error.
    Complex ip(0.0, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) ip += y[i] * std::conj(recovered[i]);
    const Complex c = std::abs(ip) > 0.0 ? ip / std::abs(ip) : Complex(1.0, 0.0);
    double err2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) err2 += std::norm(y[i] - c * recovered[i]);

    const double radius = cpr::estimate_epsilon(L, sigma, 0.9, 1.0, s2);
    if (std::sqrt(err2) <= radius) ++covered;
  }
  // 90% nominal coverage: [160, 200] of 200 leaves slack on both sides.
  CHECK(covered >= 160);
}
