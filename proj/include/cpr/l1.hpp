#pragma once

#include <cstddef>

#include "cpr/measurement.hpp"
#include "cpr/types.hpp"

namespace cpr {

/// min ||z||_1  subject to  ||A z - rhs||_2 <= epsilon
/// (equality constraint when epsilon == 0).
struct L1Problem {
  SensingOperator op;
  ComplexSignal rhs;
  double epsilon = 0.0;
};

enum class SolverMethod {
  Auto,             ///< pick per problem structure (see solve_bp)
  DouglasRachford,  ///< splitting with exact constraint projections
  Fista,            ///< accelerated proximal gradient with penalty continuation
};

struct SolverOptions {
  /// Global budget counted in operator applications (each forward or
  /// adjoint costs one); the dominant cost at every problem size.
  std::size_t max_operator_applications = 60000;

  /// Constraint slack allowance, relative to max(1, ||rhs||).
  double feasibility_tol = 1e-9;

  /// Relative duality-gap target; convergence is declared only when a
  /// certified dual bound is this close to the objective.
  double gap_tol = 1e-7;

  /// Proximal step, relative to ||A* rhs||_inf.
  double dr_gamma_scale = 0.1;

  SolverMethod method = SolverMethod::Auto;
};

struct SolverReport {
  ComplexSignal solution;
  double objective = 0.0;          ///< l1 norm of the solution
  double residual_norm = 0.0;      ///< ||A solution - rhs||, recomputed at exit
  double duality_gap = 0.0;        ///< last certified relative gap
  std::size_t iterations = 0;
  std::size_t operator_applications = 0;
  bool converged = false;          ///< gap and feasibility targets both met
};

/// Basis-pursuit solver.  Auto method selection:
///   - orthonormal-row operators (partial unitary DFT): Douglas-Rachford
///     with closed-form projections, for equality and ball constraints;
///   - other operators, equality: Douglas-Rachford with projections through
///     a Cholesky factorization of the (small) Gram matrix A A*;
///   - other operators, ball: FISTA on the penalized problem with
///     continuation on the penalty until the residual matches epsilon.
/// Never throws on non-convergence; the report carries converged = false.
/// Throws std::invalid_argument for malformed problems, and when
/// DouglasRachford is forced on a ball constraint without orthonormal rows.
SolverReport solve_bp(const L1Problem& p, const SolverOptions& opts = {});

/// Complex soft threshold: magnitude shrinks by t (to zero at most), phase
/// is preserved.  Requires t >= 0.
Complex soft_threshold(Complex v, double t);

/// High-confidence bound on the sketch error passed to the ball constraint.
/// For L blocks under per-sample complex noise of variance sigma_nu^2, with
/// anchor energy u = |y[0]|^2 and spectrum energy s2 = ||y[1..]||^2
/// (s2 < 0 selects the default s2 = L), returns epsilon such that
/// ||recovered sketch - true sketch|| <= epsilon with roughly the given
/// confidence.  Combines a bias term with a chi-square tail bound on the
/// fluctuation; exact when sigma_nu = 0 (returns 0).
double estimate_epsilon(std::size_t blocks, double sigma_nu, double confidence,
                        double first_entry_energy = 1.0, double spectrum_energy = -1.0);

}  // namespace cpr
