#include "cpr/l1.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpr {

Complex soft_threshold(Complex v, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: negative threshold");
  const double mag = std::abs(v);
  if (mag <= t) return Complex(0.0, 0.0);
  return v * ((mag - t) / mag);
}

namespace {

// ---------------------------------------------------------------------------
// Small dense Hermitian positive-definite solves for the Gram matrix A A*.

struct GramCholesky {
  std::size_t m = 0;
  std::vector<Complex> lower;  // row-major lower triangle, m x m

  // Builds A A* by applying the operator to unit vectors, then factors it.
  // Costs 2m operator applications once per solve_bp call.
  static GramCholesky build(const SensingOperator& a, std::size_t& ops) {
    const std::size_t m = a.rows();
    std::vector<ComplexSignal> cols(m);
    ComplexSignal e(m, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
      e[j] = Complex(1.0, 0.0);
      cols[j] = a.adjoint(e);
      ++ops;
      e[j] = Complex(0.0, 0.0);
    }
    std::vector<Complex> g(m * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const Complex v = inner(cols[j], cols[i]);  // (A A*)_{ij}
        g[i * m + j] = v;
        g[j * m + i] = std::conj(v);
      }

    GramCholesky c;
    c.m = m;
    c.lower.assign(m * m, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        Complex s = g[i * m + j];
        for (std::size_t k = 0; k < j; ++k)
          s -= c.lower[i * m + k] * std::conj(c.lower[j * m + k]);
        if (i == j) {
          const double d = s.real();
          if (!(d > 0.0))
            throw std::invalid_argument("solve_bp: operator rows are linearly dependent");
          c.lower[i * m + i] = Complex(std::sqrt(d), 0.0);
        } else {
          c.lower[i * m + j] = s / c.lower[j * m + j];
        }
      }
    }
    return c;
  }

  ComplexSignal solve(ComplexSignal b) const {
    // L z = b
    for (std::size_t i = 0; i < m; ++i) {
      Complex s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= lower[i * m + k] * b[k];
      b[i] = s / lower[i * m + i];
    }
    // L* x = z
    for (std::size_t ii = m; ii-- > 0;) {
      Complex s = b[ii];
      for (std::size_t k = ii + 1; k < m; ++k) s -= std::conj(lower[k * m + ii]) * b[k];
      b[ii] = s / lower[ii * m + ii];
    }
    return b;
  }
};

void axpy(ComplexSignal& y, Complex a, const ComplexSignal& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Certified lower bound on the optimum from a dual candidate mu living in
// measurement space: mu is rescaled into the dual-feasible set
// {||A* mu||_inf <= 1} and evaluated, so the returned bound is always valid.
double dual_bound(const SensingOperator& a, const ComplexSignal& rhs, double epsilon,
                  const ComplexSignal& mu, std::size_t& ops) {
  ComplexSignal at_mu = a.adjoint(mu);
  ++ops;
  const double scale = std::max(1.0, norm_inf(at_mu));
  double value = 0.0;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    value += (mu[i] * std::conj(rhs[i])).real();
  value /= scale;
  value -= epsilon * norm2(mu) / scale;
  return value;
}

struct Checkpoint {
  double objective = 0.0;
  double gap = 1.0;
  bool met = false;
};

Checkpoint gap_check(const SensingOperator& a, const ComplexSignal& rhs, double epsilon,
                     const ComplexSignal& feasible_point, const ComplexSignal& mu,
                     double gap_tol, std::size_t& ops) {
  Checkpoint c;
  c.objective = norm1(feasible_point);
  const double lower = dual_bound(a, rhs, epsilon, mu, ops);
  c.gap = (c.objective - lower) / std::max(1.0, c.objective);
  c.met = c.gap <= gap_tol;
  return c;
}

// ---------------------------------------------------------------------------
// Douglas-Rachford splitting on ||z||_1 + indicator of {||Az - rhs|| <= eps}.
// The constraint projection is exact: for orthonormal rows it is
// z + A*(r) with r the (possibly shrunk) residual, otherwise the residual
// equation is solved through the Gram Cholesky factorization (equality
// constraints only).

SolverReport run_douglas_rachford(const L1Problem& p, const SolverOptions& opts) {
  const SensingOperator& a = p.op;
  const ComplexSignal& rhs = p.rhs;
  const bool need_gram = !a.rows_orthonormal();
  std::size_t ops = 0;

  GramCholesky gram;
  if (need_gram) gram = GramCholesky::build(a, ops);

  // Projection onto the constraint set, exact up to the factorization.
  const auto project = [&](const ComplexSignal& t) {
    ComplexSignal at = a.forward(t);
    ++ops;
    ComplexSignal r(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) r[i] = rhs[i] - at[i];
    if (p.epsilon > 0.0) {
      const double rn = norm2(r);
      const double shrink = rn > p.epsilon ? 1.0 - p.epsilon / rn : 0.0;
      for (Complex& v : r) v *= shrink;
    }
    if (need_gram) r = gram.solve(std::move(r));
    ComplexSignal w = t;
    ComplexSignal atr = a.adjoint(r);
    ++ops;
    axpy(w, Complex(1.0, 0.0), atr);
    return w;
  };

  ComplexSignal v = a.adjoint(rhs);
  ++ops;
  const double gamma = opts.dr_gamma_scale * norm_inf(v);
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_bp: zero right-hand side slipped through");

  SolverReport rep;
  ComplexSignal x(a.cols()), best = v;
  bool have_feasible = false;
  constexpr std::size_t kCheckEvery = 8;

  while (ops + 4 <= opts.max_operator_applications) {
    ++rep.iterations;
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = soft_threshold(v[i], gamma);

    const bool check = (rep.iterations % kCheckEvery == 0) && have_feasible;
    if (check) {
      // (v - x)/gamma is a subgradient of the l1 norm at x; mapping it back
      // to measurement space gives the dual candidate.
      ComplexSignal d(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - x[i]) / gamma;
      ComplexSignal mu = a.forward(d);
      ++ops;
      if (need_gram) mu = gram.solve(std::move(mu));
      const Checkpoint c = gap_check(a, rhs, p.epsilon, best, mu, opts.gap_tol, ops);
      rep.duality_gap = c.gap;
      if (c.met) {
        rep.converged = true;
        break;
      }
    }

    ComplexSignal t(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = 2.0 * x[i] - v[i];
    ComplexSignal w = project(t);
    best = w;
    have_feasible = true;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i] - x[i];
  }

  rep.solution = std::move(best);
  rep.operator_applications = ops;
  return rep;
}

// ---------------------------------------------------------------------------
// FISTA with penalty continuation for ball constraints on general operators:
// solves min lambda ||z||_1 + 0.5 ||Az - rhs||^2 and steers lambda until the
// residual lands just inside epsilon.

struct FistaState {
  ComplexSignal z;
  double residual = 0.0;
};

double spectral_bound(const SensingOperator& a, std::size_t& ops) {
  Rng rng(0x5ca1ab1e);
  ComplexSignal b(a.cols());
  for (Complex& v : b) v = rng.complex_gaussian();
  double lambda = 1.0;
  for (int it = 0; it < 30; ++it) {
    ComplexSignal c = a.adjoint(a.forward(b));
    ops += 2;
    lambda = norm2(c);
    if (!(lambda > 0.0)) return 1.0;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = c[i] / lambda;
  }
  return lambda;  // ~ largest eigenvalue of A*A
}

void fista_penalized(const SensingOperator& a, const ComplexSignal& rhs, double lambda,
                     double step, FistaState& st, const SolverOptions& opts,
                     std::size_t inner_cap, std::size_t& ops, std::size_t& iterations) {
  ComplexSignal z = st.z;
  ComplexSignal zprev = z;
  ComplexSignal w = z;
  double tau = 1.0;
  for (std::size_t it = 0; it < inner_cap && ops + 2 <= opts.max_operator_applications; ++it) {
    ++iterations;
    ComplexSignal aw = a.forward(w);
    ++ops;
    for (std::size_t i = 0; i < aw.size(); ++i) aw[i] -= rhs[i];
    ComplexSignal g = a.adjoint(aw);
    ++ops;
    zprev = std::move(z);
    z.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      z[i] = soft_threshold(w[i] - step * g[i], step * lambda);
    const double tau_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tau * tau));
    const double mom = (tau - 1.0) / tau_next;
    w.resize(z.size());
    double delta = 0.0, base = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const Complex d = z[i] - zprev[i];
      delta += std::norm(d);
      base += std::norm(z[i]);
      w[i] = z[i] + mom * d;
    }
    tau = tau_next;
    if (delta <= 1e-20 * std::max(1.0, base)) break;
  }
  st.z = std::move(z);
  ComplexSignal az = a.forward(st.z);
  ++ops;
  double r2 = 0.0;
  for (std::size_t i = 0; i < az.size(); ++i) r2 += std::norm(az[i] - rhs[i]);
  st.residual = std::sqrt(r2);
}

SolverReport run_fista_continuation(const L1Problem& p, const SolverOptions& opts) {
  const SensingOperator& a = p.op;
  const ComplexSignal& rhs = p.rhs;
  std::size_t ops = 0;
  SolverReport rep;

  const double lip = spectral_bound(a, ops);
  const double step = 1.0 / (1.1 * lip);

  ComplexSignal at_rhs = a.adjoint(rhs);
  ++ops;
  double lambda_hi = norm_inf(at_rhs);  // z = 0 is optimal at and above this
  if (!(lambda_hi > 0.0)) throw std::invalid_argument("solve_bp: zero right-hand side slipped through");

  const std::size_t inner_cap = 1500;
  FistaState st;
  st.z.assign(a.cols(), Complex(0.0, 0.0));
  st.residual = norm2(rhs);

  // Walk lambda down until the residual dips under epsilon, then bisect the
  // bracket until the residual sits just inside the ball.
  double lo = lambda_hi, hi = lambda_hi;
  FistaState at_lo;
  bool have_lo = false;
  for (int k = 0; k < 60 && ops < opts.max_operator_applications; ++k) {
    lo *= 0.5;
    fista_penalized(a, rhs, lo, step, st, opts, inner_cap, ops, rep.iterations);
    if (st.residual <= p.epsilon) {
      at_lo = st;
      have_lo = true;
      break;
    }
    hi = lo;
  }
  // Certify via the dual of the ball problem: the residual direction over the
  // penalty (at the penalized optimum ||A*(rhs - Az)||_inf <= lambda). The gap
  // shrinks with the residual's distance to the ball boundary, so keep
  // tightening the bisection window until the certificate clears gap_tol or
  // the operator budget runs out.
  Checkpoint c;
  const auto certify = [&](const FistaState& s) {
    ComplexSignal az = a.forward(s.z);
    ++ops;
    ComplexSignal mu(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) mu[i] = (rhs[i] - az[i]) / lo;
    c = gap_check(a, rhs, p.epsilon, s.z, mu, opts.gap_tol, ops);
  };
  if (have_lo) {
    double proximity = 1e-3;
    for (int refine = 0; refine < 10; ++refine) {
      for (int k = 0; k < 40 && ops < opts.max_operator_applications; ++k) {
        if (at_lo.residual >= p.epsilon * (1.0 - proximity)) break;  // close enough to the boundary
        const double mid = std::sqrt(lo * hi);
        fista_penalized(a, rhs, mid, step, st, opts, inner_cap, ops, rep.iterations);
        if (st.residual <= p.epsilon) {
          lo = mid;
          at_lo = st;
        } else {
          hi = mid;
          st = at_lo;  // restart next probe from the feasible iterate
        }
      }
      st = at_lo;
      // Polish at the accepted penalty so the iterate is fully settled.
      fista_penalized(a, rhs, lo, step, st, opts, inner_cap, ops, rep.iterations);
      if (st.residual > p.epsilon) st = at_lo;
      else at_lo = st;
      certify(st);
      if (c.met || ops >= opts.max_operator_applications) break;
      proximity *= 0.05;
    }
  } else {
    certify(st);
  }
  rep.duality_gap = c.gap;

  rep.solution = std::move(st.z);
  rep.operator_applications = ops;
  const double slack = st.residual - p.epsilon;
  rep.converged = c.met && slack <= opts.feasibility_tol * std::max(1.0, norm2(rhs));
  return rep;
}

}  // namespace

SolverReport solve_bp(const L1Problem& p, const SolverOptions& opts) {
  if (p.rhs.size() != p.op.rows()) throw std::invalid_argument("solve_bp: rhs size mismatch");
  if (!(p.epsilon >= 0.0) || !std::isfinite(p.epsilon))
    throw std::invalid_argument("solve_bp: epsilon must be finite and nonnegative");
  if (!all_finite(p.rhs)) throw std::invalid_argument("solve_bp: rhs has non-finite entries");
  if (opts.max_operator_applications < 8)
    throw std::invalid_argument("solve_bp: operator budget too small");
  if (!(opts.gap_tol > 0.0) || !(opts.feasibility_tol >= 0.0) || !(opts.dr_gamma_scale > 0.0))
    throw std::invalid_argument("solve_bp: malformed tolerances");

  // Trivial instances: the origin is feasible iff ||rhs|| <= epsilon.
  if (norm2(p.rhs) <= p.epsilon) {
    SolverReport rep;
    rep.solution.assign(p.op.cols(), Complex(0.0, 0.0));
    rep.residual_norm = norm2(p.rhs);
    rep.converged = true;
    return rep;
  }

  SolverMethod method = opts.method;
  if (method == SolverMethod::Auto) {
    if (p.op.rows_orthonormal() || p.epsilon == 0.0)
      method = SolverMethod::DouglasRachford;
    else
      method = SolverMethod::Fista;
  } else if (method == SolverMethod::DouglasRachford && p.epsilon > 0.0 &&
             !p.op.rows_orthonormal()) {
    throw std::invalid_argument(
        "solve_bp: Douglas-Rachford needs orthonormal rows for ball constraints");
  }

  SolverReport rep = method == SolverMethod::DouglasRachford ? run_douglas_rachford(p, opts)
                                                             : run_fista_continuation(p, opts);

  // Recompute the reported residual from scratch; never trust iterate
  // bookkeeping in the exit record.
  ComplexSignal az = p.op.forward(rep.solution);
  ++rep.operator_applications;
  double r2 = 0.0;
  for (std::size_t i = 0; i < az.size(); ++i) r2 += std::norm(az[i] - p.rhs[i]);
  rep.residual_norm = std::sqrt(r2);
  rep.objective = norm1(rep.solution);
  if (method == SolverMethod::DouglasRachford) {
    const double slack = rep.residual_norm - p.epsilon;
    rep.converged = rep.converged && slack <= opts.feasibility_tol * std::max(1.0, norm2(p.rhs));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Noise-level calibration for the ball constraint.

namespace {

// Inverse standard normal CDF (Acklam's rational approximation, ~1e-9
// absolute error over the open unit interval).
double normal_quantile(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Wilson-Hilferty cube approximation of the chi-square quantile.
double chi_square_quantile(double dof, double p) {
  const double z = normal_quantile(p);
  const double t = 2.0 / (9.0 * dof);
  const double core = 1.0 - t + z * std::sqrt(t);
  return dof * core * core * core;
}

}  // namespace

double estimate_epsilon(std::size_t blocks, double sigma_nu, double confidence,
                        double first_entry_energy, double spectrum_energy) {
  if (blocks == 0) throw std::invalid_argument("estimate_epsilon: blocks must be positive");
  if (!(sigma_nu >= 0.0) || !std::isfinite(sigma_nu))
    throw std::invalid_argument("estimate_epsilon: bad noise level");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("estimate_epsilon: confidence must be in (0, 1)");
  if (!(first_entry_energy > 0.0))
    throw std::invalid_argument("estimate_epsilon: anchor energy must be positive");
  if (sigma_nu == 0.0) return 0.0;

  const double L = static_cast<double>(blocks);
  const double u = first_entry_energy;
  const double s2 = spectrum_energy < 0.0 ? L : spectrum_energy;
  const double sig2 = sigma_nu * sigma_nu;

  const double var_term = 1.5 / u * (sig2 * (L * u + s2) + L * sig2 * sig2);
  const double bias_term = s2 * sig2 * sig2 / (4.0 * u * u);
  const double quantile = chi_square_quantile(2.0 * L, confidence);
  return std::sqrt(bias_term + var_term * quantile / (2.0 * L));
}

}  // namespace cpr
