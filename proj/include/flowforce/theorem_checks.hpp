#pragma once
//------------------------------------------------------------------------------
// Inequalities and identities that every non-laminar steady wave must obey,
// evaluated on concrete inputs and collected into a report.
//
// Each check returns an entry with the measured value, the threshold it was
// compared against and a short statement of the claim. Laminar inputs
// (amplitude at most `laminar_amplitude`) are outside the scope of the
// barrier and the scaled-head bounds; a violation there is reported as
// exempt rather than failed.
//------------------------------------------------------------------------------

#include <flowforce/dj_problem.hpp>
#include <flowforce/dj_solver.hpp>
#include <flowforce/errors.hpp>
#include <flowforce/flow_force.hpp>
#include <flowforce/format.hpp>
#include <flowforce/grid.hpp>
#include <flowforce/hodograph.hpp>
#include <flowforce/region.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace flowforce {

enum class CheckStatus { pass, fail, skip, exempt };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skip: return "skip";
    case CheckStatus::exempt: return "exempt";
  }
  return "fail";
}

struct CheckEntry {
  std::string name;
  CheckStatus status = CheckStatus::skip;
  double value = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::string reference;
  std::string note;
};

struct InputProvenance {
  std::string path;
  std::string sha256;
};

struct CheckReport {
  std::vector<CheckEntry> entries;
  std::vector<InputProvenance> inputs;
  std::size_t nq = 0;
  std::size_t np = 0;

  bool pass() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const CheckEntry& e) { return e.status == CheckStatus::fail; });
  }
};

struct CheckTolerances {
  double closed_form = 1e-8;
  double laminar_amplitude = 1e-7;
  double residual_factor = 10.0;
};

// Margin used for solver-produced inputs.
inline double solver_tolerance(double residual_norm, const CheckTolerances& t = {}) {
  return std::max(t.residual_factor * residual_norm, 1e-13);
}

// FF > r^2/2 for every non-laminar wave. Laminar inputs only need the weak
// bound; otherwise they are exempt. No rate is imposed on the strict margin.
inline CheckEntry check_barrier(double r, double FF, double amplitude, double tol,
                                 const CheckTolerances& t = {}) {
  CheckEntry e{"barrier", CheckStatus::fail, FF - barrier(r), 0.0,
               "non-laminar waves have flow force above r^2/2", ""};
  if (amplitude <= t.laminar_amplitude) {
    e.threshold = -tol;
    if (e.value > -tol) {
      e.status = CheckStatus::pass;
      e.note = "laminar input, weak bound";
    } else {
      e.status = CheckStatus::exempt;
      e.note = "laminar input below the barrier";
    }
    return e;
  }
  e.status = e.value > 0.0 ? CheckStatus::pass : CheckStatus::fail;
  return e;
}

// R_c < R < R0 for every non-laminar scaled wave; value is the smaller margin.
inline CheckEntry check_scaled_head_bounds(double R, double amplitude, const CheckTolerances& t = {}) {
  const CriticalConstants cc = critical_constants();
  CheckEntry e{"scaled_head_bounds", CheckStatus::fail, std::min(R - cc.R_c, cc.R0 - R), 0.0,
               "non-laminar scaled waves have sqrt(3/2) < R < sqrt(2)", ""};
  const bool ok = R - cc.R_c > 0.0 && cc.R0 - R > 0.0;
  e.note = "lower margin " + format_number(R - cc.R_c, 6) + ", upper margin " + format_number(cc.R0 - R, 6);
  if (ok) {
    e.status = CheckStatus::pass;
  } else if (amplitude <= t.laminar_amplitude) {
    e.status = CheckStatus::exempt;
    e.note += "; laminar input";
  }
  return e;
}

inline CheckEntry check_region(double r, double FF, double tol) {
  CheckEntry e{"region", CheckStatus::skip, std::numeric_limits<double>::quiet_NaN(), -tol,
               "F_minus(r) <= FF <= F_plus(r)", ""};
  if (!std::isfinite(r) || r < cusp_head) {
    e.note = "head below the cusp, no region";
    return e;
  }
  const BoundaryPair b = bl_boundaries(r);
  e.value = std::min(FF - b.F_minus, b.F_plus - FF);
  e.status = e.value >= -tol ? CheckStatus::pass : CheckStatus::fail;
  if (e.status == CheckStatus::fail) e.note = FF < b.F_minus ? "below the lower boundary" : "above the upper boundary";
  return e;
}

inline CheckEntry check_unidirectional(const FlowForceField& fff, double tol) {
  const UnidirectionalMargin m = unidirectional_margin(fff);
  CheckEntry e{"unidirectional", CheckStatus::fail, m.min_gap, -tol, "F_y >= psi_y^2 > 0", ""};
  e.status = (m.min_gap >= -tol && m.min_psi_y > 0.0) ? CheckStatus::pass : CheckStatus::fail;
  e.note = "min at column " + std::to_string(m.column) + ", level " + std::to_string(m.level) +
           "; min psi_y " + format_number(m.min_psi_y, 6);
  return e;
}

inline CheckEntry check_superharmonic(const WaveField& w, double tol) {
  const double v = superharmonic_check(w);
  return CheckEntry{"superharmonic", v <= tol ? CheckStatus::pass : CheckStatus::fail, v, tol,
                    "(1/2)|grad psi|^2 + y <= r", ""};
}

// min over the grid of the forward difference quotient h_p.
inline CheckEntry check_stagnation(const HeightField& h) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t where = 0;
  for (std::size_t i = 0; i < h.nq(); ++i)
    for (std::size_t j = 0; j < h.np(); ++j) {
      const double d = (h.h(i, j + 1) - h.h(i, j)) / h.dp();
      if (d < lo) {
        lo = d;
        where = i;
      }
      hi = std::max(hi, d);
    }
  CheckEntry e{"stagnation", CheckStatus::fail, lo, 0.0, "h_p > 0 throughout", ""};
  const bool ok = std::isfinite(lo) && lo > 0.0 && hi * stagnation_threshold < 1.0;
  e.status = ok ? CheckStatus::pass : CheckStatus::fail;
  if (!ok) e.note = "column " + std::to_string(where);
  return e;
}

// Recomputed residual against the one stored with the solution.
inline CheckEntry check_residual(const HeightField& h, double stored_residual) {
  CheckEntry e{"residual", CheckStatus::fail, std::numeric_limits<double>::quiet_NaN(),
               std::max(10.0 * stored_residual, 1e-9), "discrete system satisfied", ""};
  try {
    e.value = residual(h, problem_of(h)).max_abs();
    e.status = e.value <= e.threshold ? CheckStatus::pass : CheckStatus::fail;
  } catch (const std::exception& ex) {
    e.note = ex.what();
  }
  return e;
}

// Bernoulli function of streams. Solver outputs are compared with the
// discrete stream of the same grid, closed-form inputs with R(d).
struct StreamHead {
  bool discrete = false;
  std::size_t nq = 4;
  std::size_t np = 4;
  double operator()(double depth) const {
    if (!discrete) return scaled_bernoulli(depth, true);
    return discrete_stream(ProblemTag::flow_force_scaled, depth, nq, np, 1.0).head;
  }
};

inline StreamHead stream_head_for(const HeightField& h, bool discrete) { return StreamHead{discrete, 4, h.np()}; }

// R <= R(sup zeta) and R >= R(inf zeta).
inline std::vector<CheckEntry> comparison_endpoints(const HeightField& h, double tol, bool discrete = true) {
  const std::vector<double> z = h.surface();
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  const StreamHead Rs = stream_head_for(h, discrete);
  const double R = h.head;
  CheckEntry up{"endpoint_upper", CheckStatus::fail, Rs(*hi) - R, -tol, "R <= R(sup zeta)", ""};
  CheckEntry dn{"endpoint_lower", CheckStatus::fail, R - Rs(*lo), -tol, "R >= R(inf zeta)", ""};
  up.status = up.value >= -tol ? CheckStatus::pass : CheckStatus::fail;
  dn.status = dn.value >= -tol ? CheckStatus::pass : CheckStatus::fail;
  const char* how = discrete ? "discrete stream head" : "closed-form stream head";
  up.note = dn.note = how;
  return {up, dn};
}

struct ComparisonField {
  double depth = 0.0;
  Grid2 w;
  double residual = 0.0;   // max |comparison equation| over interior nodes
  double reference = 0.0;  // max |L h| + max |E H| on the same stencil
};

namespace detail {

struct LocalDerivatives {
  double q, p, qq, qp, pp;
};

inline LocalDerivatives local_derivatives(const Grid2& g, std::size_t i, std::size_t j, double dq, double dp) {
  const std::size_t nq = g.nx();
  const std::size_t ie = wrap(static_cast<std::ptrdiff_t>(i) + 1, nq);
  const std::size_t iw = wrap(static_cast<std::ptrdiff_t>(i) - 1, nq);
  return LocalDerivatives{
      (g(ie, j) - g(iw, j)) / (2.0 * dq),
      (g(i, j + 1) - g(i, j - 1)) / (2.0 * dp),
      (g(ie, j) - 2.0 * g(i, j) + g(iw, j)) / (dq * dq),
      (g(ie, j + 1) - g(ie, j - 1) - g(iw, j + 1) + g(iw, j - 1)) / (4.0 * dq * dp),
      (g(i, j + 1) - 2.0 * g(i, j) + g(i, j - 1)) / (dp * dp),
  };
}

}  // namespace detail

// w = h - H(.; d) and the residual of its second-order equation
//   (1 + h_q^2)/h_p^2 w_pp - 2 h_q/h_p w_qp + w_qq - w_p
//     + w_q^2 H_pp / h_p^2 - w_p (h_p + H_p) H_pp / (h_p^2 H_p^2) = 0.
// All derivatives use one central stencil, so the residual equals the
// non-divergence residual of h minus that of H, node by node.
inline ComparisonField w_equation_residual(const HeightField& h, double d) {
  const StreamHeight sh = stream_height(d);
  const std::size_t nq = h.nq();
  const std::size_t np = h.np();
  if (nq < 3 || np < 2) throw DomainError("comparison needs an interior");
  const double dq = h.dq();
  const double dp = h.dp();
  ComparisonField cf;
  cf.depth = d;
  Grid2 H(nq, np + 1);
  cf.w = Grid2(nq, np + 1);
  for (std::size_t i = 0; i < nq; ++i)
    for (std::size_t j = 0; j <= np; ++j) {
      H(i, j) = j == np ? d : sh.H(h.p(j));
      cf.w(i, j) = h.h(i, j) - H(i, j);
    }
  double Lh = 0.0, EH = 0.0;
  for (std::size_t i = 0; i < nq; ++i)
    for (std::size_t j = 1; j < np; ++j) {
      const auto a = detail::local_derivatives(h.h, i, j, dq, dp);
      const auto b = detail::local_derivatives(H, i, j, dq, dp);
      const auto c = detail::local_derivatives(cf.w, i, j, dq, dp);
      const double hp2 = a.p * a.p;
      const double eq = (1.0 + a.q * a.q) / hp2 * c.pp - 2.0 * a.q / a.p * c.qp + c.qq - c.p +
                        c.q * c.q * b.pp / hp2 - c.p * (a.p + b.p) * b.pp / (hp2 * b.p * b.p);
      cf.residual = std::max(cf.residual, std::abs(eq));
      Lh = std::max(Lh, std::abs((1.0 + a.q * a.q) / hp2 * a.pp - 2.0 * a.q / a.p * a.qp + a.qq - a.p));
      EH = std::max(EH, std::abs(b.pp / (b.p * b.p) - b.p));
    }
  cf.reference = Lh + EH;
  return cf;
}

// Pointwise check of the expanded equation on the central stencil; it
// differs from the solver's conservative scheme at O(grid^2), so it is
// measured against the operator magnitudes rather than the solver residual.
inline CheckEntry check_comparison_stencil(const HeightField& h, double d, double factor = 10.0) {
  const ComparisonField cf = w_equation_residual(h, d);
  CheckEntry e{"comparison_stencil", CheckStatus::fail, cf.residual, factor * cf.reference,
               "expanded comparison equation on the central stencil", ""};
  e.status = cf.residual <= e.threshold ? CheckStatus::pass : CheckStatus::fail;
  e.note = "reference depth " + format_number(d, 6);
  return e;
}

// Comparison equation in the solver's own discretization: w = h - H_d with
// H_d the discrete stream of depth d, residual G(H_d + w) - G(H_d) over
// interior nodes.
inline ComparisonField discrete_comparison(const HeightField& h, double d) {
  if (h.tag != ProblemTag::flow_force_scaled) throw DomainError("comparison function needs the scaled instance");
  const HeightField H = discrete_stream(h.tag, d, h.nq(), h.np(), h.period);
  const Grid2 rh = residual(h, problem_of(h));
  const Grid2 rH = residual(H, problem_of(H));
  ComparisonField cf;
  cf.depth = d;
  cf.w = Grid2(h.nq(), h.np() + 1);
  for (std::size_t i = 0; i < h.nq(); ++i)
    for (std::size_t j = 0; j <= h.np(); ++j) {
      cf.w(i, j) = h.h(i, j) - H.h(i, j);
      if (j == 0 || j == h.np()) continue;
      cf.residual = std::max(cf.residual, std::abs(rh(i, j) - rH(i, j)));
      cf.reference = std::max(cf.reference, std::abs(rH(i, j)));
    }
  return cf;
}

inline CheckEntry check_comparison_equation(const HeightField& h, double d, double stored_residual,
                                            const CheckTolerances& t = {}) {
  const ComparisonField cf = discrete_comparison(h, d);
  CheckEntry e{"comparison_equation", CheckStatus::fail, cf.residual, solver_tolerance(stored_residual, t),
               "h - H(.; d) solves the homogeneous comparison equation", ""};
  e.status = cf.residual <= e.threshold ? CheckStatus::pass : CheckStatus::fail;
  e.note = "reference depth " + format_number(d, 6);
  return e;
}

// Physical stream-function field of an irrotational height field, with a
// grid tolerance equal to ten times its surface Bernoulli defect.
inline WaveField physical_field(const HeightField& h, std::size_t nz) {
  WaveField w;
  w.psi = dj_inverse(h, nz);
  w.bernoulli = h.head;
  w.tolerance = 1.0;
  w.tolerance = std::max(10.0 * surface_defects(w).bernoulli, 1e-12);
  return w;
}

// Full suite for a height field carrying its stored residual.
inline CheckReport verify_height_field(const HeightField& h, double stored_residual, const CheckTolerances& t = {}) {
  CheckReport rep;
  rep.nq = h.nq();
  rep.np = h.np();
  rep.entries.push_back(check_stagnation(h));
  const bool stagnant = rep.entries.back().status == CheckStatus::fail;
  rep.entries.push_back(check_residual(h, stored_residual));
  if (stagnant) return rep;
  const double tol = solver_tolerance(stored_residual, t);
  const double a = amplitude(h);
  if (h.tag == ProblemTag::irrotational_psi) {
    const FlowForceDJ ff = flow_force_dj(h, h.head);
    rep.entries.push_back(check_barrier(h.head, ff.mean, a, tol, t));
    rep.entries.push_back(check_region(h.head, ff.mean, tol));
    const WaveField w = physical_field(h, 2 * h.np() + 1);
    rep.entries.push_back(check_unidirectional(cumulative_flow_force(w), w.tolerance));
    rep.entries.push_back(check_superharmonic(w, w.tolerance));
    CheckEntry t2 = check_scaled_head_bounds(h.head / std::sqrt(ff.mean), a, t);
    t2.name = "rescaled_head_bounds";
    rep.entries.push_back(t2);
  } else {
    rep.entries.push_back(check_scaled_head_bounds(h.head, a, t));
    for (CheckEntry& e : comparison_endpoints(h, tol, true)) rep.entries.push_back(e);
    const std::vector<double> z = h.surface();
    const double d_ref = *std::max_element(z.begin(), z.end());
    rep.entries.push_back(check_comparison_equation(h, d_ref, stored_residual, t));
    if (d_ref < std::sqrt(2.0)) {
      rep.entries.push_back(check_comparison_stencil(h, d_ref));
    } else {
      rep.entries.push_back(CheckEntry{"comparison_stencil", CheckStatus::skip, 0.0, 0.0,
                                       "expanded comparison equation on the central stencil",
                                       "sup zeta outside the closed-form stream range"});
    }
  }
  return rep;
}

// Suite for a physical stream-function field.
inline CheckReport verify_wave_field(const WaveField& w, const CheckTolerances& t = {}) {
  CheckReport rep;
  rep.nq = w.psi.nx();
  rep.np = w.psi.nz() - 1;
  const double tol = std::max(w.tolerance, t.closed_form);
  const FlowForceField fff = cumulative_flow_force(w);
  const double spread = detail::spread(fff.column_values);
  rep.entries.push_back(CheckEntry{"flow_force_constancy",
                                   spread <= inconsistency_limit(w.tolerance) ? CheckStatus::pass : CheckStatus::fail,
                                   spread, inconsistency_limit(w.tolerance), "flow force independent of x", ""});
  const auto [lo, hi] = std::minmax_element(w.psi.surface.begin(), w.psi.surface.end());
  const double a = 0.5 * (*hi - *lo);
  rep.entries.push_back(check_barrier(w.bernoulli, fff.flow_force, a, tol, t));
  rep.entries.push_back(check_region(w.bernoulli, fff.flow_force, tol));
  rep.entries.push_back(check_unidirectional(fff, tol));
  rep.entries.push_back(check_superharmonic(w, tol));
  return rep;
}

}  // namespace flowforce
