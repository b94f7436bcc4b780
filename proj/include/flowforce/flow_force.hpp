#pragma once
//------------------------------------------------------------------------------
// Flow force of a gridded stream-function solution, the flow force function
// F(x, y) (running vertical integral of the flow-force integrand), the
// rescaling of F to unit "flux", and the laminar solutions of the rescaled
// problem.
//------------------------------------------------------------------------------

#include <flowforce/errors.hpp>
#include <flowforce/grid.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace flowforce {

// Stream function psi of the unit-flux irrotational problem, together with
// its surface and head. `tolerance` is the grid tolerance the field is
// trusted to: boundary and Bernoulli defects are expected below it.
struct WaveField {
  SigmaField psi;
  double bernoulli = 0.0;
  double tolerance = 1e-6;
};

struct FlowForceField {
  WaveField base;
  Grid2 F;
  double flow_force = 0.0;
  std::vector<double> column_values;
};

struct SurfaceDefects {
  double bottom = 0.0;     // max |psi| on y = 0
  double top = 0.0;        // max |psi - 1| on y = eta
  double bernoulli = 0.0;  // max |(1/2)|grad psi|^2 + eta - r| on y = eta
};

struct GradientIdentityDefect {
  double fx = 0.0;  // max |F_x - psi_x psi_y|
  double fy = 0.0;  // max |F_y - ((1/2)(psi_y^2 - psi_x^2) - y + r)|
};

struct UnidirectionalMargin {
  double min_gap = 0.0;    // min (F_y - psi_y^2)
  double min_psi_y = 0.0;  // min psi_y
  std::size_t column = 0;  // location of min_gap
  std::size_t level = 0;
};

struct ScaledField {
  SigmaField Fbar;
  double R = 0.0;
  double flow_force = 0.0;
};

struct ScaledStream {
  double depth = 0.0;
  double R = 0.0;

  double U(double Y) const { return -0.5 * Y * Y + (1.0 / depth + 0.5 * depth) * Y; }
  double U_Y(double Y) const { return -Y + 1.0 / depth + 0.5 * depth; }
};

struct CriticalConstants {
  double d0 = 0.0;
  double R0 = 0.0;
  double d_c = 0.0;
  double R_c = 0.0;
};

inline CriticalConstants critical_constants() {
  return CriticalConstants{std::sqrt(2.0), std::sqrt(2.0), std::sqrt(2.0 / 3.0), std::sqrt(1.5)};
}

inline double inconsistency_limit(double tolerance) { return 100.0 * tolerance; }

inline void validate_wave_field(const WaveField& w) {
  const SigmaField& f = w.psi;
  if (f.nx() < 4 || f.nz() < 5) throw DomainError("wave field grid too small");
  if (f.surface.size() != f.nx()) throw DomainError("surface length does not match grid");
  if (!(f.period > 0.0)) throw DomainError("period must be positive");
  for (double e : f.surface)
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("surface must be positive");
  detail::require_finite(w.bernoulli, "bernoulli");
}

namespace detail {

inline Grid2 flow_force_integrand(const WaveField& w, const SigmaGradient& g) {
  const SigmaField& f = w.psi;
  Grid2 out(f.nx(), f.nz());
  for (std::size_t i = 0; i < f.nx(); ++i)
    for (std::size_t j = 0; j < f.nz(); ++j) {
      const double px = g.fx(i, j);
      const double py = g.fy(i, j);
      out(i, j) = 0.5 * (py * py - px * px) - f.y(i, j) + w.bernoulli;
    }
  return out;
}

inline double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

inline SurfaceDefects surface_defects(const WaveField& w) {
  validate_wave_field(w);
  const SigmaField& f = w.psi;
  const SigmaGradient g = sigma_gradient(f);
  const std::size_t top = f.nz() - 1;
  SurfaceDefects d;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    d.bottom = std::max(d.bottom, std::abs(f.values(i, 0)));
    d.top = std::max(d.top, std::abs(f.values(i, top) - 1.0));
    const double q2 = g.fx(i, top) * g.fx(i, top) + g.fy(i, top) * g.fy(i, top);
    d.bernoulli = std::max(d.bernoulli, std::abs(0.5 * q2 + f.surface[i] - w.bernoulli));
  }
  return d;
}

// Per-column flow force integrals by composite Simpson in sigma.
inline std::vector<double> column_flow_forces(const WaveField& w) {
  validate_wave_field(w);
  const SigmaField& f = w.psi;
  const Grid2 integrand = detail::flow_force_integrand(w, sigma_gradient(f));
  std::vector<double> cols(f.nx());
  for (std::size_t i = 0; i < f.nx(); ++i)
    cols[i] = f.surface[i] * simpson(integrand.column(i), f.dsigma());
  return cols;
}

inline double flow_force(const WaveField& w) {
  const std::vector<double> cols = column_flow_forces(w);
  const double s = detail::spread(cols);
  if (s > inconsistency_limit(w.tolerance))
    throw InconsistentFieldError("flow force varies with x", s, inconsistency_limit(w.tolerance));
  return detail::mean(cols);
}

// Running integral without the x-independence check; used on fields that
// are harmonic but need not satisfy the surface Bernoulli condition.
inline FlowForceField cumulative_flow_force(const WaveField& w) {
  validate_wave_field(w);
  const SigmaField& f = w.psi;
  const Grid2 integrand = detail::flow_force_integrand(w, sigma_gradient(f));
  FlowForceField out{w, Grid2(f.nx(), f.nz()), 0.0, std::vector<double>(f.nx())};
  for (std::size_t i = 0; i < f.nx(); ++i) {
    const std::vector<double> run = cumulative_simpson(integrand.column(i), f.dsigma());
    for (std::size_t j = 0; j < f.nz(); ++j) out.F(i, j) = f.surface[i] * run[j];
    out.column_values[i] = out.F(i, f.nz() - 1);
  }
  out.flow_force = detail::mean(out.column_values);
  return out;
}

inline FlowForceField flow_force_function(const WaveField& w) {
  FlowForceField out = cumulative_flow_force(w);
  const double s = detail::spread(out.column_values);
  if (s > inconsistency_limit(w.tolerance))
    throw InconsistentFieldError("flow force varies with x", s, inconsistency_limit(w.tolerance));
  return out;
}

inline SigmaField as_sigma_field(const FlowForceField& fff) {
  return SigmaField{fff.base.psi.period, fff.base.psi.surface, fff.F};
}

inline GradientIdentityDefect gradient_identity_defect(const FlowForceField& fff) {
  const SigmaField& psi = fff.base.psi;
  const SigmaGradient gp = sigma_gradient(psi);
  const SigmaGradient gF = sigma_gradient(as_sigma_field(fff));
  const Grid2 integrand = detail::flow_force_integrand(fff.base, gp);
  GradientIdentityDefect d;
  for (std::size_t i = 0; i < psi.nx(); ++i)
    for (std::size_t j = 0; j < psi.nz(); ++j) {
      d.fx = std::max(d.fx, std::abs(gF.fx(i, j) - gp.fx(i, j) * gp.fy(i, j)));
      d.fy = std::max(d.fy, std::abs(gF.fy(i, j) - integrand(i, j)));
    }
  return d;
}

inline UnidirectionalMargin unidirectional_margin(const FlowForceField& fff) {
  const SigmaField& psi = fff.base.psi;
  const SigmaGradient gp = sigma_gradient(psi);
  const SigmaGradient gF = sigma_gradient(as_sigma_field(fff));
  UnidirectionalMargin m{std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t i = 0; i < psi.nx(); ++i)
    for (std::size_t j = 0; j < psi.nz(); ++j) {
      const double gap = gF.fy(i, j) - gp.fy(i, j) * gp.fy(i, j);
      if (gap < m.min_gap) {
        m.min_gap = gap;
        m.column = i;
        m.level = j;
      }
      m.min_psi_y = std::min(m.min_psi_y, gp.fy(i, j));
    }
  return m;
}

// max over the grid of Phi - r, Phi = (1/2)|grad psi|^2 + y.
inline double superharmonic_check(const WaveField& w) {
  validate_wave_field(w);
  const SigmaField& f = w.psi;
  const SigmaGradient g = sigma_gradient(f);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.nx(); ++i)
    for (std::size_t j = 0; j < f.nz(); ++j) {
      const double phi = 0.5 * (g.fx(i, j) * g.fx(i, j) + g.fy(i, j) * g.fy(i, j)) + f.y(i, j);
      m = std::max(m, phi - w.bernoulli);
    }
  return m;
}

// X = x / sqrt(FF), Y = y / sqrt(FF), F / FF, R = r / sqrt(FF).
inline ScaledField rescale(const FlowForceField& fff) {
  const double FF = fff.flow_force;
  if (!(FF > 0.0)) throw DomainError("rescaling needs a positive flow force");
  const double s = std::sqrt(FF);
  const SigmaField& src = fff.base.psi;
  ScaledField out;
  out.Fbar.period = src.period / s;
  out.Fbar.surface.resize(src.nx());
  for (std::size_t i = 0; i < src.nx(); ++i) out.Fbar.surface[i] = src.surface[i] / s;
  out.Fbar.values = Grid2(src.nx(), src.nz());
  for (std::size_t i = 0; i < src.nx(); ++i) {
    for (std::size_t j = 0; j < src.nz(); ++j) out.Fbar.values(i, j) = fff.F(i, j) / FF;
    // Boundary values hold by construction.
    out.Fbar.values(i, 0) = 0.0;
    out.Fbar.values(i, src.nz() - 1) = 1.0;
  }
  out.R = fff.base.bernoulli / s;
  out.flow_force = FF;
  return out;
}

// max |Lap Fbar + 1| over interior nodes.
inline double laplacian_defect(const ScaledField& sf) {
  const Grid2 lap = sigma_laplacian(sf.Fbar);
  double m = 0.0;
  for (std::size_t i = 0; i < lap.nx(); ++i)
    for (std::size_t j = 1; j + 1 < lap.nz(); ++j) m = std::max(m, std::abs(lap(i, j) + 1.0));
  return m;
}

// R(d) = 1/(2d) + 3d/4. Beyond d0 = sqrt 2 (where U_Y vanishes at the
// surface) only with allow_beyond.
inline double scaled_bernoulli(double d, bool allow_beyond = false) {
  detail::require_finite(d, "depth");
  if (d <= 0.0) throw DomainError("scaled depth must be positive");
  if (!allow_beyond && d > std::sqrt(2.0))
    throw DomainError("scaled stream is not unidirectional for d > sqrt(2)");
  return 0.5 / d + 0.75 * d;
}

inline ScaledStream make_scaled_stream(double d) {
  return ScaledStream{d, scaled_bernoulli(d)};
}

// Roots of 3 d^2 - 4 R d + 2 = 0. The closed endpoints R_c (double root) and
// R0 (upper root equal to sqrt 2) need allow_endpoints.
inline std::pair<double, double> scaled_conjugate_depths(double R, bool allow_endpoints = false) {
  detail::require_finite(R, "scaled head");
  const CriticalConstants cc = critical_constants();
  const double eps = 16.0 * std::numeric_limits<double>::epsilon();
  const bool at_lower = std::abs(R - cc.R_c) <= eps;
  const bool at_upper = std::abs(R - cc.R0) <= eps;
  if (at_lower || at_upper) {
    if (!allow_endpoints) throw DomainError("scaled head at an endpoint of (R_c, R0)");
    if (at_lower) return {cc.d_c, cc.d_c};
    return {cc.d0 / 3.0, cc.d0};
  }
  if (R < cc.R_c || R > cc.R0) throw DomainError("scaled head outside (R_c, R0)");
  const double disc = std::sqrt(4.0 * R * R - 6.0);
  // Product of roots is 2/3; take the larger from the formula, the smaller
  // from the product to avoid cancellation.
  const double d_plus = (2.0 * R + disc) / 3.0;
  return {(2.0 / 3.0) / d_plus, d_plus};
}

// Uniform stream psi = y/d sampled on a sigma grid.
inline WaveField make_stream_wave_field(double d, std::size_t nx, std::size_t nz, double period,
                                        double tolerance = 1e-10) {
  if (!(d > 0.0)) throw DomainError("stream depth must be positive");
  WaveField w;
  w.psi.period = period;
  w.psi.surface.assign(nx, d);
  w.psi.values = Grid2(nx, nz);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nz; ++j) w.psi.values(i, j) = w.psi.sigma(j);
  w.bernoulli = 0.5 / (d * d) + d;
  w.tolerance = tolerance;
  return w;
}

}  // namespace flowforce
