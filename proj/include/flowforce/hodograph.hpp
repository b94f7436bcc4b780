#pragma once
//------------------------------------------------------------------------------
// Partial hodograph (Dubreil-Jacotin) transform.
//
// A field that is strictly increasing in the vertical coordinate (psi, or the
// scaled flow force function Fbar) is used as the new vertical variable p;
// the unknown becomes the height h(q, p) of the level set {field = p} over the
// fixed strip [0, L) x [0, 1]. Each column is inverted independently by
// shape-preserving cubic Hermite interpolation.
//------------------------------------------------------------------------------

#include <flowforce/errors.hpp>
#include <flowforce/grid.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace flowforce {

enum class ProblemTag { flow_force_scaled, irrotational_psi };

inline const char* to_string(ProblemTag t) {
  return t == ProblemTag::flow_force_scaled ? "flow_force_scaled" : "irrotational_psi";
}

inline ProblemTag problem_tag_from_string(const std::string& s) {
  if (s == "flow_force_scaled") return ProblemTag::flow_force_scaled;
  if (s == "irrotational_psi") return ProblemTag::irrotational_psi;
  throw SchemaError("unknown problem tag '" + s + "'");
}

// h(i, j) at q_i = i L / nq (periodic) and p_j = j / np.
struct HeightField {
  double period = 0.0;
  Grid2 h;
  ProblemTag tag = ProblemTag::flow_force_scaled;
  double head = 0.0;

  std::size_t nq() const noexcept { return h.nx(); }
  std::size_t np() const noexcept { return h.nz() - 1; }
  double dq() const noexcept { return period / static_cast<double>(nq()); }
  double dp() const noexcept { return 1.0 / static_cast<double>(np()); }
  double q(std::size_t i) const noexcept { return dq() * static_cast<double>(i); }
  double p(std::size_t j) const noexcept { return dp() * static_cast<double>(j); }

  std::vector<double> surface() const {
    std::vector<double> z(nq());
    for (std::size_t i = 0; i < nq(); ++i) z[i] = h(i, np());
    return z;
  }
};

// Height function of the scaled stream U(Y; d):
//   H(p; d) = sqrt(2) (sqrt(C) - sqrt(C - p)),  C = (1/2)(1/d + d/2)^2,
// so that 1/(2 H_p^2) + p = C.
struct StreamHeight {
  double depth = 0.0;
  double C = 0.0;

  double H(double p) const { return std::sqrt(2.0) * p / (std::sqrt(C) + std::sqrt(C - p)); }
  double H_p(double p) const { return 1.0 / std::sqrt(2.0 * (C - p)); }
  double H_pp(double p) const { return std::pow(2.0 * (C - p), -1.5); }
};

inline StreamHeight stream_height(double d) {
  detail::require_finite(d, "depth");
  if (d <= 0.0 || d >= std::sqrt(2.0))
    throw DomainError("stream height needs 0 < d < sqrt(2)");
  const double a = 1.0 / d + 0.5 * d;
  return StreamHeight{d, 0.5 * a * a};
}

inline constexpr double stagnation_threshold = 1e-10;

namespace detail {

// Given values v_j, strictly increasing, on the uniform abscissa
// u_j = j * du, returns the abscissa at which v reaches each target.
// Node slopes of the inverse are 1/v'(u_j) with v' from sixth-order
// differences (fourth-order on short columns); a Fritsch-Carlson limiter keeps every cubic monotone.
// Throws StagnationError (carrying `column`) if v' < stagnation_threshold.
inline std::vector<double> invert_monotone(std::span<const double> v, double du,
                                           std::span<const double> targets, std::size_t column,
                                           const char* what) {
  const std::size_t n = v.size();
  for (std::size_t j = 0; j + 1 < n; ++j)
    if (!(v[j + 1] > v[j])) throw StagnationError(std::string(what) + " is not increasing", column);
  const std::vector<double> dv = n >= 7 ? derivative6(v, du) : derivative4(v, du);
  std::vector<double> m(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(dv[j] >= stagnation_threshold))
      throw StagnationError(std::string(what) + " vertical derivative below threshold", column);
    m[j] = 1.0 / dv[j];
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double secant = du / (v[j + 1] - v[j]);
    const double a = m[j] / secant;
    const double b = m[j + 1] / secant;
    const double r2 = a * a + b * b;
    if (r2 > 9.0) {
      const double t = 3.0 / std::sqrt(r2);
      m[j] = t * a * secant;
      m[j + 1] = t * b * secant;
    }
  }
  std::vector<double> out(targets.size());
  std::size_t k = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double x = targets[t];
    if (x <= v[0]) {
      out[t] = 0.0;
      continue;
    }
    if (x >= v[n - 1]) {
      out[t] = du * static_cast<double>(n - 1);
      continue;
    }
    if (k >= n - 1 || x < v[k]) k = 0;
    while (k + 2 < n && x > v[k + 1]) ++k;
    const double h = v[k + 1] - v[k];
    const double s = (x - v[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double u0 = du * static_cast<double>(k);
    const double u1 = u0 + du;
    out[t] = (2 * s3 - 3 * s2 + 1) * u0 + (s3 - 2 * s2 + s) * h * m[k] +
             (-2 * s3 + 3 * s2) * u1 + (s3 - s2) * h * m[k + 1];
  }
  return out;
}

}  // namespace detail

// (Fbar or psi on a sigma grid) -> h(q, p) on np + 1 uniform levels.
inline HeightField dj_forward(const SigmaField& field, ProblemTag tag, double head, std::size_t np) {
  if (np < 4) throw DomainError("hodograph needs at least 4 p intervals");
  if (field.nz() < 5) throw DomainError("source column too short");
  HeightField out;
  out.period = field.period;
  out.tag = tag;
  out.head = head;
  out.h = Grid2(field.nx(), np + 1);
  std::vector<double> targets(np + 1);
  for (std::size_t j = 0; j <= np; ++j) targets[j] = static_cast<double>(j) / static_cast<double>(np);
  for (std::size_t i = 0; i < field.nx(); ++i) {
    const double zeta = field.surface[i];
    const double dY = zeta * field.dsigma();
    const std::vector<double> Y =
        detail::invert_monotone(field.values.column(i), dY, targets, i, "vertical field");
    for (std::size_t j = 0; j <= np; ++j) out.h(i, j) = Y[j];
    out.h(i, 0) = 0.0;
    out.h(i, np) = zeta;
  }
  return out;
}

// h(q, p) -> the field p(q, Y) on a sigma grid with nz levels over
// 0 <= Y <= h(q, 1).
inline SigmaField dj_inverse(const HeightField& hf, std::size_t nz) {
  if (nz < 3) throw DomainError("sigma grid too short");
  SigmaField out;
  out.period = hf.period;
  out.surface = hf.surface();
  out.values = Grid2(hf.nq(), nz);
  std::vector<double> targets(nz);
  for (std::size_t i = 0; i < hf.nq(); ++i) {
    const double zeta = out.surface[i];
    if (!(zeta > 0.0)) throw StagnationError("surface height is not positive", i);
    for (std::size_t j = 0; j < nz; ++j)
      targets[j] = zeta * static_cast<double>(j) / static_cast<double>(nz - 1);
    const std::vector<double> p = detail::invert_monotone(hf.h.column(i), hf.dp(), targets, i, "h");
    for (std::size_t j = 0; j < nz; ++j) out.values(i, j) = p[j];
    out.values(i, 0) = 0.0;
    out.values(i, nz - 1) = 1.0;
  }
  return out;
}

// H(p; d) sampled on an nq x (np + 1) grid.
inline HeightField height_from_stream(double d, std::size_t nq, std::size_t np, double period) {
  const StreamHeight sh = stream_height(d);
  HeightField out;
  out.period = period;
  out.tag = ProblemTag::flow_force_scaled;
  out.head = 0.5 / d + 0.75 * d;
  out.h = Grid2(nq, np + 1);
  for (std::size_t i = 0; i < nq; ++i)
    for (std::size_t j = 0; j <= np; ++j) out.h(i, j) = sh.H(out.p(j));
  for (std::size_t i = 0; i < nq; ++i) out.h(i, np) = d;
  return out;
}

// U(Y; d) on a sigma grid, the scaled stream's flow force function.
inline SigmaField scaled_stream_field(double d, std::size_t nx, std::size_t nz, double period) {
  SigmaField f;
  f.period = period;
  f.surface.assign(nx, d);
  f.values = Grid2(nx, nz);
  const double a = 1.0 / d + 0.5 * d;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nz; ++j) {
      const double Y = f.y(i, j);
      f.values(i, j) = -0.5 * Y * Y + a * Y;
    }
  for (std::size_t i = 0; i < nx; ++i) f.values(i, nz - 1) = 1.0;
  return f;
}

}  // namespace flowforce
