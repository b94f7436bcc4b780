#pragma once
//------------------------------------------------------------------------------
// Uniform streams of the unit-flux irrotational problem and the parameter
// plane (r, S) they bound.
//
// A stream of depth d has head r(d) = 1/(2 d^2) + d and flow force
// S(d) = 1/d + d^2/2. For r > 3/2 the head equation has exactly two positive
// roots d_minus < 1 < d_plus; S at those roots gives the lower and upper
// boundary curves F_minus(r), F_plus(r), which meet in a cusp at (3/2, 3/2).
// Non-laminar waves satisfy S > r^2/2 (the barrier), which crosses the lower
// boundary once, at Froude number 2.
//------------------------------------------------------------------------------

#include <flowforce/errors.hpp>

#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

namespace flowforce {

struct StreamFlow {
  double depth = 0.0;
  double bernoulli = 0.0;
  double flow_force = 0.0;
  double froude = 0.0;
};

struct ConjugateDepths {
  double r = 0.0;
  double d_minus = 0.0;  // supercritical, in (0, 1)
  double d_plus = 0.0;   // subcritical, > 1
};

struct BoundaryPair {
  double F_minus = 0.0;
  double F_plus = 0.0;
};

struct RegionCrossing {
  double r_star = 0.0;
  double F_star = 0.0;
  double depth = 0.0;
  double froude = 0.0;
};

enum class RegionClass {
  below_lower,
  on_lower,
  interior_below_barrier,
  on_barrier,
  interior_above_barrier,
  on_upper,
  above_upper,
};

struct RegionPoint {
  double r = 0.0;
  double F = 0.0;
  RegionClass classification = RegionClass::below_lower;
};

struct RegionSample {
  double r = 0.0;
  double F_minus = 0.0;
  double barrier = 0.0;
  double F_plus = 0.0;
};

inline constexpr double cusp_head = 1.5;
inline constexpr double classification_tolerance = 1e-9;

inline std::string_view to_string(RegionClass c) {
  switch (c) {
    case RegionClass::below_lower: return "below_lower";
    case RegionClass::on_lower: return "on_lower";
    case RegionClass::interior_below_barrier: return "interior_below_barrier";
    case RegionClass::on_barrier: return "on_barrier";
    case RegionClass::interior_above_barrier: return "interior_above_barrier";
    case RegionClass::on_upper: return "on_upper";
    case RegionClass::above_upper: return "above_upper";
  }
  return "unknown";
}

inline double stream_head(double d) { return 0.5 / (d * d) + d; }
inline double stream_flow_force(double d) { return 1.0 / d + 0.5 * d * d; }

inline StreamFlow stream_from_depth(double d) {
  detail::require_finite(d, "depth");
  if (d <= 0.0) throw DomainError("stream depth must be positive");
  return StreamFlow{d, stream_head(d), stream_flow_force(d), std::pow(d, -1.5)};
}

namespace detail {

// Bisection on a sign-changing bracket, finished with bracket-safeguarded
// Newton steps until |f| <= ftol.
template <class F, class DF>
double bracketed_root(F&& f, DF&& df, double lo, double hi, double ftol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw DomainError("root is not bracketed");
  for (int it = 0; it < 200 && (hi - lo) > 1e-9 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double fx = f(x);
    if (std::abs(fx) <= ftol) break;
    if ((fx > 0.0) == (flo > 0.0)) lo = x; else hi = x;
    double next = x - fx / df(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

}  // namespace detail

// Roots of 1/(2 d^2) + d = r. r == 3/2 is the cusp; it is only returned as a
// double root when allow_degenerate is set.
inline ConjugateDepths conjugate_depths(double r, bool allow_degenerate = false) {
  detail::require_finite(r, "head");
  if (r == cusp_head && allow_degenerate) return ConjugateDepths{r, 1.0, 1.0};
  if (r <= cusp_head) throw DomainError("no conjugate pair for r <= 3/2");
  auto f = [r](double d) { return 0.5 / (d * d) + d - r; };
  auto df = [](double d) { return 1.0 - 1.0 / (d * d * d); };
  const double ftol = 1e-12;
  const double lo = std::numeric_limits<double>::epsilon();
  ConjugateDepths out;
  out.r = r;
  out.d_minus = detail::bracketed_root(f, df, lo, 1.0, ftol);
  out.d_plus = detail::bracketed_root(f, df, 1.0, r, ftol);
  return out;
}

inline BoundaryPair bl_boundaries(double r) {
  detail::require_finite(r, "head");
  if (r < cusp_head) throw DomainError("region boundaries need r >= 3/2");
  if (r == cusp_head) return BoundaryPair{1.5, 1.5};
  const ConjugateDepths cd = conjugate_depths(r);
  return BoundaryPair{stream_flow_force(cd.d_minus), stream_flow_force(cd.d_plus)};
}

inline double barrier(double r) {
  detail::require_finite(r, "head");
  return 0.5 * r * r;
}

// Closed form: Froude 2 means d = 2^(-2/3), hence r = 3 * 2^(-2/3).
inline RegionCrossing barrier_lower_intersection() {
  const double d = std::pow(2.0, -2.0 / 3.0);
  const double r = 3.0 * d;
  return RegionCrossing{r, 0.5 * r * r, d, std::pow(d, -1.5)};
}

// F_plus(r) - r^2/2 - 1/(2r); restricted to the large-head regime.
// With d = d_plus(r) one has r - d = 1/(2 d^2), so the gap equals
// (2d - r) / (8 d^4 r) and needs no cancelling subtraction.
inline double asymptotic_gap(double r) {
  detail::require_finite(r, "head");
  if (r < 3.0) throw DomainError("asymptotic gap is defined for r >= 3");
  const double d = conjugate_depths(r).d_plus;
  const double d2 = d * d;
  return (2.0 * d - r) / (8.0 * d2 * d2 * r);
}

inline RegionPoint classify(double r, double F, double tol = classification_tolerance) {
  detail::require_finite(F, "flow force");
  const BoundaryPair b = bl_boundaries(r);
  const double bar = barrier(r);
  RegionClass c;
  if (F < b.F_minus - tol) {
    c = RegionClass::below_lower;
  } else if (std::abs(F - b.F_minus) <= tol) {
    c = RegionClass::on_lower;
  } else if (std::abs(F - b.F_plus) <= tol) {
    c = RegionClass::on_upper;
  } else if (F > b.F_plus + tol) {
    c = RegionClass::above_upper;
  } else if (std::abs(F - bar) <= tol) {
    c = RegionClass::on_barrier;
  } else if (F < bar) {
    c = RegionClass::interior_below_barrier;
  } else {
    c = RegionClass::interior_above_barrier;
  }
  return RegionPoint{r, F, c};
}

// Uniform samples on [r_min, r_max], inclusive.
inline std::vector<RegionSample> region_samples(double r_min, double r_max, std::size_t n) {
  if (!(r_min >= cusp_head && r_max > r_min) || n < 2)
    throw DomainError("region sampling needs 3/2 <= r_min < r_max and n >= 2");
  std::vector<RegionSample> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i + 1 == n) ? r_max
                                  : r_min + (r_max - r_min) * static_cast<double>(i) /
                                                static_cast<double>(n - 1);
    const BoundaryPair b = bl_boundaries(r);
    rows.push_back(RegionSample{r, b.F_minus, barrier(r), b.F_plus});
  }
  return rows;
}

}  // namespace flowforce
