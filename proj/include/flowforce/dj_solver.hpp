#pragma once
//------------------------------------------------------------------------------
// Newton and continuation solver for the discrete height-function system.
//
// Waves are computed in the even subspace h(q) = h(-q): unknowns are the
// columns 0..nq/2, which removes the translation null mode. The head joins
// the unknowns whenever a linear side condition (fixed amplitude, or the
// pseudo-arclength equation) is imposed; the Newton matrix is then bordered
// and factored by sparse LU.
//------------------------------------------------------------------------------

#include <flowforce/dj_problem.hpp>
#include <flowforce/errors.hpp>
#include <flowforce/grid.hpp>
#include <flowforce/hodograph.hpp>
#include <flowforce/region.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace flowforce {

struct NewtonOptions {
  double residual_tol = 1e-10;
  double increment_tol = 1e-12;
  int max_iterations = 30;
  int max_backtracks = 8;
  double armijo = 1e-4;
};

struct NewtonDiagnostics {
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<double> increment_history;
  std::vector<double> step_lengths;

  // |delta_{n+1}| / |delta_n|^2 over consecutive full increments.
  std::vector<double> quadratic_ratios() const {
    std::vector<double> r;
    for (std::size_t n = 1; n < increment_history.size(); ++n) {
      const double prev = increment_history[n - 1];
      if (prev > 0.0) r.push_back(increment_history[n] / (prev * prev));
    }
    return r;
  }
};

struct WaveSolution {
  HeightField h;
  double head = 0.0;
  double amplitude = 0.0;
  double residual_norm = 0.0;
  double flow_force = std::numeric_limits<double>::quiet_NaN();
  double flow_force_spread = std::numeric_limits<double>::quiet_NaN();
  double min_hp = 0.0;
  double max_hp = 0.0;
  NewtonDiagnostics diagnostics;
};

struct FlowForceDJ {
  double mean = 0.0;
  double spread = 0.0;
  std::vector<double> columns;
};

struct DiscreteBifurcation {
  bool found = false;
  double depth = std::numeric_limits<double>::quiet_NaN();
  double head = std::numeric_limits<double>::quiet_NaN();
  double wavenumber = 0.0;
  std::vector<double> mode;  // null vector over p levels, mode[0] = 0, mode[np] = 1
};

struct SmallAmplitudeGuess {
  HeightField h;
  DiscreteBifurcation bifurcation;
  bool warning = false;
  std::string diagnostic;
};

struct BranchOptions {
  NewtonOptions newton;
  double initial_amplitude = 1e-3;
  double initial_step = 1e-3;
  double max_step = 1e-2;
  double growth = 1.25;
  int max_failures = 3;
  double hp_min = 1e-8;
  double hp_max = 1e3;
};

struct Branch {
  ProblemTag tag = ProblemTag::flow_force_scaled;
  double depth = 0.0;
  double wavenumber = 0.0;
  double period = 0.0;
  double bifurcation_depth = 0.0;
  double bifurcation_head = 0.0;
  std::vector<WaveSolution> points;
  std::vector<double> arclength;
  bool truncated = false;
  bool near_stagnation = false;
  std::string diagnostic;
};

inline double amplitude(const HeightField& h) {
  const std::vector<double> z = h.surface();
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  return 0.5 * (*hi - *lo);
}

inline std::pair<double, double> hp_range(const HeightField& h) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < h.nq(); ++i) {
    const auto col = h.h.column(i);
    for (std::size_t j = 0; j <= h.np(); ++j) {
      const double d = detail::column_d1(col, j, h.dp());
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  return {lo, hi};
}

// Flow force of an irrotational height field,
//   FF = int_0^1 (1 - h_q^2) / (2 h_p) + (r - h) h_p dp   per column.
inline FlowForceDJ flow_force_dj(const HeightField& h, double r,
                                 double spread_limit = std::numeric_limits<double>::infinity()) {
  if (h.tag != ProblemTag::irrotational_psi)
    throw DomainError("flow force in (q, p) needs the irrotational instance");
  detail::require_admissible(h);
  const std::size_t nq = h.nq();
  const std::size_t np = h.np();
  FlowForceDJ out;
  out.columns.resize(nq);
  std::vector<double> f(np + 1);
  for (std::size_t i = 0; i < nq; ++i) {
    const auto col = h.h.column(i);
    const std::size_t iw = detail::wrap(static_cast<std::ptrdiff_t>(i) - 1, nq);
    const std::size_t ie = detail::wrap(static_cast<std::ptrdiff_t>(i) + 1, nq);
    for (std::size_t j = 0; j <= np; ++j) {
      const double hq = (h.h(ie, j) - h.h(iw, j)) / (2.0 * h.dq());
      const double hp = detail::column_d1(col, j, h.dp());
      f[j] = (1.0 - hq * hq) / (2.0 * hp) + (r - col[j]) * hp;
    }
    out.columns[i] = simpson(f, h.dp());
  }
  const auto [lo, hi] = std::minmax_element(out.columns.begin(), out.columns.end());
  out.spread = *hi - *lo;
  double s = 0.0;
  for (double c : out.columns) s += c;
  out.mean = s / static_cast<double>(nq);
  if (out.spread > spread_limit)
    throw InconsistentFieldError("flow force varies across columns", out.spread, spread_limit);
  return out;
}

// Exact solution of the discrete system among q-independent fields with
// surface height s. For the irrotational instance this is h = p s; for the
// scaled instance 1/(2 D^2) + p = c on every half level.
inline HeightField discrete_stream(ProblemTag tag, double s, std::size_t nq, std::size_t np, double period) {
  detail::require_finite(s, "depth");
  if (!(s > 0.0)) throw DomainError("stream depth must be positive");
  HeightField hf;
  hf.period = period;
  hf.tag = tag;
  hf.h = Grid2(nq, np + 1);
  const double dp = 1.0 / static_cast<double>(np);
  std::vector<double> col(np + 1, 0.0);
  if (tag == ProblemTag::irrotational_psi) {
    for (std::size_t j = 0; j <= np; ++j) col[j] = s * static_cast<double>(j) * dp;
  } else {
    auto total = [&](double c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < np; ++j) sum += dp / std::sqrt(2.0 * (c - (j + 0.5) * dp));
      return sum - s;
    };
    auto dtotal = [&](double c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < np; ++j) sum -= dp * std::pow(2.0 * (c - (j + 0.5) * dp), -1.5);
      return sum;
    };
    const double p_top = (np - 0.5) * dp;
    double hi = p_top + 1.0;
    while (total(hi) > 0.0) hi = p_top + 2.0 * (hi - p_top);
    const double c = detail::bracketed_root(total, dtotal, p_top + 1e-15, hi, 1e-15);
    for (std::size_t j = 0; j < np; ++j) col[j + 1] = col[j] + dp / std::sqrt(2.0 * (c - (j + 0.5) * dp));
  }
  col[np] = tag == ProblemTag::irrotational_psi ? s : col[np];
  for (std::size_t i = 0; i < nq; ++i)
    for (std::size_t j = 0; j <= np; ++j) hf.h(i, j) = col[j];
  const double hp = (3.0 * col[np] - 4.0 * col[np - 1] + col[np - 2]) / (2.0 * dp);
  const double hpm = tag == ProblemTag::flow_force_scaled ? hp : hp * hp;
  hf.head = 0.5 / hpm + col[np];
  return hf;
}

namespace detail {

// Even-subspace bookkeeping: column i of the full grid is column
// fold(i) = min(i, nq - i) of the reduced one.
class EvenSpace {
 public:
  EvenSpace(std::size_t nq, std::size_t np, double period, ProblemTag tag)
      : nq_(nq), np_(np), period_(period), tag_(tag) {
    if (nq < 4 || nq % 2 != 0) throw DomainError("even-symmetric solves need an even nq >= 4");
  }

  std::size_t half() const noexcept { return nq_ / 2 + 1; }
  std::size_t size() const noexcept { return half() * (np_ + 1); }
  std::size_t nq() const noexcept { return nq_; }
  std::size_t np() const noexcept { return np_; }
  double period() const noexcept { return period_; }
  ProblemTag tag() const noexcept { return tag_; }
  std::size_t fold(std::size_t i) const noexcept { return i <= nq_ / 2 ? i : nq_ - i; }
  std::size_t crest() const noexcept { return node_index(0, np_, np_); }
  std::size_t trough() const noexcept { return node_index(nq_ / 2, np_, np_); }

  Eigen::VectorXd reduce(const HeightField& h) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < half(); ++i) {
      const std::size_t mirror = (nq_ - i) % nq_;
      for (std::size_t j = 0; j <= np_; ++j)
        x[static_cast<Eigen::Index>(node_index(i, j, np_))] = 0.5 * (h.h(i, j) + h.h(mirror, j));
    }
    return x;
  }

  HeightField expand(const Eigen::VectorXd& x, double head) const {
    HeightField h;
    h.period = period_;
    h.tag = tag_;
    h.head = head;
    h.h = Grid2(nq_, np_ + 1);
    for (std::size_t i = 0; i < nq_; ++i)
      for (std::size_t j = 0; j <= np_; ++j)
        h.h(i, j) = x[static_cast<Eigen::Index>(node_index(fold(i), j, np_))];
    return h;
  }

  Eigen::VectorXd restrict_residual(const Grid2& res) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < half(); ++i)
      for (std::size_t j = 0; j <= np_; ++j) r[static_cast<Eigen::Index>(node_index(i, j, np_))] = res(i, j);
    return r;
  }

  // S J E: keep rows of the reduced columns, fold columns onto them.
  std::vector<Triplet> reduce_triplets(const std::vector<Triplet>& full) const {
    std::vector<Triplet> out;
    out.reserve(full.size() / 2 + 16);
    const std::size_t w = np_ + 1;
    for (const Triplet& t : full) {
      const std::size_t row = static_cast<std::size_t>(t.row());
      if (row / w >= half()) continue;
      const std::size_t col = static_cast<std::size_t>(t.col());
      const std::size_t rc = node_index(fold(col / w), col % w, np_);
      out.emplace_back(t.row(), static_cast<int>(rc), t.value());
    }
    return out;
  }

 private:
  std::size_t nq_;
  std::size_t np_;
  double period_;
  ProblemTag tag_;
};

// g . z = b, with z = [reduced h; head].
struct LinearConstraint {
  Eigen::VectorXd g;
  double b = 0.0;
};

inline LinearConstraint amplitude_constraint(const EvenSpace& es, double a) {
  LinearConstraint c;
  c.g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(es.size() + 1));
  c.g[static_cast<Eigen::Index>(es.crest())] = 0.5;
  c.g[static_cast<Eigen::Index>(es.trough())] = -0.5;
  c.b = a;
  return c;
}

class NewtonSystem {
 public:
  NewtonSystem(const EvenSpace& es, double fixed_head, std::optional<LinearConstraint> con)
      : es_(es), fixed_head_(fixed_head), con_(std::move(con)) {}

  std::size_t n() const { return es_.size() + (con_ ? 1 : 0); }
  bool head_free() const { return con_.has_value(); }

  double head_of(const Eigen::VectorXd& z) const {
    return con_ ? z[static_cast<Eigen::Index>(es_.size())] : fixed_head_;
  }

  HeightField field(const Eigen::VectorXd& z) const {
    return es_.expand(z.head(static_cast<Eigen::Index>(es_.size())), head_of(z));
  }

  std::optional<Eigen::VectorXd> evaluate(const Eigen::VectorXd& z) const {
    const HeightField hf = field(z);
    if (!has_positive_hp(hf)) return std::nullopt;
    for (double v : hf.h.data())
      if (!std::isfinite(v)) return std::nullopt;
    const Grid2 res = residual(hf, problem_of(hf));
    Eigen::VectorXd F(static_cast<Eigen::Index>(n()));
    F.head(static_cast<Eigen::Index>(es_.size())) = es_.restrict_residual(res);
    if (con_) F[static_cast<Eigen::Index>(es_.size())] = con_->g.dot(z) - con_->b;
    for (Eigen::Index k = 0; k < F.size(); ++k)
      if (!std::isfinite(F[k])) return std::nullopt;
    return F;
  }

  // Jacobian; `extra_row`, when given, replaces the constraint row (used for
  // tangent solves), or is appended with a head column if none is set.
  Eigen::SparseMatrix<double> matrix(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd* extra_row = nullptr) const {
    const HeightField hf = field(z);
    std::vector<Triplet> trip = es_.reduce_triplets(jacobian_triplets(hf, problem_of(hf)));
    const bool bordered = con_.has_value() || extra_row != nullptr;
    const std::size_t nn = es_.size() + (bordered ? 1 : 0);
    if (bordered) {
      const int hc = static_cast<int>(es_.size());
      for (std::size_t i = 0; i < es_.half(); ++i)
        trip.emplace_back(static_cast<int>(node_index(i, es_.np(), es_.np())), hc, -1.0);
      const Eigen::VectorXd& g = extra_row ? *extra_row : con_->g;
      for (Eigen::Index k = 0; k < g.size(); ++k)
        if (g[k] != 0.0) trip.emplace_back(hc, static_cast<int>(k), g[k]);
    }
    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(nn), static_cast<Eigen::Index>(nn));
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();
    return J;
  }

  const EvenSpace& space() const { return es_; }

 private:
  const EvenSpace& es_;
  double fixed_head_;
  std::optional<LinearConstraint> con_;
};

using SparseLUSolver = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

inline Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs) {
  SparseLUSolver lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) throw BifurcationPointError("singular Newton matrix");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw BifurcationPointError("singular Newton matrix");
  return x;
}

struct CoreResult {
  Eigen::VectorXd z;
  NewtonDiagnostics diagnostics;
};

// Damped Newton with Armijo backtracking on (1/2)|F|^2.
inline CoreResult newton_core(const NewtonSystem& sys, Eigen::VectorXd z, const NewtonOptions& opt) {
  CoreResult out;
  NewtonDiagnostics& diag = out.diagnostics;
  std::optional<Eigen::VectorXd> F = sys.evaluate(z);
  if (!F) throw StagnationError("initial iterate is not admissible (h_p <= 0)", 0);
  for (int it = 0;; ++it) {
    const double norm = F->lpNorm<Eigen::Infinity>();
    diag.residual_history.push_back(norm);
    if (norm <= opt.residual_tol) break;
    if (it >= opt.max_iterations)
      throw NonConvergenceError("Newton iteration cap reached", diag.residual_history);
    const Eigen::VectorXd delta = -solve_sparse(sys.matrix(z), *F);
    diag.increment_history.push_back(delta.lpNorm<Eigen::Infinity>());
    const double merit = F->squaredNorm();
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt, lambda *= 0.5) {
      const Eigen::VectorXd trial = z + lambda * delta;
      std::optional<Eigen::VectorXd> Ft = sys.evaluate(trial);
      if (Ft && Ft->squaredNorm() <= (1.0 - 2.0 * opt.armijo * lambda) * merit) {
        z = trial;
        F = std::move(Ft);
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NonConvergenceError("line search failed", diag.residual_history);
    diag.step_lengths.push_back(lambda);
    ++diag.iterations;
    if (lambda * diag.increment_history.back() <= opt.increment_tol) {
      const double final_norm = F->lpNorm<Eigen::Infinity>();
      diag.residual_history.push_back(final_norm);
      if (final_norm > 1e3 * opt.residual_tol)
        throw NonConvergenceError("increment stalled above tolerance", diag.residual_history);
      break;
    }
  }
  out.z = std::move(z);
  return out;
}

inline WaveSolution finalize(const HeightField& hf, NewtonDiagnostics diag) {
  WaveSolution s;
  s.h = hf;
  s.head = hf.head;
  s.amplitude = amplitude(hf);
  s.residual_norm = residual(hf, problem_of(hf)).max_abs();
  const auto [lo, hi] = hp_range(hf);
  s.min_hp = lo;
  s.max_hp = hi;
  if (hf.tag == ProblemTag::irrotational_psi) {
    const FlowForceDJ ff = flow_force_dj(hf, hf.head);
    s.flow_force = ff.mean;
    s.flow_force_spread = ff.spread;
  }
  s.diagnostics = std::move(diag);
  return s;
}

// Stream height slope H_p(p) for either instance.
struct StreamSlope {
  ProblemTag tag;
  double d;
  double C;
  double operator()(double p) const {
    return tag == ProblemTag::irrotational_psi ? d : 1.0 / std::sqrt(2.0 * (C - p));
  }
};

inline StreamSlope stream_slope(ProblemTag tag, double d) {
  if (!(d > 0.0)) throw DomainError("stream depth must be positive");
  if (tag == ProblemTag::flow_force_scaled) {
    const StreamHeight sh = stream_height(d);
    return StreamSlope{tag, d, sh.C};
  }
  return StreamSlope{tag, d, 0.0};
}

// Sign of b(k) = v(1) - (m/2) H_p(1)^(2-m) where v = phi / (phi' / H_p^3)
// solves the Riccati equation v' = H_p^3 - k^2 v^2 / H_p, v(0) = 0. The
// linearization about the stream is singular exactly where b vanishes.
inline double dispersion_function(ProblemTag tag, double d, double k) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  const StreamSlope H_p = stream_slope(tag, d);
  State v{0.0};
  auto rhs = [&](const State& x, State& dxdp, double p) {
    const double hp = H_p(p);
    dxdp[0] = hp * hp * hp - k * k * x[0] * x[0] / hp;
  };
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, v, 0.0, 1.0, 1e-4);
  const int m = tag == ProblemTag::flow_force_scaled ? 1 : 2;
  return v[0] - 0.5 * m * std::pow(H_p(1.0), 2 - m);
}

}  // namespace detail

// The discrete stream packaged as a converged solution of amplitude zero.
inline WaveSolution stream_solution(ProblemTag tag, double d, std::size_t nq, std::size_t np, double period) {
  return detail::finalize(discrete_stream(tag, d, nq, np, period), {});
}

// Smallest k > 0 at which the linearization about the stream of depth d is
// singular; none when the dispersion function is non-positive at k = 0
// (it decreases monotonically in k).
inline std::optional<double> bifurcation_wavenumber(double d, ProblemTag tag) {
  detail::require_finite(d, "depth");
  if (!(d > 0.0)) throw DomainError("stream depth must be positive");
  if (tag == ProblemTag::flow_force_scaled && d >= std::sqrt(2.0))
    throw DomainError("scaled stream depth must be below sqrt(2)");
  auto b = [&](double k) { return detail::dispersion_function(tag, d, k); };
  const double b0 = b(0.0);
  if (!(b0 > 0.0)) return std::nullopt;
  double hi = 1.0;
  while (b(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e7) return std::nullopt;
  }
  const double lo = hi > 1.0 ? 0.5 * hi : 0.0;
  std::uintmax_t iters = 200;
  const auto bracket = boost::math::tools::toms748_solve(b, lo, hi, lo == 0.0 ? b0 : b(lo), b(hi),
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (bracket.first + bracket.second);
}

// Null function phi(p) of the continuous linearization, phi(0) = 0,
// normalized to phi(1) = 1, sampled on np + 1 levels.
inline std::vector<double> linearized_mode(double d, double k, ProblemTag tag, std::size_t np) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;  // phi, phi' / H_p^3
  const detail::StreamSlope H_p = detail::stream_slope(tag, d);
  auto rhs = [&](const State& x, State& dx, double p) {
    const double hp = H_p(p);
    dx[0] = x[1] * hp * hp * hp;
    dx[1] = k * k * x[0] / hp;
  };
  std::vector<double> times(np + 1);
  for (std::size_t j = 0; j <= np; ++j) times[j] = static_cast<double>(j) / static_cast<double>(np);
  std::vector<double> phi;
  phi.reserve(np + 1);
  State x{0.0, 1.0};
  auto stepper = odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-4,
                          [&phi](const State& s, double) { phi.push_back(s[0]); });
  const double top = phi.back();
  for (double& v : phi) v /= top;
  phi.front() = 0.0;
  phi.back() = 1.0;
  return phi;
}

// Linearization of the discrete system about the discrete stream of surface
// height s, restricted to the mode cos(2 pi i / nq): an (np + 1) square
// matrix acting on the p-profile.
inline Eigen::MatrixXd mode_matrix(ProblemTag tag, double s, std::size_t nq, std::size_t np, double period) {
  const HeightField hs = discrete_stream(tag, s, nq, np, period);
  const std::vector<Triplet> trip = jacobian_triplets(hs, problem_of(hs));
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np + 1), static_cast<Eigen::Index>(np + 1));
  const std::size_t w = np + 1;
  for (const Triplet& t : trip) {
    const std::size_t row = static_cast<std::size_t>(t.row());
    if (row / w != 0) continue;
    const std::size_t col = static_cast<std::size_t>(t.col());
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(col / w) / static_cast<double>(nq));
    M(static_cast<Eigen::Index>(row % w), static_cast<Eigen::Index>(col % w)) += t.value() * c;
  }
  return M;
}

inline int determinant_sign(const Eigen::MatrixXd& M) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  double sign = lu.permutationP().determinant();
  const Eigen::MatrixXd& U = lu.matrixLU();
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    if (U(i, i) == 0.0) return 0;
    if (U(i, i) < 0.0) sign = -sign;
  }
  return sign > 0.0 ? 1 : -1;
}

// Discrete stream (near depth d) whose linearization is singular for the
// fundamental mode of the given period.
inline DiscreteBifurcation locate_discrete_bifurcation(ProblemTag tag, double d, std::size_t nq,
                                                       std::size_t np, double period) {
  DiscreteBifurcation out;
  out.wavenumber = 2.0 * std::numbers::pi / period;
  auto sgn = [&](double s) { return determinant_sign(mode_matrix(tag, s, nq, np, period)); };
  double best_lo = 0.0, best_hi = 0.0, best_dist = std::numeric_limits<double>::infinity();
  // Coarse grids shift the singular depth by several percent; widen until found.
  for (const double width : {0.05, 0.15, 0.3}) {
    const int N = static_cast<int>(std::lround(200.0 * width));
    double prev_s = d * (1.0 - width);
    int prev = sgn(prev_s);
    for (int n = -N + 1; n <= N; ++n) {
      const double s = d * (1.0 + width * static_cast<double>(n) / N);
      const int cur = sgn(s);
      if (cur != prev) {
        const double dist = std::abs(0.5 * (s + prev_s) - d);
        if (dist < best_dist) {
          best_dist = dist;
          best_lo = prev_s;
          best_hi = s;
        }
      }
      prev = cur;
      prev_s = s;
    }
    if (std::isfinite(best_dist)) break;
  }
  if (!std::isfinite(best_dist)) return out;
  const int s_lo = sgn(best_lo);
  for (int it = 0; it < 200 && best_hi - best_lo > 1e-14 * d; ++it) {
    const double mid = 0.5 * (best_lo + best_hi);
    const int sm = sgn(mid);
    if (sm == 0) {
      best_lo = best_hi = mid;
      break;
    }
    if (sm == s_lo) best_lo = mid; else best_hi = mid;
  }
  const double sb = 0.5 * (best_lo + best_hi);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(mode_matrix(tag, sb, nq, np, period), Eigen::ComputeFullV);
  const Eigen::VectorXd v = svd.matrixV().col(svd.matrixV().cols() - 1);
  const double top = v[static_cast<Eigen::Index>(np)];
  if (top == 0.0) return out;
  out.mode.resize(np + 1);
  for (std::size_t j = 0; j <= np; ++j) out.mode[j] = v[static_cast<Eigen::Index>(j)] / top;
  out.mode[0] = 0.0;
  out.mode[np] = 1.0;
  out.depth = sb;
  out.head = discrete_stream(tag, sb, nq, np, period).head;
  out.found = true;
  return out;
}

// Stream plus eps * phi(p) cos(k q) on one period 2 pi / k. The stream and
// phi are the discrete bifurcation pair at this resolution when it exists
// near d; otherwise the continuous ones, with a warning.
inline SmallAmplitudeGuess small_amplitude_guess(ProblemTag tag, double d, double k, double eps,
                                                 std::size_t nq, std::size_t np) {
  if (!(eps >= 0.0 && eps <= 0.05)) throw DomainError("guess amplitude must lie in [0, 0.05]");
  if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
  const double period = 2.0 * std::numbers::pi / k;
  SmallAmplitudeGuess g;
  g.bifurcation = locate_discrete_bifurcation(tag, d, nq, np, period);
  HeightField base;
  std::vector<double> phi;
  if (g.bifurcation.found) {
    base = discrete_stream(tag, g.bifurcation.depth, nq, np, period);
    phi = g.bifurcation.mode;
  } else {
    g.warning = true;
    g.diagnostic = "no singular mode near the requested depth; using the continuous stream and mode";
    base = tag == ProblemTag::flow_force_scaled ? height_from_stream(d, nq, np, period)
                                                : discrete_stream(tag, d, nq, np, period);
    base.tag = tag;
    phi = linearized_mode(d, k, tag, np);
  }
  g.h = base;
  for (std::size_t i = 0; i < nq; ++i) {
    const double c = std::cos(k * base.q(i));
    for (std::size_t j = 1; j <= np; ++j) g.h.h(i, j) += eps * phi[j] * c;
  }
  return g;
}

// Newton solve from h0. With an amplitude the head is an unknown and the
// crest-to-trough half height (crest at q = 0) is pinned.
inline WaveSolution newton_solve(const HeightField& h0, const DJProblem& prob,
                                 std::optional<double> target_amplitude = std::nullopt,
                                 const NewtonOptions& opt = {}) {
  validate(prob);
  const detail::EvenSpace es(h0.nq(), h0.np(), prob.period, tag_of(prob));
  std::optional<detail::LinearConstraint> con;
  Eigen::VectorXd z;
  const Eigen::VectorXd x0 = es.reduce(h0);
  if (target_amplitude) {
    con = detail::amplitude_constraint(es, *target_amplitude);
    z.resize(x0.size() + 1);
    z << x0, prob.head;
  } else {
    z = x0;
  }
  const detail::NewtonSystem sys(es, prob.head, con);
  detail::CoreResult r = detail::newton_core(sys, z, opt);
  return detail::finalize(sys.field(r.z), std::move(r.diagnostics));
}

// Branch of even waves bifurcating from the stream of depth d, continued by
// pseudo-arclength in (h, head) up to amplitude a_max. Entry 0 is the
// discrete bifurcation stream itself.
inline Branch continue_branch(ProblemTag tag, double d, double a_max, int max_steps, std::size_t nq,
                              std::size_t np, const BranchOptions& opt = {}) {
  const std::optional<double> k = bifurcation_wavenumber(d, tag);
  if (!k) throw DomainError("no bifurcation from the stream of this depth");
  Branch br;
  br.tag = tag;
  br.depth = d;
  br.wavenumber = *k;
  br.period = 2.0 * std::numbers::pi / *k;
  const detail::EvenSpace es(nq, np, br.period, tag);

  const SmallAmplitudeGuess g0 = small_amplitude_guess(tag, d, *k, std::min(opt.initial_amplitude, a_max), nq, np);
  if (!g0.bifurcation.found) throw DomainError("no discrete bifurcation near the requested depth");
  br.bifurcation_depth = g0.bifurcation.depth;
  br.bifurcation_head = g0.bifurcation.head;

  const HeightField stream = discrete_stream(tag, g0.bifurcation.depth, nq, np, br.period);
  br.points.push_back(detail::finalize(stream, {}));
  br.arclength.push_back(0.0);

  auto state_of = [&](const WaveSolution& s) {
    const Eigen::VectorXd x = es.reduce(s.h);
    Eigen::VectorXd z(x.size() + 1);
    z << x, s.head;
    return z;
  };
  auto amplitude_of = [&](const Eigen::VectorXd& z) {
    return 0.5 * (z[static_cast<Eigen::Index>(es.crest())] - z[static_cast<Eigen::Index>(es.trough())]);
  };
  auto solve_amplitude = [&](const Eigen::VectorXd& guess, double a) {
    const detail::NewtonSystem sys(es, 0.0, detail::amplitude_constraint(es, a));
    detail::CoreResult r = detail::newton_core(sys, guess, opt.newton);
    return std::make_pair(r.z, std::move(r.diagnostics));
  };

  const Eigen::VectorXd z_stream = state_of(br.points.front());
  // First two waves under an amplitude condition, then secant-started arclength.
  double a = std::min(opt.initial_amplitude, a_max);
  Eigen::VectorXd guess(static_cast<Eigen::Index>(es.size() + 1));
  guess << es.reduce(g0.h), g0.bifurcation.head;
  std::vector<Eigen::VectorXd> states;
  {
    auto [z, diag] = solve_amplitude(guess, a);
    br.points.push_back(detail::finalize(es.expand(z.head(static_cast<Eigen::Index>(es.size())), z[z.size() - 1]), std::move(diag)));
    states.push_back(z);
  }
  double da = opt.initial_step;
  int steps = 1;
  int failures = 0;
  double s_total = 0.0;
  if (a < a_max && steps < max_steps) {
    const double a1 = std::min(a + da, a_max);
    const double ratio = a1 / a;
    Eigen::VectorXd pred = z_stream + (states.back() - z_stream) * ratio;
    pred[pred.size() - 1] = z_stream[z_stream.size() - 1] +
                            (states.back()[pred.size() - 1] - z_stream[z_stream.size() - 1]) * ratio * ratio;
    auto [z, diag] = solve_amplitude(pred, a1);
    s_total += (z - states.back()).norm();
    br.points.push_back(detail::finalize(es.expand(z.head(static_cast<Eigen::Index>(es.size())), z[z.size() - 1]), std::move(diag)));
    br.arclength.push_back(0.0);
    br.arclength.push_back(s_total);
    states.push_back(z);
    a = a1;
    ++steps;
  } else {
    br.arclength.push_back(0.0);
  }

  Eigen::VectorXd tangent = states.back() - states[states.size() - 2 < states.size() ? states.size() - 2 : 0];
  if (states.size() >= 2) tangent.normalize();
  while (states.size() >= 2 && a < a_max - 1e-14 && steps < max_steps) {
    const Eigen::VectorXd& zn = states.back();
    // Tangent of the solution curve at zn, oriented along the previous one.
    const detail::NewtonSystem free_sys(es, 0.0, detail::LinearConstraint{tangent, 1.0});
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(zn.size());
    rhs[rhs.size() - 1] = 1.0;
    Eigen::VectorXd tau;
    try {
      tau = detail::solve_sparse(free_sys.matrix(zn), rhs);
    } catch (const BifurcationPointError&) {
      tau = tangent;
    }
    tau.normalize();
    if (tau.dot(tangent) < 0.0) tau = -tau;
    const double tau_a = amplitude_of(tau);
    if (!(tau_a > 0.0)) {
      br.truncated = true;
      br.diagnostic = "amplitude stopped increasing along the branch";
      break;
    }
    const bool last = a + da >= a_max - 1e-14;
    const double step_a = last ? a_max - a : da;
    const double ds = step_a / tau_a;
    const Eigen::VectorXd pred = zn + ds * tau;
    try {
      Eigen::VectorXd z;
      NewtonDiagnostics diag;
      if (last) {
        std::tie(z, diag) = solve_amplitude(pred, a_max);
      } else {
        detail::LinearConstraint arc{tau, tau.dot(zn) + ds};
        const detail::NewtonSystem sys(es, 0.0, arc);
        detail::CoreResult r = detail::newton_core(sys, pred, opt.newton);
        z = std::move(r.z);
        diag = std::move(r.diagnostics);
      }
      const double a_new = amplitude_of(z);
      if (!(a_new > a)) throw NonConvergenceError("amplitude did not increase", diag.residual_history);
      WaveSolution sol = detail::finalize(es.expand(z.head(static_cast<Eigen::Index>(es.size())), z[z.size() - 1]), diag);
      if (sol.min_hp < opt.hp_min || sol.max_hp > opt.hp_max) {
        br.truncated = true;
        br.near_stagnation = true;
        br.diagnostic = "h_p left the admissible window";
        break;
      }
      s_total += (z - zn).norm();
      tangent = (z - zn).normalized();
      br.points.push_back(std::move(sol));
      br.arclength.push_back(s_total);
      states.push_back(std::move(z));
      a = a_new;
      ++steps;
      failures = 0;
      if (diag.iterations <= 4) da = std::min(da * opt.growth, opt.max_step);
    } catch (const std::runtime_error& e) {
      da *= 0.5;
      if (++failures >= opt.max_failures) {
        br.truncated = true;
        br.diagnostic = std::string("three consecutive step failures: ") + e.what();
        break;
      }
    }
  }
  return br;
}

}  // namespace flowforce
