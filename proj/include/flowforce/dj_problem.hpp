#pragma once
//------------------------------------------------------------------------------
// Discrete height-function system on one period of the strip.
//
//   interior:  (beta p + (1 + h_q^2) / (2 h_p^2))_p - (h_q / h_p)_q = 0
//   p = 1:     (1 + h_q^2) / (2 h_p^m) + h = head
//   p = 0:     h = 0
//
// (beta, m) = (1, 1) is the rescaled flow-force problem, (0, 2) the classical
// irrotational stream-function problem. The interior operator is discretized
// in conservative form on a compact 3x3 stencil (fluxes at half nodes, cross
// derivatives averaged), the top condition with a one-sided second-order h_p.
// Local Jacobians come from forward-mode automatic differentiation of the
// same kernels.
//------------------------------------------------------------------------------

#include <flowforce/errors.hpp>
#include <flowforce/grid.hpp>
#include <flowforce/hodograph.hpp>

#include <Eigen/Sparse>
#include <unsupported/Eigen/AutoDiff>

#include <array>
#include <cmath>
#include <vector>

namespace flowforce {

struct DJProblem {
  int beta = 1;
  int m = 1;
  double head = 0.0;
  double period = 0.0;
};

inline void validate(const DJProblem& prob) {
  const bool ok = (prob.beta == 1 && prob.m == 1) || (prob.beta == 0 && prob.m == 2);
  if (!ok) throw DomainError("only (beta, m) = (1, 1) or (0, 2) are admitted");
  detail::require_finite(prob.head, "head");
  if (!(prob.period > 0.0)) throw DomainError("period must be positive");
}

inline DJProblem make_problem(ProblemTag tag, double head, double period) {
  DJProblem p = tag == ProblemTag::flow_force_scaled ? DJProblem{1, 1, head, period}
                                                     : DJProblem{0, 2, head, period};
  validate(p);
  return p;
}

inline DJProblem problem_of(const HeightField& h) { return make_problem(h.tag, h.head, h.period); }

inline ProblemTag tag_of(const DJProblem& prob) {
  return prob.beta == 1 ? ProblemTag::flow_force_scaled : ProblemTag::irrotational_psi;
}

inline std::size_t node_index(std::size_t i, std::size_t j, std::size_t np) { return i * (np + 1) + j; }

namespace detail {

// v[(a + 1) * 3 + (b + 1)] = h(i + a, j + b).
template <class T>
T interior_kernel(const std::array<T, 9>& v, double dq, double dp, double p_up, double p_dn, int beta) {
  auto at = [&v](int a, int b) -> const T& { return v[(a + 1) * 3 + (b + 1)]; };
  const T hp_up = (at(0, 1) - at(0, 0)) / dp;
  const T hq_up = (at(1, 0) - at(-1, 0) + at(1, 1) - at(-1, 1)) / (4.0 * dq);
  const T hp_dn = (at(0, 0) - at(0, -1)) / dp;
  const T hq_dn = (at(1, 0) - at(-1, 0) + at(1, -1) - at(-1, -1)) / (4.0 * dq);
  const T A_up = (1.0 + hq_up * hq_up) / (2.0 * hp_up * hp_up) + beta * p_up;
  const T A_dn = (1.0 + hq_dn * hq_dn) / (2.0 * hp_dn * hp_dn) + beta * p_dn;
  const T hq_e = (at(1, 0) - at(0, 0)) / dq;
  const T hp_e = (at(0, 1) - at(0, -1) + at(1, 1) - at(1, -1)) / (4.0 * dp);
  const T hq_w = (at(0, 0) - at(-1, 0)) / dq;
  const T hp_w = (at(0, 1) - at(0, -1) + at(-1, 1) - at(-1, -1)) / (4.0 * dp);
  const T B_e = hq_e / hp_e;
  const T B_w = hq_w / hp_w;
  return (A_up - A_dn) / dp - (B_e - B_w) / dq;
}

// Surface row: west, centre, east on p = 1 and the two levels below.
template <class T>
T top_kernel(const T& west, const T& centre, const T& east, const T& below1, const T& below2,
             double dq, double dp, int m, double head) {
  const T hq = (east - west) / (2.0 * dq);
  const T hp = (3.0 * centre - 4.0 * below1 + below2) / (2.0 * dp);
  const T hpm = m == 1 ? hp : T(hp * hp);
  return (1.0 + hq * hq) / (2.0 * hpm) + centre - head;
}

inline void require_admissible(const HeightField& h) {
  if (h.nq() < 4) throw DomainError("height field needs at least 4 columns");
  if (h.np() < 4) throw DomainError("height field needs at least 4 p intervals");
  for (double v : h.h.data())
    if (!std::isfinite(v)) throw DomainError("height field has non-finite entries");
  for (std::size_t i = 0; i < h.nq(); ++i)
    for (std::size_t j = 0; j < h.np(); ++j)
      if (!(h.h(i, j + 1) > h.h(i, j))) throw StagnationError("h_p <= 0", i);
}

}  // namespace detail

inline bool has_positive_hp(const HeightField& h) {
  for (std::size_t i = 0; i < h.nq(); ++i)
    for (std::size_t j = 0; j < h.np(); ++j)
      if (!(h.h(i, j + 1) > h.h(i, j))) return false;
  return true;
}

// Residual on every node: interior equation for 0 < j < np, surface
// condition at j = np, Dirichlet h at j = 0.
inline Grid2 residual(const HeightField& h, const DJProblem& prob) {
  validate(prob);
  detail::require_admissible(h);
  const std::size_t nq = h.nq();
  const std::size_t np = h.np();
  const double dq = prob.period / static_cast<double>(nq);
  const double dp = h.dp();
  Grid2 res(nq, np + 1);
  std::array<double, 9> v{};
  for (std::size_t i = 0; i < nq; ++i) {
    const std::size_t iw = detail::wrap(static_cast<std::ptrdiff_t>(i) - 1, nq);
    const std::size_t ie = detail::wrap(static_cast<std::ptrdiff_t>(i) + 1, nq);
    const std::array<std::size_t, 3> cols{iw, i, ie};
    res(i, 0) = h.h(i, 0);
    for (std::size_t j = 1; j < np; ++j) {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) v[a * 3 + b] = h.h(cols[a], j + b - 1);
      res(i, j) = detail::interior_kernel(v, dq, dp, (j + 0.5) * dp, (j - 0.5) * dp, prob.beta);
    }
    res(i, np) = detail::top_kernel(h.h(iw, np), h.h(i, np), h.h(ie, np), h.h(i, np - 1),
                                    h.h(i, np - 2), dq, dp, prob.m, prob.head);
  }
  return res;
}

using Triplet = Eigen::Triplet<double>;

// Jacobian of residual() with respect to h, as triplets over node_index.
inline std::vector<Triplet> jacobian_triplets(const HeightField& h, const DJProblem& prob) {
  validate(prob);
  detail::require_admissible(h);
  using AD9 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 9, 1>>;
  using AD5 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 5, 1>>;
  const std::size_t nq = h.nq();
  const std::size_t np = h.np();
  const double dq = prob.period / static_cast<double>(nq);
  const double dp = h.dp();
  std::vector<Triplet> trip;
  trip.reserve(nq * (np + 1) * 9);
  std::array<AD9, 9> v;
  std::array<std::size_t, 9> idx{};
  for (std::size_t i = 0; i < nq; ++i) {
    const std::size_t iw = detail::wrap(static_cast<std::ptrdiff_t>(i) - 1, nq);
    const std::size_t ie = detail::wrap(static_cast<std::ptrdiff_t>(i) + 1, nq);
    const std::array<std::size_t, 3> cols{iw, i, ie};
    trip.emplace_back(static_cast<int>(node_index(i, 0, np)), static_cast<int>(node_index(i, 0, np)), 1.0);
    for (std::size_t j = 1; j < np; ++j) {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int k = a * 3 + b;
          v[k] = AD9(h.h(cols[a], j + b - 1), 9, k);
          idx[k] = node_index(cols[a], j + b - 1, np);
        }
      const AD9 g = detail::interior_kernel(v, dq, dp, (j + 0.5) * dp, (j - 0.5) * dp, prob.beta);
      const int row = static_cast<int>(node_index(i, j, np));
      for (int k = 0; k < 9; ++k) trip.emplace_back(row, static_cast<int>(idx[k]), g.derivatives()[k]);
    }
    const std::array<std::size_t, 5> tidx{node_index(iw, np, np), node_index(i, np, np),
                                          node_index(ie, np, np), node_index(i, np - 1, np),
                                          node_index(i, np - 2, np)};
    const AD5 west(h.h(iw, np), 5, 0), centre(h.h(i, np), 5, 1), east(h.h(ie, np), 5, 2),
        b1(h.h(i, np - 1), 5, 3), b2(h.h(i, np - 2), 5, 4);
    const AD5 g = detail::top_kernel(west, centre, east, b1, b2, dq, dp, prob.m, prob.head);
    const int row = static_cast<int>(node_index(i, np, np));
    for (int k = 0; k < 5; ++k) trip.emplace_back(row, static_cast<int>(tidx[k]), g.derivatives()[k]);
  }
  return trip;
}

inline Eigen::SparseMatrix<double> jacobian(const HeightField& h, const DJProblem& prob) {
  const std::size_t n = h.nq() * (h.np() + 1);
  Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const std::vector<Triplet> trip = jacobian_triplets(h, prob);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

// d(residual)/d(head): -1 on the surface rows, zero elsewhere.
inline double head_derivative(std::size_t j, std::size_t np) { return j == np ? -1.0 : 0.0; }

// Flattening in node_index order.
inline Eigen::VectorXd flatten(const Grid2& g) {
  return Eigen::Map<const Eigen::VectorXd>(g.data().data(), static_cast<Eigen::Index>(g.size()));
}

}  // namespace flowforce
