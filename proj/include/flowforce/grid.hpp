#pragma once
//------------------------------------------------------------------------------
// Storage and finite-difference / quadrature kernels shared by the field
// modules.
//
// A SigmaField stores one period of a function over the strip
// 0 <= y <= surface(x) on the boundary-fitted grid
//   x_i = i * period / nx        (periodic, i = 0..nx-1)
//   y_ij = sigma_j * surface_i   (sigma_j = j / (nz - 1), j = 0..nz-1)
// Physical derivatives are taken through the sigma mapping with second-order
// central differences.
//------------------------------------------------------------------------------

#include <flowforce/errors.hpp>

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace flowforce {

// Row-major (column-in-x, level) array.
class Grid2 {
 public:
  Grid2() = default;
  Grid2(std::size_t nx, std::size_t nz, double fill = 0.0)
      : nx_(nx), nz_(nz), data_(nx * nz, fill) {}

  std::size_t nx() const noexcept { return nx_; }
  std::size_t nz() const noexcept { return nz_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * nz_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * nz_ + j]; }

  std::span<double> column(std::size_t i) { return {data_.data() + i * nz_, nz_}; }
  std::span<const double> column(std::size_t i) const { return {data_.data() + i * nz_, nz_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  friend bool operator==(const Grid2&, const Grid2&) = default;

 private:
  std::size_t nx_ = 0;
  std::size_t nz_ = 0;
  std::vector<double> data_;
};

struct SigmaField {
  double period = 0.0;
  std::vector<double> surface;
  Grid2 values;

  std::size_t nx() const noexcept { return values.nx(); }
  std::size_t nz() const noexcept { return values.nz(); }
  double dx() const noexcept { return period / static_cast<double>(nx()); }
  double dsigma() const noexcept { return 1.0 / static_cast<double>(nz() - 1); }
  double x(std::size_t i) const noexcept { return dx() * static_cast<double>(i); }
  double sigma(std::size_t j) const noexcept { return dsigma() * static_cast<double>(j); }
  double y(std::size_t i, std::size_t j) const noexcept { return sigma(j) * surface[i]; }
};

namespace detail {

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

// Second-order derivative along a uniformly spaced column.
inline double column_d1(std::span<const double> f, std::size_t j, double h) {
  const std::size_t n = f.size();
  if (j == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  if (j + 1 == n) return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return (f[j + 1] - f[j - 1]) / (2.0 * h);
}

inline double column_d2(std::span<const double> f, std::size_t j, double h) {
  const std::size_t n = f.size();
  if (j == 0) return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
  if (j + 1 == n) return (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
  return (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h);
}

// Fourth-order derivative on a uniform grid (needs at least 5 nodes).
inline std::vector<double> derivative4(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  assert(n >= 5);
  std::vector<double> d(n);
  const double s = 1.0 / (12.0 * h);
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
  for (std::size_t j = 2; j + 2 < n; ++j)
    d[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) * s;
  d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * s;
  d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * s;
  return d;
}

// Sixth-order derivative from seven-point stencils, shifted one-sided near
// the ends (needs at least 7 nodes).
inline std::vector<double> derivative6(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  assert(n >= 7);
  // w[k][m]: weight of node m for the derivative at node k of a 7-node stencil.
  static const auto w = [] {
    std::array<std::array<double, 7>, 7> out{};
    for (int k = 0; k < 7; ++k) {
      // Lagrange basis derivative at x_k = k over nodes 0..6.
      for (int m = 0; m < 7; ++m) {
        double val = 0.0;
        if (m == k) {
          for (int l = 0; l < 7; ++l)
            if (l != k) val += 1.0 / (k - l);
        } else {
          double num = 1.0, den = 1.0;
          for (int l = 0; l < 7; ++l) {
            if (l == m) continue;
            den *= m - l;
            if (l != k) num *= k - l;
          }
          val = num / den;
        }
        out[k][m] = val;
      }
    }
    return out;
  }();
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t start = j < 3 ? 0 : std::min(j - 3, n - 7);
    const std::size_t k = j - start;
    double acc = 0.0;
    for (std::size_t m = 0; m < 7; ++m) acc += w[k][m] * f[start + m];
    d[j] = acc / h;
  }
  return d;
}

inline double periodic_d1(std::span<const double> f, std::size_t i, double h) {
  const std::size_t n = f.size();
  return (f[wrap(static_cast<std::ptrdiff_t>(i) + 1, n)] -
          f[wrap(static_cast<std::ptrdiff_t>(i) - 1, n)]) / (2.0 * h);
}

inline double periodic_d2(std::span<const double> f, std::size_t i, double h) {
  const std::size_t n = f.size();
  return (f[wrap(static_cast<std::ptrdiff_t>(i) + 1, n)] - 2.0 * f[i] +
          f[wrap(static_cast<std::ptrdiff_t>(i) - 1, n)]) / (h * h);
}

}  // namespace detail

// Composite Simpson over an odd number of uniformly spaced samples.
inline double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 3 || n % 2 == 0) throw DomainError("Simpson rule needs an even number of intervals");
  double s = f[0] + f[n - 1];
  for (std::size_t j = 1; j + 1 < n; ++j) s += (j % 2 == 1 ? 4.0 : 2.0) * f[j];
  return s * h / 3.0;
}

// Running integral from f[0] to every node. Even nodes are composite
// Simpson; odd nodes close with the three-eighths rule (or the quadratic
// rule on the first interval), so the last node of an even-interval column
// equals simpson() exactly.
inline std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 3) throw DomainError("cumulative quadrature needs at least three samples");
  std::vector<double> out(n, 0.0);
  std::vector<double> even(n, 0.0);
  for (std::size_t j = 2; j < n; j += 2)
    even[j] = even[j - 2] + h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
  for (std::size_t j = 0; j < n; ++j) {
    if (j % 2 == 0) {
      out[j] = even[j];
    } else if (j == 1) {
      out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    } else {
      out[j] = even[j - 3] + 3.0 * h / 8.0 * (f[j - 3] + 3.0 * f[j - 2] + 3.0 * f[j - 1] + f[j]);
    }
  }
  return out;
}

// Physical first derivatives of a sigma-grid field.
struct SigmaGradient {
  Grid2 fx;
  Grid2 fy;
};

inline SigmaGradient sigma_gradient(const SigmaField& f) {
  const std::size_t nx = f.nx();
  const std::size_t nz = f.nz();
  const double dx = f.dx();
  const double ds = f.dsigma();
  SigmaGradient g{Grid2(nx, nz), Grid2(nx, nz)};
  for (std::size_t i = 0; i < nx; ++i) {
    const double eta = f.surface[i];
    const double eta_x = detail::periodic_d1(f.surface, i, dx);
    const auto col = f.values.column(i);
    for (std::size_t j = 0; j < nz; ++j) {
      const double f_s = detail::column_d1(col, j, ds);
      const double f_xs = (f.values(detail::wrap(static_cast<std::ptrdiff_t>(i) + 1, nx), j) -
                           f.values(detail::wrap(static_cast<std::ptrdiff_t>(i) - 1, nx), j)) /
                          (2.0 * dx);
      g.fy(i, j) = f_s / eta;
      g.fx(i, j) = f_xs - f.sigma(j) * eta_x / eta * f_s;
    }
  }
  return g;
}

// Physical Laplacian of a sigma-grid field. With a = sigma * eta' / eta,
// f_xx|y = f_xx - 2 a f_xs + a^2 f_ss - (a_x - a a_s) f_s and f_yy = f_ss / eta^2.
inline Grid2 sigma_laplacian(const SigmaField& f) {
  const std::size_t nx = f.nx();
  const std::size_t nz = f.nz();
  const double dx = f.dx();
  const double ds = f.dsigma();
  Grid2 lap(nx, nz);
  for (std::size_t i = 0; i < nx; ++i) {
    const std::size_t ip = detail::wrap(static_cast<std::ptrdiff_t>(i) + 1, nx);
    const std::size_t im = detail::wrap(static_cast<std::ptrdiff_t>(i) - 1, nx);
    const double eta = f.surface[i];
    const double eta_x = detail::periodic_d1(f.surface, i, dx);
    const double eta_xx = detail::periodic_d2(f.surface, i, dx);
    const auto col = f.values.column(i);
    const auto colp = f.values.column(ip);
    const auto colm = f.values.column(im);
    for (std::size_t j = 0; j < nz; ++j) {
      const double s = f.sigma(j);
      const double f_s = detail::column_d1(col, j, ds);
      const double f_ss = detail::column_d2(col, j, ds);
      const double f_xx = (colp[j] - 2.0 * col[j] + colm[j]) / (dx * dx);
      const double f_xs = (detail::column_d1(colp, j, ds) - detail::column_d1(colm, j, ds)) / (2.0 * dx);
      const double a = s * eta_x / eta;
      const double a_x = s * (eta_xx / eta - eta_x * eta_x / (eta * eta));
      const double a_s = eta_x / eta;
      const double fxx_phys = f_xx - 2.0 * a * f_xs + a * a * f_ss - (a_x - a * a_s) * f_s;
      lap(i, j) = fxx_phys + f_ss / (eta * eta);
    }
  }
  return lap;
}

}  // namespace flowforce
