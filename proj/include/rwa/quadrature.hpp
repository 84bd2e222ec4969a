#pragma once

#include <cmath>
#include <cstdio>
#include <queue>
#include <complex>
#include <string>

#include "rwa/error.hpp"

namespace rwa {

template <class T>
struct QuadratureResult {
  T value;
  double error;  ///< summed |K15 - G7| estimate over final panels
  std::size_t evaluations;
};

namespace detail {

// 15-point Kronrod nodes/weights on [-1, 1] and the embedded 7-point Gauss weights (QUADPACK qk15).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T, class F>
void gauss_kronrod_15(F& f, double a, double b, T& kronrod, double& err) {
  const double center = 0.5 * (a + b), half = 0.5 * (b - a);
  const T fc = f(center);
  T k = fc * kWgk[7];
  T g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const T f1 = f(center - dx), f2 = f(center + dx);
    k += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) g += (f1 + f2) * kWg[j / 2];
  }
  kronrod = k * half;
  err = std::abs(kronrod - g * half);
}

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15): repeatedly bisects the panel with the largest
/// error estimate until the summed estimate falls below abs_tol.
template <class T, class F>
QuadratureResult<T> integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                              std::size_t max_panels = 4000) {
  std::priority_queue<detail::Panel<T>> panels;
  QuadratureResult<T> out{T{}, 0.0, 0};
  const auto push = [&](double lo, double hi) {
    detail::Panel<T> p{lo, hi, T{}, 0.0};
    detail::gauss_kronrod_15<T>(f, lo, hi, p.value, p.error);
    out.evaluations += 15;
    out.error += p.error;
    panels.push(p);
  };
  push(a, b);
  while (out.error > abs_tol) {
    if (panels.size() >= max_panels) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "adaptive quadrature did not converge: error %.3e > %.3e after %zu panels",
                    out.error, abs_tol, panels.size());
      throw NumericalError(buf);
    }
    const detail::Panel<T> worst = panels.top();
    panels.pop();
    out.error -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    push(worst.a, mid);
    push(mid, worst.b);
  }
  out.error = 0.0;
  while (!panels.empty()) {
    out.value += panels.top().value;
    out.error += panels.top().error;
    panels.pop();
  }
  return out;
}

}  // namespace rwa
