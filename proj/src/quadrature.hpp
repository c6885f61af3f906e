#pragma once

// Adaptive Gauss-Kronrod quadrature used by the numeric divergence oracles.
// Private to the library; the public surface is oracle.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace emvc::quad {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;       // accumulated local error estimates
  std::size_t evals = 0;
  bool budget_hit = false;  // ran out of evaluations before reaching tol
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

template <class F>
Panel gauss_kronrod(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  const double fc = f(c);
  double i15 = kWgk[7] * fc;
  double i7 = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = hw * kXgk[j];
    const double fsum = f(c - x) + f(c + x);
    i15 += kWgk[j] * fsum;
    if (j % 2 == 1) i7 += kWg[j / 2] * fsum;
  }
  i15 *= hw;
  i7 *= hw;
  return {a, b, i15, std::fabs(i15 - i7)};
}

}  // namespace detail

// Integrate f over [a, b], splitting the worst panel first, until the summed
// panel error drops under max(abs_tol, rel_tol * |integral|). Stops early when
// max_evals integrand evaluations are spent; the returned error then reflects
// the unresolved remainder honestly.
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                     std::size_t max_evals) {
  QuadResult out;
  std::vector<detail::Panel> panels;
  panels.push_back(detail::gauss_kronrod(f, a, b));
  out.evals = 15;

  const double min_width = 1e-14 * (b - a);
  for (;;) {
    double err_sum = 0.0;
    double val_sum = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      err_sum += panels[i].error;
      val_sum += panels[i].value;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    if (err_sum <= std::max(abs_tol, rel_tol * std::fabs(val_sum))) break;
    if (out.evals + 30 > max_evals || panels[worst].b - panels[worst].a < min_width) {
      out.budget_hit = true;
      break;
    }
    const detail::Panel split = panels[worst];
    const double mid = 0.5 * (split.a + split.b);
    panels[worst] = detail::gauss_kronrod(f, split.a, mid);
    panels.push_back(detail::gauss_kronrod(f, mid, split.b));
    out.evals += 30;
  }
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  return out;
}

// Integral of f(m1, m2, m3) over the open 2-simplex via the substitution
// m1 = u, m2 = (1-u) v, m3 = (1-u)(1-v) with Jacobian (1-u), as two nested
// adaptive passes. Outer refinement is driven by the slice values; the
// reported error adds the worst inner-pass error to the outer estimate.
// max_evals caps the total number of f evaluations across both levels.
template <class F>
QuadResult integrate_simplex3(F&& f, double abs_tol, double rel_tol, std::size_t max_evals) {
  std::size_t used = 0;
  double worst_inner_err = 0.0;
  bool inner_budget_hit = false;

  auto outer = [&](double u) {
    auto inner = [&](double v) { return f(u, (1.0 - u) * v, (1.0 - u) * (1.0 - v)); };
    const std::size_t inner_max =
        used >= max_evals ? 15 : std::min<std::size_t>(20000, max_evals - used);
    QuadResult r = integrate(inner, 0.0, 1.0, 0.25 * abs_tol, 0.1 * rel_tol, inner_max);
    used += r.evals;
    if (r.error > worst_inner_err) worst_inner_err = r.error;
    inner_budget_hit = inner_budget_hit || r.budget_hit;
    return (1.0 - u) * r.value;
  };

  // Outer budget counted in slice evaluations; 6000 slices = ~200 splits.
  QuadResult r = integrate(outer, 0.0, 1.0, abs_tol, rel_tol, 6000);
  r.evals = used;
  r.error += worst_inner_err;
  r.budget_hit = r.budget_hit || inner_budget_hit || used > max_evals;
  return r;
}

}  // namespace emvc::quad
