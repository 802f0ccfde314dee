#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "transop/error.hpp"
#include "transop/types.hpp"

namespace transop {

struct QuadratureResult {
  Vector value;
  double error = 0.0;  ///< sum of per-interval |K15 - G7| estimates (max-norm)
  int intervals = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi;
  Vector value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gk15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  Vector fc = f(center);
  Vector kronrod = kKronrodWeights[7] * fc;
  Vector gauss = kGaussWeights[3] * fc;
  for (int k = 0; k < 7; ++k) {
    const double dx = half * kGkNodes[static_cast<std::size_t>(k)];
    Vector pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[static_cast<std::size_t>(k)] * pair;
    if (k % 2 == 1) gauss += kGaussWeights[static_cast<std::size_t>(k / 2)] * pair;
  }
  kronrod *= half;
  gauss *= half;
  const double err = (kronrod - gauss).cwiseAbs().maxCoeff();
  return Panel{lo, hi, std::move(kronrod), err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of a vector-valued integrand.
///
/// `breakpoints` must be increasing; each gap seeds one initial panel. The
/// panel with the largest error estimate is bisected until the summed
/// estimate drops below max(abs_tol, rel_tol * |I|). Throws
/// QuadratureFailure when the panel budget runs out first.
template <class F>
QuadratureResult integrate_adaptive(F&& f, const std::vector<double>& breakpoints,
                                    double abs_tol, double rel_tol = 0.0,
                                    int max_panels = 4000) {
  if (breakpoints.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "quadrature needs at least one interval");
  }
  std::priority_queue<detail::Panel> panels;
  Vector total;
  double total_err = 0.0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    if (!(breakpoints[k + 1] > breakpoints[k])) continue;
    detail::Panel p = detail::gk15(f, breakpoints[k], breakpoints[k + 1]);
    if (total.size() == 0) total = Vector::Zero(p.value.size());
    total += p.value;
    total_err += p.error;
    panels.push(std::move(p));
  }
  if (panels.empty()) {
    throw Error(ErrorKind::InvalidArgument, "quadrature interval is empty");
  }
  int count = static_cast<int>(panels.size());
  const auto target = [&] {
    return std::max(abs_tol, rel_tol * total.cwiseAbs().maxCoeff());
  };
  while (total_err > target()) {
    if (count >= max_panels) {
      throw Error(ErrorKind::QuadratureFailure,
                  "error estimate " + std::to_string(total_err) + " above tolerance " +
                      std::to_string(target()) + " after " + std::to_string(count) + " panels");
    }
    detail::Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw Error(ErrorKind::QuadratureFailure, "panel width reached machine precision");
    }
    detail::Panel left = detail::gk15(f, worst.lo, mid);
    detail::Panel right = detail::gk15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    panels.push(std::move(left));
    panels.push(std::move(right));
    ++count;
  }
  // Re-sum from the panels to shed drift from the incremental updates.
  Vector value = Vector::Zero(total.size());
  double err = 0.0;
  std::vector<detail::Panel> done;
  done.reserve(panels.size());
  while (!panels.empty()) {
    done.push_back(panels.top());
    panels.pop();
  }
  std::sort(done.begin(), done.end(),
            [](const detail::Panel& l, const detail::Panel& r) { return l.lo < r.lo; });
  for (const auto& p : done) {
    value += p.value;
    err += p.error;
  }
  return QuadratureResult{std::move(value), err, count};
}

}  // namespace transop
