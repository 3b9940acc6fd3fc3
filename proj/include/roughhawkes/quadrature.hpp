#pragma once

// Globally adaptive Gauss-Kronrod (G7/K15) quadrature over a list of panels.
//
// The interval with the largest error estimate is bisected until the summed
// estimate drops below max(abs_tol, rel_tol * |I|) or the interval budget is
// spent. Callers decide what to do with an unconverged result; `converged`
// and `error` are always reported.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace roughhawkes::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-14;
  double rel_tol = 0.0;
  int max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, 7> lo{}, hi{};
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double abs_sum = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    lo[j] = f(c - dx);
    hi[j] = f(c + dx);
    kronrod += kWgk[j] * (lo[j] + hi[j]);
    abs_sum += kWgk[j] * (std::abs(lo[j]) + std::abs(hi[j]));
    if (j % 2 == 1) gauss += kWg[j / 2] * (lo[j] + hi[j]);
  }
  const double mean = 0.5 * kronrod;
  double asc = std::abs(fc - mean) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    asc += kWgk[j] * (std::abs(lo[j] - mean) + std::abs(hi[j] - mean));
  }
  asc *= std::abs(h);
  double err = std::abs((kronrod - gauss) * h);
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  // Rounding floor, scaled well below the QUADPACK default so that callers
  // can ask for near-machine absolute accuracy on O(1) integrals.
  err = std::max(err, 1e-2 * std::numeric_limits<double>::epsilon() *
                          std::abs(h) * abs_sum);
  return {a, b, kronrod * h, err};
}

}  // namespace detail

/// Integrates f over the union of [breaks[i], breaks[i+1]].
template <class F>
Result integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
  std::priority_queue<detail::Segment> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    auto s = detail::gk15(f, breaks[i], breaks[i + 1]);
    value += s.value;
    error += s.error;
    heap.push(s);
  }
  int intervals = static_cast<int>(heap.size());
  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(value)); };
  while (!heap.empty() && error > target() && intervals < opt.max_intervals) {
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // cannot split further
    heap.pop();
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed the drift of the running updates.
  double v = 0.0, e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  return {v, e, intervals, e <= std::max(opt.abs_tol, opt.rel_tol * std::abs(v))};
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  const std::array<double, 2> br{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(br), opt);
}

/// Breakpoints a, a+s, a+2s, a+4s, ... capped at b. Useful for integrands
/// that vary on a scale near `a` and flatten out geometrically.
inline std::vector<double> geometric_breaks(double a, double b, double first) {
  std::vector<double> br{a};
  double w = first;
  while (a + w < b) {
    br.push_back(a + w);
    w *= 2.0;
  }
  br.push_back(b);
  return br;
}

}  // namespace roughhawkes::quad
