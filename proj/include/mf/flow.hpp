#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "mf/errors.hpp"
#include "mf/piecewise_linear.hpp"

namespace mf {

// Hitting times are refined to this tolerance (in time units).
inline constexpr double kHitTimeTol = 1e-12;

struct FlowResult {
  double position = 0.0;                 // in [0,1]
  bool stopped = false;                  // reached the boundary within the horizon
  std::optional<double> hit_time;        // set iff stopped
  double reaction_integral = 0.0;        // int_0^t f(Phi_s(x0)) ds
};

namespace detail {

struct FlowState {
  double x;
  double g;
};

// One classical 4-stage Runge-Kutta step of dx/ds = v(x), dg/ds = f(x).
// Stage points may poke past the boundary; fields extend by their boundary
// values there (matching how the flow itself freezes at the boundary).
inline FlowState rk4_step(const PiecewiseLinearFn& v, const PiecewiseLinearFn& f,
                          const FlowState& s, double h) {
  double k1x = v.eval_clamped(s.x), k1g = f.eval_clamped(s.x);
  double x2 = s.x + 0.5 * h * k1x;
  double k2x = v.eval_clamped(x2), k2g = f.eval_clamped(x2);
  double x3 = s.x + 0.5 * h * k2x;
  double k3x = v.eval_clamped(x3), k3g = f.eval_clamped(x3);
  double x4 = s.x + h * k3x;
  double k4x = v.eval_clamped(x4), k4g = f.eval_clamped(x4);
  return {s.x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          s.g + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)};
}

}  // namespace detail

// Integrates the stopped flow from x0 over [0,t] with fixed substeps <= h_max,
// accumulating the reaction integral of f along the trajectory. When a substep
// exits [0,1] the hitting time is refined by bisection on the substep, the
// state is clamped to the boundary, and the position stays frozen afterwards
// while the reaction integral keeps accruing f(boundary). A boundary start
// with outward velocity stops immediately; with vanishing velocity the point
// is an equilibrium and does not count as stopped.
inline FlowResult stopped_flow(const PiecewiseLinearFn& v, const PiecewiseLinearFn& f,
                               double x0, double t, double h_max) {
  detail::require_unit_domain(v, "velocity");
  detail::require_unit_domain(f, "reaction");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw Error(Errc::out_of_domain, "x0 outside [0,1]");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  if (!(h_max > 0.0)) throw std::invalid_argument("h_max must be > 0");

  auto stopped_at = [&](double boundary, double hit, double g_at_hit) {
    return FlowResult{boundary, true, hit, g_at_hit + f(boundary) * (t - hit)};
  };
  // outward velocity at a boundary start: tau_boundary = 0
  if (x0 == 0.0 && v(0.0) < 0.0) return stopped_at(0.0, 0.0, 0.0);
  if (x0 == 1.0 && v(1.0) > 0.0) return stopped_at(1.0, 0.0, 0.0);
  if (t == 0.0) return FlowResult{x0, false, std::nullopt, 0.0};

  if (t / h_max > 5e7) throw std::invalid_argument("t / h_max exceeds the substep cap");
  const long n_steps = static_cast<long>(std::ceil(t / h_max));
  const double h = t / static_cast<double>(n_steps);

  detail::FlowState s{x0, 0.0};
  for (long step = 0; step < n_steps; ++step) {
    const double t_step = h * static_cast<double>(step);
    detail::FlowState next = detail::rk4_step(v, f, s, h);
    if (!std::isfinite(next.x) || !std::isfinite(next.g))
      throw Error(Errc::nonfinite_state, "flow state became non-finite");

    if (next.x < 0.0 || next.x > 1.0) {
      // bisect the substep: s is inside, the state at hi is outside
      double lo = 0.0, hi = h;
      while (hi - lo > kHitTimeTol) {
        double mid = 0.5 * (lo + hi);
        detail::FlowState probe = detail::rk4_step(v, f, s, mid);
        if (probe.x < 0.0 || probe.x > 1.0)
          hi = mid;
        else
          lo = mid;
      }
      detail::FlowState at_hit = detail::rk4_step(v, f, s, hi);
      double boundary = next.x < 0.0 ? 0.0 : 1.0;
      return stopped_at(boundary, t_step + hi, at_hit.g);
    }

    s = next;
    if (s.x == 0.0 || s.x == 1.0) {
      // landed exactly on the boundary: stopped iff the velocity points out
      double vb = v(s.x);
      bool outward = (s.x == 0.0 && vb < 0.0) || (s.x == 1.0 && vb > 0.0);
      if (outward) return stopped_at(s.x, h * static_cast<double>(step + 1), s.g);
    }
  }
  return FlowResult{s.x, false, std::nullopt, s.g};
}

// |Phi_t(Phi_s(x0)) - Phi_{t+s}(x0)|, two integrations against one.
inline double flow_semigroup_check(const PiecewiseLinearFn& v, const PiecewiseLinearFn& f,
                                   double x0, double s, double t, double h_max) {
  double mid = stopped_flow(v, f, x0, s, h_max).position;
  double two = stopped_flow(v, f, mid, t, h_max).position;
  double one = stopped_flow(v, f, x0, s + t, h_max).position;
  return std::abs(two - one);
}

}  // namespace mf
