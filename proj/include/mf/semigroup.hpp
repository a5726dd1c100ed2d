#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mf/errors.hpp"
#include "mf/flat_norm.hpp"
#include "mf/flow.hpp"
#include "mf/measure.hpp"
#include "mf/piecewise_linear.hpp"

namespace mf {

// A velocity/reaction pair with the substep cap used to integrate under it.
class FixedDynamics {
 public:
  FixedDynamics(PiecewiseLinearFn v, PiecewiseLinearFn f, double h_max)
      : v_(std::move(v)), f_(std::move(f)), h_max_(h_max) {
    detail::require_unit_domain(v_, "velocity");
    detail::require_unit_domain(f_, "reaction");
    if (!(h_max_ > 0.0)) throw std::invalid_argument("h_max must be > 0");
  }

  const PiecewiseLinearFn& v() const noexcept { return v_; }
  const PiecewiseLinearFn& f() const noexcept { return f_; }
  double h_max() const noexcept { return h_max_; }

 private:
  PiecewiseLinearFn v_;
  PiecewiseLinearFn f_;
  double h_max_;
};

// P_t: push-forward of each atom under the stopped flow. Weights untouched,
// so mass and TV are preserved for positive measures.
inline DiscreteMeasure push_forward(const FixedDynamics& d, const DiscreteMeasure& m,
                                    double t) {
  std::vector<Atom> out;
  out.reserve(m.size());
  for (const Atom& a : m.atoms()) {
    FlowResult r = stopped_flow(d.v(), d.f(), a.position, t, d.h_max());
    out.push_back(Atom{r.position, a.weight});
  }
  return DiscreteMeasure::from_atoms(std::move(out));
}

// Q_t: transport plus the accumulated reaction factor exp(int f along the
// stopped trajectory). Exact on atoms up to the ODE tolerance; positivity
// preserving.
inline DiscreteMeasure mild_step(const FixedDynamics& d, const DiscreteMeasure& m,
                                 double t) {
  std::vector<Atom> out;
  out.reserve(m.size());
  for (const Atom& a : m.atoms()) {
    FlowResult r = stopped_flow(d.v(), d.f(), a.position, t, d.h_max());
    out.push_back(Atom{r.position, a.weight * std::exp(r.reaction_integral)});
  }
  return DiscreteMeasure::from_atoms(std::move(out));
}

// ||Q_{t+s} m - Q_t Q_s m||*_BL
inline double q_semigroup_defect(const FixedDynamics& d, const DiscreteMeasure& m,
                                 double s, double t) {
  DiscreteMeasure one = mild_step(d, m, s + t);
  DiscreteMeasure two = mild_step(d, mild_step(d, m, s), t);
  return dual_distance(one, two, NormKind::dual_bl);
}

struct BoundMargin {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const { return rhs - lhs; }
};

struct BoundReport {
  std::vector<BoundMargin> entries;
  double min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) m = std::min(m, e.margin());
    return entries.empty() ? 0.0 : m;
  }
  bool all_within(double tol = 1e-7) const { return min_margin() >= -tol; }
};

// Numerically evaluates both sides of the growth and time-regularity bounds
// for P and Q at horizon t (the two-time bounds use s = t/2).
inline BoundReport check_bounds(const FixedDynamics& d, const DiscreteMeasure& m,
                                double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  const double s = 0.5 * t;
  const double tv = total_variation(m);
  const double bl = dual_norm_value(m, NormKind::dual_bl);
  const double sup_v = d.v().sup_norm(), lip_v = d.v().lip_const();
  const double sup_f = d.f().sup_norm(), bl_f = d.f().bl_norm();

  DiscreteMeasure pt = push_forward(d, m, t);
  DiscreteMeasure ps = push_forward(d, m, s);
  DiscreteMeasure qt = mild_step(d, m, t);
  DiscreteMeasure qs = mild_step(d, m, s);

  BoundReport rep;
  rep.entries.push_back({"p_time_lipschitz", dual_distance(pt, ps),
                         sup_v * tv * (t - s)});
  rep.entries.push_back({"p_bl_growth", dual_norm_value(pt, NormKind::dual_bl),
                         std::exp(lip_v * t) * bl});
  rep.entries.push_back({"p_tv_nonexpansive", total_variation(pt), tv});
  rep.entries.push_back({"q_tv_growth", total_variation(qt),
                         tv * std::exp(sup_f * t)});
  rep.entries.push_back({"q_bl_growth", dual_norm_value(qt, NormKind::dual_bl),
                         bl * std::exp(lip_v * t + bl_f * t * std::exp(lip_v * t))});
  rep.entries.push_back({"q_time_lipschitz", dual_distance(qt, qs),
                         tv * (sup_f + sup_v) * std::exp(sup_f * t) * (t - s)});
  return rep;
}

}  // namespace mf
