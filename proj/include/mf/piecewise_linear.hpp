#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mf/errors.hpp"

namespace mf {

// Bounded Lipschitz function on an interval, represented by nodes + values.
// Sup norm and Lipschitz constant are exact: a piecewise linear function
// attains its extrema at nodes and its steepest slope on a segment.
class PiecewiseLinearFn {
 public:
  PiecewiseLinearFn(std::vector<double> nodes, std::vector<double> values)
      : nodes_(std::move(nodes)), values_(std::move(values)) {
    if (nodes_.size() < 2) throw std::invalid_argument("need at least 2 nodes");
    if (nodes_.size() != values_.size())
      throw std::invalid_argument("nodes/values size mismatch");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!std::isfinite(nodes_[i]) || !std::isfinite(values_[i]))
        throw std::invalid_argument("non-finite node or value");
      if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
        throw std::invalid_argument("nodes must be strictly increasing");
    }
  }

  static PiecewiseLinearFn constant(double lo, double hi, double value) {
    return PiecewiseLinearFn({lo, hi}, {value, value});
  }
  static PiecewiseLinearFn zero(double lo = 0.0, double hi = 1.0) {
    return constant(lo, hi, 0.0);
  }

  double domain_lo() const noexcept { return nodes_.front(); }
  double domain_hi() const noexcept { return nodes_.back(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double operator()(double x) const {
    if (!(x >= domain_lo() && x <= domain_hi()))
      throw Error(Errc::out_of_domain, "evaluation point outside function domain");
    return eval_unchecked(x);
  }

  // Constant extension outside the domain; the flow integrator may probe
  // stage points slightly past a boundary.
  double eval_clamped(double x) const {
    return eval_unchecked(std::clamp(x, domain_lo(), domain_hi()));
  }

  double sup_norm() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
  }

  double lip_const() const {
    double l = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      l = std::max(l, std::abs(values_[i] - values_[i - 1]) / (nodes_[i] - nodes_[i - 1]));
    return l;
  }

  double bl_norm() const { return sup_norm() + lip_const(); }

 private:
  double eval_unchecked(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t hi = std::min<std::size_t>(it - nodes_.begin(), nodes_.size() - 1);
    std::size_t lo = hi - 1;
    if (x == nodes_[lo]) return values_[lo];
    if (x == nodes_[hi]) return values_[hi];
    double t = (x - nodes_[lo]) / (nodes_[hi] - nodes_[lo]);
    return values_[lo] + t * (values_[hi] - values_[lo]);
  }

  std::vector<double> nodes_;
  std::vector<double> values_;
};

namespace detail {
inline void require_unit_domain(const PiecewiseLinearFn& fn, const char* what) {
  if (fn.domain_lo() != 0.0 || fn.domain_hi() != 1.0)
    throw std::invalid_argument(std::string(what) + " must be defined on [0,1]");
}
}  // namespace detail

// a*f + b*g on the merged node set; exact since the sum of piecewise linear
// functions is piecewise linear on the union of breakpoints.
inline PiecewiseLinearFn pl_combine(double a, const PiecewiseLinearFn& f, double b,
                                    const PiecewiseLinearFn& g) {
  if (f.domain_lo() != g.domain_lo() || f.domain_hi() != g.domain_hi())
    throw std::invalid_argument("pl_combine: domain mismatch");
  std::vector<double> nodes;
  nodes.reserve(f.nodes().size() + g.nodes().size());
  std::merge(f.nodes().begin(), f.nodes().end(), g.nodes().begin(), g.nodes().end(),
             std::back_inserter(nodes));
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<double> values;
  values.reserve(nodes.size());
  for (double x : nodes) values.push_back(a * f(x) + b * g(x));
  return PiecewiseLinearFn(std::move(nodes), std::move(values));
}

// Exact sup norm of f - g.
inline double pl_sup_dist(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g) {
  return pl_combine(1.0, f, -1.0, g).sup_norm();
}

}  // namespace mf
