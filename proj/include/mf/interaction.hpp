#pragma once

#include <algorithm>
#include <variant>
#include <vector>

#include "mf/errors.hpp"
#include "mf/measure.hpp"
#include "mf/piecewise_linear.hpp"

namespace mf {

// Measure-dependent velocity rule v[mu]: either a convolution (K*mu)(x) with
// an interaction kernel K on [-1,1], or a frozen field that ignores mu.
class VelocityRule {
 public:
  static VelocityRule convolution(PiecewiseLinearFn kernel) {
    if (kernel.domain_lo() != -1.0 || kernel.domain_hi() != 1.0)
      throw std::invalid_argument("convolution kernel domain must be exactly [-1,1]");
    return VelocityRule(Conv{std::move(kernel)});
  }
  static VelocityRule frozen(PiecewiseLinearFn field) {
    detail::require_unit_domain(field, "frozen field");
    return VelocityRule(Frozen{std::move(field)});
  }

  bool is_convolution() const { return std::holds_alternative<Conv>(impl_); }
  const PiecewiseLinearFn& kernel() const { return std::get<Conv>(impl_).kernel; }
  const PiecewiseLinearFn& field() const { return std::get<Frozen>(impl_).field; }

 private:
  struct Conv { PiecewiseLinearFn kernel; };
  struct Frozen { PiecewiseLinearFn field; };
  explicit VelocityRule(std::variant<Conv, Frozen> impl) : impl_(std::move(impl)) {}
  std::variant<Conv, Frozen> impl_;
};

// Uniform bounds of a rule over the TV ball of radius R: sup norm K_R,
// Lipschitz constant L_R, and the BL-distance modulus M_R with
// ||v[mu]-v[nu]||_inf <= M_R ||mu-nu||*_BL.
struct BLConstants {
  double k_r = 0.0;
  double l_r = 0.0;
  double m_r = 0.0;
  double r = 0.0;
};

// Realizes v[m] exactly as a piecewise linear field on [0,1]: the sum of the
// shifted kernels is piecewise linear on {kernel node + atom position}, so no
// sampling grid is involved.
inline PiecewiseLinearFn realize(const VelocityRule& rule, const DiscreteMeasure& m) {
  if (!rule.is_convolution()) return rule.field();
  const PiecewiseLinearFn& k = rule.kernel();

  std::vector<double> nodes{0.0, 1.0};
  for (const Atom& a : m.atoms())
    for (double kn : k.nodes()) {
      double p = kn + a.position;
      if (p > 0.0 && p < 1.0) nodes.push_back(p);
    }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<double> values(nodes.size(), 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const Atom& a : m.atoms()) values[i] += a.weight * k(nodes[i] - a.position);
  return PiecewiseLinearFn(std::move(nodes), std::move(values));
}

inline BLConstants bl_constants(const VelocityRule& rule, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("R must be > 0");
  if (rule.is_convolution()) {
    const PiecewiseLinearFn& k = rule.kernel();
    // ||K*mu - K*nu||_inf = sup_x <mu-nu, K(x-.)> <= ||K||_BL ||mu-nu||*_BL
    return BLConstants{k.sup_norm() * r, k.lip_const() * r, k.bl_norm(), r};
  }
  return BLConstants{rule.field().sup_norm(), rule.field().lip_const(), 0.0, r};
}

}  // namespace mf
