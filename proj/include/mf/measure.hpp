#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mf/errors.hpp"

namespace mf {

// Atoms closer than this are merged during canonicalization.
inline constexpr double kMergeTol = 1e-12;
// Atoms with |weight| below this are dropped; below ODE integrator accuracy,
// so merging never masks dynamics.
inline constexpr double kWeightDropTol = 1e-15;

struct Atom {
  double position = 0.0;  // in [0,1]
  double weight = 0.0;    // signed mass
};

// Finite signed Borel measure on [0,1] as a weighted atom list.
// Canonical form: positions strictly increasing, no zero-weight atoms.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  static DiscreteMeasure from_atoms(std::vector<Atom> atoms, double merge_tol = kMergeTol);
  static DiscreteMeasure dirac(double position, double weight = 1.0) {
    return from_atoms({Atom{position, weight}});
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

 private:
  std::vector<Atom> atoms_;  // canonical
};

inline DiscreteMeasure DiscreteMeasure::from_atoms(std::vector<Atom> atoms, double merge_tol) {
  if (merge_tol < 0.0) throw std::invalid_argument("merge_tol must be >= 0");
  for (const Atom& a : atoms) {
    if (!(a.position >= 0.0 && a.position <= 1.0))
      throw std::invalid_argument("atom position outside [0,1]");
    if (!std::isfinite(a.weight)) throw std::invalid_argument("atom weight not finite");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });

  // Sweep until adjacent gaps all exceed merge_tol; merged positions are
  // weight-weighted means, which can reorder when signs mix.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Atom> merged;
    merged.reserve(atoms.size());
    std::size_t i = 0;
    while (i < atoms.size()) {
      std::size_t j = i + 1;
      double wsum = atoms[i].weight;
      double wx = atoms[i].weight * atoms[i].position;
      while (j < atoms.size() && atoms[j].position - atoms[j - 1].position <= merge_tol) {
        wsum += atoms[j].weight;
        wx += atoms[j].weight * atoms[j].position;
        ++j;
      }
      if (j > i + 1) changed = true;
      if (std::abs(wsum) >= kWeightDropTol) {
        double pos = (j > i + 1) ? std::clamp(wx / wsum, 0.0, 1.0) : atoms[i].position;
        merged.push_back(Atom{pos, wsum});
      } else if (j == i + 1) {
        changed = true;  // single near-zero atom dropped
      }
      i = j;
    }
    atoms = std::move(merged);
    if (changed)
      std::sort(atoms.begin(), atoms.end(),
                [](const Atom& a, const Atom& b) { return a.position < b.position; });
  }
  DiscreteMeasure m;
  m.atoms_ = std::move(atoms);
  return m;
}

inline DiscreteMeasure canonicalize(const DiscreteMeasure& m, double tol = kMergeTol) {
  return DiscreteMeasure::from_atoms(m.atoms(), tol);
}

inline double total_variation(const DiscreteMeasure& m) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += std::abs(a.weight);
  return s;
}

inline double mass(const DiscreteMeasure& m) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += a.weight;
  return s;
}

inline bool is_positive(const DiscreteMeasure& m) {
  for (const Atom& a : m.atoms())
    if (a.weight < 0.0) return false;
  return true;
}

// a*m1 + b*m2, canonicalized.
inline DiscreteMeasure linear_combine(double a, const DiscreteMeasure& m1, double b,
                                      const DiscreteMeasure& m2, double merge_tol = kMergeTol) {
  std::vector<Atom> atoms;
  atoms.reserve(m1.size() + m2.size());
  for (const Atom& at : m1.atoms()) atoms.push_back(Atom{at.position, a * at.weight});
  for (const Atom& at : m2.atoms()) atoms.push_back(Atom{at.position, b * at.weight});
  return DiscreteMeasure::from_atoms(std::move(atoms), merge_tol);
}

}  // namespace mf
