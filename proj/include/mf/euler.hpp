#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "mf/errors.hpp"
#include "mf/flat_norm.hpp"
#include "mf/interaction.hpp"
#include "mf/measure.hpp"
#include "mf/semigroup.hpp"

namespace mf {

// Ordered time grid on [0,T]: t_0 = 0 < t_1 < ... < t_N = T.
class Partition {
 public:
  explicit Partition(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw std::invalid_argument("partition needs >= 2 times");
    if (times_.front() != 0.0) throw std::invalid_argument("partition must start at 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1]))
        throw std::invalid_argument("partition times must be strictly increasing");
    if (!std::isfinite(times_.back()))
      throw std::invalid_argument("partition horizon must be finite");
  }

  static Partition uniform(double horizon, std::size_t n_intervals) {
    if (!(horizon > 0.0) || n_intervals == 0)
      throw std::invalid_argument("uniform partition needs T > 0 and N >= 1");
    std::vector<double> t(n_intervals + 1);
    for (std::size_t j = 0; j < n_intervals; ++j)
      t[j] = horizon * static_cast<double>(j) / static_cast<double>(n_intervals);
    t[n_intervals] = horizon;
    return Partition(std::move(t));
  }

  const std::vector<double>& times() const noexcept { return times_; }
  double horizon() const noexcept { return times_.back(); }
  std::size_t intervals() const noexcept { return times_.size() - 1; }

  // M^(k): the largest subinterval length.
  double mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < times_.size(); ++i)
      m = std::max(m, times_[i] - times_[i - 1]);
    return m;
  }

 private:
  std::vector<double> times_;
};

// Generators for sequences of partitions with nonincreasing mesh going to 0.
class PartitionFamily {
 public:
  static PartitionFamily dyadic() { return PartitionFamily(Dyadic{}); }
  static PartitionFamily qadic(int q) {
    if (q < 2) throw Error(Errc::invalid_family, "qadic base must be >= 2");
    return PartitionFamily(Qadic{q});
  }
  static PartitionFamily uniform() { return PartitionFamily(Uniform{}); }
  static PartitionFamily refinement(Partition base, int splits_per_level = 2) {
    if (splits_per_level < 2)
      throw Error(Errc::invalid_family, "refinement must split each interval in >= 2");
    return PartitionFamily(Refinement{std::move(base), splits_per_level});
  }
  static PartitionFamily explicit_list(std::vector<Partition> partitions) {
    if (partitions.empty()) throw Error(Errc::invalid_family, "empty explicit family");
    for (std::size_t i = 1; i < partitions.size(); ++i) {
      if (partitions[i].horizon() != partitions[0].horizon())
        throw Error(Errc::invalid_family, "explicit partitions must share the horizon");
      if (partitions[i].mesh() > partitions[i - 1].mesh() + 1e-15)
        throw Error(Errc::invalid_family, "explicit family mesh must be nonincreasing");
    }
    return PartitionFamily(Explicit{std::move(partitions)});
  }

  Partition make(int k, double horizon) const;
  std::string label() const {
    if (std::holds_alternative<Dyadic>(impl_)) return "dyadic";
    if (const auto* q = std::get_if<Qadic>(&impl_)) return "qadic" + std::to_string(q->q);
    if (std::holds_alternative<Uniform>(impl_)) return "uniform";
    if (std::holds_alternative<Refinement>(impl_)) return "refinement";
    return "explicit";
  }

 private:
  struct Dyadic {};
  struct Qadic { int q; };
  struct Uniform {};
  struct Refinement { Partition base; int splits; };
  struct Explicit { std::vector<Partition> partitions; };
  using Impl = std::variant<Dyadic, Qadic, Uniform, Refinement, Explicit>;
  explicit PartitionFamily(Impl impl) : impl_(std::move(impl)) {}
  Impl impl_;
};

inline Partition PartitionFamily::make(int k, double horizon) const {
  if (k < 0) throw Error(Errc::invalid_family, "partition index must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  constexpr std::int64_t kMaxIntervals = 1 << 26;

  if (std::holds_alternative<Dyadic>(impl_)) {
    if (k >= 26) throw Error(Errc::invalid_family, "dyadic level too deep");
    return Partition::uniform(horizon, std::size_t{1} << k);
  }
  if (const auto* qa = std::get_if<Qadic>(&impl_)) {
    std::int64_t n = 1;
    for (int i = 0; i < k; ++i) {
      n *= qa->q;
      if (n > kMaxIntervals) throw Error(Errc::invalid_family, "qadic level too deep");
    }
    return Partition::uniform(horizon, static_cast<std::size_t>(n));
  }
  if (std::holds_alternative<Uniform>(impl_)) {
    return Partition::uniform(horizon, static_cast<std::size_t>(k) + 1);
  }
  if (const auto* rf = std::get_if<Refinement>(&impl_)) {
    if (rf->base.horizon() != horizon)
      throw Error(Errc::invalid_family, "refinement base horizon mismatch");
    std::int64_t pieces = 1;
    for (int i = 0; i < k; ++i) {
      pieces *= rf->splits;
      if (pieces * static_cast<std::int64_t>(rf->base.intervals()) > kMaxIntervals)
        throw Error(Errc::invalid_family, "refinement level too deep");
    }
    std::vector<double> t;
    const auto& base = rf->base.times();
    for (std::size_t j = 0; j + 1 < base.size(); ++j) {
      double a = base[j], b = base[j + 1];
      for (std::int64_t i = 0; i < pieces; ++i)
        t.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(pieces));
    }
    t.push_back(base.back());
    return Partition(std::move(t));
  }
  const auto& list = std::get<Explicit>(impl_).partitions;
  if (static_cast<std::size_t>(k) >= list.size())
    throw Error(Errc::invalid_family, "explicit family has no partition at this index");
  if (list[static_cast<std::size_t>(k)].horizon() != horizon)
    throw Error(Errc::invalid_family, "explicit partition horizon mismatch");
  return list[static_cast<std::size_t>(k)];
}

// Euler trajectory: measures recorded at all partition nodes and requested
// sample times.
struct Trajectory {
  std::vector<std::pair<double, DiscreteMeasure>> samples;
  Partition partition;

  const DiscreteMeasure& at(double t) const {
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const auto& s, double x) { return s.first < x; });
    if (it == samples.end() || it->first != t)
      throw std::invalid_argument("time was not recorded in this trajectory");
    return it->second;
  }
};

// Forward-Euler-like evolution: on each (t_j, t_{j+1}] the velocity field is
// frozen to v[mu at the left endpoint t_j] and the measure evolves under the
// fixed-velocity mild solution. Requires a positive initial measure.
inline Trajectory euler_evolve(const VelocityRule& rule, const PiecewiseLinearFn& f,
                               const DiscreteMeasure& m0, const Partition& partition,
                               std::vector<double> sample_times, double h_max) {
  if (!is_positive(m0))
    throw Error(Errc::negative_input, "euler evolution needs a positive initial measure");
  const double horizon = partition.horizon();
  for (double s : sample_times)
    if (!(s >= 0.0 && s <= horizon))
      throw std::invalid_argument("sample time outside [0,T]");

  std::vector<double> record = partition.times();
  record.insert(record.end(), sample_times.begin(), sample_times.end());
  std::sort(record.begin(), record.end());
  record.erase(std::unique(record.begin(), record.end()), record.end());

  Trajectory traj{{}, partition};
  traj.samples.reserve(record.size());
  traj.samples.emplace_back(0.0, m0);

  DiscreteMeasure cur = m0;
  const auto& nodes = partition.times();
  std::size_t ri = 1;  // record[0] == 0.0 already emitted
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    FixedDynamics d(realize(rule, cur), f, h_max);
    DiscreteMeasure next = mild_step(d, cur, nodes[j + 1] - nodes[j]);
    while (ri < record.size() && record[ri] <= nodes[j + 1]) {
      if (record[ri] == nodes[j + 1])
        traj.samples.emplace_back(record[ri], next);
      else
        traj.samples.emplace_back(record[ri], mild_step(d, cur, record[ri] - nodes[j]));
      ++ri;
    }
    cur = std::move(next);
  }
  return traj;
}

// Row of the mesh-refinement study: distance of the level-k run to a fixed
// finer reference, maximized over the sample times.
struct CauchyRow {
  int k = 0;
  std::size_t n_intervals = 0;
  double mesh = 0.0;
  double distance = 0.0;  // D_k
};

namespace detail {

inline double sup_distance(const Trajectory& a, const Trajectory& b,
                           const std::vector<double>& times) {
  double d = 0.0;
  for (double t : times) d = std::max(d, dual_distance(a.at(t), b.at(t)));
  return d;
}

// Deterministic fan-out of independent runs; results keyed by index.
inline void run_indexed(std::size_t count, int max_workers,
                        const std::function<void(std::size_t)>& task) {
  int workers = std::max(1, max_workers);
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  std::size_t n_threads = std::min<std::size_t>(workers, count);
  pool.reserve(n_threads);
  for (std::size_t w = 0; w < n_threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// D_k = sup over sample times of || mu^k - mu^{m_ref} ||*_BL for k in
// [k_lo, k_hi], against the single reference level m_ref.
inline std::vector<CauchyRow> cauchy_table(const VelocityRule& rule,
                                           const PiecewiseLinearFn& f,
                                           const DiscreteMeasure& m0,
                                           const PartitionFamily& family, int k_lo,
                                           int k_hi, int m_ref, double horizon,
                                           const std::vector<double>& sample_times,
                                           double h_max, int max_workers = 1) {
  if (!(k_lo <= k_hi && k_hi < m_ref))
    throw std::invalid_argument("need k_lo <= k_hi < m_ref");
  Trajectory ref = euler_evolve(rule, f, m0, family.make(m_ref, horizon), sample_times,
                                h_max);
  std::vector<CauchyRow> rows(static_cast<std::size_t>(k_hi - k_lo + 1));
  detail::run_indexed(rows.size(), max_workers, [&](std::size_t i) {
    int k = k_lo + static_cast<int>(i);
    Partition p = family.make(k, horizon);
    Trajectory run = euler_evolve(rule, f, m0, p, sample_times, h_max);
    rows[i] = CauchyRow{k, p.intervals(), p.mesh(),
                        detail::sup_distance(run, ref, sample_times)};
  });
  return rows;
}

// Least-squares slope of log D_k against log M^(k), and the empirical
// constant C_hat = max D_k / M^(k). When every D_k sits at or below tol the
// scheme is exact on this instance and no rate is identifiable.
struct RateFit {
  double slope = 0.0;
  double c_hat = 0.0;
  bool exact = false;
};

inline RateFit rate_fit(const std::vector<CauchyRow>& rows, double tol = 1e-10) {
  RateFit fit;
  std::vector<double> lx, ly;
  for (const CauchyRow& r : rows) {
    fit.c_hat = std::max(fit.c_hat, r.distance / r.mesh);
    if (r.distance > tol) {
      lx.push_back(std::log(r.mesh));
      ly.push_back(std::log(r.distance));
    }
  }
  if (lx.empty()) {
    fit.exact = true;
    return fit;
  }
  if (lx.size() < 3)
    throw Error(Errc::degenerate, "rate fit needs >= 3 rows with positive distance");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw Error(Errc::degenerate, "rate fit needs distinct meshes");
  fit.slope = sxy / sxx;
  return fit;
}

// sup over sample times of the distance between runs driven by two partition
// generators (levels may differ so the meshes can be matched).
inline double partition_independence(const VelocityRule& rule, const PiecewiseLinearFn& f,
                                     const DiscreteMeasure& m0,
                                     const PartitionFamily& family_a, int k_a,
                                     const PartitionFamily& family_b, int k_b,
                                     double horizon,
                                     const std::vector<double>& sample_times,
                                     double h_max) {
  Trajectory a = euler_evolve(rule, f, m0, family_a.make(k_a, horizon), sample_times,
                              h_max);
  Trajectory b = euler_evolve(rule, f, m0, family_b.make(k_b, horizon), sample_times,
                              h_max);
  return detail::sup_distance(a, b, sample_times);
}

// Continuous dependence on the initial datum at level k:
// num = sup_tau ||mu_tau - nu_tau||*_BL, den = ||mu_0 - nu_0||*_BL.
struct DependenceResult {
  double num = 0.0;
  double den = 0.0;
};

inline DependenceResult continuous_dependence(const VelocityRule& rule,
                                              const PiecewiseLinearFn& f,
                                              const DiscreteMeasure& m0,
                                              const DiscreteMeasure& n0,
                                              const PartitionFamily& family, int k,
                                              double horizon,
                                              const std::vector<double>& sample_times,
                                              double h_max) {
  Partition p = family.make(k, horizon);
  Trajectory mu = euler_evolve(rule, f, m0, p, sample_times, h_max);
  Trajectory nu = euler_evolve(rule, f, n0, p, sample_times, h_max);
  return DependenceResult{detail::sup_distance(mu, nu, sample_times),
                          dual_distance(m0, n0)};
}

// TV(mu_t) <= TV(mu_0) exp(sup|f| T) at every recorded sample, reported as
// margins; independent of the partition.
inline BoundReport timeslice_bounds(const Trajectory& traj, const PiecewiseLinearFn& f) {
  BoundReport rep;
  if (traj.samples.empty()) return rep;
  const double tv0 = total_variation(traj.samples.front().second);
  const double bound = tv0 * std::exp(f.sup_norm() * traj.partition.horizon());
  rep.entries.reserve(traj.samples.size());
  for (const auto& [t, m] : traj.samples)
    rep.entries.push_back({"tv_timeslice@" + std::to_string(t), total_variation(m), bound});
  return rep;
}

// Default probe times: the nodes of the given (coarsest) partition plus its
// interval midpoints, so suprema are evaluated off-grid as well.
inline std::vector<double> default_sample_times(const Partition& coarsest) {
  std::vector<double> out = coarsest.times();
  const auto& t = coarsest.times();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) out.push_back(0.5 * (t[i] + t[i + 1]));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace mf
