#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mf/io.hpp"
#include "mf/verify.hpp"

namespace mf {

inline int worker_count() {
  if (const char* env = std::getenv("MF_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct RunArtifacts {
  int exit_code = 0;  // 0 ok, 3 checks failed
  json summary;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::numerical_failure, "cannot write " + path.string());
  out << content;
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  std::string body;
  for (const auto& [t, m] : traj.samples) {
    json line{{"time", t}, {"atoms", io::measure_to_json(m)}};
    body += line.dump();
    body += '\n';
  }
  write_file(path, body);
}

inline std::vector<double> resolve_samples(const ExperimentConfig& cfg) {
  if (!cfg.sample_times.empty()) return cfg.sample_times;
  return default_sample_times(cfg.family->make(cfg.k_lo, cfg.horizon));
}

inline json report_to_json(const BoundReport& rep) {
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"name", e.name}, {"lhs", e.lhs}, {"rhs", e.rhs},
                       {"margin", e.margin()}});
  return json{{"entries", entries}, {"min_margin", rep.min_margin()}};
}

}  // namespace detail

// Runs one experiment config, writing results.csv, trajectory.jsonl and
// summary.json under out_dir. Deterministic given (config, seed).
inline RunArtifacts run_experiment(const ExperimentConfig& cfg,
                                   const std::string& out_dir_override = "",
                                   std::optional<std::uint64_t> seed_override = {}) {
  namespace fs = std::filesystem;
  const fs::path out_dir = out_dir_override.empty() ? cfg.out_dir : out_dir_override;
  fs::create_directories(out_dir);
  const std::uint64_t seed = seed_override.value_or(cfg.seed);

  RunArtifacts art;
  json& summary = art.summary;
  summary["seed"] = seed;
  std::string csv;

  switch (cfg.mode) {
    case RunMode::norms: {
      summary["mode"] = "norms";
      auto bl = dual_norm(cfg.m0, NormKind::dual_bl);
      auto fm = dual_norm(cfg.m0, NormKind::dual_fm);
      summary["bl"] = bl.value;
      summary["fm"] = fm.value;
      summary["tv"] = total_variation(cfg.m0);
      summary["mass"] = mass(cfg.m0);
      summary["witness_bl"] = {{"values", bl.witness.values},
                               {"sup_budget", bl.witness.sup_budget},
                               {"lip_budget", bl.witness.lip_budget}};
      summary["pass"] = true;
      csv = "quantity,value\n";
      csv += "bl," + fmt_double(bl.value) + "\n";
      csv += "fm," + fmt_double(fm.value) + "\n";
      csv += "tv," + fmt_double(total_variation(cfg.m0)) + "\n";
      csv += "mass," + fmt_double(mass(cfg.m0)) + "\n";
      detail::write_file(out_dir / "trajectory.jsonl", "");
      break;
    }

    case RunMode::simulate: {
      summary["mode"] = "simulate";
      Partition p = cfg.family->make(cfg.k_hi, cfg.horizon);
      Trajectory traj =
          euler_evolve(*cfg.rule, *cfg.f, cfg.m0, p, detail::resolve_samples(cfg), cfg.h_max);
      detail::write_trajectory(out_dir / "trajectory.jsonl", traj);

      BoundReport rep = timeslice_bounds(traj, *cfg.f);
      bool positive = true;
      for (const auto& [t, m] : traj.samples) positive = positive && is_positive(m);
      summary["timeslice"] = detail::report_to_json(rep);
      summary["positivity"] = positive;
      summary["final_mass"] = mass(traj.samples.back().second);
      summary["final_tv"] = total_variation(traj.samples.back().second);
      summary["pass"] = positive && rep.all_within(1e-7);

      csv = "family,k,N_k,mesh,D_k,slope,C_hat\n";
      csv += cfg.family->label() + "," + std::to_string(cfg.k_hi) + "," +
             std::to_string(p.intervals()) + "," + fmt_double(p.mesh()) + ",,,\n";
      break;
    }

    case RunMode::converge: {
      summary["mode"] = "converge";
      auto samples = detail::resolve_samples(cfg);
      auto rows = cauchy_table(*cfg.rule, *cfg.f, cfg.m0, *cfg.family, cfg.k_lo, cfg.k_hi,
                               cfg.m_ref, cfg.horizon, samples, cfg.h_max, worker_count());
      RateFit fit = rate_fit(rows);

      Partition ref_p = cfg.family->make(cfg.m_ref, cfg.horizon);
      Trajectory ref = euler_evolve(*cfg.rule, *cfg.f, cfg.m0, ref_p, samples, cfg.h_max);
      detail::write_trajectory(out_dir / "trajectory.jsonl", ref);
      BoundReport rep = timeslice_bounds(ref, *cfg.f);

      csv = "family,k,N_k,mesh,D_k,slope,C_hat\n";
      json jrows = json::array();
      for (const auto& r : rows) {
        csv += cfg.family->label() + "," + std::to_string(r.k) + "," +
               std::to_string(r.n_intervals) + "," + fmt_double(r.mesh) + "," +
               fmt_double(r.distance) + "," + fmt_double(fit.slope) + "," +
               fmt_double(fit.c_hat) + "\n";
        jrows.push_back({{"k", r.k}, {"n", r.n_intervals}, {"mesh", r.mesh},
                         {"d", r.distance}});
      }
      bool cauchy_ok = true;
      for (const auto& r : rows)
        cauchy_ok = cauchy_ok && r.distance <= fit.c_hat * r.mesh + 1e-12;
      summary["rows"] = jrows;
      summary["slope"] = fit.slope;
      summary["c_hat"] = fit.c_hat;
      summary["exact"] = fit.exact;
      summary["timeslice"] = detail::report_to_json(rep);
      summary["pass"] = cauchy_ok && rep.all_within(1e-7);
      break;
    }

    case RunMode::depend: {
      summary["mode"] = "depend";
      auto samples = detail::resolve_samples(cfg);
      auto dep = continuous_dependence(*cfg.rule, *cfg.f, cfg.m0, *cfg.n0, *cfg.family,
                                       cfg.k_hi, cfg.horizon, samples, cfg.h_max);
      summary["num"] = dep.num;
      summary["den"] = dep.den;
      bool ok;
      if (dep.den == 0.0) {
        summary["ratio"] = nullptr;
        ok = dep.num <= 1e-9;  // identical initial data must stay identical
      } else {
        summary["ratio"] = dep.num / dep.den;
        ok = true;
      }
      summary["pass"] = ok;
      Trajectory traj = euler_evolve(*cfg.rule, *cfg.f, cfg.m0,
                                     cfg.family->make(cfg.k_hi, cfg.horizon), samples,
                                     cfg.h_max);
      detail::write_trajectory(out_dir / "trajectory.jsonl", traj);
      csv = "num,den,ratio\n";
      csv += fmt_double(dep.num) + "," + fmt_double(dep.den) + "," +
             (dep.den == 0.0 ? std::string("") : fmt_double(dep.num / dep.den)) + "\n";
      break;
    }

    case RunMode::verify: {
      summary["mode"] = "verify";
      auto checks = run_verification_suite(seed, cfg.h_max);
      bool all = true;
      json jchecks = json::array();
      csv = "check,pass,worst\n";
      for (const auto& c : checks) {
        all = all && c.pass;
        jchecks.push_back({{"name", c.name}, {"pass", c.pass}, {"worst", c.worst},
                           {"note", c.note}});
        csv += c.name + "," + (c.pass ? "1" : "0") + "," + fmt_double(c.worst) + "\n";
      }
      summary["checks"] = jchecks;
      summary["pass"] = all;
      detail::write_file(out_dir / "trajectory.jsonl", "");
      break;
    }
  }

  detail::write_file(out_dir / "results.csv", csv);
  detail::write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  art.exit_code = summary.value("pass", true) ? 0 : 3;
  return art;
}

}  // namespace mf
