#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mf/errors.hpp"
#include "mf/euler.hpp"
#include "mf/interaction.hpp"
#include "mf/measure.hpp"
#include "mf/piecewise_linear.hpp"

namespace mf {

using json = nlohmann::json;

// Shortest-round-trip is not stable across formatting layers; all CSV output
// goes through this fixed format so identical runs are byte-identical.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace io {

inline Error bad_config(const std::string& what) {
  return Error(Errc::config_invalid, "config: " + what);
}

inline double as_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw bad_config(ctx + " must be a number");
  return j.get<double>();
}

// measure literal: [[position, weight], ...]
inline DiscreteMeasure parse_measure(const json& j, const std::string& ctx = "measure") {
  if (!j.is_array()) throw bad_config(ctx + " must be an array of [position,weight]");
  std::vector<Atom> atoms;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw bad_config(ctx + " entries must be [position,weight] pairs");
    atoms.push_back({as_number(e[0], ctx + " position"), as_number(e[1], ctx + " weight")});
  }
  try {
    return DiscreteMeasure::from_atoms(std::move(atoms));
  } catch (const std::invalid_argument& e) {
    throw bad_config(ctx + ": " + e.what());
  }
}

inline json measure_to_json(const DiscreteMeasure& m) {
  json j = json::array();
  for (const Atom& a : m.atoms()) j.push_back({a.position, a.weight});
  return j;
}

// piecewise linear literal: {"nodes":[...], "values":[...]}
inline PiecewiseLinearFn parse_pl(const json& j, const std::string& ctx = "function") {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("values"))
    throw bad_config(ctx + " must be {\"nodes\":[...],\"values\":[...]}");
  std::vector<double> nodes, values;
  for (const auto& e : j["nodes"]) nodes.push_back(as_number(e, ctx + " node"));
  for (const auto& e : j["values"]) values.push_back(as_number(e, ctx + " value"));
  try {
    return PiecewiseLinearFn(std::move(nodes), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw bad_config(ctx + ": " + e.what());
  }
}

inline json pl_to_json(const PiecewiseLinearFn& f) {
  return json{{"nodes", f.nodes()}, {"values", f.values()}};
}

// rule literal: {"type":"convolution","kernel":{...}} | {"type":"frozen","field":{...}}
inline VelocityRule parse_rule(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw bad_config("rule needs a type");
  std::string type = j["type"].get<std::string>();
  try {
    if (type == "convolution") {
      if (!j.contains("kernel")) throw bad_config("convolution rule needs a kernel");
      return VelocityRule::convolution(parse_pl(j["kernel"], "kernel"));
    }
    if (type == "frozen") {
      if (!j.contains("field")) throw bad_config("frozen rule needs a field");
      return VelocityRule::frozen(parse_pl(j["field"], "field"));
    }
  } catch (const std::invalid_argument& e) {
    throw bad_config(std::string("rule: ") + e.what());
  }
  throw bad_config("unknown rule type '" + type + "'");
}

// family literal: {"type":"dyadic"} | {"type":"qadic","q":3} | {"type":"uniform"}
//   | {"type":"refinement","base":[times...],"splits":2}
//   | {"type":"explicit","partitions":[[times...],...]}
inline PartitionFamily parse_family(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw bad_config("family needs a type");
  std::string type = j["type"].get<std::string>();
  auto parse_times = [&](const json& arr) {
    std::vector<double> t;
    for (const auto& e : arr) t.push_back(as_number(e, "partition time"));
    try {
      return Partition(std::move(t));
    } catch (const std::invalid_argument& e) {
      throw bad_config(std::string("partition: ") + e.what());
    }
  };
  try {
    if (type == "dyadic") return PartitionFamily::dyadic();
    if (type == "uniform") return PartitionFamily::uniform();
    if (type == "qadic") {
      if (!j.contains("q")) throw bad_config("qadic family needs q");
      return PartitionFamily::qadic(j["q"].get<int>());
    }
    if (type == "refinement") {
      if (!j.contains("base")) throw bad_config("refinement family needs a base partition");
      int splits = j.value("splits", 2);
      return PartitionFamily::refinement(parse_times(j["base"]), splits);
    }
    if (type == "explicit") {
      if (!j.contains("partitions")) throw bad_config("explicit family needs partitions");
      std::vector<Partition> ps;
      for (const auto& arr : j["partitions"]) ps.push_back(parse_times(arr));
      return PartitionFamily::explicit_list(std::move(ps));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::config_invalid) throw;
    throw bad_config(std::string("family: ") + e.what());
  }
  throw bad_config("unknown family type '" + type + "'");
}

}  // namespace io

enum class RunMode { simulate, converge, depend, norms, verify };

inline RunMode parse_mode(const std::string& s) {
  if (s == "simulate" || s == "SIMULATE") return RunMode::simulate;
  if (s == "converge" || s == "CONVERGE") return RunMode::converge;
  if (s == "depend" || s == "DEPEND") return RunMode::depend;
  if (s == "norms" || s == "NORMS") return RunMode::norms;
  if (s == "verify" || s == "VERIFY") return RunMode::verify;
  throw io::bad_config("unknown mode '" + s + "'");
}

struct ExperimentConfig {
  RunMode mode = RunMode::simulate;
  std::optional<VelocityRule> rule;
  std::optional<PiecewiseLinearFn> f;
  DiscreteMeasure m0;
  std::optional<DiscreteMeasure> n0;  // DEPEND only
  double horizon = 1.0;               // T
  std::optional<PartitionFamily> family;
  int k_lo = 0, k_hi = 0;
  int m_ref = 0;
  double h_max = 1e-3;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<double> sample_times;  // empty: derive from the coarsest partition
};

inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw io::bad_config("top level must be an object");
  ExperimentConfig c;
  if (!j.contains("mode")) throw io::bad_config("missing mode");
  c.mode = parse_mode(j["mode"].get<std::string>());

  const bool needs_dynamics = c.mode != RunMode::norms && c.mode != RunMode::verify;
  if (j.contains("rule")) c.rule = io::parse_rule(j["rule"]);
  if (j.contains("f")) c.f = io::parse_pl(j["f"], "f");
  if (j.contains("m0")) c.m0 = io::parse_measure(j["m0"], "m0");
  if (j.contains("n0")) c.n0 = io::parse_measure(j["n0"], "n0");
  if (j.contains("T")) c.horizon = io::as_number(j["T"], "T");
  if (j.contains("family")) c.family = io::parse_family(j["family"]);
  if (j.contains("k_range")) {
    const auto& r = j["k_range"];
    if (!r.is_array() || r.size() != 2) throw io::bad_config("k_range must be [lo,hi]");
    c.k_lo = r[0].get<int>();
    c.k_hi = r[1].get<int>();
  }
  if (j.contains("m_ref")) c.m_ref = j["m_ref"].get<int>();
  if (j.contains("h_max")) c.h_max = io::as_number(j["h_max"], "h_max");
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("sample_times"))
    for (const auto& e : j["sample_times"])
      c.sample_times.push_back(io::as_number(e, "sample time"));

  if (needs_dynamics) {
    if (!c.rule) throw io::bad_config("this mode needs a velocity rule");
    if (!c.f) c.f = PiecewiseLinearFn::zero();
    if (!j.contains("m0")) throw io::bad_config("this mode needs m0");
    if (!c.family) c.family = PartitionFamily::dyadic();
    if (!(c.horizon > 0.0)) throw io::bad_config("T must be > 0");
    if (!j.contains("h_max")) c.h_max = 1e-3 * c.horizon;
    if (!(c.h_max > 0.0)) throw io::bad_config("h_max must be > 0");
    if (c.k_lo < 0 || c.k_hi < c.k_lo) throw io::bad_config("invalid k_range");
  }
  if (c.mode == RunMode::converge && c.m_ref <= c.k_hi)
    throw io::bad_config("m_ref must exceed k_range hi");
  if (c.mode == RunMode::depend && !c.n0) throw io::bad_config("depend mode needs n0");
  if (c.mode == RunMode::norms && !j.contains("m0"))
    throw io::bad_config("norms mode needs m0");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::bad_config("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io::bad_config(std::string("json parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace mf
