#pragma once

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lexsched/baselines.hpp"
#include "lexsched/core.hpp"
#include "lexsched/generators.hpp"
#include "lexsched/recovery.hpp"

namespace lexsched::bench {

using Ratio = boost::multiprecision::cpp_rational;

/// Six significant digits.
inline std::string decimal(const Ratio& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", r.convert_to<double>());
  return buf;
}

/// Lossless "p/q"; integers as "p/1".
inline std::string exact(const Ratio& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

// ---- performance profiles --------------------------------------------------

struct Measurement {
  std::string solver;
  std::string instance;
  std::optional<Ratio> value;  // none: the solver failed on this instance
};

struct ProfileRow {
  std::string solver;
  Ratio x;
  Ratio fraction;
};

/// Fraction of instances each solver handles within factor x of the best
/// solver, at every breakpoint x. Instances are those measured by at least
/// one solver; a solver missing a value counts as failed there.
inline std::vector<ProfileRow> profile(const std::vector<Measurement>& data) {
  std::set<std::string> solvers, instances;
  std::map<std::pair<std::string, std::string>, std::optional<Ratio>> value;
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& d : data) {
    solvers.insert(d.solver);
    instances.insert(d.instance);
    seen[d.solver].insert(d.instance);
    auto [it, fresh] = value.emplace(std::pair{d.solver, d.instance}, d.value);
    if (!fresh) throw ValidationError("duplicate measurement for " + d.solver + " on " + d.instance);
    if (d.value && *d.value < 0) throw ValidationError("profile metric must be nonnegative");
  }
  if (solvers.size() < 2) throw ValidationError("a performance profile needs at least two solvers");
  std::set<std::string> common = seen.begin()->second;
  for (const auto& [s, ids] : seen) {
    std::set<std::string> keep;
    std::set_intersection(common.begin(), common.end(), ids.begin(), ids.end(), std::inserter(keep, keep.end()));
    common = std::move(keep);
  }
  if (common.empty()) throw ValidationError("solvers share no instance");

  std::map<std::string, std::vector<Ratio>> ratios;  // finite ratios per solver
  for (const auto& inst : instances) {
    std::optional<Ratio> best;
    for (const auto& s : solvers) {
      auto it = value.find({s, inst});
      if (it != value.end() && it->second && (!best || *it->second < *best)) best = it->second;
    }
    if (!best) continue;
    for (const auto& s : solvers) {
      auto it = value.find({s, inst});
      if (it == value.end() || !it->second) continue;
      if (*best != 0)
        ratios[s].push_back(*it->second / *best);
      else if (*it->second == 0)
        ratios[s].push_back(Ratio(1));  // positive against a zero best never qualifies
    }
  }
  std::set<Ratio> xs{Ratio(1)};
  for (auto& [s, rs] : ratios) xs.insert(rs.begin(), rs.end());

  const Ratio total(static_cast<long long>(instances.size()));
  std::vector<ProfileRow> rows;
  for (const auto& s : solvers) {
    auto rs = ratios[s];
    std::sort(rs.begin(), rs.end());
    for (const auto& x : xs) {
      const auto within = std::upper_bound(rs.begin(), rs.end(), x) - rs.begin();
      rows.push_back({s, x, Ratio(static_cast<long long>(within)) / total});
    }
  }
  return rows;
}

inline std::string profile_csv(const std::vector<ProfileRow>& rows) {
  std::ostringstream out;
  out << "solver,x,x_exact,fraction,fraction_exact\n";
  for (const auto& r : rows)
    out << r.solver << ',' << decimal(r.x) << ',' << exact(r.x) << ',' << decimal(r.fraction) << ','
        << exact(r.fraction) << '\n';
  return out.str();
}

// ---- recovery scatter ------------------------------------------------------

struct ScatterPoint {
  std::string instance;
  std::size_t schedule = 0;  // index in the initial pool
  std::string strategy;
  Ratio weight_norm;    // W(S_init) / best pool weight
  Ratio makespan_norm;  // C(S_rec) / best recovered makespan
  bool converged = true;
};

struct ScatterConfig {
  std::size_t pool = 50;
  PerturbSpec perturb;
  bool binding = true;
  bool flexible = true;
  std::optional<std::size_t> g;  // default ceil(0.1 n)
  Limits limits;
};

/// Pools distinct initial schedules, perturbs the instance once, recovers
/// each schedule with the requested strategies and normalizes per instance.
inline std::vector<ScatterPoint> scatter(const std::string& name, const Instance& inst, const ScatterConfig& cfg) {
  auto pool = best_schedules(inst, cfg.pool, cfg.limits);
  std::vector<ScatterPoint> points;
  if (pool.entries.empty()) return points;
  const auto ps = gen_perturbations(inst, cfg.perturb);
  const std::size_t g = cfg.g.value_or((inst.size() + 9) / 10);

  WeightedValue best_w = weighted_value(pool.entries.front().vector);
  for (const auto& e : pool.entries) best_w = std::min(best_w, weighted_value(e.vector));

  struct Raw {
    std::size_t index;
    std::string strategy;
    WeightedValue w;
    Time c;
    bool converged;
  };
  std::vector<Raw> raw;
  for (std::size_t k = 0; k < pool.entries.size(); ++k) {
    const auto sc = apply_perturbations(pool.entries[k].schedule, ps);
    if (!sc.next_instance) continue;
    const auto w = weighted_value(pool.entries[k].vector);
    if (cfg.binding) raw.push_back({k, "binding", w, makespan(binding_recovery(sc)), true});
    if (cfg.flexible) {
      auto r = flexible_recovery(sc, g, cfg.limits);
      raw.push_back({k, "flexible", w, makespan(r.schedule), r.status == Status::optimal});
    }
  }
  if (raw.empty()) return points;
  Time best_c = raw.front().c;
  for (const auto& r : raw) best_c = std::min(best_c, r.c);
  for (const auto& r : raw) {
    ScatterPoint p;
    p.instance = name;
    p.schedule = r.index;
    p.strategy = r.strategy;
    p.weight_norm = best_w == 0 ? Ratio(1) : Ratio(r.w) / Ratio(best_w);
    p.makespan_norm = best_c == 0 ? Ratio(1) : Ratio(r.c) / Ratio(best_c);
    p.converged = r.converged;
    points.push_back(std::move(p));
  }
  return points;
}

inline std::string scatter_csv(const std::vector<ScatterPoint>& points) {
  std::ostringstream out;
  out << "instance,schedule,strategy,w_norm,w_norm_exact,c_norm,c_norm_exact,converged\n";
  for (const auto& p : points)
    out << p.instance << ',' << p.schedule << ',' << p.strategy << ',' << decimal(p.weight_norm) << ','
        << exact(p.weight_norm) << ',' << decimal(p.makespan_norm) << ',' << exact(p.makespan_norm) << ','
        << (p.converged ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace lexsched::bench
