#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lexsched/bnb.hpp"
#include "lexsched/core.hpp"
#include "lexsched/generators.hpp"
#include "lexsched/rational.hpp"
#include "lexsched/recovery.hpp"

namespace lexsched::io {

using json = nlohmann::ordered_json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path.string() + "'");
}

/// Parses JSON text; syntax errors carry the line and column.
inline json parse(const std::string& text, const std::string& origin = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

inline json load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

namespace detail {

template <class T>
T field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string(what) + " is missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string(what) + " has a malformed '" + key + "'");
  }
}

inline json rationals(const std::vector<Rational>& v) {
  json out = json::array();
  for (const auto& r : v) out.push_back(r.str());
  return out;
}

}  // namespace detail

// ---- Instance --------------------------------------------------------------

inline json to_json(const Instance& inst) {
  json jobs = json::array();
  for (const auto& job : inst.jobs()) jobs.push_back({{"id", job.id}, {"p", job.p}});
  return {{"m", inst.machines()}, {"jobs", std::move(jobs)}};
}

inline Instance instance_from_json(const json& j) {
  const int m = detail::field<int>(j, "m", "instance");
  const auto raw = detail::field<json>(j, "jobs", "instance");
  if (!raw.is_array()) throw ValidationError("instance 'jobs' must be an array");
  std::vector<Job> jobs;
  for (const auto& item : raw)
    jobs.push_back({detail::field<std::string>(item, "id", "job"), detail::field<Time>(item, "p", "job")});
  return {m, std::move(jobs)};
}

// ---- Schedule --------------------------------------------------------------

inline json assignment_json(const Schedule& s) {
  json a = json::object();
  for (std::size_t j = 0; j < s.instance().size(); ++j) a[s.instance().job(j).id] = s.machine_of(j) + 1;
  return a;
}

inline json to_json(const Schedule& s) { return {{"instance", to_json(s.instance())}, {"assignment", assignment_json(s)}}; }

/// "instance" may be inline or a path, resolved against `base_dir`.
inline Schedule schedule_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  const auto ref = detail::field<json>(j, "instance", "schedule");
  std::shared_ptr<const Instance> inst;
  if (ref.is_string()) {
    std::filesystem::path p = ref.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    inst = std::make_shared<const Instance>(instance_from_json(load(p)));
  } else {
    inst = std::make_shared<const Instance>(instance_from_json(ref));
  }
  const auto raw = detail::field<json>(j, "assignment", "schedule");
  if (!raw.is_object()) throw ValidationError("schedule 'assignment' must be an object");
  std::map<std::string, int> a;
  for (const auto& [id, machine] : raw.items()) {
    if (!machine.is_number_integer()) throw ValidationError("machine of job '" + id + "' must be an integer");
    a[id] = machine.get<int>();
  }
  return schedule_from_map(std::move(inst), a);
}

// ---- SolveReport -----------------------------------------------------------

inline json to_json(const SolveReport& r) {
  json out = {{"method", r.method},
              {"status", to_string(r.status)},
              {"vector", r.vector.values()},
              {"assignment", assignment_json(r.schedule)},
              {"nodes", r.nodes},
              {"leaves", r.leaves},
              {"lower_bound", detail::rationals(r.lower_bound)},
              {"elapsed_ms", r.elapsed.count()}};
  if (r.weight) {
    out["weight"] = r.weight->str();
    out["weight_tie"] = r.weight_tie;
  }
  if (r.method == "highest-rank") out["pool_saturated"] = r.pool_saturated;
  return out;
}

// ---- Perturbations and scenarios ------------------------------------------

inline json to_json(const Perturbation& p) {
  json out = {{"kind", to_string(p.kind)}};
  switch (p.kind) {
    case Perturbation::Kind::reduce:
    case Perturbation::Kind::augment:
    case Perturbation::Kind::arrive:
      out["job"] = p.job_id;
      out["p"] = p.p;
      break;
    case Perturbation::Kind::cancel: out["job"] = p.job_id; break;
    case Perturbation::Kind::machine_fail: out["machine"] = p.machine + 1; break;
    case Perturbation::Kind::machine_activate: break;
  }
  return out;
}

inline Perturbation perturbation_from_json(const json& j) {
  const auto kind = detail::field<std::string>(j, "kind", "perturbation");
  auto job = [&] { return detail::field<std::string>(j, "job", "perturbation"); };
  auto p = [&] { return detail::field<Time>(j, "p", "perturbation"); };
  if (kind == "reduce") return Perturbation::reduce(job(), p());
  if (kind == "augment") return Perturbation::augment(job(), p());
  if (kind == "cancel") return Perturbation::cancel(job());
  if (kind == "arrive") return Perturbation::arrive(job(), p());
  if (kind == "machine_fail") return Perturbation::machine_fail(detail::field<int>(j, "machine", "perturbation") - 1);
  if (kind == "machine_activate") return Perturbation::machine_activate();
  throw ValidationError("unknown perturbation kind '" + kind + "'");
}

inline json to_json(const RecoveryScenario& sc) {
  json ps = json::array();
  for (const auto& p : sc.perturbations) ps.push_back(to_json(p));
  return {{"init", to_json(*sc.init)},
          {"init_schedule", {{"assignment", assignment_json(sc.init_schedule)}}},
          {"perturbations", std::move(ps)}};
}

/// The init schedule may omit "instance"; it then refers to "init".
inline RecoveryScenario scenario_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  auto init = detail::field<json>(j, "init", "scenario");
  if (init.is_string()) {
    std::filesystem::path p = init.get<std::string>();
    init = load(p.is_relative() ? base_dir / p : p);
  }
  auto sched = detail::field<json>(j, "init_schedule", "scenario");
  if (sched.is_object() && !sched.contains("instance")) sched["instance"] = init;
  auto s = schedule_from_json(sched, base_dir);
  if (!(s.instance() == instance_from_json(init)))
    throw ValidationError("init_schedule refers to a different instance than init");
  std::vector<Perturbation> ps;
  if (j.contains("perturbations")) {
    if (!j["perturbations"].is_array()) throw ValidationError("scenario 'perturbations' must be an array");
    for (const auto& item : j["perturbations"]) ps.push_back(perturbation_from_json(item));
  }
  return apply_perturbations(s, std::move(ps));
}

// ---- Recovery report -------------------------------------------------------

struct RecoveryReport {
  std::string strategy = "binding";
  Schedule recovered;
  Status status = Status::optimal;
  std::size_t migrations = 0;
  Time optimum = 0;
  bool optimum_exact = true;
  UncertaintyCharacterization uncertainty;
  GuaranteeCheck check;
  bool bound_defined = true;  // false when unstable reductions reach m
};

inline json to_json(const RecoveryReport& r) {
  return {{"strategy", r.strategy},
          {"status", to_string(r.status)},
          {"recovered", to_json(r.recovered)},
          {"makespan", makespan(r.recovered)},
          {"optimal_makespan", r.optimum},
          {"optimum_exact", r.optimum_exact},
          {"migrations", r.migrations},
          {"ratio", r.check.ratio.str()},
          {"bound", r.bound_defined ? json(r.check.bound.str()) : json(nullptr)},
          {"holds", r.bound_defined ? json(r.check.holds) : json(nullptr)},
          {"degenerate", r.check.degenerate},
          {"k", r.uncertainty.k},
          {"k_r", r.uncertainty.k_r},
          {"k_a", r.uncertainty.k_a},
          {"delta", r.uncertainty.delta},
          {"f", r.uncertainty.f.str()},
          {"max_p", r.uncertainty.max_p},
          {"k_at_least_m", r.uncertainty.k_at_least_m}};
}

// ---- Generator specs -------------------------------------------------------

inline GenSpec gen_spec_from_json(const json& j) {
  GenSpec s;
  const auto kind = j.value("kind", std::string("wellformed"));
  if (kind == "wellformed")
    s.kind = GenSpec::Kind::wellformed;
  else if (kind == "degenerate")
    s.kind = GenSpec::Kind::degenerate;
  else
    throw ValidationError("unknown instance kind '" + kind + "'");
  s.m = detail::field<int>(j, "m", "generator spec");
  s.n = detail::field<std::size_t>(j, "n", "generator spec");
  if (s.kind == GenSpec::Kind::wellformed) s.q = detail::field<Time>(j, "q", "generator spec");
  s.dist = parse_distribution(j.value("dist", std::string("uniform")));
  s.seed = j.value("seed", std::uint64_t{1});
  return s;
}

inline PerturbSpec perturb_spec_from_json(const json& j) {
  PerturbSpec s;
  s.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("dn")) s.dn = j["dn"].get<std::size_t>();
  if (j.contains("dm")) s.dm = j["dm"].get<std::size_t>();
  if (j.contains("q")) s.q = j["q"].get<Time>();
  return s;
}

}  // namespace lexsched::io
