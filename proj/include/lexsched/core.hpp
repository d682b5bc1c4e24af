#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lexsched/errors.hpp"

namespace lexsched {

using Time = std::int64_t;
using WeightedValue = boost::multiprecision::cpp_int;

struct Job {
  std::string id;
  Time p = 1;

  friend bool operator==(const Job&, const Job&) = default;
};

/// Identical parallel machine instance: m machines and jobs with positive
/// integer processing times. Immutable once built.
class Instance {
 public:
  Instance() = default;
  Instance(int machines, std::vector<Job> jobs) : machines_(machines), jobs_(std::move(jobs)) {
    if (machines_ < 1) throw ValidationError("instance needs at least one machine");
    index_.reserve(jobs_.size());
    for (std::size_t j = 0; j < jobs_.size(); ++j) {
      if (jobs_[j].p < 1)
        throw ValidationError("job '" + jobs_[j].id + "' has non-positive processing time");
      if (!index_.emplace(jobs_[j].id, j).second)
        throw ValidationError("duplicate job id '" + jobs_[j].id + "'");
      total_ += jobs_[j].p;
    }
  }

  /// Jobs named "j1".."jn" in the given order.
  static Instance from_times(int machines, std::span<const Time> times) {
    std::vector<Job> jobs;
    jobs.reserve(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) jobs.push_back({"j" + std::to_string(j + 1), times[j]});
    return {machines, std::move(jobs)};
  }
  static Instance from_times(int machines, std::initializer_list<Time> times) {
    return from_times(machines, std::span<const Time>(times.begin(), times.size()));
  }

  [[nodiscard]] int machines() const { return machines_; }
  [[nodiscard]] std::size_t size() const { return jobs_.size(); }
  [[nodiscard]] const std::vector<Job>& jobs() const { return jobs_; }
  [[nodiscard]] const Job& job(std::size_t j) const { return jobs_[j]; }
  [[nodiscard]] Time p(std::size_t j) const { return jobs_[j].p; }
  [[nodiscard]] Time total_processing() const { return total_; }
  [[nodiscard]] std::vector<Time> times() const {
    std::vector<Time> out;
    out.reserve(jobs_.size());
    for (const auto& job : jobs_) out.push_back(job.p);
    return out;
  }
  [[nodiscard]] bool contains(const std::string& id) const { return index_.count(id) != 0; }
  [[nodiscard]] std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown job id '" + id + "'");
    return it->second;
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.machines_ == b.machines_ && a.jobs_ == b.jobs_;
  }

 private:
  int machines_ = 1;
  std::vector<Job> jobs_;
  std::unordered_map<std::string, std::size_t> index_;
  Time total_ = 0;
};

/// Machine completion times sorted nonincreasing. Machine labels are dropped.
class CompletionVector {
 public:
  CompletionVector() = default;
  explicit CompletionVector(std::vector<Time> sorted_values) : values_(std::move(sorted_values)) {
    if (!std::is_sorted(values_.begin(), values_.end(), std::greater<>()))
      throw ValidationError("completion vector must be sorted nonincreasing");
  }
  static CompletionVector from_loads(std::vector<Time> loads) {
    std::sort(loads.begin(), loads.end(), std::greater<>());
    CompletionVector v;
    v.values_ = std::move(loads);
    return v;
  }

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] Time operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] const std::vector<Time>& values() const { return values_; }
  [[nodiscard]] Time sum() const { return std::accumulate(values_.begin(), values_.end(), Time{0}); }
  [[nodiscard]] auto begin() const { return values_.begin(); }
  [[nodiscard]] auto end() const { return values_.end(); }

  friend bool operator==(const CompletionVector&, const CompletionVector&) = default;
  friend std::ostream& operator<<(std::ostream& os, const CompletionVector& v) {
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os << ')';
  }

 private:
  std::vector<Time> values_;
};

/// Lexicographic order on equal-length completion vectors.
inline std::strong_ordering lex_compare(const CompletionVector& a, const CompletionVector& b) {
  if (a.size() != b.size())
    throw DimensionError("lex_compare on vectors of length " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  return a.values() <=> b.values();
}
inline bool lex_less(const CompletionVector& a, const CompletionVector& b) {
  return lex_compare(a, b) == std::strong_ordering::less;
}

/// Job to machine assignment for one instance. Machines are 0-based here;
/// the JSON layer converts to 1-based labels.
class Schedule {
 public:
  Schedule() = default;
  Schedule(std::shared_ptr<const Instance> instance, std::vector<int> machine_of)
      : instance_(std::move(instance)), machine_of_(std::move(machine_of)) {
    if (!instance_) throw ValidationError("schedule without instance");
    if (machine_of_.size() != instance_->size())
      throw ValidationError("schedule assigns " + std::to_string(machine_of_.size()) + " jobs, instance has " +
                            std::to_string(instance_->size()));
    for (std::size_t j = 0; j < machine_of_.size(); ++j)
      if (machine_of_[j] < 0 || machine_of_[j] >= instance_->machines())
        throw ValidationError("job '" + instance_->job(j).id + "' assigned to machine " +
                              std::to_string(machine_of_[j] + 1) + " outside 1.." +
                              std::to_string(instance_->machines()));
  }
  Schedule(const Instance& instance, std::vector<int> machine_of)
      : Schedule(std::make_shared<const Instance>(instance), std::move(machine_of)) {}

  [[nodiscard]] const Instance& instance() const { return *instance_; }
  [[nodiscard]] const std::shared_ptr<const Instance>& instance_ptr() const { return instance_; }
  [[nodiscard]] const std::vector<int>& assignment() const { return machine_of_; }
  [[nodiscard]] int machine_of(std::size_t j) const { return machine_of_[j]; }

  /// Per-machine loads in machine-label order.
  [[nodiscard]] std::vector<Time> loads() const {
    std::vector<Time> out(static_cast<std::size_t>(instance_->machines()), 0);
    for (std::size_t j = 0; j < machine_of_.size(); ++j)
      out[static_cast<std::size_t>(machine_of_[j])] += instance_->p(j);
    return out;
  }

  friend bool operator==(const Schedule& a, const Schedule& b) {
    return a.machine_of_ == b.machine_of_ &&
           (a.instance_ == b.instance_ || (a.instance_ && b.instance_ && *a.instance_ == *b.instance_));
  }

 private:
  std::shared_ptr<const Instance> instance_;
  std::vector<int> machine_of_;
};

inline CompletionVector completion_vector(const Schedule& s) { return CompletionVector::from_loads(s.loads()); }

inline Time makespan(const Schedule& s) {
  auto loads = s.loads();
  return loads.empty() ? 0 : *std::max_element(loads.begin(), loads.end());
}

/// Sum of B^(m-i) * c_i, exact.
inline WeightedValue weighted_value(const CompletionVector& v, unsigned base = 2) {
  WeightedValue total = 0;
  for (Time c : v) {
    total *= base;
    total += c;
  }
  return total;
}

/// Job indices sorted by nonincreasing processing time, ties by input order.
inline std::vector<std::size_t> longest_first_order(const Instance& inst) {
  std::vector<std::size_t> order(inst.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inst.p(a) > inst.p(b); });
  return order;
}

inline std::size_t least_loaded(std::span<const Time> loads) {
  return static_cast<std::size_t>(std::min_element(loads.begin(), loads.end()) - loads.begin());
}

struct LptExtension {
  std::vector<int> machine_of;  // parallel to the `remaining` argument
  std::vector<Time> loads;      // final per-machine loads, label order
  CompletionVector vector;
};

/// Greedy LPT completion: places each remaining job (already in
/// nonincreasing order) on a least-loaded machine, lowest index on ties.
inline LptExtension lpt(const Instance& inst, std::span<const Time> initial_loads,
                        std::span<const std::size_t> remaining) {
  if (initial_loads.size() != static_cast<std::size_t>(inst.machines()))
    throw DimensionError("initial loads must have one entry per machine");
  LptExtension ext;
  ext.loads.assign(initial_loads.begin(), initial_loads.end());
  ext.machine_of.reserve(remaining.size());
  for (std::size_t j : remaining) {
    std::size_t i = least_loaded(ext.loads);
    ext.loads[i] += inst.p(j);
    ext.machine_of.push_back(static_cast<int>(i));
  }
  ext.vector = CompletionVector::from_loads(ext.loads);
  return ext;
}

/// Full LPT schedule from empty machines.
inline Schedule lpt_schedule(const Instance& inst) {
  auto order = longest_first_order(inst);
  std::vector<Time> zero(static_cast<std::size_t>(inst.machines()), 0);
  auto ext = lpt(inst, zero, order);
  std::vector<int> machine_of(inst.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) machine_of[order[k]] = ext.machine_of[k];
  return {inst, std::move(machine_of)};
}

struct Violation {
  enum class Kind { missing_job, unknown_job, machine_out_of_range };
  Kind kind;
  std::string job_id;
  int machine = 0;  // 1-based label as given

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks a raw id -> machine (1-based) map against an instance.
inline std::vector<Violation> validate_schedule(const Instance& inst, const std::map<std::string, int>& assignment) {
  std::vector<Violation> out;
  for (const auto& job : inst.jobs())
    if (!assignment.count(job.id)) out.push_back({Violation::Kind::missing_job, job.id, 0});
  for (const auto& [id, machine] : assignment) {
    if (!inst.contains(id))
      out.push_back({Violation::Kind::unknown_job, id, machine});
    else if (machine < 1 || machine > inst.machines())
      out.push_back({Violation::Kind::machine_out_of_range, id, machine});
  }
  return out;
}

inline std::vector<Violation> validate_schedule(const Schedule& s) {
  std::map<std::string, int> raw;
  for (std::size_t j = 0; j < s.instance().size(); ++j) raw[s.instance().job(j).id] = s.machine_of(j) + 1;
  return validate_schedule(s.instance(), raw);
}

inline std::string describe(const Violation& v) {
  switch (v.kind) {
    case Violation::Kind::missing_job: return "job '" + v.job_id + "' is not assigned";
    case Violation::Kind::unknown_job: return "job '" + v.job_id + "' does not exist in the instance";
    case Violation::Kind::machine_out_of_range:
      return "job '" + v.job_id + "' assigned to machine " + std::to_string(v.machine) + " which does not exist";
  }
  return {};
}

/// Builds a schedule from a 1-based id map, throwing on any violation.
inline Schedule schedule_from_map(std::shared_ptr<const Instance> inst, const std::map<std::string, int>& assignment) {
  auto violations = validate_schedule(*inst, assignment);
  if (!violations.empty()) {
    std::string msg = "invalid schedule:";
    for (const auto& v : violations) msg += " " + describe(v) + ";";
    throw ValidationError(msg);
  }
  std::vector<int> machine_of(inst->size());
  for (std::size_t j = 0; j < inst->size(); ++j) machine_of[j] = assignment.at(inst->job(j).id) - 1;
  return {std::move(inst), std::move(machine_of)};
}

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// m^n, or nullopt-like sentinel (UINT64_MAX) once it exceeds `cap`.
inline std::uint64_t assignment_count(int machines, std::size_t jobs, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < jobs; ++j) {
    if (total > cap / static_cast<std::uint64_t>(machines)) return UINT64_MAX;
    total *= static_cast<std::uint64_t>(machines);
  }
  return total;
}

/// Exhaustive LexOpt over all m^n assignments. Ties between lex-equal
/// vectors go to the smallest assignment when jobs are read in id order.
inline Schedule brute_force_lexopt(const Instance& inst, std::uint64_t cap = kDefaultEnumerationCap) {
  const auto m = static_cast<std::size_t>(inst.machines());
  const std::size_t n = inst.size();
  if (assignment_count(inst.machines(), n, cap) > cap)
    throw SizeError("brute force needs m^n <= " + std::to_string(cap) + " assignments");

  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return inst.job(a).id < inst.job(b).id; });

  std::vector<int> digits(n, 0);  // digits[k] = machine of job by_id[k]
  std::vector<Time> loads(m, 0);
  for (std::size_t j = 0; j < n; ++j) loads[0] += inst.p(j);
  std::vector<Time> sorted(m);
  auto current = [&] {
    sorted = loads;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
  };
  current();
  std::vector<Time> best = sorted;
  std::vector<int> best_digits = digits;

  while (true) {
    std::size_t k = n;
    while (k > 0) {
      --k;
      const std::size_t job = by_id[k];
      loads[static_cast<std::size_t>(digits[k])] -= inst.p(job);
      if (static_cast<std::size_t>(digits[k]) + 1 < m) {
        ++digits[k];
        loads[static_cast<std::size_t>(digits[k])] += inst.p(job);
        break;
      }
      digits[k] = 0;
      loads[0] += inst.p(job);
      if (k == 0) {
        k = n;  // wrapped around: done
        break;
      }
    }
    if (k == n) break;
    current();
    if (sorted < best) {
      best = sorted;
      best_digits = digits;
    }
  }

  std::vector<int> machine_of(n);
  for (std::size_t k = 0; k < n; ++k) machine_of[by_id[k]] = best_digits[k];
  return {inst, std::move(machine_of)};
}

}  // namespace lexsched
