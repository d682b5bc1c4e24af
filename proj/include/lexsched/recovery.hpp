#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lexsched/baselines.hpp"
#include "lexsched/bnb.hpp"
#include "lexsched/core.hpp"
#include "lexsched/rational.hpp"

namespace lexsched {

/// One disturbance. Machines are named by label: the initial machines are
/// 0..m-1 and each activation takes the next unused label.
struct Perturbation {
  enum class Kind { reduce, augment, cancel, arrive, machine_fail, machine_activate };
  Kind kind = Kind::cancel;
  std::string job_id;
  Time p = 0;       // new processing time (reduce, augment, arrive)
  int machine = 0;  // label (machine_fail)

  static Perturbation reduce(std::string id, Time new_p) { return {Kind::reduce, std::move(id), new_p, 0}; }
  static Perturbation augment(std::string id, Time new_p) { return {Kind::augment, std::move(id), new_p, 0}; }
  static Perturbation cancel(std::string id) { return {Kind::cancel, std::move(id), 0, 0}; }
  static Perturbation arrive(std::string id, Time p) { return {Kind::arrive, std::move(id), p, 0}; }
  static Perturbation machine_fail(int label) { return {Kind::machine_fail, {}, 0, label}; }
  static Perturbation machine_activate() { return {Kind::machine_activate, {}, 0, 0}; }

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

inline const char* to_string(Perturbation::Kind k) {
  switch (k) {
    case Perturbation::Kind::reduce: return "reduce";
    case Perturbation::Kind::augment: return "augment";
    case Perturbation::Kind::cancel: return "cancel";
    case Perturbation::Kind::arrive: return "arrive";
    case Perturbation::Kind::machine_fail: return "machine_fail";
    case Perturbation::Kind::machine_activate: return "machine_activate";
  }
  return "";
}

struct RecoveryScenario {
  std::shared_ptr<const Instance> init;
  Schedule init_schedule;
  std::vector<Perturbation> perturbations;

  std::vector<Job> next_jobs;
  std::vector<int> machine_labels;             // label of each perturbed machine, ascending
  std::vector<std::optional<std::size_t>> origin;  // per next job: index in init, none for arrivals
  std::vector<int> home;                       // per next job: binding machine (perturbed index) or -1
  std::vector<std::string> cancelled;          // init jobs removed

  [[nodiscard]] int machines() const { return static_cast<int>(machine_labels.size()); }

  /// The perturbed instance. Throws InfeasibleError when no machine is left.
  [[nodiscard]] const std::shared_ptr<const Instance>& next() const {
    if (!next_instance) throw InfeasibleError("no machine survives the perturbations");
    return next_instance;
  }

  std::shared_ptr<const Instance> next_instance;  // null when no machine is left
};

/// Applies perturbations in order to (S_init's instance, S_init).
inline RecoveryScenario apply_perturbations(const Schedule& init_schedule, std::vector<Perturbation> perturbations) {
  struct Running {
    Job job;
    std::optional<std::size_t> origin;
    int home_label;
  };
  const Instance& init = init_schedule.instance();
  std::vector<Running> jobs;
  for (std::size_t j = 0; j < init.size(); ++j) jobs.push_back({init.job(j), j, init_schedule.machine_of(j)});
  std::vector<int> alive(static_cast<std::size_t>(init.machines()));
  std::iota(alive.begin(), alive.end(), 0);
  int next_label = init.machines();
  std::set<std::string> seen;
  for (const auto& job : init.jobs()) seen.insert(job.id);

  RecoveryScenario sc;
  auto find = [&](const std::string& id) {
    auto it = std::find_if(jobs.begin(), jobs.end(), [&](const Running& r) { return r.job.id == id; });
    if (it == jobs.end()) throw ValidationError("perturbation references missing job '" + id + "'");
    return it;
  };
  for (const auto& pt : perturbations) {
    switch (pt.kind) {
      case Perturbation::Kind::reduce: {
        auto it = find(pt.job_id);
        if (pt.p < 1 || pt.p >= it->job.p)
          throw ValidationError("reduce of '" + pt.job_id + "' needs 1 <= new p < " + std::to_string(it->job.p));
        it->job.p = pt.p;
        break;
      }
      case Perturbation::Kind::augment: {
        auto it = find(pt.job_id);
        if (pt.p <= it->job.p)
          throw ValidationError("augment of '" + pt.job_id + "' needs new p > " + std::to_string(it->job.p));
        it->job.p = pt.p;
        break;
      }
      case Perturbation::Kind::cancel: {
        auto it = find(pt.job_id);
        if (it->origin) sc.cancelled.push_back(it->job.id);
        jobs.erase(it);
        break;
      }
      case Perturbation::Kind::arrive: {
        if (pt.job_id.empty()) throw ValidationError("arrival needs a job id");
        if (!seen.insert(pt.job_id).second) throw ValidationError("arrival reuses job id '" + pt.job_id + "'");
        if (pt.p < 1) throw ValidationError("arrival '" + pt.job_id + "' needs p >= 1");
        jobs.push_back({{pt.job_id, pt.p}, std::nullopt, -1});
        break;
      }
      case Perturbation::Kind::machine_fail: {
        auto it = std::find(alive.begin(), alive.end(), pt.machine);
        if (it == alive.end())
          throw ValidationError("machine " + std::to_string(pt.machine + 1) + " is not available to fail");
        alive.erase(it);
        for (auto& r : jobs)
          if (r.home_label == pt.machine) r.home_label = -1;
        break;
      }
      case Perturbation::Kind::machine_activate: alive.push_back(next_label++); break;
    }
  }

  sc.init = init_schedule.instance_ptr();
  sc.init_schedule = init_schedule;
  sc.perturbations = std::move(perturbations);
  sc.machine_labels = alive;
  for (auto& r : jobs) {
    sc.next_jobs.push_back(r.job);
    sc.origin.push_back(r.origin);
    int h = -1;
    if (r.home_label >= 0) h = static_cast<int>(std::find(alive.begin(), alive.end(), r.home_label) - alive.begin());
    sc.home.push_back(h);
  }
  if (!alive.empty()) sc.next_instance = std::make_shared<const Instance>(static_cast<int>(alive.size()), sc.next_jobs);
  return sc;
}

struct DecisionSplit {
  std::vector<std::pair<std::string, int>> binding;  // job id, perturbed machine index
  std::vector<std::string> free;
};

inline DecisionSplit classify_decisions(const RecoveryScenario& sc) {
  DecisionSplit out;
  for (std::size_t j = 0; j < sc.next_jobs.size(); ++j) {
    if (sc.home[j] >= 0)
      out.binding.emplace_back(sc.next_jobs[j].id, sc.home[j]);
    else
      out.free.push_back(sc.next_jobs[j].id);
  }
  return out;
}

/// Keeps every binding decision, then places free jobs by LPT.
inline Schedule binding_recovery(const RecoveryScenario& sc) {
  const auto& inst = sc.next();
  std::vector<int> machine_of(inst->size(), -1);
  std::vector<Time> loads(static_cast<std::size_t>(inst->machines()), 0);
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < inst->size(); ++j) {
    if (sc.home[j] >= 0) {
      machine_of[j] = sc.home[j];
      loads[static_cast<std::size_t>(sc.home[j])] += inst->p(j);
    } else {
      free.push_back(j);
    }
  }
  std::stable_sort(free.begin(), free.end(), [&](std::size_t a, std::size_t b) { return inst->p(a) > inst->p(b); });
  auto ext = lpt(*inst, loads, free);
  for (std::size_t k = 0; k < free.size(); ++k) machine_of[free[k]] = ext.machine_of[k];
  return {inst, std::move(machine_of)};
}

/// Exact minimum makespan of an instance.
inline ConstrainedResult optimal_makespan(const Instance& inst, const Limits& limits = {}) {
  return solve_constrained_min(inst, 1, {}, limits);
}

struct FlexibleResult {
  Schedule schedule;
  Status status = Status::optimal;
  std::uint64_t nodes = 0;
  std::size_t migrations = 0;
};

/// Minimum makespan over perturbed schedules that move at most `g` binding
/// jobs off their initial machine.
inline FlexibleResult flexible_recovery(const RecoveryScenario& sc, std::size_t g, const Limits& limits = {}) {
  const auto& inst = sc.next();
  const auto m = static_cast<std::size_t>(inst->machines());
  const std::size_t n = inst->size();

  std::vector<std::size_t> free, bound;
  for (std::size_t j = 0; j < n; ++j) (sc.home[j] >= 0 ? bound : free).push_back(j);
  auto by_p = [&](std::size_t a, std::size_t b) { return inst->p(a) > inst->p(b); };
  std::stable_sort(free.begin(), free.end(), by_p);
  std::stable_sort(bound.begin(), bound.end(), by_p);

  // per machine: its binding jobs in decision order and their suffix sums
  std::vector<std::vector<Time>> suffix(m);
  {
    std::vector<std::vector<Time>> lists(m);
    for (std::size_t j : bound) lists[static_cast<std::size_t>(sc.home[j])].push_back(inst->p(j));
    for (std::size_t i = 0; i < m; ++i) {
      suffix[i].assign(lists[i].size() + 1, 0);
      for (std::size_t k = lists[i].size(); k-- > 0;) suffix[i][k] = suffix[i][k + 1] + lists[i][k];
    }
  }

  Time global_lb = (inst->total_processing() + static_cast<Time>(m) - 1) / static_cast<Time>(m);
  for (std::size_t j = 0; j < n; ++j) global_lb = std::max(global_lb, inst->p(j));

  FlexibleResult res;
  res.schedule = binding_recovery(sc);
  Time best = makespan(res.schedule);
  std::vector<int> best_assign = res.schedule.assignment();

  detail::Budget budget(limits);
  std::uint64_t local = 0;
  std::vector<Time> fixed(m, 0);
  std::vector<std::size_t> decided(m, 0);
  std::vector<int> assign(n, -1);
  std::size_t moves = 0;

  auto node_bound = [&] {
    Time lb = global_lb;
    const std::size_t left = g - moves;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t skip = std::min(decided[i] + left, suffix[i].size() - 1);
      lb = std::max(lb, fixed[i] + suffix[i][skip]);
    }
    return lb;
  };
  // machines with equal fixed load and no binding jobs pending are interchangeable
  auto duplicate = [&](std::size_t i) {
    if (decided[i] + 1 < suffix[i].size()) return false;
    for (std::size_t e = 0; e < i; ++e)
      if (fixed[e] == fixed[i] && decided[e] + 1 >= suffix[e].size()) return true;
    return false;
  };

  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (best == global_lb || !budget.charge(local)) return;
    if (node_bound() >= best) return;
    if (depth == n) {
      best = *std::max_element(fixed.begin(), fixed.end());
      best_assign = assign;
      return;
    }
    if (depth < free.size()) {
      const std::size_t j = free[depth];
      for (std::size_t i = 0; i < m; ++i) {
        if (duplicate(i)) continue;
        fixed[i] += inst->p(j);
        assign[j] = static_cast<int>(i);
        self(self, depth + 1);
        fixed[i] -= inst->p(j);
      }
      return;
    }
    const std::size_t j = bound[depth - free.size()];
    const auto h = static_cast<std::size_t>(sc.home[j]);
    ++decided[h];
    fixed[h] += inst->p(j);
    assign[j] = static_cast<int>(h);
    self(self, depth + 1);
    fixed[h] -= inst->p(j);
    if (moves < g) {
      ++moves;
      for (std::size_t i = 0; i < m; ++i) {
        if (i == h || duplicate(i)) continue;
        fixed[i] += inst->p(j);
        assign[j] = static_cast<int>(i);
        self(self, depth + 1);
        fixed[i] -= inst->p(j);
      }
      --moves;
    }
    --decided[h];
  };
  rec(rec, 0);

  res.schedule = Schedule(inst, best_assign);
  res.status = budget.stopped() ? Status::timeout : Status::optimal;
  res.nodes = budget.nodes();
  res.migrations = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (sc.home[j] >= 0 && best_assign[j] != sc.home[j]) ++res.migrations;
  return res;
}

struct UncertaintyCharacterization {
  Rational f{1};
  std::size_t k = 0;
  std::size_t k_r = 0;  // unstable reductions, cancellations included
  std::size_t k_a = 0;  // unstable augmentations, arrivals included
  Rational f_r{1};
  Rational f_a{1};
  int delta = 0;
  int delta_plus = 0;
  Time max_p = 0;  // F, largest perturbed processing time
  bool k_at_least_m = false;
  std::vector<std::string> unstable;
};

/// Counts unstable jobs for boundary f. Cancellations count as unstable
/// reductions and arrivals as unstable augmentations. A category's factor is
/// f when the category occurs at all and 1 otherwise.
inline UncertaintyCharacterization characterize_uncertainty(const RecoveryScenario& sc, const Rational& f) {
  if (f < Rational(1)) throw ValidationError("boundary f must be at least 1, got " + f.str());
  UncertaintyCharacterization ch;
  ch.f = f;
  bool any_reduction = !sc.cancelled.empty();
  bool any_augmentation = false;
  ch.k_r = sc.cancelled.size();
  ch.unstable = sc.cancelled;
  for (std::size_t j = 0; j < sc.next_jobs.size(); ++j) {
    const Time p_hat = sc.next_jobs[j].p;
    ch.max_p = std::max(ch.max_p, p_hat);
    if (!sc.origin[j]) {
      any_augmentation = true;
      ++ch.k_a;
      ch.unstable.push_back(sc.next_jobs[j].id);
      continue;
    }
    const Time p = sc.init->p(*sc.origin[j]);
    if (p_hat < p) {
      any_reduction = true;
      if (Rational(p) > f * Rational(p_hat)) {
        ++ch.k_r;
        ch.unstable.push_back(sc.next_jobs[j].id);
      }
    } else if (p_hat > p) {
      any_augmentation = true;
      if (Rational(p_hat) > f * Rational(p)) {
        ++ch.k_a;
        ch.unstable.push_back(sc.next_jobs[j].id);
      }
    }
  }
  ch.k = ch.k_r + ch.k_a;
  ch.f_r = any_reduction ? f : Rational(1);
  ch.f_a = any_augmentation ? f : Rational(1);
  ch.delta = sc.machines() - sc.init->machines();
  ch.delta_plus = std::max(ch.delta, 0);
  ch.k_at_least_m = ch.k >= static_cast<std::size_t>(sc.init->machines());
  return ch;
}

/// Smallest boundary f under which at most k jobs are unstable. Returns
/// nullopt when more than k jobs are cancelled or arrive.
inline std::optional<Rational> tightest_boundary(const RecoveryScenario& sc, std::size_t k) {
  std::size_t infinite = sc.cancelled.size();
  std::vector<Rational> ratios;
  for (std::size_t j = 0; j < sc.next_jobs.size(); ++j) {
    if (!sc.origin[j]) {
      ++infinite;
      continue;
    }
    const Time p = sc.init->p(*sc.origin[j]);
    const Time p_hat = sc.next_jobs[j].p;
    ratios.push_back(p_hat >= p ? Rational(p_hat, p) : Rational(p, p_hat));
  }
  if (infinite > k) return std::nullopt;
  std::sort(ratios.begin(), ratios.end(), std::greater<>());
  const std::size_t skip = k - infinite;
  return skip < ratios.size() ? ratios[skip] : Rational(1);
}

struct GuaranteeReport {
  Rational reductions;    // 2 f_r (1 + ceil(k_r / (m - k_r)))
  Rational augmentations; // f_a + k_a
  Rational activations;   // 1 + ceil(delta+ / m)
  Rational combined;      // max(2, product of the three)
  Rational product;
};

inline GuaranteeReport guarantee_bound(const UncertaintyCharacterization& ch, int m) {
  if (m < 1) throw ValidationError("guarantee needs m >= 1");
  const auto mm = static_cast<std::int64_t>(m);
  const auto kr = static_cast<std::int64_t>(ch.k_r);
  if (kr >= mm)
    throw ValidationError("guarantee undefined: " + std::to_string(kr) + " unstable reductions on " +
                          std::to_string(mm) + " machines");
  GuaranteeReport g;
  g.reductions = Rational(2) * ch.f_r * Rational(1 + Rational(kr, mm - kr).ceil());
  g.augmentations = ch.f_a + Rational(static_cast<std::int64_t>(ch.k_a));
  g.activations = Rational(1 + Rational(ch.delta_plus, mm).ceil());
  g.product = g.reductions * g.augmentations * g.activations;
  g.combined = std::max(Rational(2), g.product);
  return g;
}

struct GuaranteeCheck {
  Rational ratio{1};
  Rational bound{1};
  bool holds = true;
  bool degenerate = false;  // optimum 0 but recovered makespan positive
};

inline GuaranteeCheck verify_guarantee(const Schedule& recovered, Time optimal_makespan, const Rational& bound) {
  GuaranteeCheck out;
  out.bound = bound;
  const Time c = makespan(recovered);
  if (optimal_makespan == 0) {
    out.degenerate = c != 0;
    out.holds = !out.degenerate;
    return out;
  }
  out.ratio = Rational(c, optimal_makespan);
  out.holds = out.ratio <= bound;
  return out;
}

inline GuaranteeCheck verify_guarantee(const RecoveryScenario& sc, const Schedule& recovered, Time optimal_makespan,
                                       const Rational& f) {
  auto g = guarantee_bound(characterize_uncertainty(sc, f), sc.init->machines());
  return verify_guarantee(recovered, optimal_makespan, g.product);
}

}  // namespace lexsched
