#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "lexsched/bnb.hpp"
#include "lexsched/bounds.hpp"
#include "lexsched/core.hpp"
#include "lexsched/search_tree.hpp"

namespace lexsched {

struct ConstrainedResult {
  Time value = 0;
  Schedule witness;
  Status status = Status::optimal;
  std::uint64_t nodes = 0;
};

namespace detail {

class ConstrainedPolicy {
 public:
  ConstrainedPolicy(const JobOrder& order, std::size_t i, const std::vector<Time>& prefix)
      : order_(order), i_(i), prefix_(prefix), upper_(prefix.begin(), prefix.end()) {}

  void offer(const SearchNode& full) {
    auto v = CompletionVector::from_loads(full.loads);
    if (!std::equal(prefix_.begin(), prefix_.end(), v.begin())) return;
    if (!best_ || v[i_ - 1] < best_value_) {
      best_ = full;
      best_value_ = v[i_ - 1];
    }
  }

  bool keep(const SearchNode& node) {
    const auto t = sorted_desc(node.loads);
    for (std::size_t q = 1; q <= i_; ++q) {
      const Rational l = lower_component(t, node.level, order_, q, std::span(upper_).first(q - 1));
      if (q < i_ && l > prefix_[q - 1]) return false;
      if (q == i_ && best_ && l >= best_value_) return false;
    }
    return true;
  }

  const std::optional<SearchNode>& best() const { return best_; }
  Time best_value() const { return best_value_; }

 private:
  const JobOrder& order_;
  std::size_t i_;
  const std::vector<Time>& prefix_;
  std::vector<Rational> upper_;
  std::optional<SearchNode> best_;
  Time best_value_ = 0;
};

inline Limits remaining_limits(const Limits& total, const Budget& spent_time, std::uint64_t spent_nodes) {
  Limits l = total;
  l.threads = 1;
  if (total.time) l.time = std::max(std::chrono::milliseconds(0), *total.time - spent_time.elapsed());
  if (total.nodes) l.nodes = *total.nodes > spent_nodes ? *total.nodes - spent_nodes : 0;
  return l;
}

}  // namespace detail

/// Minimizes the i-th largest completion time (1-based) over schedules whose
/// sorted vector starts with `prefix` (size i-1). Throws ValidationError when
/// no schedule matches the prefix.
inline ConstrainedResult solve_constrained_min(const Instance& inst, std::size_t i, const std::vector<Time>& prefix,
                                               const Limits& limits = {},
                                               const std::optional<Schedule>& warm_start = std::nullopt) {
  if (i < 1 || i > static_cast<std::size_t>(inst.machines()))
    throw ValidationError("objective index out of range");
  if (prefix.size() != i - 1) throw DimensionError("prefix must hold i-1 values");
  auto shared = std::make_shared<const Instance>(inst);
  const JobOrder order(inst);
  detail::Budget budget(limits);
  detail::ConstrainedPolicy policy(order, i, prefix);
  if (warm_start) policy.offer(detail::node_from_schedule(*warm_start, order));
  Limits single = limits;
  single.threads = 1;
  auto outcome = detail::dfs_search(order, SearchNode::root(inst.machines()), single, policy, budget);
  if (!policy.best()) {
    if (outcome.complete) throw ValidationError("no schedule attains the fixed prefix");
    throw ValidationError("no schedule matching the prefix found within limits");
  }
  ConstrainedResult r;
  r.value = policy.best_value();
  r.witness = to_schedule(shared, order, *policy.best());
  r.status = outcome.complete ? Status::optimal : Status::timeout;
  r.nodes = outcome.nodes;
  return r;
}

/// Optimizes C_1, C_2, ... one at a time, each step fixing the earlier values.
inline SolveReport sequential_method(const Instance& inst, const Limits& limits = {}) {
  detail::Budget clock(limits);
  SolveReport r;
  r.method = "sequential";
  std::vector<Time> prefix;
  std::optional<Schedule> witness;
  const auto m = static_cast<std::size_t>(inst.machines());
  for (std::size_t i = 1; i <= m; ++i) {
    auto step = solve_constrained_min(inst, i, prefix, detail::remaining_limits(limits, clock, r.nodes), witness);
    r.nodes += step.nodes;
    if (step.status == Status::timeout) {
      r.status = Status::timeout;
      if (!witness) witness = step.witness;
      break;
    }
    prefix.push_back(step.value);
    witness = step.witness;
  }
  r.schedule = *witness;
  r.vector = completion_vector(r.schedule);
  if (r.status == Status::optimal) {
    r.lower_bound = detail::to_rationals(r.vector);
  } else {
    r.lower_bound.assign(prefix.begin(), prefix.end());
    r.lower_bound.resize(m, Rational(0));
  }
  r.elapsed = clock.elapsed();
  return r;
}

namespace detail {

// Lower bound on sum B^(m-i) c_i below a node: water-filling the remaining
// load gives a vector majorized by every completion, and the weighted sum
// with nonincreasing weights is Schur-convex. Returned scaled by `scale`.
inline WeightedValue weighted_lower_bound_scaled(const SearchNode& node, const JobOrder& order, unsigned base,
                                                 Time& scale) {
  std::vector<Time> t = node.loads;
  std::sort(t.begin(), t.end());
  Time lambda = order.remaining(node.level);
  std::size_t k = 1;
  Time acc = t[0];
  while (k < t.size() && (acc + lambda) > t[k] * static_cast<Time>(k)) {
    acc += t[k];
    ++k;
  }
  scale = static_cast<Time>(k);
  // first k (smallest) machines sit at level (acc + lambda) / k
  std::vector<Time> scaled;  // nonincreasing, times k
  for (std::size_t q = t.size(); q-- > k;) scaled.push_back(t[q] * scale);
  for (std::size_t q = 0; q < k; ++q) scaled.push_back(acc + lambda);
  std::sort(scaled.begin(), scaled.end(), std::greater<>());
  WeightedValue w = 0;
  for (Time x : scaled) {
    w *= base;
    w += x;
  }
  return w;
}

class WeightPolicy {
 public:
  WeightPolicy(const JobOrder& order, unsigned base) : order_(order), base_(base) {}

  void offer(const SearchNode& full) {
    auto v = CompletionVector::from_loads(full.loads);
    auto w = weighted_value(v, base_);
    if (!best_ || w < best_weight_) {
      best_ = Best{full, std::move(v)};
      best_weight_ = std::move(w);
      tie_ = false;
    } else if (w == best_weight_ && v != best_->vector) {
      tie_ = true;
      if (lex_less(v, best_->vector)) best_ = Best{full, std::move(v)};
    }
  }

  bool keep(const SearchNode& node) {
    if (!best_) return true;
    Time scale = 1;
    auto lb = weighted_lower_bound_scaled(node, order_, base_, scale);
    return !(lb > best_weight_ * scale);  // equal weight stays open so ties are seen
  }

  struct Best {
    SearchNode node;
    CompletionVector vector;
  };
  const std::optional<Best>& best() const { return best_; }
  const WeightedValue& best_weight() const { return best_weight_; }
  bool tie() const { return tie_; }

 private:
  const JobOrder& order_;
  unsigned base_;
  std::optional<Best> best_;
  WeightedValue best_weight_;
  bool tie_ = false;
};

}  // namespace detail

/// Minimizes sum B^(m-i) c_i exactly; among equal-weight vectors returns the
/// lex-smallest and sets weight_tie.
inline SolveReport weighting_method(const Instance& inst, unsigned base = 2, const Limits& limits = {}) {
  if (base < 2) throw ValidationError("weighting base must be at least 2");
  auto shared = std::make_shared<const Instance>(inst);
  const JobOrder order(inst);
  detail::Budget budget(limits);
  detail::WeightPolicy policy(order, base);
  Limits single = limits;
  single.threads = 1;
  auto outcome = detail::dfs_search(order, SearchNode::root(inst.machines()), single, policy, budget);
  if (!policy.best()) policy.offer(complete_with_lpt(SearchNode::root(inst.machines()), order));

  SolveReport r;
  r.method = "weighting";
  r.status = outcome.complete ? Status::optimal : Status::timeout;
  r.schedule = to_schedule(shared, order, policy.best()->node);
  r.vector = policy.best()->vector;
  r.weight = policy.best_weight();
  r.weight_tie = policy.tie();
  r.nodes = outcome.nodes;
  r.leaves = outcome.leaves;
  r.lower_bound = outcome.complete ? detail::to_rationals(r.vector)
                                   : detail::global_lower_bound(order, outcome.open, r.vector);
  r.elapsed = budget.elapsed();
  return r;
}

struct PoolEntry {
  Schedule schedule;
  CompletionVector vector;
};

struct PoolResult {
  std::vector<PoolEntry> entries;  // lex-ascending
  bool complete = true;            // enumeration finished within limits
  bool saturated = false;          // capacity forced evictions
  std::uint64_t nodes = 0;
};

namespace detail {

// Bounded pool keyed by vector; evicts the lex-greatest entry when full.
class BoundedPool {
 public:
  explicit BoundedPool(std::size_t capacity) : capacity_(capacity) {}
  void add(const SearchNode& full) {
    auto v = CompletionVector::from_loads(full.loads);
    auto key = v.values();
    entries_.emplace(std::move(key), Entry{full, std::move(v)});
    if (entries_.size() > capacity_) {
      entries_.erase(std::prev(entries_.end()));
      saturated_ = true;
    }
  }
  bool full() const { return entries_.size() >= capacity_; }
  const CompletionVector& worst() const { return std::prev(entries_.end())->second.vector; }
  bool saturated() const { return saturated_; }

  PoolResult finish(const std::shared_ptr<const Instance>& inst, const JobOrder& order) const {
    PoolResult r;
    r.saturated = saturated_;
    for (const auto& [key, e] : entries_) r.entries.push_back({to_schedule(inst, order, e.node), e.vector});
    return r;
  }

 private:
  struct Entry {
    SearchNode node;
    CompletionVector vector;
  };
  std::size_t capacity_;
  std::multimap<std::vector<Time>, Entry> entries_;
  bool saturated_ = false;
};

class MakespanPoolPolicy {
 public:
  MakespanPoolPolicy(const JobOrder& order, Time makespan, std::size_t capacity)
      : order_(order), makespan_(makespan), pool_(capacity) {}
  void offer(const SearchNode& full) {
    if (*std::max_element(full.loads.begin(), full.loads.end()) == makespan_) pool_.add(full);
  }
  bool keep(const SearchNode& node) {
    return lower_component(sorted_desc(node.loads), node.level, order_, 1, {}) <= makespan_;
  }
  BoundedPool& pool() { return pool_; }

 private:
  const JobOrder& order_;
  Time makespan_;
  BoundedPool pool_;
};

class BestKPolicy {
 public:
  BestKPolicy(const JobOrder& order, std::size_t capacity) : order_(order), pool_(capacity) {}
  void offer(const SearchNode& full) { pool_.add(full); }
  bool keep(const SearchNode& node) {
    if (!pool_.full()) return true;
    const auto& worst = pool_.worst();
    auto b = compute_bounds(node, order_, &worst);
    return !fathom_test(b.lower, &worst);
  }
  BoundedPool& pool() { return pool_; }

 private:
  const JobOrder& order_;
  BoundedPool pool_;
};

}  // namespace detail

/// Symmetry-reduced schedules with makespan exactly `makespan`, at most
/// `capacity` of them (lex-smallest kept).
inline PoolResult makespan_optimal_pool(const Instance& inst, Time makespan, std::size_t capacity,
                                        const Limits& limits = {}) {
  if (capacity < 1) throw ValidationError("pool capacity must be at least 1");
  auto shared = std::make_shared<const Instance>(inst);
  const JobOrder order(inst);
  detail::Budget budget(limits);
  detail::MakespanPoolPolicy policy(order, makespan, capacity);
  Limits enumerate = limits;
  enumerate.use_heuristic = false;
  enumerate.threads = 1;
  auto outcome = detail::dfs_search(order, SearchNode::root(inst.machines()), enumerate, policy, budget);
  auto r = policy.pool().finish(shared, order);
  r.complete = outcome.complete;
  r.nodes = outcome.nodes;
  return r;
}

/// The `count` lex-smallest symmetry-reduced schedules.
inline PoolResult best_schedules(const Instance& inst, std::size_t count, const Limits& limits = {}) {
  if (count < 1) throw ValidationError("pool size must be at least 1");
  auto shared = std::make_shared<const Instance>(inst);
  const JobOrder order(inst);
  detail::Budget budget(limits);
  detail::BestKPolicy policy(order, count);
  Limits enumerate = limits;
  enumerate.use_heuristic = false;
  enumerate.threads = 1;
  auto outcome = detail::dfs_search(order, SearchNode::root(inst.machines()), enumerate, policy, budget);
  auto r = policy.pool().finish(shared, order);
  r.complete = outcome.complete;
  r.nodes = outcome.nodes;
  return r;
}

/// Minimum makespan first, then the lex-best schedule among the pooled
/// makespan-optimal ones.
inline SolveReport highest_rank_method(const Instance& inst, std::size_t pool_capacity = 2000,
                                       const Limits& limits = {}) {
  detail::Budget clock(limits);
  SolveReport r;
  r.method = "highest-rank";
  auto first = solve_constrained_min(inst, 1, {}, limits);
  r.nodes = first.nodes;
  if (first.status == Status::timeout) {
    r.status = Status::timeout;
    r.schedule = first.witness;
    r.vector = completion_vector(r.schedule);
    r.lower_bound.assign(static_cast<std::size_t>(inst.machines()), Rational(0));
    r.elapsed = clock.elapsed();
    return r;
  }
  auto pool = makespan_optimal_pool(inst, first.value, pool_capacity, detail::remaining_limits(limits, clock, r.nodes));
  r.nodes += pool.nodes;
  r.pool_saturated = pool.saturated;
  r.status = pool.complete ? Status::optimal : Status::timeout;
  if (pool.entries.empty()) {
    r.schedule = first.witness;
  } else {
    r.schedule = pool.entries.front().schedule;
  }
  r.vector = completion_vector(r.schedule);
  if (r.status == Status::optimal) {
    r.lower_bound = detail::to_rationals(r.vector);
  } else {
    r.lower_bound.assign(static_cast<std::size_t>(inst.machines()), Rational(0));
    r.lower_bound[0] = first.value;
  }
  r.elapsed = clock.elapsed();
  return r;
}

}  // namespace lexsched
