#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lexsched/bounds.hpp"
#include "lexsched/core.hpp"
#include "lexsched/search_tree.hpp"

namespace lexsched {

struct Limits {
  std::optional<std::chrono::milliseconds> time;
  std::optional<std::uint64_t> nodes;
  bool use_bounds = true;
  bool use_heuristic = true;
  unsigned threads = 1;
};

enum class Status { optimal, timeout };

inline const char* to_string(Status s) { return s == Status::optimal ? "optimal" : "timeout"; }

struct SolveReport {
  std::string method = "bnb";
  Status status = Status::optimal;
  Schedule schedule;
  CompletionVector vector;
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
  std::vector<Rational> lower_bound;
  std::chrono::milliseconds elapsed{0};
  // weighting: minimum weight and whether distinct vectors shared it
  std::optional<WeightedValue> weight;
  bool weight_tie = false;
  // highest-rank: pool hit capacity and evicted entries
  bool pool_saturated = false;
};

/// Observation points for tests and diagnostics. Called from the search
/// thread; in parallel mode calls are serialized by the solver.
struct SolveHooks {
  std::function<void(const SearchNode&, const VectorialBounds&)> on_bounds;
  std::function<void(const CompletionVector&)> on_incumbent;
};

namespace detail {

struct SearchOutcome {
  bool complete = true;
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
  std::vector<SearchNode> open;  // unexplored nodes when stopped early
};

class Budget {
 public:
  explicit Budget(const Limits& limits)
      : limits_(limits), start_(std::chrono::steady_clock::now()) {}

  // Counts one node; returns false once a limit is hit.
  bool charge(std::uint64_t& local_count) {
    const auto total = nodes_.fetch_add(1, std::memory_order_relaxed) + 1;
    if (limits_.nodes && total > *limits_.nodes) return stop();
    if (++local_count % 1024 == 0 && limits_.time && elapsed() >= *limits_.time) return stop();
    return !stopped_.load(std::memory_order_relaxed);
  }
  bool stopped() const { return stopped_.load(std::memory_order_relaxed); }
  std::uint64_t nodes() const { return nodes_.load(); }
  std::chrono::milliseconds elapsed() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
  }

 private:
  bool stop() {
    stopped_.store(true, std::memory_order_relaxed);
    return false;
  }
  const Limits& limits_;
  std::chrono::steady_clock::time_point start_;
  std::atomic<std::uint64_t> nodes_{0};
  std::atomic<bool> stopped_{false};
};

// Depth-first search over the symmetry-reduced tree.
//   policy.offer(full_node)              complete assignment found
//   policy.keep(node) -> bool             false prunes the subtree
// With threads > 1 the policy must be thread safe.
template <class Policy>
SearchOutcome dfs_search(const JobOrder& order, const SearchNode& root, const Limits& limits, Policy& policy,
                         Budget& budget) {
  SearchOutcome out;
  std::uint64_t local = 0;
  budget.charge(local);
  if (root.is_leaf(order)) {
    policy.offer(root);
    out.leaves = 1;
    out.nodes = budget.nodes();
    return out;
  }
  if (limits.use_heuristic) policy.offer(complete_with_lpt(root, order));
  SearchNode start = root;
  if (!policy.keep(start)) {
    out.nodes = budget.nodes();
    return out;
  }

  std::atomic<std::uint64_t> leaves{0};
  std::mutex open_mutex;

  auto expand = [&](const SearchNode& u, std::vector<SearchNode>& push_to, std::uint64_t& count) -> bool {
    auto children = symmetry_reduced_children(u, order);
    std::vector<SearchNode> kept;
    for (auto& v : children) {
      if (!budget.charge(count)) return false;
      if (v.is_leaf(order)) {
        policy.offer(v);
        leaves.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      if (limits.use_heuristic) policy.offer(complete_with_lpt(v, order));
      if (policy.keep(v)) kept.push_back(std::move(v));
    }
    // first child (smallest load) ends on top of the stack
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) push_to.push_back(std::move(*it));
    return true;
  };

  auto run_stack = [&](std::vector<SearchNode>& stack, std::uint64_t& count) {
    while (!stack.empty()) {
      if (budget.stopped()) break;
      SearchNode u = std::move(stack.back());
      stack.pop_back();
      if (!expand(u, stack, count)) {
        stack.push_back(std::move(u));  // keep as open: its children may be partially offered
        break;
      }
    }
  };

  const unsigned threads = std::max(1u, limits.threads);
  if (threads == 1) {
    std::vector<SearchNode> stack;
    stack.push_back(std::move(start));
    run_stack(stack, local);
    out.open = std::move(stack);
  } else {
    // breadth-first until there is enough work to share
    std::deque<SearchNode> frontier;
    frontier.push_back(std::move(start));
    while (!frontier.empty() && frontier.size() < 4 * threads && !budget.stopped()) {
      SearchNode u = std::move(frontier.front());
      frontier.pop_front();
      std::vector<SearchNode> kids;
      if (!expand(u, kids, local)) {
        frontier.push_front(std::move(u));
        break;
      }
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) frontier.push_back(std::move(*it));
    }
    std::mutex queue_mutex;
    auto worker = [&] {
      std::uint64_t count = 0;
      while (true) {
        std::vector<SearchNode> stack;
        {
          std::lock_guard lock(queue_mutex);
          if (frontier.empty() || budget.stopped()) break;
          stack.push_back(std::move(frontier.front()));
          frontier.pop_front();
        }
        run_stack(stack, count);
        if (!stack.empty()) {
          std::lock_guard lock(open_mutex);
          for (auto& n : stack) out.open.push_back(std::move(n));
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& n : frontier) out.open.push_back(std::move(n));
  }
  out.complete = out.open.empty() && !budget.stopped();
  out.leaves += leaves.load();
  out.nodes = budget.nodes();
  return out;
}

inline std::vector<Rational> to_rationals(const CompletionVector& v) {
  return {v.begin(), v.end()};
}

// Lex-min of the incumbent and the uncapped lower bounds of open nodes.
inline std::vector<Rational> global_lower_bound(const JobOrder& order, const std::vector<SearchNode>& open,
                                                const CompletionVector& incumbent) {
  std::vector<Rational> best = to_rationals(incumbent);
  for (const auto& o : open) {
    auto b = compute_bounds(o, order, nullptr);
    if (b.lower < best) best = std::move(b.lower);
  }
  return best;
}

class LexPolicy {
 public:
  LexPolicy(const JobOrder& order, const Limits& limits, const SolveHooks& hooks)
      : order_(order), limits_(limits), hooks_(hooks) {}

  void seed(const SearchNode& full) { offer(full); }

  void offer(const SearchNode& full) {
    auto v = CompletionVector::from_loads(full.loads);
    std::lock_guard lock(mutex_);
    if (!best_ || lex_less(v, best_->vector)) {
      best_ = Best{full, std::move(v)};
      if (hooks_.on_incumbent) hooks_.on_incumbent(best_->vector);
    }
  }

  bool keep(const SearchNode& node) {
    std::optional<CompletionVector> snapshot;
    {
      std::lock_guard lock(mutex_);
      if (best_) snapshot = best_->vector;
    }
    if (!limits_.use_bounds && !hooks_.on_bounds) return true;
    auto b = compute_bounds(node, order_, snapshot ? &*snapshot : nullptr);
    if (hooks_.on_bounds) {
      std::lock_guard lock(hook_mutex_);
      hooks_.on_bounds(node, b);
    }
    if (!limits_.use_bounds) return true;
    return !fathom_test(b.lower, snapshot ? &*snapshot : nullptr);
  }

  struct Best {
    SearchNode node;
    CompletionVector vector;
  };
  const std::optional<Best>& best() const { return best_; }

 private:
  const JobOrder& order_;
  const Limits& limits_;
  const SolveHooks& hooks_;
  std::mutex mutex_;
  std::mutex hook_mutex_;
  std::optional<Best> best_;
};

inline SearchNode node_from_schedule(const Schedule& s, const JobOrder& order) {
  SearchNode n = SearchNode::root(s.instance().machines());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int machine = s.machine_of(order.index[k]);
    n.machine_of.push_back(machine);
    n.loads[static_cast<std::size_t>(machine)] += order.p[k];
  }
  n.level = order.size();
  return n;
}

}  // namespace detail

/// Exact LexOpt by depth-first branch-and-bound with vectorial bounds.
/// `warm_start`, when given, seeds the incumbent.
inline SolveReport solve_lexopt(const Instance& inst, const Limits& limits = {}, const SolveHooks& hooks = {},
                                const std::optional<Schedule>& warm_start = std::nullopt) {
  auto shared = std::make_shared<const Instance>(inst);
  const JobOrder order(inst);
  detail::Budget budget(limits);
  detail::LexPolicy policy(order, limits, hooks);
  if (warm_start) policy.seed(detail::node_from_schedule(*warm_start, order));

  auto outcome = detail::dfs_search(order, SearchNode::root(inst.machines()), limits, policy, budget);

  SolveReport r;
  r.nodes = outcome.nodes;
  r.leaves = outcome.leaves;
  if (!policy.best()) policy.seed(complete_with_lpt(SearchNode::root(inst.machines()), order));
  r.schedule = to_schedule(shared, order, policy.best()->node);
  r.vector = policy.best()->vector;
  if (outcome.complete) {
    r.status = Status::optimal;
    r.lower_bound = detail::to_rationals(r.vector);
  } else {
    r.status = Status::timeout;
    r.lower_bound = detail::global_lower_bound(order, outcome.open, r.vector);
  }
  r.elapsed = budget.elapsed();
  return r;
}

}  // namespace lexsched
