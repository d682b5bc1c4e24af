#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "lexsched/core.hpp"

namespace lexsched {

/// Jobs of an instance in branching order: nonincreasing p, stable on input order.
struct JobOrder {
  std::vector<std::size_t> index;  // instance job index at position k
  std::vector<Time> p;             // p[k], nonincreasing
  std::vector<Time> prefix;        // prefix[k] = p[0] + ... + p[k-1]

  JobOrder() : prefix{0} {}
  explicit JobOrder(const Instance& inst) : index(longest_first_order(inst)) {
    p.reserve(index.size());
    prefix.reserve(index.size() + 1);
    prefix.push_back(0);
    for (std::size_t j : index) {
      p.push_back(inst.p(j));
      prefix.push_back(prefix.back() + inst.p(j));
    }
  }

  [[nodiscard]] std::size_t size() const { return p.size(); }
  /// Total processing time of positions level..n-1.
  [[nodiscard]] Time remaining(std::size_t level) const { return prefix.back() - prefix[level]; }
  /// p of position `level`, or 0 past the end.
  [[nodiscard]] Time next(std::size_t level) const { return level < p.size() ? p[level] : 0; }
};

/// Partial assignment of the `level` longest jobs.
struct SearchNode {
  std::size_t level = 0;
  std::vector<int> machine_of;  // by JobOrder position, size == level
  std::vector<Time> loads;      // per machine, label order

  static SearchNode root(int machines) {
    SearchNode n;
    n.loads.assign(static_cast<std::size_t>(machines), 0);
    return n;
  }
  [[nodiscard]] bool is_leaf(const JobOrder& order) const { return level == order.size(); }
};

/// One child per distinct partial load (lowest machine index carrying it),
/// ordered by increasing load.
inline std::vector<SearchNode> symmetry_reduced_children(const SearchNode& node, const JobOrder& order) {
  std::vector<std::pair<Time, int>> picks;
  for (std::size_t i = 0; i < node.loads.size(); ++i) {
    bool seen = std::any_of(picks.begin(), picks.end(), [&](const auto& pk) { return pk.first == node.loads[i]; });
    if (!seen) picks.emplace_back(node.loads[i], static_cast<int>(i));
  }
  std::sort(picks.begin(), picks.end());
  std::vector<SearchNode> children;
  children.reserve(picks.size());
  const Time pj = order.p[node.level];
  for (const auto& [load, machine] : picks) {
    SearchNode child;
    child.level = node.level + 1;
    child.machine_of.reserve(child.level);
    child.machine_of = node.machine_of;
    child.machine_of.push_back(machine);
    child.loads = node.loads;
    child.loads[static_cast<std::size_t>(machine)] += pj;
    children.push_back(std::move(child));
  }
  return children;
}

/// Completes a node with LPT; returns the full node at level n.
inline SearchNode complete_with_lpt(const SearchNode& node, const JobOrder& order) {
  SearchNode out = node;
  out.machine_of.reserve(order.size());
  for (std::size_t k = node.level; k < order.size(); ++k) {
    std::size_t i = least_loaded(out.loads);
    out.loads[i] += order.p[k];
    out.machine_of.push_back(static_cast<int>(i));
  }
  out.level = order.size();
  return out;
}

/// Maps a full node back to a Schedule of the instance.
inline Schedule to_schedule(const std::shared_ptr<const Instance>& inst, const JobOrder& order,
                            const SearchNode& leaf) {
  std::vector<int> machine_of(inst->size(), 0);
  for (std::size_t k = 0; k < leaf.machine_of.size(); ++k) machine_of[order.index[k]] = leaf.machine_of[k];
  return {inst, std::move(machine_of)};
}

}  // namespace lexsched
