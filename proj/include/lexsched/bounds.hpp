#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lexsched/core.hpp"
#include "lexsched/rational.hpp"
#include "lexsched/search_tree.hpp"

namespace lexsched {

/// Per-position bounds on the lex-best completion vector below a node.
struct VectorialBounds {
  std::vector<Rational> lower;
  std::vector<Rational> upper;
};

namespace detail {

// Loads sorted nonincreasing: positions 0..i-2 stand for the i-1 largest
// completions, the tail i-1..m-1 for the rest.
inline std::vector<Time> sorted_desc(std::span<const Time> loads) {
  std::vector<Time> t(loads.begin(), loads.end());
  std::sort(t.begin(), t.end(), std::greater<>());
  return t;
}

inline Rational lower_component(std::span<const Time> t, std::size_t level, const JobOrder& order, std::size_t i,
                                std::span<const Rational> upper_prefix) {
  const std::size_t m = t.size();
  const std::size_t n = order.size();
  Rational reserve = 0;
  for (std::size_t q = 0; q + 1 < i; ++q) reserve += upper_prefix[q] - t[q];

  // h: smallest index with p_{l+1} + ... + p_h >= reserve
  std::size_t h = level;
  if (reserve > 0) {
    const Time need = order.prefix[level] + reserve.ceil();
    auto it = std::lower_bound(order.prefix.begin() + static_cast<std::ptrdiff_t>(level), order.prefix.end(), need);
    h = it == order.prefix.end() ? n : static_cast<std::size_t>(it - order.prefix.begin());
  }
  const Time lambda = order.remaining(h);
  const Time tau = t[i - 1];
  const Time t_min = t[m - 1];
  Time tail = 0;
  for (std::size_t q = i - 1; q < m; ++q) tail += t[q];

  Rational a = t_min + order.next(h);
  Rational spread = Rational(tail + lambda, static_cast<Time>(m - i + 1));
  Rational b = std::max(Rational(tau), spread);
  return std::max(a, b);
}

inline Rational upper_component(std::span<const Time> t, std::size_t level, const JobOrder& order, std::size_t i,
                                std::span<const Rational> lower_prefix, const CompletionVector* incumbent) {
  Rational lambda = order.remaining(level);
  for (std::size_t q = 0; q + 1 < i; ++q) lambda -= lower_prefix[q] - t[q];

  // water-fill lambda onto the least loaded machines of the tail
  std::vector<Time> rest(t.begin() + static_cast<std::ptrdiff_t>(i - 1), t.end());
  std::sort(rest.begin(), rest.end());
  Rational level_value = 0;
  Time acc = 0;
  for (std::size_t mu = 1; mu <= rest.size(); ++mu) {
    acc += rest[mu - 1];
    level_value = (Rational(acc) + lambda) / Rational(static_cast<Time>(mu));
    if (mu == rest.size() || level_value <= rest[mu]) break;
  }
  Rational packed = std::max(level_value + order.next(level), Rational(rest.back()));
  if (incumbent) packed = std::min(packed, Rational((*incumbent)[i - 1]));
  return packed;
}

}  // namespace detail

/// L_i at a node given U_1..U_{i-1}; i is 1-based.
inline Rational vectorial_lower_component(const SearchNode& node, const JobOrder& order, std::size_t i,
                                          std::span<const Rational> upper_prefix) {
  return detail::lower_component(detail::sorted_desc(node.loads), node.level, order, i, upper_prefix);
}

/// U_i at a node given L_1..L_{i-1}; capped by the incumbent when one is given.
inline Rational vectorial_upper_component(const SearchNode& node, const JobOrder& order, std::size_t i,
                                          std::span<const Rational> lower_prefix,
                                          const CompletionVector* incumbent = nullptr) {
  return detail::upper_component(detail::sorted_desc(node.loads), node.level, order, i, lower_prefix, incumbent);
}

/// L_1, U_1, L_2, U_2, ... in that order.
inline VectorialBounds compute_bounds(const SearchNode& node, const JobOrder& order,
                                      const CompletionVector* incumbent = nullptr) {
  const auto t = detail::sorted_desc(node.loads);
  const std::size_t m = t.size();
  VectorialBounds b;
  b.lower.reserve(m);
  b.upper.reserve(m);
  for (std::size_t i = 1; i <= m; ++i) {
    b.lower.push_back(detail::lower_component(t, node.level, order, i, b.upper));
    b.upper.push_back(detail::upper_component(t, node.level, order, i, b.lower, incumbent));
  }
  return b;
}

/// Lex comparison of a rational vector with an integer one of equal length.
inline std::strong_ordering lex_compare(std::span<const Rational> a, const CompletionVector& b) {
  if (a.size() != b.size()) throw DimensionError("bound and completion vector lengths differ");
  for (std::size_t q = 0; q < a.size(); ++q)
    if (auto c = a[q] <=> Rational(b[q]); c != 0) return c;
  return std::strong_ordering::equal;
}

/// True when the subtree cannot hold anything lex-smaller than the incumbent.
inline bool fathom_test(std::span<const Rational> lower, const CompletionVector* incumbent) {
  if (!incumbent) return false;
  return lex_compare(lower, *incumbent) != std::strong_ordering::less;
}

}  // namespace lexsched
