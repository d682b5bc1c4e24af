#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lexsched/core.hpp"
#include "lexsched/rational.hpp"
#include "lexsched/recovery.hpp"

namespace lexsched {

/// Portable random source. std::mt19937_64 is fully specified by the
/// standard; the distributions on top of it are written out here because the
/// standard library ones are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi], unbiased by rejection.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("empty integer range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == UINT64_MAX) return static_cast<std::int64_t>(next());
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Box-Muller, one value per call.
  double normal(double mean, double sd) {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream number `index` derived from `seed`.
inline Rng stream(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix64(seed ^ splitmix64(index))); }

enum class Distribution { uniform, normal, symmetric };

inline const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::uniform: return "uniform";
    case Distribution::normal: return "normal";
    case Distribution::symmetric: return "symmetric";
  }
  return "";
}

inline Distribution parse_distribution(const std::string& s) {
  if (s == "uniform") return Distribution::uniform;
  if (s == "normal") return Distribution::normal;
  if (s == "symmetric" || s == "symmetric-normal") return Distribution::symmetric;
  throw ValidationError("unknown distribution '" + s + "'");
}

/// One processing time. Normal samples are clamped to [0, 2q], rounded half
/// up, reflected for the symmetric variant, and finally raised to at least 1.
inline Time draw_time(Rng& rng, Distribution dist, Time q) {
  if (dist == Distribution::uniform) return rng.uniform(1, q);
  const double qd = static_cast<double>(q);
  const double x = std::clamp(rng.normal(qd, qd / 3.0), 0.0, 2.0 * qd);
  Time p = static_cast<Time>(std::floor(x + 0.5));
  if (dist == Distribution::symmetric) p = p <= q ? q - p : 3 * q - p;
  return std::max<Time>(p, 1);
}

struct GenSpec {
  enum class Kind { wellformed, degenerate };
  Kind kind = Kind::wellformed;
  int m = 3;
  std::size_t n = 20;
  Time q = 100;  // wellformed only; degenerate computes it
  Distribution dist = Distribution::uniform;
  std::uint64_t seed = 1;
};

inline Instance gen_wellformed(int m, std::size_t n, Time q, Distribution dist, std::uint64_t seed) {
  if (q < 1) throw ValidationError("q must be at least 1");
  Rng rng = stream(seed, 0);
  std::vector<Time> p(n);
  for (auto& x : p) x = draw_time(rng, dist, q);
  return Instance::from_times(m, p);
}

/// Largest e with 2^(e(m-1)) <= m^n, i.e. floor(n log2(m) / (m-1)), exact.
inline int degenerate_exponent(int m, std::size_t n) {
  if (m < 2) throw ValidationError("degenerate instances need m >= 2");
  using boost::multiprecision::cpp_int;
  cpp_int power = 1;
  for (std::size_t j = 0; j < n; ++j) power *= m;
  int e = 0;
  while (cpp_int(1) << ((e + 1) * (m - 1)) <= power) ++e;
  return e;
}

inline Time degenerate_q(int m, std::size_t n) {
  const int e = degenerate_exponent(m, n);
  if (e > 31) throw SizeError("degenerate q = 2^" + std::to_string(e) + " exceeds 2^31");
  return Time{1} << e;
}

inline Instance gen_degenerate(int m, std::size_t n, Distribution dist, std::uint64_t seed) {
  return gen_wellformed(m, n, degenerate_q(m, n), dist, seed);
}

inline Instance generate(const GenSpec& spec) {
  return spec.kind == GenSpec::Kind::wellformed ? gen_wellformed(spec.m, spec.n, spec.q, spec.dist, spec.seed)
                                                : gen_degenerate(spec.m, spec.n, spec.dist, spec.seed);
}

inline std::size_t ceil_fifth(std::size_t x) { return (x + 4) / 5; }

struct PerturbSpec {
  std::uint64_t seed = 1;
  std::optional<std::size_t> dn;  // default ceil(0.2 n)
  std::optional<std::size_t> dm;  // default ceil(0.2 m)
  std::optional<Time> q;          // default: largest p of the instance
};

/// d_n job disturbances followed by d_m machine disturbances. Each one
/// draws from its own stream, so the k-th perturbation depends only on the
/// seed, k and the instance state before it.
inline std::vector<Perturbation> gen_perturbations(const Instance& inst, const PerturbSpec& spec) {
  const std::size_t dn = spec.dn.value_or(ceil_fifth(inst.size()));
  const std::size_t dm = spec.dm.value_or(ceil_fifth(static_cast<std::size_t>(inst.machines())));
  Time q = 1;
  for (const auto& job : inst.jobs()) q = std::max(q, job.p);
  if (spec.q) q = *spec.q;
  if (q < 1) throw ValidationError("q must be at least 1");

  std::vector<Job> jobs = inst.jobs();
  std::set<std::string> seen;
  for (const auto& job : jobs) seen.insert(job.id);
  std::vector<int> alive(static_cast<std::size_t>(inst.machines()));
  std::iota(alive.begin(), alive.end(), 0);
  int next_label = inst.machines();
  std::size_t arrivals = 0;

  std::vector<Perturbation> out;
  for (std::size_t d = 0; d < dn; ++d) {
    Rng rng = stream(spec.seed, out.size() + 1);
    while (true) {
      const auto kind = rng.uniform(0, 3);
      if (kind == 0) {
        std::string id;
        do id = "a" + std::to_string(++arrivals);
        while (seen.count(id));
        seen.insert(id);
        const Time p = rng.uniform(1, q);
        jobs.push_back({id, p});
        out.push_back(Perturbation::arrive(id, p));
        break;
      }
      if (jobs.empty()) continue;
      const auto j = static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(jobs.size()) - 1));
      if (kind == 1) {
        out.push_back(Perturbation::cancel(jobs[j].id));
        jobs.erase(jobs.begin() + static_cast<std::ptrdiff_t>(j));
        break;
      }
      if (kind == 2) {
        if (jobs[j].p >= 2 * q) continue;
        jobs[j].p = rng.uniform(jobs[j].p + 1, 2 * q);
        out.push_back(Perturbation::augment(jobs[j].id, jobs[j].p));
        break;
      }
      if (jobs[j].p < 2) continue;
      jobs[j].p = rng.uniform(1, jobs[j].p - 1);
      out.push_back(Perturbation::reduce(jobs[j].id, jobs[j].p));
      break;
    }
  }
  for (std::size_t d = 0; d < dm; ++d) {
    Rng rng = stream(spec.seed, out.size() + 1);
    while (true) {
      if (rng.uniform(0, 1) == 0) {
        alive.push_back(next_label++);
        out.push_back(Perturbation::machine_activate());
        break;
      }
      if (alive.size() <= 1) continue;  // never fail the last machine
      const auto i = static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(alive.size()) - 1));
      out.push_back(Perturbation::machine_fail(alive[i]));
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  return out;
}

struct Fixture {
  std::string family;
  RecoveryScenario scenario;
  Rational closed_form;  // published binding-recovery ratio for the family
};

struct FixtureParams {
  int m = 2;
  int k = 1;
  Time p = 1;
  Time f = 2;
  Time big_f = 12;              // F, augmentation family
  std::string variant = "cancel";  // single-tight: cancel or activate
};

namespace detail {

inline Schedule grouped(int m, const std::vector<std::pair<Time, int>>& blocks) {
  std::vector<Time> p;
  std::vector<int> a;
  for (const auto& [time, machine] : blocks) {
    p.push_back(time);
    a.push_back(machine);
  }
  return {Instance::from_times(m, p), a};
}

inline std::string jid(std::size_t index) { return "j" + std::to_string(index + 1); }

}  // namespace detail

/// Adversarial recovery scenarios with known binding-recovery ratios.
///   arbitrary-opt k*m jobs of p on M1, one job of k*m*p on M2; the big job is cancelled
///   single-tight  m+1 jobs of p, two on M1; the last job is cancelled or a machine activates
///   reduce-cancel (m-k)*m jobs of f and k jobs of m*f, balanced; reductions and k cancellations
///   augment       m^2 unit jobs, m per machine; M1's jobs grow to F (k of them) and f
///   activation    m*(m+k) unit jobs, m+k per machine; k machines activate
inline Fixture gen_fixture(const std::string& family, const FixtureParams& prm) {
  const int m = prm.m;
  if (m < 1) throw ValidationError("fixture needs m >= 1");
  std::vector<std::pair<Time, int>> blocks;
  std::vector<Perturbation> ps;
  Fixture fx;
  fx.family = family;

  if (family == "arbitrary-opt") {
    if (m < 2 || prm.k < 1 || prm.p < 1) throw ValidationError("arbitrary-opt needs m >= 2, k >= 1, p >= 1");
    const auto small = static_cast<std::size_t>(prm.k) * static_cast<std::size_t>(m);
    for (std::size_t j = 0; j < small; ++j) blocks.emplace_back(prm.p, 0);
    blocks.emplace_back(static_cast<Time>(small) * prm.p, 1);
    ps.push_back(Perturbation::cancel(detail::jid(small)));
    fx.closed_form = Rational(m);
  } else if (family == "single-tight") {
    if (m < 2 || prm.p < 1) throw ValidationError("single-tight needs m >= 2, p >= 1");
    blocks.emplace_back(prm.p, 0);
    for (int i = 0; i < m; ++i) blocks.emplace_back(prm.p, i);
    if (prm.variant == "cancel")
      ps.push_back(Perturbation::cancel(detail::jid(static_cast<std::size_t>(m))));
    else if (prm.variant == "activate")
      ps.push_back(Perturbation::machine_activate());
    else
      throw ValidationError("single-tight variant must be cancel or activate");
    fx.closed_form = Rational(2);
  } else if (family == "reduce-cancel") {
    if (prm.k < 0 || prm.k >= m || prm.f < 2) throw ValidationError("reduce-cancel needs 0 <= k < m and f >= 2");
    std::size_t index = 0;
    for (int i = 0; i < m - prm.k; ++i)
      for (int c = 0; c < m; ++c) {
        blocks.emplace_back(prm.f, i);
        if (i > 0) ps.push_back(Perturbation::reduce(detail::jid(index), 1));
        ++index;
      }
    for (int i = m - prm.k; i < m; ++i) {
      blocks.emplace_back(static_cast<Time>(m) * prm.f, i);
      ps.push_back(Perturbation::cancel(detail::jid(index++)));
    }
    fx.closed_form = Rational(static_cast<Time>(m) * prm.f, prm.f + m - prm.k - 1);
  } else if (family == "augment") {
    if (prm.k < 0 || prm.k > m || prm.f < 2 || prm.big_f <= prm.f)
      throw ValidationError("augment needs 0 <= k <= m and 2 <= f < F");
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < m; ++c) blocks.emplace_back(1, i);
    for (int c = 0; c < m; ++c)
      ps.push_back(Perturbation::augment(detail::jid(static_cast<std::size_t>(c)), c < prm.k ? prm.big_f : prm.f));
    fx.closed_form = Rational(prm.k * prm.big_f, prm.big_f + prm.k) +
                     Rational((m - prm.k) * prm.f, prm.f + m + prm.k);
  } else if (family == "activation") {
    if (prm.k < 1) throw ValidationError("activation needs k >= 1");
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < m + prm.k; ++c) blocks.emplace_back(1, i);
    for (int a = 0; a < prm.k; ++a) ps.push_back(Perturbation::machine_activate());
    fx.closed_form = Rational(m + prm.k, m);
  } else {
    throw ValidationError("unknown fixture family '" + family + "'");
  }
  fx.scenario = apply_perturbations(detail::grouped(m, blocks), std::move(ps));
  return fx;
}

}  // namespace lexsched
