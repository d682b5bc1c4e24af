#include <gtest/gtest.h>

#include <random>

#include "lexsched/recovery.hpp"
#include "oracles.hpp"

using namespace lexsched;

namespace {

Schedule lexopt_of(const Instance& inst) { return solve_lexopt(inst).schedule; }

Time opt_of(const Instance& inst) { return oracle::min_makespan(inst.machines(), inst.times()); }

// Every single perturbation applicable to a schedule, with one representative
// new value per direction.
std::vector<Perturbation> single_perturbations(const Instance& inst) {
  std::vector<Perturbation> out;
  for (const auto& job : inst.jobs()) {
    if (job.p >= 2) {
      out.push_back(Perturbation::reduce(job.id, 1));
      out.push_back(Perturbation::reduce(job.id, job.p - 1));
    }
    out.push_back(Perturbation::augment(job.id, job.p + 1));
    out.push_back(Perturbation::augment(job.id, 3 * job.p));
    out.push_back(Perturbation::cancel(job.id));
  }
  for (Time p : {Time{1}, inst.total_processing() / 2 + 1, inst.total_processing()})
    out.push_back(Perturbation::arrive("new", std::max<Time>(1, p)));
  if (inst.machines() > 1)
    for (int i = 0; i < inst.machines(); ++i) out.push_back(Perturbation::machine_fail(i));
  out.push_back(Perturbation::machine_activate());
  return out;
}

}  // namespace

TEST(Perturbations, ApplyExamples) {
  auto one = Instance::from_times(2, {4});
  auto sc = apply_perturbations(Schedule(one, {0}), {Perturbation::cancel("j1")});
  EXPECT_EQ(sc.next()->size(), 0u);
  EXPECT_EQ(sc.cancelled, std::vector<std::string>{"j1"});

  Instance abc(2, {{"a", 3}, {"b", 2}, {"c", 4}});
  auto failed = apply_perturbations(Schedule(abc, {0, 0, 1}), {Perturbation::machine_fail(0)});
  auto split = classify_decisions(failed);
  EXPECT_EQ(split.free, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(split.binding.size(), 1u);
  EXPECT_EQ(split.binding[0], (std::pair<std::string, int>{"c", 0}));  // old M2 is now the first machine

  auto ten = Instance::from_times(2, {10, 3});
  auto reduced = apply_perturbations(Schedule(ten, {0, 1}), {Perturbation::reduce("j1", 5)});
  EXPECT_EQ(reduced.next()->p(0), 5);
  EXPECT_EQ(*tightest_boundary(reduced, 0), Rational(2));
}

TEST(Perturbations, Rejections) {
  auto inst = Instance::from_times(2, {5, 3});
  Schedule s(inst, {0, 1});
  EXPECT_THROW(apply_perturbations(s, {Perturbation::cancel("zz")}), ValidationError);
  EXPECT_THROW(apply_perturbations(s, {Perturbation::reduce("j1", 5)}), ValidationError);
  EXPECT_THROW(apply_perturbations(s, {Perturbation::reduce("j1", 0)}), ValidationError);
  EXPECT_THROW(apply_perturbations(s, {Perturbation::augment("j1", 4)}), ValidationError);
  EXPECT_THROW(apply_perturbations(s, {Perturbation::arrive("j2", 4)}), ValidationError);
  EXPECT_THROW(apply_perturbations(s, {Perturbation::machine_fail(2)}), ValidationError);
  EXPECT_THROW(apply_perturbations(s, {Perturbation::machine_fail(0), Perturbation::machine_fail(0)}),
               ValidationError);
  // a cancelled id cannot come back as an arrival
  EXPECT_THROW(apply_perturbations(s, {Perturbation::cancel("j1"), Perturbation::arrive("j1", 2)}), ValidationError);

  auto gone = apply_perturbations(s, {Perturbation::machine_fail(0), Perturbation::machine_fail(1)});
  EXPECT_EQ(gone.machines(), 0);
  EXPECT_THROW(binding_recovery(gone), InfeasibleError);
}

TEST(Perturbations, ActivationLabelsFollowSurvivors) {
  auto inst = Instance::from_times(3, {1, 2, 3});
  auto sc = apply_perturbations(Schedule(inst, {0, 1, 2}),
                                {Perturbation::machine_activate(), Perturbation::machine_fail(1),
                                 Perturbation::machine_activate()});
  EXPECT_EQ(sc.machine_labels, (std::vector<int>{0, 2, 3, 4}));
  EXPECT_EQ(sc.home, (std::vector<int>{0, -1, 1}));
}

TEST(Classify, Examples) {
  auto inst = Instance::from_times(2, {3, 2, 1});
  Schedule s(inst, {0, 1, 1});
  auto none = classify_decisions(apply_perturbations(s, {}));
  EXPECT_EQ(none.binding.size(), 3u);
  EXPECT_TRUE(none.free.empty());
  auto arrival = classify_decisions(apply_perturbations(s, {Perturbation::arrive("x", 4)}));
  EXPECT_EQ(arrival.binding.size(), 3u);
  EXPECT_EQ(arrival.free, std::vector<std::string>{"x"});
}

TEST(BindingRecovery, Examples) {
  auto h = Instance::from_times(2, {1, 1, 1, 1, 4});
  auto sc = apply_perturbations(Schedule(h, {0, 0, 0, 0, 1}), {Perturbation::cancel("j5")});
  auto rec = binding_recovery(sc);
  EXPECT_EQ(rec.loads(), (std::vector<Time>{4, 0}));
  EXPECT_EQ(opt_of(*sc.next()), 2);
  EXPECT_EQ(verify_guarantee(rec, 2, Rational(100)).ratio, Rational(2));

  auto twos = Instance::from_times(2, {2, 2});
  auto arr = apply_perturbations(lexopt_of(twos), {Perturbation::arrive("x", 3)});
  auto r2 = binding_recovery(arr);
  EXPECT_EQ(r2.loads(), (std::vector<Time>{5, 2}));
  EXPECT_EQ(opt_of(*arr.next()), 4);
  EXPECT_EQ(verify_guarantee(r2, 4, Rational(2)).ratio, Rational(5, 4));

  auto inst = Instance::from_times(2, {3, 2, 1});
  Schedule s(inst, {0, 1, 1});
  auto act = binding_recovery(apply_perturbations(s, {Perturbation::machine_activate()}));
  EXPECT_EQ(act.assignment(), s.assignment());
  EXPECT_EQ(act.loads(), (std::vector<Time>{3, 3, 0}));
}

TEST(BindingRecovery, NeverMovesBindingJobs) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 2 + static_cast<int>(rng() % 3);
    auto inst = Instance::from_times(m, oracle::random_times(rng, 6, 1, 20));
    auto init = lexopt_of(inst);
    std::vector<Perturbation> ps{Perturbation::arrive("x", 1 + static_cast<Time>(rng() % 20)),
                                 Perturbation::machine_fail(static_cast<int>(rng() % static_cast<unsigned>(m))),
                                 Perturbation::machine_activate()};
    auto sc = apply_perturbations(init, ps);
    auto rec = binding_recovery(sc);
    for (const auto& [id, machine] : classify_decisions(sc).binding)
      EXPECT_EQ(rec.machine_of(sc.next()->index_of(id)), machine);
  }
}

TEST(BindingRecovery, SinglePerturbationWithinTwo) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 60; ++trial) {
    int m = 2 + static_cast<int>(rng() % 3);
    auto inst = Instance::from_times(m, oracle::random_times(rng, 1 + rng() % 6, 1, 15));
    auto init = lexopt_of(inst);
    for (const auto& pt : single_perturbations(inst)) {
      auto sc = apply_perturbations(init, {pt});
      const Time c = makespan(binding_recovery(sc));
      const Time opt = opt_of(*sc.next());
      EXPECT_LE(c, 2 * opt) << to_string(pt.kind) << " trial " << trial;
    }
  }
}

TEST(FlexibleRecovery, Examples) {
  auto twos = Instance::from_times(2, {2, 2});
  auto arr = apply_perturbations(lexopt_of(twos), {Perturbation::arrive("x", 3)});
  auto g1 = flexible_recovery(arr, 1);
  EXPECT_EQ(g1.status, Status::optimal);
  EXPECT_EQ(makespan(g1.schedule), 4);
  EXPECT_EQ(g1.migrations, 1u);
  EXPECT_EQ(makespan(flexible_recovery(arr, 0).schedule), 5);
}

TEST(FlexibleRecovery, MatchesMigrationOracle) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 80; ++trial) {
    int m = 2 + static_cast<int>(rng() % 2);
    auto inst = Instance::from_times(m, oracle::random_times(rng, 5, 1, 12));
    auto init = lexopt_of(inst);
    std::vector<Perturbation> ps{Perturbation::arrive("x", 1 + static_cast<Time>(rng() % 15)),
                                 Perturbation::augment("j1", inst.p(0) + 1 + static_cast<Time>(rng() % 10))};
    if (rng() % 2) ps.push_back(Perturbation::machine_fail(static_cast<int>(rng() % static_cast<unsigned>(m))));
    auto sc = apply_perturbations(init, ps);
    const auto& next = *sc.next();
    const Time binding = makespan(binding_recovery(sc));
    Time previous = binding;
    for (std::size_t g : {0u, 1u, 2u, 6u}) {
      auto r = flexible_recovery(sc, g);
      ASSERT_EQ(r.status, Status::optimal);
      const Time c = makespan(r.schedule);
      EXPECT_EQ(c, oracle::min_makespan_with_moves(next.machines(), next.times(), sc.home, g)) << "g=" << g;
      EXPECT_LE(c, previous);
      EXPECT_LE(r.migrations, g);
      previous = c;
    }
    EXPECT_EQ(previous, opt_of(next));
  }
}

TEST(FlexibleRecovery, NodeLimitKeepsSeed) {
  std::mt19937_64 rng(83);
  auto inst = Instance::from_times(3, oracle::random_times(rng, 12, 10, 99));
  auto sc = apply_perturbations(lexopt_of(inst), {Perturbation::machine_fail(0)});
  Limits tight;
  tight.nodes = 3;
  auto r = flexible_recovery(sc, 12, tight);
  EXPECT_EQ(r.status, Status::timeout);
  EXPECT_LE(makespan(r.schedule), makespan(binding_recovery(sc)));
}

TEST(Characterize, Examples) {
  auto inst = Instance::from_times(2, {10, 10});
  Schedule s(inst, {0, 1});
  auto sc = apply_perturbations(s, {Perturbation::augment("j1", 12), Perturbation::reduce("j2", 5)});
  auto ch = characterize_uncertainty(sc, Rational(3, 2));
  EXPECT_EQ(ch.k, 1u);
  EXPECT_EQ(ch.k_r, 1u);
  EXPECT_EQ(ch.k_a, 0u);
  EXPECT_EQ(ch.unstable, std::vector<std::string>{"j2"});
  EXPECT_EQ(ch.max_p, 12);

  auto none = characterize_uncertainty(apply_perturbations(s, {}), Rational(2));
  EXPECT_EQ(none.k, 0u);
  EXPECT_EQ(none.delta, 0);
  EXPECT_EQ(none.f_r, Rational(1));
  EXPECT_EQ(none.f_a, Rational(1));

  auto act = characterize_uncertainty(apply_perturbations(s, {Perturbation::machine_activate()}), Rational(2));
  EXPECT_EQ(act.delta, 1);
  EXPECT_EQ(act.delta_plus, 1);

  auto fail = characterize_uncertainty(apply_perturbations(s, {Perturbation::machine_fail(1)}), Rational(2));
  EXPECT_EQ(fail.delta, -1);
  EXPECT_EQ(fail.delta_plus, 0);

  auto many = characterize_uncertainty(
      apply_perturbations(s, {Perturbation::cancel("j1"), Perturbation::arrive("x", 1), Perturbation::arrive("y", 1)}),
      Rational(2));
  EXPECT_EQ(many.k_r, 1u);
  EXPECT_EQ(many.k_a, 2u);
  EXPECT_TRUE(many.k_at_least_m);
  EXPECT_THROW(characterize_uncertainty(sc, Rational(1, 2)), ValidationError);
}

TEST(Characterize, TightestBoundary) {
  auto inst = Instance::from_times(3, {10, 10, 10});
  Schedule s(inst, {0, 1, 2});
  auto sc = apply_perturbations(s, {Perturbation::augment("j1", 40), Perturbation::reduce("j2", 5),
                                    Perturbation::augment("j3", 12)});
  EXPECT_EQ(*tightest_boundary(sc, 0), Rational(4));
  EXPECT_EQ(*tightest_boundary(sc, 1), Rational(2));
  EXPECT_EQ(*tightest_boundary(sc, 2), Rational(6, 5));
  EXPECT_EQ(*tightest_boundary(sc, 3), Rational(1));
  for (std::size_t k = 0; k <= 3; ++k) EXPECT_LE(characterize_uncertainty(sc, *tightest_boundary(sc, k)).k, k);

  auto cancelled = apply_perturbations(s, {Perturbation::cancel("j1")});
  EXPECT_FALSE(tightest_boundary(cancelled, 0).has_value());
  EXPECT_EQ(*tightest_boundary(cancelled, 1), Rational(1));
}

TEST(Guarantee, Examples) {
  UncertaintyCharacterization ch;
  ch.f_r = Rational(2);
  ch.k_r = 1;
  EXPECT_EQ(guarantee_bound(ch, 4).product, Rational(8));

  EXPECT_EQ(guarantee_bound(UncertaintyCharacterization{}, 4).product, Rational(2));

  UncertaintyCharacterization aug;
  aug.f_a = Rational(2);
  aug.k_a = 3;
  auto g = guarantee_bound(aug, 10);
  EXPECT_EQ(g.product, Rational(10));
  EXPECT_EQ(g.augmentations, Rational(5));
  EXPECT_EQ(g.reductions, Rational(2));

  UncertaintyCharacterization act;
  act.delta_plus = 5;
  EXPECT_EQ(guarantee_bound(act, 4).activations, Rational(3));

  UncertaintyCharacterization bad;
  bad.k_r = 4;
  EXPECT_THROW(guarantee_bound(bad, 4), ValidationError);
}

TEST(Guarantee, VerifyExamples) {
  auto inst = Instance::from_times(2, {3, 2, 1});
  auto init = lexopt_of(inst);
  auto sc = apply_perturbations(init, {});
  auto check = verify_guarantee(sc, binding_recovery(sc), opt_of(*sc.next()), Rational(2));
  EXPECT_EQ(check.ratio, Rational(1));
  EXPECT_TRUE(check.holds);

  auto empty = apply_perturbations(Schedule(Instance::from_times(2, {4}), {0}), {Perturbation::cancel("j1")});
  auto zero = verify_guarantee(binding_recovery(empty), 0, Rational(2));
  EXPECT_EQ(zero.ratio, Rational(1));
  EXPECT_FALSE(zero.degenerate);
  auto degenerate = verify_guarantee(Schedule(Instance::from_times(1, {1}), {0}), 0, Rational(2));
  EXPECT_TRUE(degenerate.degenerate);
  EXPECT_FALSE(degenerate.holds);
}

TEST(Properties, FewerMachinesAtMostDouble) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 200; ++trial) {
    int m = 2 + static_cast<int>(rng() % 3);
    auto p = oracle::random_times(rng, 1 + rng() % 7, 1, 30);
    const Time full = oracle::min_makespan(m, p);
    EXPECT_LE(oracle::min_makespan(m - 1, p), 2 * full);
    for (int l = 1; l < m; ++l) {
      const Time factor = 1 + (l + (m - l) - 1) / (m - l);
      EXPECT_LE(oracle::min_makespan(m - l, p), factor * full);
    }
  }
}

TEST(Properties, LexOptSubSchedulesAreOptimal) {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 200; ++trial) {
    int m = 2 + static_cast<int>(rng() % 3);
    auto p = oracle::random_times(rng, 1 + rng() % 7, 1, 30);
    auto s = lexopt_of(Instance::from_times(m, p));
    auto loads = s.loads();
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      std::vector<Time> sub;
      Time top = 0;
      int count = 0;
      for (int i = 0; i < m; ++i) {
        if (!(mask >> i & 1u)) continue;
        ++count;
        top = std::max(top, loads[static_cast<std::size_t>(i)]);
        for (std::size_t j = 0; j < p.size(); ++j)
          if (s.machine_of(j) == i) sub.push_back(p[j]);
      }
      EXPECT_EQ(top, oracle::min_makespan(count, sub));
    }
  }
}

TEST(Properties, ScalingWithinFactorBoundsOptimum) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    int m = 2 + static_cast<int>(rng() % 3);
    auto p = oracle::random_times(rng, 1 + rng() % 7, 1, 20);
    const Rational f(static_cast<std::int64_t>(2 + rng() % 5), 2);
    auto p_hat = p;
    for (auto& x : p_hat) {
      const Time cap = (f * Rational(x)).floor();
      x += static_cast<Time>(rng() % static_cast<std::uint64_t>(cap - x + 1));
    }
    const Time c = oracle::min_makespan(m, p);
    const Time c_hat = oracle::min_makespan(m, p_hat);
    EXPECT_LE(c, c_hat);
    EXPECT_LE(Rational(c_hat), f * Rational(c));
  }
}
