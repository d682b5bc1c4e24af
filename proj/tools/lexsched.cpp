#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lexsched/lexsched.hpp"

namespace fs = std::filesystem;
using namespace lexsched;
using io::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kTimeout = 2, kValidation = 3, kIo = 4 };

// Upper limit on worker threads from LEXSCHED_THREADS, if set.
std::optional<unsigned> thread_cap() {
  const char* env = std::getenv("LEXSCHED_THREADS");
  if (!env || !*env) return std::nullopt;
  unsigned v = 0;
  std::string_view s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0)
    throw ValidationError("LEXSCHED_THREADS must be a positive integer, got '" + std::string(s) + "'");
  return v;
}

unsigned capped(unsigned requested) {
  auto cap = thread_cap();
  return std::max(1u, cap ? std::min(requested, *cap) : requested);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_file(out, text);
}

void emit(const json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

struct LimitOpts {
  std::optional<long long> time_ms;
  std::optional<std::uint64_t> nodes;
  unsigned threads = 1;
  bool no_bounds = false;
  bool no_heuristic = false;

  void add(CLI::App* cmd, bool search_flags) {
    cmd->add_option("--time-limit", time_ms, "Wall-clock limit in milliseconds")->check(CLI::PositiveNumber);
    cmd->add_option("--node-limit", nodes, "Search node limit")->check(CLI::PositiveNumber);
    if (!search_flags) return;
    cmd->add_option("--threads", threads, "Worker threads (capped by LEXSCHED_THREADS)")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-bounds", no_bounds, "Disable vectorial-bound fathoming");
    cmd->add_flag("--no-heuristic", no_heuristic, "Disable the LPT warm start");
  }

  [[nodiscard]] Limits limits() const {
    Limits l;
    if (time_ms) l.time = std::chrono::milliseconds(*time_ms);
    l.nodes = nodes;
    l.threads = capped(threads);
    l.use_bounds = !no_bounds;
    l.use_heuristic = !no_heuristic;
    return l;
  }
};

// ---- gen -------------------------------------------------------------------

struct GenOpts {
  std::string spec, perturb, out;
  std::string kind = "wellformed", dist = "uniform";
  std::optional<int> m;
  std::optional<std::size_t> n, dn, dm;
  std::optional<Time> q;
  std::uint64_t seed = 1;
};

int cmd_gen(const GenOpts& o) {
  if (!o.perturb.empty()) {
    auto inst = io::instance_from_json(io::load(o.perturb));
    PerturbSpec ps;
    if (!o.spec.empty()) {
      ps = io::perturb_spec_from_json(io::load(o.spec));
    } else {
      ps.seed = o.seed;
      ps.dn = o.dn;
      ps.dm = o.dm;
      ps.q = o.q;
    }
    auto init = solve_lexopt(inst);
    auto sc = apply_perturbations(init.schedule, gen_perturbations(inst, ps));
    emit(io::to_json(sc), o.out);
    return kOk;
  }
  GenSpec g;
  if (!o.spec.empty()) {
    g = io::gen_spec_from_json(io::load(o.spec));
  } else {
    if (o.kind == "wellformed")
      g.kind = GenSpec::Kind::wellformed;
    else if (o.kind == "degenerate")
      g.kind = GenSpec::Kind::degenerate;
    else
      throw ValidationError("unknown instance kind '" + o.kind + "'");
    if (!o.m || !o.n) throw ValidationError("gen needs --m and --n (or --spec)");
    if (g.kind == GenSpec::Kind::wellformed && !o.q) throw ValidationError("wellformed instances need --q");
    g.m = *o.m;
    g.n = *o.n;
    if (o.q) g.q = *o.q;
    g.dist = parse_distribution(o.dist);
    g.seed = o.seed;
  }
  emit(io::to_json(generate(g)), o.out);
  return kOk;
}

// ---- solve -----------------------------------------------------------------

struct SolveOpts {
  std::string instance, method = "bnb", out;
  LimitOpts limits;
  std::size_t pool_capacity = 2000;
  unsigned base = 2;
};

int cmd_solve(const SolveOpts& o) {
  auto inst = io::instance_from_json(io::load(o.instance));
  const auto limits = o.limits.limits();
  SolveReport r;
  if (o.method == "bnb")
    r = solve_lexopt(inst, limits);
  else if (o.method == "sequential")
    r = sequential_method(inst, limits);
  else if (o.method == "weighting")
    r = weighting_method(inst, o.base, limits);
  else if (o.method == "highest-rank")
    r = highest_rank_method(inst, o.pool_capacity, limits);
  else
    throw ValidationError("unknown method '" + o.method + "'");
  auto j = io::to_json(r);
  j["instance_id"] = stem(o.instance);
  emit(j, o.out);
  return r.status == Status::optimal ? kOk : kTimeout;
}

// ---- recover ---------------------------------------------------------------

struct RecoverOpts {
  std::string scenario, strategy = "binding", f = "2", out;
  std::optional<std::size_t> g, tightest;
  LimitOpts limits;
  std::uint64_t brute_cap = 1'000'000;
};

int cmd_recover(const RecoverOpts& o) {
  auto sc = io::scenario_from_json(io::load(o.scenario), fs::path(o.scenario).parent_path());
  const auto& next = *sc.next();
  auto limits = o.limits.limits();
  limits.threads = 1;

  io::RecoveryReport rep;
  rep.strategy = o.strategy;
  if (o.strategy == "binding") {
    rep.recovered = binding_recovery(sc);
  } else if (o.strategy == "flexible") {
    auto r = flexible_recovery(sc, o.g.value_or((next.size() + 9) / 10), limits);
    rep.recovered = r.schedule;
    rep.status = r.status;
    rep.migrations = r.migrations;
  } else {
    throw ValidationError("unknown strategy '" + o.strategy + "'");
  }

  if (assignment_count(next.machines(), next.size(), o.brute_cap) <= o.brute_cap) {
    rep.optimum = makespan(brute_force_lexopt(next, o.brute_cap));
  } else {
    auto opt = optimal_makespan(next, limits);
    rep.optimum = std::min(opt.value, makespan(rep.recovered));
    rep.optimum_exact = opt.status == Status::optimal;
  }

  Rational f = Rational::parse(o.f);
  if (o.tightest) {
    auto t = tightest_boundary(sc, *o.tightest);
    if (!t) throw ValidationError("more than " + std::to_string(*o.tightest) + " jobs are cancelled or arrive");
    f = *t;
  }
  rep.uncertainty = characterize_uncertainty(sc, f);
  const int m = sc.init->machines();
  rep.bound_defined = rep.uncertainty.k_r < static_cast<std::size_t>(m);
  const Rational bound = rep.bound_defined ? guarantee_bound(rep.uncertainty, m).product : Rational(0);
  rep.check = verify_guarantee(rep.recovered, rep.optimum, bound);
  if (!rep.bound_defined)
    std::cerr << "warning: " << rep.uncertainty.k_r << " unstable reductions on " << m
              << " machines; no guarantee applies\n";

  emit(io::to_json(rep), o.out);
  return rep.status == Status::optimal && rep.optimum_exact ? kOk : kTimeout;
}

// ---- pool ------------------------------------------------------------------

struct PoolOpts {
  std::string instance, out;
  std::size_t count = 50;
  LimitOpts limits;
};

int cmd_pool(const PoolOpts& o) {
  auto inst = io::instance_from_json(io::load(o.instance));
  auto pool = best_schedules(inst, o.count, o.limits.limits());
  json schedules = json::array();
  std::optional<WeightedValue> lo, hi;
  std::set<WeightedValue> distinct;
  for (const auto& e : pool.entries) {
    const auto w = weighted_value(e.vector);
    lo = lo ? std::min(*lo, w) : w;
    hi = hi ? std::max(*hi, w) : w;
    distinct.insert(w);
    schedules.push_back({{"assignment", io::assignment_json(e.schedule)},
                         {"vector", e.vector.values()},
                         {"weight", w.str()}});
  }
  if (pool.entries.size() < o.count)
    std::cerr << "warning: only " << pool.entries.size() << " of " << o.count
              << " requested schedules exist up to machine symmetry\n";
  json j = {{"instance_id", stem(o.instance)},
            {"requested", o.count},
            {"returned", pool.entries.size()},
            {"complete", pool.complete},
            {"nodes", pool.nodes},
            {"weight_min", lo ? json(lo->str()) : json(nullptr)},
            {"weight_max", hi ? json(hi->str()) : json(nullptr)},
            {"distinct_weights", distinct.size()},
            {"schedules", std::move(schedules)}};
  emit(j, o.out);
  return pool.complete ? kOk : kTimeout;
}

// ---- profile ---------------------------------------------------------------

struct ProfileOpts {
  std::vector<std::string> reports;
  std::string metric = "time", out;
};

int cmd_profile(const ProfileOpts& o) {
  if (o.metric != "time" && o.metric != "weight") throw ValidationError("unknown metric '" + o.metric + "'");
  std::vector<bench::Measurement> data;
  for (const auto& path : o.reports) {
    const auto j = io::load(path);
    bench::Measurement d;
    d.solver = io::detail::field<std::string>(j, "method", "report");
    d.instance = j.contains("instance_id") ? j["instance_id"].get<std::string>() : stem(path);
    const bool ok = io::detail::field<std::string>(j, "status", "report") == "optimal";
    if (o.metric == "time") {
      // timeouts count as failures; times floor at 1 ms
      if (ok) d.value = bench::Ratio(std::max<long long>(1, io::detail::field<long long>(j, "elapsed_ms", "report")));
    } else {
      auto v = io::detail::field<std::vector<Time>>(j, "vector", "report");
      d.value = bench::Ratio(weighted_value(CompletionVector::from_loads(std::move(v))));
    }
    data.push_back(std::move(d));
  }
  emit(bench::profile_csv(bench::profile(data)), o.out);
  return kOk;
}

// ---- scatter ---------------------------------------------------------------

struct ScatterOpts {
  std::vector<std::string> instances;
  std::string strategies = "binding,flexible", out;
  std::size_t pool = 50;
  std::uint64_t seed = 1;
  std::optional<std::size_t> dn, dm, g;
  std::optional<Time> q;
  LimitOpts limits;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
};

int cmd_scatter(const ScatterOpts& o) {
  bench::ScatterConfig cfg;
  cfg.pool = o.pool;
  cfg.perturb = {.seed = o.seed, .dn = o.dn, .dm = o.dm, .q = o.q};
  cfg.g = o.g;
  cfg.limits = o.limits.limits();
  cfg.limits.threads = 1;
  cfg.binding = cfg.flexible = false;
  std::stringstream list(o.strategies);
  for (std::string s; std::getline(list, s, ',');) {
    if (s == "binding")
      cfg.binding = true;
    else if (s == "flexible")
      cfg.flexible = true;
    else
      throw ValidationError("unknown strategy '" + s + "'");
  }

  std::vector<Instance> insts;
  for (const auto& path : o.instances) insts.push_back(io::instance_from_json(io::load(path)));

  std::vector<std::vector<bench::ScatterPoint>> results(insts.size());
  std::vector<std::exception_ptr> errors(insts.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next++) < insts.size();) {
      try {
        results[k] = bench::scatter(stem(o.instances[k]), insts[k], cfg);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::min<unsigned>(capped(o.workers), std::max<std::size_t>(1, insts.size()));
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(work);
  pool.clear();

  std::vector<bench::ScatterPoint> all;
  for (std::size_t k = 0; k < insts.size(); ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    if (results[k].empty()) std::cerr << "warning: no points for " << o.instances[k] << "\n";
    all.insert(all.end(), results[k].begin(), results[k].end());
  }
  emit(bench::scatter_csv(all), o.out);
  for (const auto& p : all)
    if (!p.converged) return kTimeout;
  return kOk;
}

// ---- fixture ---------------------------------------------------------------

struct FixtureOpts {
  std::string family, out;
  FixtureParams prm;
};

int cmd_fixture(const FixtureOpts& o) {
  auto fx = gen_fixture(o.family, o.prm);
  auto j = io::to_json(fx.scenario);
  j["family"] = fx.family;
  j["closed_form"] = fx.closed_form.str();
  emit(j, o.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact lexicographic makespan scheduling and recovery benchmarks"};
  app.require_subcommand(1);
  int code = kOk;

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen", "Generate an instance, or a perturbed scenario with --perturb");
  c_gen->add_option("--spec", gen.spec, "GenSpec (or PerturbSpec with --perturb) JSON file");
  c_gen->add_option("--perturb", gen.perturb, "Instance to perturb; S_init is its LexOpt schedule");
  c_gen->add_option("--kind", gen.kind, "wellformed or degenerate");
  c_gen->add_option("--m", gen.m, "Machines");
  c_gen->add_option("--n", gen.n, "Jobs");
  c_gen->add_option("--q", gen.q, "Scale q");
  c_gen->add_option("--dist", gen.dist, "uniform, normal or symmetric");
  c_gen->add_option("--seed", gen.seed, "Seed");
  c_gen->add_option("--dn", gen.dn, "Job disturbances (default ceil(0.2 n))");
  c_gen->add_option("--dm", gen.dm, "Machine disturbances (default ceil(0.2 m))");
  c_gen->add_option("-o,--output", gen.out, "Output file");
  c_gen->callback([&] { code = cmd_gen(gen); });

  SolveOpts solve;
  auto* c_solve = app.add_subcommand("solve", "Compute a LexOpt schedule");
  c_solve->add_option("instance", solve.instance, "Instance JSON")->required();
  c_solve->add_option("--method", solve.method, "bnb, sequential, weighting or highest-rank");
  c_solve->add_option("--pool-capacity", solve.pool_capacity, "highest-rank pool size")->check(CLI::PositiveNumber);
  c_solve->add_option("--base", solve.base, "weighting base B")->check(CLI::Range(2u, 1u << 20));
  c_solve->add_option("-o,--output", solve.out, "Output file");
  solve.limits.add(c_solve, true);
  c_solve->callback([&] { code = cmd_solve(solve); });

  RecoverOpts rec;
  auto* c_rec = app.add_subcommand("recover", "Recover a perturbed schedule and check the guarantee");
  c_rec->add_option("scenario", rec.scenario, "Scenario JSON")->required();
  c_rec->add_option("--strategy", rec.strategy, "binding or flexible");
  c_rec->add_option("--g", rec.g, "Flexible migration budget (default ceil(0.1 n))");
  auto* f_opt = c_rec->add_option("--f", rec.f, "Stability boundary f, e.g. 2 or 3/2");
  c_rec->add_option("--tightest", rec.tightest, "Use the smallest f leaving at most K unstable jobs")->excludes(f_opt);
  c_rec->add_option("--brute-cap", rec.brute_cap, "Largest m^n solved by enumeration");
  c_rec->add_option("-o,--output", rec.out, "Output file");
  rec.limits.add(c_rec, false);
  c_rec->callback([&] { code = cmd_recover(rec); });

  PoolOpts pool;
  auto* c_pool = app.add_subcommand("pool", "Enumerate the best distinct schedules");
  c_pool->add_option("instance", pool.instance, "Instance JSON")->required();
  c_pool->add_option("--count", pool.count, "Pool size")->check(CLI::PositiveNumber);
  c_pool->add_option("-o,--output", pool.out, "Output file");
  pool.limits.add(c_pool, false);
  c_pool->callback([&] { code = cmd_pool(pool); });

  ProfileOpts prof;
  auto* c_prof = app.add_subcommand("profile", "Performance-profile CSV from solve reports");
  c_prof->add_option("reports", prof.reports, "SolveReport JSON files")->required();
  c_prof->add_option("--metric", prof.metric, "time or weight");
  c_prof->add_option("-o,--output", prof.out, "Output CSV");
  c_prof->callback([&] { code = cmd_profile(prof); });

  ScatterOpts sc;
  auto* c_sc = app.add_subcommand("scatter", "Initial weight vs recovered makespan CSV");
  c_sc->add_option("instances", sc.instances, "Instance JSON files")->required();
  c_sc->add_option("--pool", sc.pool, "Initial schedules per instance")->check(CLI::PositiveNumber);
  c_sc->add_option("--seed", sc.seed, "Perturbation seed");
  c_sc->add_option("--dn", sc.dn, "Job disturbances");
  c_sc->add_option("--dm", sc.dm, "Machine disturbances");
  c_sc->add_option("--q", sc.q, "Perturbation scale");
  c_sc->add_option("--strategies", sc.strategies, "Comma separated: binding,flexible");
  c_sc->add_option("--g", sc.g, "Flexible migration budget");
  c_sc->add_option("--workers", sc.workers, "Parallel instances (capped by LEXSCHED_THREADS)")
      ->check(CLI::PositiveNumber);
  c_sc->add_option("-o,--output", sc.out, "Output CSV");
  sc.limits.add(c_sc, false);
  c_sc->callback([&] { code = cmd_scatter(sc); });

  FixtureOpts fx;
  auto* c_fx = app.add_subcommand("fixture", "Adversarial recovery scenario with a known ratio");
  c_fx->add_option("--family", fx.family, "arbitrary-opt, single-tight, reduce-cancel, augment or activation")->required();
  c_fx->add_option("--m", fx.prm.m, "Machines");
  c_fx->add_option("--k", fx.prm.k, "Family parameter k");
  c_fx->add_option("--p", fx.prm.p, "Base processing time");
  c_fx->add_option("--f", fx.prm.f, "Factor f");
  c_fx->add_option("--F", fx.prm.big_f, "Large augmentation F");
  c_fx->add_option("--variant", fx.prm.variant, "single-tight: cancel or activate");
  c_fx->add_option("-o,--output", fx.out, "Output file");
  c_fx->callback([&] { code = cmd_fixture(fx); });

  try {
    app.parse(argc, argv);
    return code;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const SizeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
