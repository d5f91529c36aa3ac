// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
//
// 1. rounds-to-clean <= 2D+2 on the full campaign
// 2. exact move budgets (R <= 1, U <= 2D per unclean segment, P <= nB,
//    C <= P + n)
// 3. structural invariants, plus negative controls that must trip their
//    intended checker
// 4. pre-clean clock growth <= 2D
// 5. liveness in clean configurations, no deadlock
// 6. simulation equivalence with the synchronous reference
// 7. lazy-mode move/time/round bounds
// 8. observational move-count CSV (informational, never a gate)
//
// The n <= 3 part is exhaustive over the entire configuration space and
// every daemon choice via the state-graph checkers; n in 4..8 is a sampled
// campaign of 500 cells per graph kind and size across three daemons.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "unison/core.hpp"
#include "unison/exhaustive.hpp"
#include "unison/scheduler.hpp"
#include "unison/synchronizer.hpp"
#include "unison/topology.hpp"
#include "unison/verifier.hpp"

using namespace unison;

namespace {

struct Criterion {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void merge(const CheckReport& rep, const std::string& where) {
    if (!rep.all_ok()) fail(where + ": " + rep.first_failure());
  }
};

std::mutex mu;

int worker_count() {
  if (const char* env = std::getenv("UNISON_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

template <typename Fn>
void parallel_for(long count, Fn fn) {
  std::atomic<long> next{0};
  int nthreads = std::min<long>(worker_count(), count);
  std::vector<std::thread> pool;
  for (int i = 0; i < nthreads; ++i)
    pool.emplace_back([&]() {
      for (long j = next.fetch_add(1); j < count; j = next.fetch_add(1)) fn(j);
    });
  for (auto& th : pool) th.join();
}

Configuration random_config(int n, int B, std::mt19937_64& rng) {
  Configuration cfg(n);
  std::uniform_int_distribution<int> pick(0, 3 * B - 1);
  for (int p = 0; p < n; ++p) {
    int d = pick(rng);
    cfg[p] = d < B ? NodeState{Status::E, d - B} : NodeState{Status::C, d - 2 * B};
  }
  return cfg;
}

const CheckItem* find_item(const CheckReport& rep, const std::string& name) {
  for (const auto& it : rep.items)
    if (it.name == name) return &it;
  return nullptr;
}

bool item_ok(const CheckReport& rep, const std::string& name) {
  const CheckItem* it = find_item(rep, name);
  return it && it->ok;
}

struct Observation {
  int n, B, D;
  long moves, rounds;
};

}  // namespace

int main() {
  Criterion c[9];  // 1-based

  // --- exhaustive part: every connected graph with n <= 3, every initial
  // configuration, every daemon choice, via the state-graph checkers
  {
    struct Tiny { const char* name; Topology t; };
    std::vector<Tiny> tiny{{"K1", make_path(1)},
                           {"K2", make_path(2)},
                           {"P3", make_path(3)},
                           {"K3", make_complete(3)}};
    for (const Tiny& g : tiny) {
      Period B = auto_period(g.t);
      int D = g.t.diameter();
      StateSpace sp(g.t, B);
      std::string where = std::string("exhaustive ") + g.name;

      CheckReport rounds = exhaustive_round_bound(sp, 2 * D + 2);
      c[1].merge(rounds, where);

      CheckReport budgets = exhaustive_move_budgets(sp);
      for (const char* name : {"acyclic pre-clean step graph",
                               "per-node R-moves <= 1 (exhaustive)",
                               "per-node P-moves <= nB (exhaustive)",
                               "per-node U-moves <= 2D per unclean segment (exhaustive)",
                               "C-moves <= P-moves + n (exhaustive)"})
        if (!item_ok(budgets, name)) c[2].fail(where + ": " + name);
      if (!item_ok(budgets, "pre-clean clock growth <= 2D (exhaustive)"))
        c[4].fail(where + ": clock growth");

      CheckReport structural = exhaustive_structural(sp);
      for (const char* name : {"classification cross-check", "E-path existence",
                               "hole and interval lemmas", "no non-clean deadlock",
                               "root monotonicity", "almost-clean/clean closure",
                               "root R_C behavior"})
        if (!item_ok(structural, name)) c[3].fail(where + ": " + name);
      if (!item_ok(structural, "liveness in clean configurations") ||
          !item_ok(structural, "no non-clean deadlock"))
        c[5].fail(where + ": liveness");
    }
  }

  // --- sampled campaign: n in 4..8, four graph families, three daemons,
  // 500 (init, seed) cells per (family, n)
  std::vector<Observation> observations;
  {
    struct Cell { std::string kind; int n; int daemon; std::uint64_t seed; };
    std::vector<Cell> cells;
    for (const std::string& kind : {"path", "ring", "star", "random"})
      for (int n = 4; n <= 8; ++n)
        for (int s = 0; s < 500; ++s)
          cells.push_back({kind, n, s % 3,
                           static_cast<std::uint64_t>(s) * 2654435761u + n * 97u +
                               (kind[0] << 4)});

    parallel_for(static_cast<long>(cells.size()), [&](long i) {
      const Cell& cell = cells[i];
      try {
        Topology t = cell.kind == "random"
                         ? make_random_connected(
                               cell.n, std::min(cell.n + 2, cell.n * (cell.n - 1) / 2),
                               cell.seed)
                         : generate_topology(cell.kind, {cell.n}, cell.seed);
        Period B = auto_period(t);
        std::mt19937_64 rng(cell.seed ^ 0x9e3779b97f4a7c15ULL);
        Configuration cfg0 = random_config(t.size(), B.B, rng);
        DaemonStrategy daemon =
            cell.daemon == 0 ? DaemonStrategy::synchronous()
                             : (cell.daemon == 1 ? DaemonStrategy::central_random()
                                                 : DaemonStrategy::distributed_random(0.5));
        Trace tr = run_execution(t, B, cfg0, daemon, PauxMode::greedy(),
                                 {100000, StopOn::Clean}, cell.seed);

        std::string where = cell.kind + " n=" + std::to_string(cell.n) + " seed=" +
                            std::to_string(cell.seed);
        CheckReport replay = check_replay(tr, t, B, paux_always(true));
        CheckReport inv = check_invariants(tr, t, B);
        CheckReport live = check_liveness(tr, t, B);
        CheckReport bounds = check_bounds(tr, t, B);

        MoveCensus mc = move_census(tr, t, B);
        auto boundaries = round_boundaries(tr, t, B, paux_always(true));
        auto fci = first_clean_index(tr, t, B);
        long rounds = -1;
        if (fci)
          rounds = std::count_if(boundaries.begin(), boundaries.end(),
                                 [&](int h) { return h < *fci; });

        std::lock_guard<std::mutex> lock(mu);
        if (!item_ok(bounds, "reaches clean") ||
            !item_ok(bounds, "clean within 2D+2 rounds"))
          c[1].fail(where + ": " + bounds.first_failure());
        for (const char* name : {"segment count <= n", "per-node R-moves <= 1",
                                 "per-node U-moves <= 2D per unclean segment",
                                 "per-node P-moves <= nB",
                                 "total C-moves <= total P-moves + n"})
          if (!item_ok(bounds, name)) c[2].fail(where + ": " + name);
        c[3].merge(replay, where);
        c[3].merge(inv, where);
        if (!item_ok(bounds, "pre-clean clock growth <= 2D"))
          c[4].fail(where + ": clock growth");
        c[5].merge(live, where);
        if (tr.termination != Termination::CleanReachedAndStopped)
          c[5].fail(where + ": termination " + to_string(tr.termination));
        observations.push_back({t.size(), B.B, t.diameter(), mc.total_moves, rounds});
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        c[3].fail(std::string("campaign cell threw: ") + e.what());
      }
    });
  }

  // --- negative controls: each forged input must trip its intended checker
  {
    Topology k2 = make_path(2);
    Period B4{4};

    Trace creation;
    creation.header = {2, k2.edges(), 4, Configuration(2, {Status::C, 0}),
                       "script", "greedy", 0, "", {}};
    StepRecord s;
    s.index = 0;
    s.selected = {1};
    s.fired = {{1, RuleId::ru()}};
    s.post = {{Status::C, 0}, {Status::C, 2}};
    creation.steps = {s};
    creation.termination = Termination::StepLimit;
    if (item_ok(check_invariants(creation, k2, B4), "root monotonicity"))
      c[3].fail("negative control: forged root creation not caught");

    Topology r6 = make_ring(6);
    Trace saturated;
    saturated.header = {6, r6.edges(), 4,
                        {{Status::C, 0}, {Status::C, 1}, {Status::C, 2},
                         {Status::C, 3}, {Status::C, 2}, {Status::C, 1}},
                        "script", "greedy", 0, "", {}};
    saturated.termination = Termination::StepLimit;
    if (item_ok(check_invariants(saturated, r6, B4), "hole lemma"))
      c[3].fail("negative control: saturated clocks not caught by hole checker");

    Trace offdomain;
    offdomain.header = {2, k2.edges(), 4, {{Status::C, 8}, {Status::C, 9}},
                        "script", "greedy", 0, "", {}};
    offdomain.termination = Termination::StepLimit;
    if (item_ok(check_invariants(offdomain, k2, B4), "contiguous clock interval"))
      c[3].fail("negative control: out-of-range clocks not caught by interval checker");

    Trace badrc;
    badrc.header = {2, k2.edges(), 4, {{Status::E, -3}, {Status::C, -3}},
                    "script", "greedy", 0, "", {}};
    StepRecord rc;
    rc.index = 0;
    rc.selected = {0};
    rc.fired = {{0, RuleId::rc()}};
    rc.post = {{Status::C, -3}, {Status::C, -3}};
    badrc.steps = {rc};
    badrc.termination = Termination::StepLimit;
    if (item_ok(check_invariants(badrc, k2, B4), "root R_C behavior"))
      c[3].fail("negative control: off-floor root clear not caught");

    Topology p3 = make_path(3);
    Configuration epcfg{{Status::E, -2}, {Status::E, -3}, {Status::E, -4}};
    if (valid_e_path(epcfg, p3, Period{6}, {0, 1}) ||
        valid_e_path(epcfg, p3, Period{6}, {1, 0}))
      c[3].fail("negative control: invalid E-path accepted");

    Trace tampered = run_execution(k2, B4, Configuration(2, {Status::E, -4}),
                                   DaemonStrategy::synchronous(), PauxMode::greedy(),
                                   {6, StopOn::Never}, 0);
    tampered.steps[1].post[0].c = increment_mod(tampered.steps[1].post[0].c, B4);
    if (check_replay(tampered, k2, B4, paux_always(true)).all_ok())
      c[3].fail("negative control: tampered replay accepted");
  }

  // --- simulation equivalence and lazy bounds
  {
    struct SimCell {
      int alg;    // 0 min-prop, 1 min-id-bfs
      bool lazy;
      bool clean_start;
      std::uint64_t seed;
    };
    std::vector<SimCell> cells;
    for (int alg = 0; alg < 2; ++alg)
      for (int lz = 0; lz < 2; ++lz)
        for (int cs = 0; cs < 2; ++cs)
          for (int s = 0; s < 100; ++s)
            cells.push_back({alg, lz == 1, cs == 1,
                             static_cast<std::uint64_t>(s * 8 + alg * 4 + lz * 2 + cs)});

    parallel_for(static_cast<long>(cells.size()), [&](long i) {
      const SimCell& cell = cells[i];
      std::mt19937_64 rng(cell.seed * 1000003u + 17);
      int n = 2 + static_cast<int>(rng() % 7);  // 2..8
      Topology t = [&]() {
        switch (rng() % 4) {
          case 0: return make_path(n);
          case 1: return n >= 3 ? make_ring(n) : make_path(n);
          case 2: return make_star(std::max(n, 2));
          default:
            return make_random_connected(n, std::min<int>(n + 1, n * (n - 1) / 2), rng());
        }
      }();
      n = t.size();
      Period B = auto_period(t);

      SyncAlgorithm alg = cell.alg ? alg_min_id_bfs(n) : alg_min_propagation();
      std::vector<AlgPair> alg0;
      if (cell.alg) {
        std::vector<int> ids(n);
        for (int p = 0; p < n; ++p) ids[p] = p;
        std::shuffle(ids.begin(), ids.end(), rng);
        for (std::int64_t st : min_id_initial_states(ids)) alg0.push_back({st, st});
        if (!cell.clean_start)  // corrupt one claim as well
          alg0[rng() % n].second = min_id_pack(ids[0], 0, 1 + rng() % n);
      } else {
        for (int p = 0; p < n; ++p) {
          std::int64_t v = static_cast<std::int64_t>(rng() % 100);
          alg0.push_back({v, v});
        }
      }
      Configuration cfg0 = cell.clean_start ? Configuration(n, {Status::C, 0})
                                            : random_config(n, B.B, rng);
      DaemonStrategy daemon = cell.seed % 2 ? DaemonStrategy::central_random()
                                            : DaemonStrategy::distributed_random(0.5);
      RunLimits limits{cell.lazy ? 200000 : 4000,
                       cell.lazy ? StopOn::Terminal : StopOn::Never};
      Trace tr = sim_run_execution(t, B, cfg0, alg0, alg, cell.lazy, daemon, limits,
                                   cell.seed);

      std::string where = std::string(cell.alg ? "min-id-bfs" : "min-prop") +
                          (cell.lazy ? " lazy" : " greedy") +
                          (cell.clean_start ? " clean" : " arbitrary") + " seed=" +
                          std::to_string(cell.seed) + " n=" + std::to_string(n);
      CheckReport equiv = check_simulation_equivalence(tr, t, B, alg);
      std::lock_guard<std::mutex> lock(mu);
      c[6].merge(equiv, where);
      if (cell.lazy) {
        if (tr.termination != Termination::Terminal) {
          c[7].fail(where + ": lazy run not terminal");
        } else {
          int T = measure_T_of_trace(tr, t, B, alg);
          c[7].merge(check_lazy_bounds(tr, t, B, alg, T), where);
        }
      }
    });
  }

  // --- observational CSV (criterion 8 is informational by design)
  {
    std::ofstream csv("acceptance_observations.csv");
    if (!csv) {
      c[8].fail("cannot write acceptance_observations.csv");
    } else {
      csv << "n,B,D,moves,rounds\n";
      for (const Observation& o : observations)
        csv << o.n << ',' << o.B << ',' << o.D << ',' << o.moves << ',' << o.rounds << '\n';
    }
  }

  const char* names[9] = {
      "",
      "criterion 1 (clean within 2D+2 rounds, exhaustive n<=3 + sampled n=4..8)",
      "criterion 2 (exact move budgets: R<=1, U<=2D/segment, P<=nB, C<=P+n)",
      "criterion 3 (structural invariants + negative controls)",
      "criterion 4 (pre-clean clock growth <= 2D)",
      "criterion 5 (liveness in clean configurations, no deadlock)",
      "criterion 6 (simulation equivalence, 2 algorithms x 2 modes x 2 starts x 100 seeds)",
      "criterion 7 (lazy bounds: moves <= n(T+D), times <= T, round budgets)",
      "criterion 8 (observational move CSV emitted; asymptotic claim not gated)",
  };
  bool all_ok = true;
  for (int i = 1; i <= 8; ++i) {
    std::cout << (c[i].ok ? "PASS " : "FAIL ") << names[i]
              << (c[i].ok ? "" : " -- " + c[i].detail) << '\n';
    all_ok = all_ok && c[i].ok;
  }
  return all_ok ? 0 : 1;
}
