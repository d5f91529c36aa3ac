#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "unison/synchronizer.hpp"

using namespace unison;

namespace {

std::vector<AlgPair> pairs_of(const std::vector<std::int64_t>& v) {
  std::vector<AlgPair> out;
  for (std::int64_t x : v) out.push_back({x, x});
  return out;
}

const CheckItem& item(const CheckReport& rep, const std::string& name) {
  for (const auto& it : rep.items)
    if (it.name == name) return it;
  FAIL("no such check item: " + name);
  static CheckItem dummy;
  return dummy;
}

}  // namespace

TEST_CASE("min propagation synchronous reference") {
  Topology t = make_path(3);
  SyncAlgorithm alg = alg_min_propagation();
  auto run = sync_reference_run(alg, t, {5, 2, 9}, 2);
  REQUIRE(run.size() == 3);
  CHECK(run[1] == std::vector<std::int64_t>{2, 2, 2});
  CHECK(run[2] == std::vector<std::int64_t>{2, 2, 2});
  CHECK(measure_T(alg, t, {5, 2, 9}) == 1);
  CHECK(measure_T(alg, t, {2, 2, 2}) == 0);
  // min at one end of a path needs D steps to reach the other
  Topology p5 = make_path(5);
  CHECK(measure_T(alg, p5, {0, 9, 9, 9, 9}) == 4);
}

TEST_CASE("min-id leader election converges and survives fake leaders") {
  Topology t = make_path(3);
  SyncAlgorithm alg = alg_min_id_bfs(3);
  auto init = min_id_initial_states({5, 7, 6});
  int T = measure_T(alg, t, init);
  std::vector<std::int64_t> eta = init;
  for (int i = 0; i < T; ++i) eta = sync_step(alg, t, eta);
  for (int p = 0; p < 3; ++p) {
    std::int64_t id, leader, dist;
    min_id_unpack(eta[p], id, leader, dist);
    CHECK(leader == 5);
    CHECK(dist == t.distance(p, 0));
  }

  // corrupted state claiming a nonexistent leader 1 ages out via the
  // distance cap and the true minimum id wins again
  std::vector<std::int64_t> corrupt = init;
  corrupt[2] = min_id_pack(6, 1, 1);
  int T2 = measure_T(alg, t, corrupt);
  std::vector<std::int64_t> fixed = corrupt;
  for (int i = 0; i < T2; ++i) fixed = sync_step(alg, t, fixed);
  for (int p = 0; p < 3; ++p) {
    std::int64_t id, leader, dist;
    min_id_unpack(fixed[p], id, leader, dist);
    CHECK(leader == 5);
  }
}

TEST_CASE("duplicate identifiers are rejected") {
  CHECK_THROWS_AS(min_id_initial_states({1, 2, 1}), Error);
  try {
    min_id_initial_states({3, 3});
  } catch (const Error& e) {
    CHECK(e.kind == Error::Kind::DuplicateIdentifiers);
  }
  CHECK_THROWS_AS(min_id_initial_states({-1}), Error);
}

TEST_CASE("snapshot inputs pick old from nodes one tick ahead") {
  Topology t = make_path(3);
  Period B{6};
  Configuration cfg{{Status::C, 2}, {Status::C, 2}, {Status::C, 3}};
  std::vector<AlgPair> a{{10, 11}, {20, 21}, {30, 31}};
  // node 1 sees node 0 (same clock: curr) and node 2 (ahead: old)
  CHECK(snapshot_inputs(t, B, cfg, a, 1) == std::vector<std::int64_t>{11, 30});
  CHECK(snapshot_inputs(t, B, cfg, a, 0) == std::vector<std::int64_t>{21});
}

TEST_CASE("birth times") {
  Topology t = make_path(3);
  Period B = auto_period(t);  // D = 2, B = 6
  CHECK(birth_times(Configuration(3, {Status::C, 2}), t, B) == std::vector<int>{0, 0, 0});
  CHECK(birth_times({{Status::C, 0}, {Status::C, 1}, {Status::C, 2}}, t, B) ==
        std::vector<int>{-2, -1, 0});
  // wrap-around interval 5, 0, 0
  CHECK(birth_times({{Status::C, 5}, {Status::C, 0}, {Status::C, 0}}, t, B) ==
        std::vector<int>{-1, 0, 0});
  CHECK_THROWS_AS(birth_times({{Status::E, -6}, {Status::C, 0}, {Status::C, 0}}, t, B),
                  Error);
}

TEST_CASE("birth times with clocks reaching zero from both sides") {
  // a clean star can hold -1 and B-1 around a center at 0; both leaves are
  // one step behind the center even though the clock set is no interval
  Topology t = make_star(4);
  Period B = auto_period(t);  // D = 2, B = 6
  Configuration cfg{{Status::C, 0}, {Status::C, 5}, {Status::C, 1}, {Status::C, -1}};
  CHECK(birth_times(cfg, t, B) == std::vector<int>{-1, -2, 0, -2});
}

TEST_CASE("greedy simulation equals the synchronous execution") {
  Topology t = make_path(3);
  Period B = auto_period(t);
  SyncAlgorithm alg = alg_min_propagation();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Trace tr = sim_run_execution(t, B, Configuration(3, {Status::C, 0}),
                                 pairs_of({5, 2, 9}), alg, false,
                                 seed % 2 ? DaemonStrategy::central_random()
                                          : DaemonStrategy::distributed_random(0.5),
                                 {300, StopOn::Never}, seed);
    CheckReport rep = check_simulation_equivalence(tr, t, B, alg);
    INFO("seed " << seed << ": " << rep.first_failure());
    CHECK(rep.all_ok());

    EtaSequence seq = reconstruct_eta(tr, t, B);
    REQUIRE(seq.etas.size() >= 2);
    CHECK(seq.etas[0] == std::vector<std::int64_t>{5, 2, 9});
    CHECK(seq.etas[1] == std::vector<std::int64_t>{2, 2, 2});
  }
}

TEST_CASE("greedy simulation from a dirty start still matches after clean") {
  Topology t = make_ring(4);
  Period B = auto_period(t);
  SyncAlgorithm alg = alg_min_propagation();
  std::mt19937_64 rng(77);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Configuration cfg0 = oracle::random_config(4, B.B, rng);
    Trace tr = sim_run_execution(t, B, cfg0, pairs_of({4, 8, 1, 6}), alg, false,
                                 DaemonStrategy::central_random(), {2000, StopOn::Never},
                                 seed);
    CheckReport rep = check_simulation_equivalence(tr, t, B, alg);
    INFO("seed " << seed << ": " << rep.first_failure());
    CHECK(rep.all_ok());
  }
}

TEST_CASE("lazy simulation is silent and within bounds") {
  Topology t = make_path(3);
  Period B = auto_period(t);
  SyncAlgorithm alg = alg_min_propagation();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Trace tr = sim_run_execution(t, B, Configuration(3, {Status::C, 0}),
                                 pairs_of({5, 2, 9}), alg, true,
                                 DaemonStrategy::distributed_random(0.5),
                                 {100000, StopOn::Terminal}, seed);
    REQUIRE(tr.termination == Termination::Terminal);
    int T = measure_T_of_trace(tr, t, B, alg);
    CHECK(T == 1);
    CheckReport equiv = check_simulation_equivalence(tr, t, B, alg);
    INFO(equiv.first_failure());
    CHECK(equiv.all_ok());
    CheckReport lazy = check_lazy_bounds(tr, t, B, alg, T);
    INFO(lazy.first_failure());
    CHECK(lazy.all_ok());
  }
}

TEST_CASE("lazy mode with an already-silent input does nothing") {
  Topology t = make_path(3);
  Period B = auto_period(t);
  SyncAlgorithm alg = alg_min_propagation();
  Trace tr = sim_run_execution(t, B, Configuration(3, {Status::C, 1}), pairs_of({2, 2, 2}),
                               alg, true, DaemonStrategy::synchronous(),
                               {1000, StopOn::Terminal}, 0);
  CHECK(tr.termination == Termination::Terminal);
  CHECK(tr.steps.empty());
  EtaSequence seq = reconstruct_eta(tr, t, B);
  REQUIRE(seq.etas.size() == 1);
  CHECK(seq.etas[0] == std::vector<std::int64_t>{2, 2, 2});
  CheckReport lazy = check_lazy_bounds(tr, t, B, alg, 0);
  INFO(lazy.first_failure());
  CHECK(lazy.all_ok());
}

TEST_CASE("lazy simulation from a dirty start") {
  Topology t = make_ring(4);
  Period B = auto_period(t);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyncAlgorithm alg = seed % 2 ? alg_min_id_bfs(4) : alg_min_propagation();
    std::mt19937_64 rng(seed + 123);
    Configuration cfg0 = oracle::random_config(4, B.B, rng);
    std::vector<AlgPair> alg0;
    if (seed % 2) {
      for (std::int64_t st : min_id_initial_states({3, 0, 2, 1})) alg0.push_back({st, st});
    } else {
      alg0 = pairs_of({7, 3, 9, 5});
    }
    Trace tr = sim_run_execution(t, B, cfg0, alg0, alg, true,
                                 DaemonStrategy::central_random(), {100000, StopOn::Terminal},
                                 seed);
    REQUIRE(tr.termination == Termination::Terminal);
    int T = measure_T_of_trace(tr, t, B, alg);
    CheckReport equiv = check_simulation_equivalence(tr, t, B, alg);
    INFO("seed " << seed << ": " << equiv.first_failure());
    CHECK(equiv.all_ok());
    CheckReport lazy = check_lazy_bounds(tr, t, B, alg, T);
    INFO("seed " << seed << ": " << lazy.first_failure());
    CHECK(lazy.all_ok());
  }
}

TEST_CASE("greedy min time climbs once the clock is stable") {
  Topology t = make_path(3);
  Period B = auto_period(t);
  SyncAlgorithm alg = alg_min_propagation();
  Trace tr = sim_run_execution(t, B, Configuration(3, {Status::C, 0}), pairs_of({5, 2, 9}),
                               alg, false, DaemonStrategy::synchronous(),
                               {40, StopOn::Never}, 0);
  TimeTrack tt = track_times(tr, t, B);
  int prev = *std::min_element(tt.times.front().begin(), tt.times.front().end());
  for (const auto& row : tt.times) {
    int cur = *std::min_element(row.begin(), row.end());
    CHECK(cur >= prev);
    prev = cur;
  }
  CHECK(prev > 0);  // made progress
}

TEST_CASE("negative control: tampered algorithm payloads are flagged") {
  Topology t = make_path(1);
  Period B{4};
  SyncAlgorithm alg = alg_min_propagation();
  Trace tr;
  tr.header = {1, {}, 4, {{Status::C, 0}}, "script", "greedy", 0, alg.name, {{5, 5}}};
  StepRecord step;
  step.index = 0;
  step.selected = {0};
  step.fired = {{0, RuleId::ru()}};
  step.post = {{Status::C, 1}};
  step.alg_post = {{5, 7}};  // a lone min-prop node can never change value
  tr.steps = {step};
  tr.termination = Termination::StepLimit;

  CheckReport rep = check_simulation_equivalence(tr, t, B, alg);
  CHECK_FALSE(item(rep, "algorithm state changes only on U-moves").ok);
  CHECK_FALSE(item(rep, "stepwise equivalence with synchronous execution").ok);
}
