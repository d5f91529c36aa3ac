#pragma once

// Runs a synchronous self-stabilizing algorithm on top of the phase clock:
// each node keeps its last two algorithm states (old, curr) and performs one
// simulated synchronous step whenever it fires R_U, reading curr from
// neighbors at the same clock and old from neighbors one tick ahead. Greedy
// mode always advances; lazy mode advances only when the simulated step
// would change the node's state or a neighbor is already ahead.
//
// Also: logical time reconstruction, the eta-sequence extracted from a
// trace, a synchronous reference executor, and the equivalence / bound
// oracles built on them.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "unison/core.hpp"
#include "unison/scheduler.hpp"
#include "unison/trace_io.hpp"
#include "unison/verifier.hpp"

namespace unison {

// A synchronous algorithm over int64 node states. `transition` must treat
// the neighbor states as a multiset (it receives them in adjacency order).
struct SyncAlgorithm {
  std::string name;
  std::function<std::int64_t(int node, std::int64_t own,
                             const std::vector<std::int64_t>& nbrs)>
      transition;
};

// --- bundled algorithms ----------------------------------------------------

// Each node converges to the minimum value in the network.
inline SyncAlgorithm alg_min_propagation() {
  return {"min-prop", [](int, std::int64_t own, const std::vector<std::int64_t>& nbrs) {
            std::int64_t best = own;
            for (std::int64_t v : nbrs) best = std::min(best, v);
            return best;
          }};
}

// Leader election + BFS layering packed into one int64:
// bits 40.. own id, bits 20..39 leader id, bits 0..19 distance.
inline std::int64_t min_id_pack(std::int64_t id, std::int64_t leader, std::int64_t dist) {
  return (id << 40) | (leader << 20) | dist;
}

inline void min_id_unpack(std::int64_t st, std::int64_t& id, std::int64_t& leader,
                          std::int64_t& dist) {
  id = st >> 40;
  leader = (st >> 20) & 0xFFFFF;
  dist = st & 0xFFFFF;
}

// Claims whose distance would exceed `cap` (use cap = n) are dropped, so a
// fabricated leader id present in a corrupted initial state ages out instead
// of circulating forever.
inline SyncAlgorithm alg_min_id_bfs(int cap) {
  return {"min-id-bfs",
          [cap](int, std::int64_t own, const std::vector<std::int64_t>& nbrs) {
            std::int64_t id, leader, dist;
            min_id_unpack(own, id, leader, dist);
            std::int64_t best_leader = id, best_dist = 0;
            for (std::int64_t v : nbrs) {
              std::int64_t qid, ql, qd;
              min_id_unpack(v, qid, ql, qd);
              if (qd + 1 > cap) continue;
              if (ql < best_leader || (ql == best_leader && qd + 1 < best_dist)) {
                best_leader = ql;
                best_dist = qd + 1;
              }
            }
            return min_id_pack(id, best_leader, best_dist);
          }};
}

inline std::vector<std::int64_t> min_id_initial_states(const std::vector<int>& ids) {
  std::set<int> seen;
  std::vector<std::int64_t> states;
  for (int id : ids) {
    if (id < 0 || id >= (1 << 20))
      throw Error(Error::Kind::InvalidParams, "node id out of range: " + std::to_string(id));
    if (!seen.insert(id).second)
      throw Error(Error::Kind::DuplicateIdentifiers,
                  "duplicate node id: " + std::to_string(id));
    states.push_back(min_id_pack(id, id, 0));
  }
  return states;
}

// --- synchronous reference executor ----------------------------------------

inline std::vector<std::int64_t> sync_step(const SyncAlgorithm& alg, const Topology& t,
                                           const std::vector<std::int64_t>& eta) {
  std::vector<std::int64_t> next(eta.size());
  for (int p = 0; p < t.size(); ++p) {
    std::vector<std::int64_t> in;
    for (int q : t.neighbors(p)) in.push_back(eta[q]);
    next[p] = alg.transition(p, eta[p], in);
  }
  return next;
}

inline std::vector<std::vector<std::int64_t>> sync_reference_run(
    const SyncAlgorithm& alg, const Topology& t, const std::vector<std::int64_t>& eta0,
    int steps) {
  std::vector<std::vector<std::int64_t>> out{eta0};
  for (int i = 0; i < steps; ++i) out.push_back(sync_step(alg, t, out.back()));
  return out;
}

// Synchronous rounds until a fixpoint.
inline int measure_T(const SyncAlgorithm& alg, const Topology& t,
                     const std::vector<std::int64_t>& eta0, int max_iters = 100000) {
  std::vector<std::int64_t> eta = eta0;
  for (int i = 0; i < max_iters; ++i) {
    std::vector<std::int64_t> next = sync_step(alg, t, eta);
    if (next == eta) return i;
    eta = std::move(next);
  }
  throw Error(Error::Kind::BoundsExceeded, "no synchronous fixpoint within iteration cap");
}

// --- simulation runs -------------------------------------------------------

// Inputs a node reads when simulating one synchronous step: curr from
// neighbors at its own clock, old from neighbors one tick ahead.
inline std::vector<std::int64_t> snapshot_inputs(const Topology& t, Period B,
                                                 const Configuration& cfg,
                                                 const std::vector<AlgPair>& a, int p) {
  std::vector<std::int64_t> in;
  int ahead = increment_mod(cfg[p].c, B);
  for (int q : t.neighbors(p))
    in.push_back(cfg[q].c == ahead ? a[q].first : a[q].second);
  return in;
}

inline PauxFn sim_paux(const SyncAlgorithm& alg, const Topology& t, Period B,
                       const Configuration& cfg, const std::vector<AlgPair>& a, bool lazy) {
  if (!lazy) return paux_always(true);
  return [&alg, &t, B, &cfg, &a](int p) {
    return alg.transition(p, a[p].second, snapshot_inputs(t, B, cfg, a, p)) != a[p].second;
  };
}

inline Trace sim_run_execution(const Topology& t, Period B, const Configuration& cfg0,
                               const std::vector<AlgPair>& alg0, const SyncAlgorithm& alg,
                               bool lazy, const DaemonStrategy& daemon, RunLimits limits,
                               std::uint64_t seed) {
  validate_period(B, t);
  if (static_cast<int>(cfg0.size()) != t.size() || !validate_configuration(cfg0, B).empty())
    throw Error(Error::Kind::InvalidInitialConfiguration,
                "initial configuration violates the state domain");
  if (alg0.size() != cfg0.size())
    throw Error(Error::Kind::InvalidInitialConfiguration,
                "algorithm state vector size mismatch");

  Trace tr;
  tr.header = {t.size(), t.edges(), B.B,  cfg0, daemon.describe(),
               lazy ? "lazy" : "greedy", seed, alg.name, alg0};

  std::mt19937_64 rng(seed);
  Configuration cfg = cfg0;
  std::vector<AlgPair> a = alg0;
  for (long step = 0;; ++step) {
    PauxFn paux = sim_paux(alg, t, B, cfg, a, lazy);
    std::vector<int> enabled = enabled_set(cfg, t, B, paux);
    if (enabled.empty()) {
      tr.termination = Termination::Terminal;
      break;
    }
    if (step >= limits.max_steps) {
      tr.termination = Termination::StepLimit;
      break;
    }

    std::vector<int> selection;
    if (daemon.kind == DaemonStrategy::Kind::Scripted) {
      if (step >= static_cast<long>(daemon.script.size())) {
        tr.termination = Termination::StepLimit;
        break;
      }
      selection = daemon.script[step];
    } else {
      selection = daemon_select(daemon, enabled, rng);
    }

    Configuration next = cfg;
    std::vector<AlgPair> next_a = a;
    std::vector<std::pair<int, RuleId>> fired;
    bool script_bad = false;
    for (int p : selection) {
      auto rule = enabled_rule(cfg[p], neighbor_view(cfg, t, p), B, paux(p));
      if (!rule) {
        if (daemon.kind == DaemonStrategy::Kind::Scripted) {
          script_bad = true;
          break;
        }
        throw Error(Error::Kind::NodeNotEnabled,
                    "sim_run_execution: node " + std::to_string(p) + " is not enabled");
      }
      next[p] = apply_rule(cfg[p], *rule, B);
      if (rule->kind == RuleId::Kind::RU)
        next_a[p] = {a[p].second,
                     alg.transition(p, a[p].second, snapshot_inputs(t, B, cfg, a, p))};
      fired.emplace_back(p, *rule);
    }
    if (script_bad) {
      tr.termination = Termination::ScriptInvalid;
      break;
    }

    StepRecord rec;
    rec.index = static_cast<int>(step);
    rec.selected = selection;
    std::sort(rec.selected.begin(), rec.selected.end());
    std::sort(fired.begin(), fired.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    rec.fired = std::move(fired);
    rec.post = next;
    rec.alg_post = next_a;
    tr.steps.push_back(std::move(rec));
    cfg = std::move(next);
    a = std::move(next_a);
  }
  return tr;
}

inline std::vector<AlgPair> alg_states_at(const Trace& tr, size_t i) {
  return i == 0 ? tr.header.alg_init : tr.steps[i - 1].alg_post;
}

// Round accounting for simulation traces; in lazy mode the enabled set
// depends on the algorithm states, so flags are computed per configuration.
inline std::vector<std::vector<char>> sim_enabled_flags(const Trace& tr, const Topology& t,
                                                        Period B, const SyncAlgorithm& alg) {
  bool lazy = tr.header.paux == "lazy";
  std::vector<std::vector<char>> flags;
  for (size_t i = 0; i < tr.config_count(); ++i) {
    const Configuration& cfg = tr.config(i);
    std::vector<AlgPair> a = alg_states_at(tr, i);
    PauxFn paux = sim_paux(alg, t, B, cfg, a, lazy);
    std::vector<char> f(t.size(), 0);
    for (int p : enabled_set(cfg, t, B, paux)) f[p] = 1;
    flags.push_back(std::move(f));
  }
  return flags;
}

// Round boundaries of the suffix starting at configuration `from`, as
// 1-based configuration indices relative to `from`.
inline std::vector<int> suffix_round_boundaries(const std::vector<std::vector<char>>& flags,
                                                const Trace& tr, size_t from) {
  std::vector<std::vector<char>> f(flags.begin() + from, flags.end());
  std::vector<std::vector<int>> selections;
  for (size_t i = from; i < tr.steps.size(); ++i) selections.push_back(tr.steps[i].selected);
  return round_boundaries_from(f, selections);
}

// --- logical time ----------------------------------------------------------

// Birth times of a clean configuration. Cleanness forces neighbor clocks to
// differ by at most one increment, so unwinding those per-edge offsets by
// BFS gives a well-defined potential; shifted so the most advanced nodes
// are at time 0, every time lies in [-D, 0]. When the clock multiset is a
// contiguous interval c_min..c_min+Delta this is exactly offset-minus-Delta,
// but it stays defined when the values reach 0 from both -1 and B-1.
inline std::vector<int> birth_times(const Configuration& cfg, const Topology& t, Period B) {
  if (!is_clean(cfg, t, B))
    throw Error(Error::Kind::NotClean, "birth_times: configuration has roots");
  int n = t.size();
  std::vector<int> rel(n, 0);
  std::vector<char> seen(n, 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  for (size_t h = 0; h < queue.size(); ++h) {
    int p = queue[h];
    for (int q : t.neighbors(p)) {
      int step;
      if (cfg[q].c == cfg[p].c)
        step = 0;
      else if (cfg[q].c == increment_mod(cfg[p].c, B))
        step = 1;
      else if (cfg[p].c == increment_mod(cfg[q].c, B))
        step = -1;
      else
        throw Error(Error::Kind::InternalInvariantBroken,
                    "birth_times: neighbor clocks further than one step apart");
      if (!seen[q]) {
        rel[q] = rel[p] + step;
        seen[q] = 1;
        queue.push_back(q);
      } else if (rel[q] != rel[p] + step) {
        throw Error(Error::Kind::InternalInvariantBroken,
                    "birth_times: inconsistent clock offsets around a cycle");
      }
    }
  }
  int hi = *std::max_element(rel.begin(), rel.end());
  int lo = *std::min_element(rel.begin(), rel.end());
  if (hi - lo > t.diameter())
    throw Error(Error::Kind::InternalInvariantBroken, "birth_times: clock span exceeds D");
  std::vector<int> times;
  for (int p = 0; p < n; ++p) times.push_back(rel[p] - hi);
  return times;
}

// Logical times along a trace from its first clean configuration: birth
// times there, +1 on every R_U a node fires afterwards.
struct TimeTrack {
  int first_clean = -1;
  std::vector<std::vector<int>> times;  // [config index - first_clean][node]
};

inline TimeTrack track_times(const Trace& tr, const Topology& t, Period B) {
  auto f = first_clean_index(tr, t, B);
  if (!f) throw Error(Error::Kind::NotClean, "trace never reaches a clean configuration");
  TimeTrack tt;
  tt.first_clean = *f;
  std::vector<int> cur = birth_times(tr.config(*f), t, B);
  tt.times.push_back(cur);
  for (size_t i = *f; i < tr.steps.size(); ++i) {
    for (auto [p, rule] : tr.steps[i].fired)
      if (rule.kind == RuleId::Kind::RU) ++cur[p];
    tt.times.push_back(cur);
  }
  return tt;
}

// --- eta-sequence ----------------------------------------------------------

// eta^t[p] is p.curr at the first configuration where time(p)=t. Emitted for
// t in [0, t_max] where t_max is the largest t every node reaches within the
// trace; etas is empty when some node never reaches time 0.
struct EtaSequence {
  std::vector<std::vector<std::int64_t>> etas;  // etas[k] = eta^k
  std::vector<int> birth;
  std::vector<int> final_times;
};

inline EtaSequence reconstruct_eta(const Trace& tr, const Topology& t, Period B) {
  if (tr.header.alg.empty())
    throw Error(Error::Kind::ParseError, "trace carries no algorithm states");
  TimeTrack tt = track_times(tr, t, B);
  int n = t.size();

  EtaSequence seq;
  seq.birth = tt.times.front();
  std::vector<std::map<int, std::int64_t>> at_time(n);
  std::vector<AlgPair> a0 = alg_states_at(tr, tt.first_clean);
  for (int p = 0; p < n; ++p) at_time[p][seq.birth[p]] = a0[p].second;

  std::vector<int> cur = seq.birth;
  for (size_t i = tt.first_clean; i < tr.steps.size(); ++i)
    for (auto [p, rule] : tr.steps[i].fired)
      if (rule.kind == RuleId::Kind::RU)
        at_time[p][++cur[p]] = tr.steps[i].alg_post[p].second;
  seq.final_times = cur;

  int t_max = *std::min_element(cur.begin(), cur.end());
  for (int k = 0; k <= t_max; ++k) {
    std::vector<std::int64_t> eta(n);
    for (int p = 0; p < n; ++p) eta[p] = at_time[p].at(k);
    seq.etas.push_back(std::move(eta));
  }
  return seq;
}

// --- oracles ---------------------------------------------------------------

// Replay contract for simulation traces plus the simulation-specific
// invariants: algorithm state changes only on R_U and follows the snapshot
// rule; equal times imply equal clocks; neighbor times differ by at most 1;
// every defined eta^{t+1} equals the synchronous step applied to eta^t.
inline CheckReport check_simulation_equivalence(const Trace& tr, const Topology& t, Period B,
                                                const SyncAlgorithm& alg) {
  CheckReport rep;
  bool lazy = tr.header.paux == "lazy";

  bool replay_ok = true, alg_ok = true;
  std::string replay_detail, alg_detail;
  for (size_t i = 0; i < tr.steps.size() && replay_ok && alg_ok; ++i) {
    const Configuration& pre = tr.config(i);
    std::vector<AlgPair> a = alg_states_at(tr, i);
    PauxFn paux = sim_paux(alg, t, B, pre, a, lazy);
    const StepRecord& rec = tr.steps[i];
    Configuration expect = pre;
    std::vector<AlgPair> expect_a = a;
    for (auto [p, rule] : rec.fired) {
      auto en = enabled_rule(pre[p], neighbor_view(pre, t, p), B, paux(p));
      if (!en || *en != rule) {
        replay_ok = false;
        replay_detail = "rule mismatch for node " + std::to_string(p) + " at step " +
                        std::to_string(i);
        break;
      }
      expect[p] = apply_rule(pre[p], rule, B);
      if (rule.kind == RuleId::Kind::RU)
        expect_a[p] = {a[p].second,
                       alg.transition(p, a[p].second, snapshot_inputs(t, B, pre, a, p))};
    }
    if (replay_ok && expect != rec.post) {
      replay_ok = false;
      replay_detail = "post mismatch at step " + std::to_string(i);
    }
    if (replay_ok && expect_a != rec.alg_post) {
      alg_ok = false;
      alg_detail = "algorithm state mismatch at step " + std::to_string(i);
    }
  }
  rep.add("simulation replay", replay_ok, replay_detail);
  rep.add("algorithm state changes only on U-moves", alg_ok, alg_detail);

  TimeTrack tt;
  try {
    tt = track_times(tr, t, B);
  } catch (const Error& e) {
    rep.add("reaches clean", false, e.what());
    return rep;
  }
  rep.add("reaches clean", true);

  bool time_clock_ok = true, gap_ok = true;
  std::string tc_detail, gap_detail;
  for (size_t k = 0; k < tt.times.size(); ++k) {
    const Configuration& cfg = tr.config(tt.first_clean + k);
    for (int p = 0; p < t.size(); ++p) {
      for (int q = p + 1; q < t.size(); ++q)
        if (tt.times[k][p] == tt.times[k][q] && cfg[p].c != cfg[q].c && time_clock_ok) {
          time_clock_ok = false;
          tc_detail = "nodes " + std::to_string(p) + "," + std::to_string(q) +
                      " share a time but not a clock";
        }
      for (int q : t.neighbors(p))
        if (std::abs(tt.times[k][p] - tt.times[k][q]) > 1 && gap_ok) {
          gap_ok = false;
          gap_detail = "neighbor time gap > 1 at configuration " +
                       std::to_string(tt.first_clean + k);
        }
    }
  }
  rep.add("equal times imply equal clocks", time_clock_ok, tc_detail);
  rep.add("neighbor time gap <= 1", gap_ok, gap_detail);

  EtaSequence seq = reconstruct_eta(tr, t, B);
  bool birth_ok = true;
  for (int b : seq.birth)
    if (b < -t.diameter() || b > 0) birth_ok = false;
  rep.add("birth times in [-D, 0]", birth_ok);

  bool eq_ok = true;
  std::string eq_detail;
  for (size_t k = 0; k + 1 < seq.etas.size(); ++k)
    if (sync_step(alg, t, seq.etas[k]) != seq.etas[k + 1]) {
      eq_ok = false;
      eq_detail = "eta^" + std::to_string(k + 1) +
                  " differs from the synchronous step of eta^" + std::to_string(k);
      break;
    }
  rep.add("stepwise equivalence with synchronous execution", eq_ok, eq_detail);
  return rep;
}

// Lazy-mode complexity oracles, with T measured by the synchronous reference
// from eta^0. When T=0 the input algorithm is already silent, executions may
// terminate with every logical time still 0, and the positivity/terminal
// round bounds are vacuous; they are only asserted for T >= 1.
inline CheckReport check_lazy_bounds(const Trace& tr, const Topology& t, Period B,
                                     const SyncAlgorithm& alg, int T_measured) {
  CheckReport rep;
  int n = t.size();
  int D = t.diameter();

  rep.add("terminates", tr.termination == Termination::Terminal,
          to_string(tr.termination));
  TimeTrack tt;
  try {
    tt = track_times(tr, t, B);
  } catch (const Error& e) {
    rep.add("reaches clean", false, e.what());
    return rep;
  }
  rep.add("reaches clean", true);

  long moves = 0;
  for (size_t i = tt.first_clean; i < tr.steps.size(); ++i)
    moves += static_cast<long>(tr.steps[i].fired.size());
  rep.add("post-clean moves <= n(T+D)",
          moves <= static_cast<long>(n) * (T_measured + D),
          std::to_string(moves) + " moves, T=" + std::to_string(T_measured));

  int max_time = 0;
  for (const auto& row : tt.times)
    for (int v : row) max_time = std::max(max_time, v);
  rep.add("max node time <= T", max_time <= T_measured,
          "max time " + std::to_string(max_time) + ", T=" + std::to_string(T_measured));

  std::vector<std::vector<char>> flags = sim_enabled_flags(tr, t, B, alg);
  size_t last = tr.config_count() - 1;

  std::vector<int> overall = suffix_round_boundaries(flags, tr, 0);
  long overall_rounds = std::count_if(overall.begin(), overall.end(), [&](int h) {
    return static_cast<size_t>(h) < last;
  });
  rep.add("terminal within 5D+3T rounds overall",
          overall_rounds <= 5L * D + 3L * T_measured,
          std::to_string(overall_rounds) + " completed rounds");

  if (T_measured >= 1) {
    int pos_at = -1;
    for (size_t k = 0; k < tt.times.size(); ++k)
      if (std::all_of(tt.times[k].begin(), tt.times[k].end(), [](int v) { return v > 0; })) {
        pos_at = static_cast<int>(k);
        break;
      }
    std::vector<int> from_clean = suffix_round_boundaries(flags, tr, tt.first_clean);
    if (pos_at < 0) {
      rep.add("times positive within 2D rounds", false, "times never all positive");
    } else {
      long before = std::count_if(from_clean.begin(), from_clean.end(),
                                  [&](int h) { return h < pos_at; });
      rep.add("times positive within 2D rounds", before <= 2L * D,
              std::to_string(before) + " completed rounds before positive times");

      size_t pos_abs = tt.first_clean + pos_at;
      std::vector<int> from_pos = suffix_round_boundaries(flags, tr, pos_abs);
      long tail = std::count_if(from_pos.begin(), from_pos.end(), [&](int h) {
        return static_cast<size_t>(h) < last - pos_abs;
      });
      rep.add("terminal within D+3T-2 rounds after positive times",
              tail <= static_cast<long>(D) + 3L * T_measured - 2,
              std::to_string(tail) + " completed rounds");
    }
  } else {
    rep.add("times positive within 2D rounds", true, "vacuous: algorithm silent at eta^0");
    rep.add("terminal within D+3T-2 rounds after positive times", true,
            "vacuous: algorithm silent at eta^0");
  }
  return rep;
}

// T for a trace: synchronous rounds to fixpoint from its eta^0.
inline int measure_T_of_trace(const Trace& tr, const Topology& t, Period B,
                              const SyncAlgorithm& alg) {
  EtaSequence seq = reconstruct_eta(tr, t, B);
  if (seq.etas.empty())
    throw Error(Error::Kind::NotClean, "eta^0 undefined: some node never reaches time 0");
  return measure_T(alg, t, seq.etas.front());
}

}  // namespace unison
