#pragma once

// Configuration classifiers, structural diagnostics (E-paths, D-paths,
// segments), and trace oracles for the lemma-level invariants and the exact
// move/round budgets.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "unison/core.hpp"
#include "unison/scheduler.hpp"

namespace unison {

// --- classification --------------------------------------------------------

enum class ConfigClass { Clean, AlmostCleanNotClean, Dirty };

inline std::string to_string(ConfigClass c) {
  switch (c) {
    case ConfigClass::Clean: return "Clean";
    case ConfigClass::AlmostCleanNotClean: return "AlmostCleanNotClean";
    case ConfigClass::Dirty: return "Dirty";
  }
  return "?";
}

inline std::vector<int> roots_of(const Configuration& cfg, const Topology& t, Period B) {
  std::vector<int> roots;
  for (int p = 0; p < t.size(); ++p)
    if (pred_root(cfg[p], neighbor_view(cfg, t, p), B)) roots.push_back(p);
  return roots;
}

inline bool almost_clean_by_definition(const Configuration& cfg, const Topology& t, Period B) {
  for (int p = 0; p < t.size(); ++p) {
    auto nbrs = neighbor_view(cfg, t, p);
    if (pred_root(cfg[p], nbrs, B) && (cfg[p].c != -B.B || correct(cfg[p]))) return false;
    for (int q : t.neighbors(p))
      if (clock_dist(cfg[p].c, cfg[q].c, B) > 1) return false;
  }
  return true;
}

// Classifies by the root-based definitions and cross-checks against the
// rule-based characterizations (no error rule enabled <=> almost clean;
// only R_U enabled <=> clean). Both computations must agree.
inline ConfigClass classify_configuration(const Configuration& cfg, const Topology& t,
                                          Period B) {
  bool no_roots = true;
  bool error_rule_enabled = false;
  bool rc_enabled = false;
  for (int p = 0; p < t.size(); ++p) {
    auto nbrs = neighbor_view(cfg, t, p);
    if (pred_root(cfg[p], nbrs, B)) no_roots = false;
    if (pred_active_root(cfg[p], nbrs, B) || error_propag_target(cfg[p], nbrs))
      error_rule_enabled = true;
    if (pred_can_clear_e(cfg[p], nbrs)) rc_enabled = true;
  }
  bool almost = almost_clean_by_definition(cfg, t, B);

  if (almost == error_rule_enabled)
    throw Error(Error::Kind::CharacterizationMismatch,
                "almost-clean definition disagrees with rule-based characterization");
  if (no_roots != (!error_rule_enabled && !rc_enabled))
    throw Error(Error::Kind::CharacterizationMismatch,
                "clean definition disagrees with rule-based characterization");

  if (no_roots) return ConfigClass::Clean;
  return almost ? ConfigClass::AlmostCleanNotClean : ConfigClass::Dirty;
}

// What the almost-clean conditions force on the clock multiset: every value
// inside [-B, B-1], the value set connected under +_B succession, and any
// two values within chain distance D of each other. This coincides with
// "contiguous interval of span <= D" except when the set reaches 0 from
// both of its predecessors (-1 and B-1 at once), a shape legal
// configurations can take.
inline bool clock_spread_ok(const std::set<int>& clocks, Period B, int D) {
  std::vector<int> vals(clocks.begin(), clocks.end());
  int k = static_cast<int>(vals.size());
  for (int c : vals)
    if (c < -B.B || c > B.B - 1) return false;
  std::vector<char> seen(k, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < k; ++v)
      if (!seen[v] && clock_chain_dist(vals[u], vals[v], B) == 1) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
  }
  if (reached != k) return false;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (clock_chain_dist(vals[i], vals[j], B) > D) return false;
  return true;
}

// --- E-paths and D-paths ---------------------------------------------------

// Greedy descent: from an erroneous node, repeatedly step to an erroneous
// neighbor with a smaller clock until reaching a root. Such a path always
// exists in a domain-valid configuration.
inline std::vector<int> find_e_path(const Configuration& cfg, const Topology& t, Period B,
                                    int p) {
  if (!erroneous(cfg[p]))
    throw Error(Error::Kind::NotInError, "find_e_path: node " + std::to_string(p) +
                                             " is not in error");
  std::vector<int> path{p};
  int cur = p;
  for (int hops = 0; hops <= t.size(); ++hops) {
    if (pred_root(cfg[cur], neighbor_view(cfg, t, cur), B)) return path;
    std::optional<int> next;
    for (int q : t.neighbors(cur))
      if (erroneous(cfg[q]) && cfg[q].c < cfg[cur].c)
        if (!next || cfg[q].c < cfg[*next].c) next = q;
    if (!next) break;
    path.push_back(*next);
    cur = *next;
  }
  throw Error(Error::Kind::InternalInvariantBroken,
              "find_e_path: descent did not reach a root");
}

// Used by tests and the trace oracle: is `path` a valid E-path in cfg?
inline bool valid_e_path(const Configuration& cfg, const Topology& t, Period B,
                         const std::vector<int>& path) {
  if (path.empty()) return false;
  for (size_t i = 0; i < path.size(); ++i) {
    if (!erroneous(cfg[path[i]])) return false;
    if (i + 1 < path.size()) {
      const auto& nbrs = t.neighbors(path[i]);
      if (!std::count(nbrs.begin(), nbrs.end(), path[i + 1])) return false;
      if (cfg[path[i + 1]].c >= cfg[path[i]].c) return false;
    }
  }
  return pred_root(cfg[path.back()], neighbor_view(cfg, t, path.back()), B);
}

// True iff p starts a D-path: a (possibly empty) gently decreasing prefix of
// correct nodes followed by an E-path.
inline bool d_path_membership(const Configuration& cfg, const Topology& t, Period B, int p) {
  if (erroneous(cfg[p])) return true;  // E-path with empty correct part exists
  std::set<int> seen;
  std::vector<int> stack{p};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    if (!seen.insert(u).second) continue;
    for (int q : t.neighbors(u)) {
      if (erroneous(cfg[q]) && cfg[q].c < cfg[u].c) return true;
      if (correct(cfg[q]) && cfg[q].c == cfg[u].c - 1) stack.push_back(q);
    }
  }
  return false;
}

// --- segments --------------------------------------------------------------

struct Segment {
  int first_cfg;  // inclusive configuration index
  int last_cfg;   // inclusive; steps first_cfg..last_cfg-1 belong here
  bool clean;     // first configuration has no roots
};

struct SegmentDecomposition {
  std::vector<int> boundaries;  // config indices where the root set shrinks
  std::vector<Segment> segments;

  int segment_of_step(int step) const {
    for (size_t k = 0; k < segments.size(); ++k)
      if (step >= segments[k].first_cfg && step < segments[k].last_cfg)
        return static_cast<int>(k);
    return -1;
  }
};

inline SegmentDecomposition segment_decomposition(const Trace& tr, const Topology& t,
                                                  Period B) {
  SegmentDecomposition dec;
  std::vector<std::set<int>> rootsets;
  for (size_t i = 0; i < tr.config_count(); ++i) {
    auto r = roots_of(tr.config(i), t, B);
    rootsets.emplace_back(r.begin(), r.end());
  }
  for (size_t i = 1; i < rootsets.size(); ++i) {
    if (!std::includes(rootsets[i - 1].begin(), rootsets[i - 1].end(), rootsets[i].begin(),
                       rootsets[i].end()))
      throw Error(Error::Kind::RootCreationDetected,
                  "root created at configuration " + std::to_string(i));
    if (rootsets[i].size() < rootsets[i - 1].size())
      dec.boundaries.push_back(static_cast<int>(i));
  }
  int start = 0;
  for (int b : dec.boundaries) {
    dec.segments.push_back({start, b, rootsets[start].empty()});
    start = b;
  }
  dec.segments.push_back(
      {start, static_cast<int>(tr.config_count()) - 1, rootsets[start].empty()});
  return dec;
}

// --- move census -----------------------------------------------------------

struct MoveCensus {
  std::vector<long> r_moves, p_moves, c_moves, u_moves;     // per node
  std::vector<std::vector<long>> u_per_segment;             // [node][segment]
  std::vector<std::vector<int>> rp_targets;                 // per node, in firing order
  long total_moves = 0;

  long total(const std::vector<long>& v) const {
    long s = 0;
    for (long x : v) s += x;
    return s;
  }
};

inline MoveCensus move_census(const Trace& tr, const SegmentDecomposition& dec) {
  int n = tr.header.n;
  MoveCensus mc;
  mc.r_moves.assign(n, 0);
  mc.p_moves.assign(n, 0);
  mc.c_moves.assign(n, 0);
  mc.u_moves.assign(n, 0);
  mc.u_per_segment.assign(n, std::vector<long>(dec.segments.size(), 0));
  mc.rp_targets.assign(n, {});
  for (const StepRecord& rec : tr.steps) {
    int seg = dec.segment_of_step(rec.index);
    for (auto [p, rule] : rec.fired) {
      ++mc.total_moves;
      switch (rule.kind) {
        case RuleId::Kind::RR: ++mc.r_moves[p]; break;
        case RuleId::Kind::RP:
          ++mc.p_moves[p];
          mc.rp_targets[p].push_back(rule.target);
          break;
        case RuleId::Kind::RC: ++mc.c_moves[p]; break;
        case RuleId::Kind::RU:
          ++mc.u_moves[p];
          if (seg >= 0) ++mc.u_per_segment[p][seg];
          break;
      }
    }
  }
  return mc;
}

inline MoveCensus move_census(const Trace& tr, const Topology& t, Period B) {
  return move_census(tr, segment_decomposition(tr, t, B));
}

// --- reports ---------------------------------------------------------------

struct CheckItem {
  std::string name;
  bool ok;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckItem> items;

  void add(const std::string& name, bool ok, const std::string& detail = "") {
    items.push_back({name, ok, detail});
  }
  bool all_ok() const {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& i) { return i.ok; });
  }
  std::string first_failure() const {
    for (const auto& i : items)
      if (!i.ok) return i.name + (i.detail.empty() ? "" : ": " + i.detail);
    return "";
  }
};

// First configuration index with no roots, or nullopt.
inline std::optional<int> first_clean_index(const Trace& tr, const Topology& t, Period B) {
  for (size_t i = 0; i < tr.config_count(); ++i)
    if (is_clean(tr.config(i), t, B)) return static_cast<int>(i);
  return std::nullopt;
}

// Replay contract: every selection is a nonempty subset of the enabled set,
// fired rules match enabled_rule, and each post state equals apply_step of
// the previous configuration.
inline CheckReport check_replay(const Trace& tr, const Topology& t, Period B,
                                const PauxFn& paux) {
  CheckReport rep;
  bool sel_ok = true, fired_ok = true, post_ok = true;
  std::string detail;
  for (size_t i = 0; i < tr.steps.size(); ++i) {
    const StepRecord& rec = tr.steps[i];
    const Configuration& pre = tr.config(i);
    if (rec.selected.empty()) {
      sel_ok = false;
      detail = "empty selection at step " + std::to_string(i);
      break;
    }
    Configuration expect = pre;
    for (auto [p, rule] : rec.fired) {
      auto en = enabled_rule(pre[p], neighbor_view(pre, t, p), B, paux(p));
      if (!en) {
        sel_ok = false;
        detail = "node " + std::to_string(p) + " not enabled at step " + std::to_string(i);
      } else if (*en != rule) {
        fired_ok = false;
        detail = "rule mismatch for node " + std::to_string(p) + " at step " +
                 std::to_string(i);
      } else {
        expect[p] = apply_rule(pre[p], rule, B);
      }
    }
    if (expect != rec.post) {
      post_ok = false;
      if (detail.empty()) detail = "post mismatch at step " + std::to_string(i);
    }
    if (!(sel_ok && fired_ok && post_ok)) break;
  }
  rep.add("selections enabled", sel_ok, sel_ok ? "" : detail);
  rep.add("fired rules match guards", fired_ok, fired_ok ? "" : detail);
  rep.add("post configurations replay", post_ok, post_ok ? "" : detail);
  return rep;
}

// Per-step and per-configuration structural oracles:
//   (a) root monotonicity, (b) almost-clean/clean closure, (c) hole and
//   contiguous clock interval in almost-clean configurations, (d) E-path
//   existence for every erroneous node, (e) a root firing R_C had clock -B
//   and stops being a root.
inline CheckReport check_invariants(const Trace& tr, const Topology& t, Period B) {
  CheckReport rep;
  int D = t.diameter();
  size_t m = tr.config_count();

  std::vector<std::set<int>> rootsets(m);
  std::vector<bool> almost(m), clean(m);
  for (size_t i = 0; i < m; ++i) {
    auto r = roots_of(tr.config(i), t, B);
    rootsets[i] = {r.begin(), r.end()};
    clean[i] = rootsets[i].empty();
    almost[i] = almost_clean_by_definition(tr.config(i), t, B);
  }

  bool mono = true;
  std::string mono_detail;
  for (size_t i = 1; i < m && mono; ++i)
    for (int p : rootsets[i])
      if (!rootsets[i - 1].count(p)) {
        mono = false;
        mono_detail = "node " + std::to_string(p) + " became a root at configuration " +
                      std::to_string(i);
        break;
      }
  rep.add("root monotonicity", mono, mono_detail);

  bool closure = true;
  std::string closure_detail;
  for (size_t i = 1; i < m; ++i) {
    if (almost[i - 1] && !almost[i]) {
      closure = false;
      closure_detail = "almost-clean lost at configuration " + std::to_string(i);
      break;
    }
    if (clean[i - 1] && !clean[i]) {
      closure = false;
      closure_detail = "clean lost at configuration " + std::to_string(i);
      break;
    }
  }
  rep.add("almost-clean/clean closure", closure, closure_detail);

  bool hole_ok = true, interval_ok = true;
  std::string hole_detail, interval_detail;
  for (size_t i = 0; i < m; ++i) {
    if (!almost[i]) continue;
    const Configuration& cfg = tr.config(i);
    std::set<int> clocks;
    for (const NodeState& st : cfg) clocks.insert(st.c);
    bool all_used = true;
    for (int c = 0; c < B.B && all_used; ++c)
      if (!clocks.count(c)) all_used = false;
    if (all_used && hole_ok) {
      hole_ok = false;
      hole_detail = "no unused value in [0,B) at configuration " + std::to_string(i);
    }
    if (!clock_spread_ok(clocks, B, D) && interval_ok) {
      interval_ok = false;
      interval_detail = "clock values not connected within span D at configuration " +
                        std::to_string(i);
    }
  }
  rep.add("hole lemma", hole_ok, hole_detail);
  rep.add("contiguous clock interval", interval_ok, interval_detail);

  bool epath_ok = true;
  std::string epath_detail;
  for (size_t i = 0; i < m && epath_ok; ++i) {
    const Configuration& cfg = tr.config(i);
    for (int p = 0; p < t.size() && epath_ok; ++p) {
      if (!erroneous(cfg[p])) continue;
      try {
        auto path = find_e_path(cfg, t, B, p);
        if (!valid_e_path(cfg, t, B, path)) {
          epath_ok = false;
          epath_detail = "invalid E-path from node " + std::to_string(p) +
                         " at configuration " + std::to_string(i);
        }
      } catch (const Error&) {
        epath_ok = false;
        epath_detail = "no E-path from node " + std::to_string(p) + " at configuration " +
                       std::to_string(i);
      }
    }
  }
  rep.add("E-path existence", epath_ok, epath_detail);

  bool rootrc_ok = true;
  std::string rootrc_detail;
  for (size_t i = 0; i < tr.steps.size() && rootrc_ok; ++i) {
    const Configuration& pre = tr.config(i);
    for (auto [p, rule] : tr.steps[i].fired) {
      if (rule.kind != RuleId::Kind::RC || !rootsets[i].count(p)) continue;
      if (pre[p].c != -B.B || rootsets[i + 1].count(p)) {
        rootrc_ok = false;
        rootrc_detail = "root " + std::to_string(p) + " cleared irregularly at step " +
                        std::to_string(i);
        break;
      }
    }
  }
  rep.add("root R_C behavior", rootrc_ok, rootrc_detail);

  return rep;
}

// Exact move and round budgets:
//   per node R <= 1; per node U <= 2D within each unclean segment; per node
//   P <= nB; total C <= total P + n; first clean configuration at or before
//   round boundary 2D+2; clock growth at most 2D on the pre-clean prefix.
inline CheckReport check_bounds(const Trace& tr, const Topology& t, Period B,
                                const std::vector<int>& boundaries) {
  CheckReport rep;
  int n = t.size();
  int D = t.diameter();

  SegmentDecomposition dec;
  try {
    dec = segment_decomposition(tr, t, B);
  } catch (const Error& err) {
    rep.add("segment decomposition", false, err.what());
    return rep;
  }
  rep.add("segment count <= n", static_cast<int>(dec.boundaries.size()) <= n);

  MoveCensus mc = move_census(tr, dec);

  bool r_ok = true, u_ok = true, p_ok = true;
  std::string r_detail, u_detail, p_detail;
  for (int p = 0; p < n; ++p) {
    if (mc.r_moves[p] > 1 && r_ok) {
      r_ok = false;
      r_detail = "node " + std::to_string(p) + " fired R_R " +
                 std::to_string(mc.r_moves[p]) + " times";
    }
    if (mc.p_moves[p] > static_cast<long>(n) * B.B && p_ok) {
      p_ok = false;
      p_detail = "node " + std::to_string(p) + " fired R_P " +
                 std::to_string(mc.p_moves[p]) + " times";
    }
    for (size_t k = 0; k < dec.segments.size(); ++k)
      if (!dec.segments[k].clean && mc.u_per_segment[p][k] > 2L * D && u_ok) {
        u_ok = false;
        u_detail = "node " + std::to_string(p) + " fired R_U " +
                   std::to_string(mc.u_per_segment[p][k]) + " times in unclean segment " +
                   std::to_string(k);
      }
  }
  rep.add("per-node R-moves <= 1", r_ok, r_detail);
  rep.add("per-node U-moves <= 2D per unclean segment", u_ok, u_detail);
  rep.add("per-node P-moves <= nB", p_ok, p_detail);

  long total_c = mc.total(mc.c_moves), total_p = mc.total(mc.p_moves);
  rep.add("total C-moves <= total P-moves + n", total_c <= total_p + n,
          std::to_string(total_c) + " C vs " + std::to_string(total_p) + " P");

  auto clean_at = first_clean_index(tr, t, B);
  if (!clean_at) {
    rep.add("reaches clean", false, "no clean configuration in trace");
  } else {
    rep.add("reaches clean", true);
    int f = *clean_at;
    long completed_before = std::count_if(boundaries.begin(), boundaries.end(),
                                          [&](int h) { return h < f; });
    rep.add("clean within 2D+2 rounds", completed_before <= 2L * D + 1,
            "clean at configuration " + std::to_string(f) + " after " +
                std::to_string(completed_before) + " full rounds");

    bool growth_ok = true;
    std::string growth_detail;
    for (int p = 0; p < n && growth_ok; ++p) {
      int low = tr.config(0)[p].c;
      for (int j = 0; j < f; ++j) {
        int c = tr.config(j)[p].c;
        low = std::min(low, c);
        if (c - low > 2 * D) {
          growth_ok = false;
          growth_detail = "node " + std::to_string(p) + " climbed " +
                          std::to_string(c - low) + " before clean";
          break;
        }
      }
    }
    rep.add("pre-clean clock growth <= 2D", growth_ok, growth_detail);
  }
  return rep;
}

inline CheckReport check_bounds(const Trace& tr, const Topology& t, Period B) {
  PauxMode paux = parse_paux(tr.header.paux);
  return check_bounds(tr, t, B, round_boundaries(tr, t, B, paux.fn));
}

// Liveness: in every clean configuration, with greedy P_aux the enabled set
// is nonempty.
inline CheckReport check_liveness(const Trace& tr, const Topology& t, Period B) {
  CheckReport rep;
  bool ok = true;
  std::string detail;
  for (size_t i = 0; i < tr.config_count(); ++i) {
    const Configuration& cfg = tr.config(i);
    if (!is_clean(cfg, t, B)) continue;
    if (enabled_set(cfg, t, B, paux_always(true)).empty()) {
      ok = false;
      detail = "clean configuration " + std::to_string(i) + " has no enabled node";
      break;
    }
  }
  rep.add("liveness in clean configurations", ok, detail);
  return rep;
}

}  // namespace unison
