#pragma once

// Clock arithmetic, node states, guard predicates, and the four prioritized
// rules of the phase-clock algorithm, plus whole-configuration step
// application. Everything here is pure; guards only ever see the multiset of
// neighbor states, never neighbor identities.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unison/error.hpp"
#include "unison/topology.hpp"

namespace unison {

// Clock period. Valid runs require B >= max(4, 2D+2) for the attached
// topology's diameter D.
struct Period {
  int B;
};

inline Period auto_period(const Topology& t) {
  return Period{std::max(4, 2 * t.diameter() + 2)};
}

inline void validate_period(Period B, const Topology& t) {
  if (B.B < 4 || B.B < 2 * t.diameter() + 2)
    throw Error(Error::Kind::InvalidPeriod,
                "period must be at least max(4, 2D+2), got B=" + std::to_string(B.B));
}

enum class Status : unsigned char { C, E };

// Domain: (C, x) with x in [-B, B-1], or (E, x) with x in [-B, -1].
struct NodeState {
  Status s;
  int c;

  auto operator<=>(const NodeState&) const = default;
};

inline bool correct(const NodeState& st) { return st.s == Status::C; }
inline bool erroneous(const NodeState& st) { return st.s == Status::E; }

inline bool state_valid(const NodeState& st, Period B) {
  if (st.c < -B.B) return false;
  return correct(st) ? st.c <= B.B - 1 : st.c <= -1;
}

using Configuration = std::vector<NodeState>;

struct DomainViolationReport {
  int node;
  NodeState state;
};

inline std::vector<DomainViolationReport> validate_configuration(const Configuration& cfg,
                                                                 Period B) {
  std::vector<DomainViolationReport> bad;
  for (int p = 0; p < static_cast<int>(cfg.size()); ++p)
    if (!state_valid(cfg[p], B)) bad.push_back({p, cfg[p]});
  return bad;
}

// --- clock arithmetic ------------------------------------------------------

// +_B 1: wraps only at B-1 -> 0; negative clocks climb normally (-B -> -B+1).
inline int increment_mod(int c, Period B) { return c == B.B - 1 ? 0 : c + 1; }

// 0 if equal, 1 if one is the +_B successor of the other, 2 otherwise.
inline int clock_dist(int a, int b, Period B) {
  if (a == b) return 0;
  if (b == increment_mod(a, B) || a == increment_mod(b, B)) return 1;
  return 2;
}

// Undirected distance in the successor graph on [-B, B-1]: the negative
// clocks form a chain feeding the cycle [0, B) at 0, so 0 has two
// predecessors, -1 and B-1. This is the metric in which neighboring nodes
// sit at distance <= 1 whenever clock_dist <= 1.
inline int clock_chain_dist(int a, int b, Period B) {
  auto cyc = [&](int x, int y) {
    int d = std::abs(x - y);
    return std::min(d, B.B - d);
  };
  if (a >= 0 && b >= 0) return cyc(a, b);
  if (a < 0 && b < 0) return std::abs(a - b);
  int neg = std::min(a, b), pos = std::max(a, b);
  return -neg + cyc(0, pos);
}

// --- guard predicates ------------------------------------------------------
//
// Each predicate takes the node's own state and the multiset of its
// neighbors' states.

inline bool pred_root(const NodeState& own, const std::vector<NodeState>& nbrs, Period B) {
  if (erroneous(own)) {
    return std::none_of(nbrs.begin(), nbrs.end(),
                        [&](const NodeState& q) { return erroneous(q) && q.c < own.c; });
  }
  return std::any_of(nbrs.begin(), nbrs.end(), [&](const NodeState& q) {
    return own.c < q.c && clock_dist(q.c, own.c, B) >= 2;
  });
}

inline bool pred_active_root(const NodeState& own, const std::vector<NodeState>& nbrs,
                             Period B) {
  return pred_root(own, nbrs, B) && (own.c != -B.B || correct(own));
}

// Minimal i with errorPropag(p, i), i.e. 1 + min clock over erroneous
// neighbors at least two below own clock. The whole R_P(i) family collapses
// to this target by the rule priorities. Targets are themselves erroneous
// clocks, so i <= -1: a neighbor at (E, -1) propagates nothing.
inline std::optional<int> error_propag_target(const NodeState& own,
                                              const std::vector<NodeState>& nbrs) {
  std::optional<int> target;
  for (const NodeState& q : nbrs)
    if (erroneous(q) && q.c <= own.c - 2 && q.c <= -2)
      if (!target || q.c + 1 < *target) target = q.c + 1;
  return target;
}

inline bool pred_can_clear_e(const NodeState& own, const std::vector<NodeState>& nbrs) {
  if (!erroneous(own)) return false;
  return std::all_of(nbrs.begin(), nbrs.end(), [&](const NodeState& q) {
    bool near = q.c >= own.c - 1 && q.c <= own.c + 1;
    return near && (q.c != own.c + 1 || correct(q));
  });
}

inline bool pred_unison_move(const NodeState& own, const std::vector<NodeState>& nbrs,
                             Period B) {
  if (!correct(own)) return false;
  int next = increment_mod(own.c, B);
  return std::all_of(nbrs.begin(), nbrs.end(),
                     [&](const NodeState& q) { return q.c == own.c || q.c == next; });
}

inline bool has_successor_neighbor(const NodeState& own, const std::vector<NodeState>& nbrs,
                                   Period B) {
  int next = increment_mod(own.c, B);
  return std::any_of(nbrs.begin(), nbrs.end(),
                     [&](const NodeState& q) { return q.c == next; });
}

// --- rules -----------------------------------------------------------------

struct RuleId {
  enum class Kind : unsigned char { RR, RP, RC, RU };
  Kind kind;
  int target = 0;  // only meaningful for RP

  bool operator==(const RuleId&) const = default;

  static RuleId rr() { return {Kind::RR, 0}; }
  static RuleId rp(int target) { return {Kind::RP, target}; }
  static RuleId rc() { return {Kind::RC, 0}; }
  static RuleId ru() { return {Kind::RU, 0}; }
};

inline std::string to_string(RuleId r) {
  switch (r.kind) {
    case RuleId::Kind::RR: return "RR";
    case RuleId::Kind::RP: return "RP(" + std::to_string(r.target) + ")";
    case RuleId::Kind::RC: return "RC";
    case RuleId::Kind::RU: return "RU";
  }
  return "?";
}

// Highest-priority enabled rule, or nullopt. Priorities: R_R, then R_P with
// minimal target, then R_C / R_U (which are mutually exclusive by status).
inline std::optional<RuleId> enabled_rule(const NodeState& own,
                                          const std::vector<NodeState>& nbrs, Period B,
                                          bool paux) {
  if (!state_valid(own, B))
    throw Error(Error::Kind::DomainViolation, "enabled_rule: own state outside Pairs domain");
  for (const NodeState& q : nbrs)
    if (!state_valid(q, B))
      throw Error(Error::Kind::DomainViolation,
                  "enabled_rule: neighbor state outside Pairs domain");

  if (pred_active_root(own, nbrs, B)) return RuleId::rr();
  if (auto i = error_propag_target(own, nbrs)) return RuleId::rp(*i);
  if (pred_can_clear_e(own, nbrs)) return RuleId::rc();
  if (pred_unison_move(own, nbrs, B) && (paux || has_successor_neighbor(own, nbrs, B)))
    return RuleId::ru();
  return std::nullopt;
}

inline NodeState apply_rule(const NodeState& own, RuleId rule, Period B) {
  switch (rule.kind) {
    case RuleId::Kind::RR: return {Status::E, -B.B};
    case RuleId::Kind::RP: return {Status::E, rule.target};
    case RuleId::Kind::RC: return {Status::C, own.c};
    case RuleId::Kind::RU: return {Status::C, increment_mod(own.c, B)};
  }
  throw Error(Error::Kind::InternalInvariantBroken, "apply_rule: bad rule kind");
}

// --- whole-configuration operations ---------------------------------------

inline std::vector<NodeState> neighbor_view(const Configuration& cfg, const Topology& t,
                                            int p) {
  std::vector<NodeState> view;
  view.reserve(t.neighbors(p).size());
  for (int q : t.neighbors(p)) view.push_back(cfg[q]);
  return view;
}

// P_aux as seen by a node; evaluated against the pre-step configuration.
using PauxFn = std::function<bool(int node)>;

inline PauxFn paux_always(bool value) {
  return [value](int) { return value; };
}

inline std::vector<int> enabled_set(const Configuration& cfg, const Topology& t, Period B,
                                    const PauxFn& paux) {
  std::vector<int> result;
  for (int p = 0; p < t.size(); ++p)
    if (enabled_rule(cfg[p], neighbor_view(cfg, t, p), B, paux(p))) result.push_back(p);
  return result;
}

// All guards read the pre-step configuration; writes land simultaneously.
inline std::pair<Configuration, std::vector<std::pair<int, RuleId>>> apply_step(
    const Configuration& cfg, const Topology& t, Period B, const std::vector<int>& selected,
    const PauxFn& paux) {
  Configuration next = cfg;
  std::vector<std::pair<int, RuleId>> fired;
  for (int p : selected) {
    auto rule = enabled_rule(cfg[p], neighbor_view(cfg, t, p), B, paux(p));
    if (!rule)
      throw Error(Error::Kind::NodeNotEnabled,
                  "apply_step: node " + std::to_string(p) + " is not enabled");
    next[p] = apply_rule(cfg[p], *rule, B);
    fired.emplace_back(p, *rule);
  }
  return {std::move(next), std::move(fired)};
}

}  // namespace unison
