#pragma once

// Exhaustive verification over the full configuration space of a tiny
// instance. Rather than enumerating schedules (exponential), these checks
// walk the step graph itself: every domain-valid configuration is an initial
// configuration, every nonempty subset of the enabled set is a daemon
// choice, so a property checked on all states/transitions of this graph
// holds on every execution under every unfair daemon.
//
// Pre-clean, the step graph is acyclic (a cycle would yield an infinite
// execution that never stabilizes, contradicting the bounded move budget),
// which makes worst-case per-node move counts computable by longest-path
// dynamic programming. A cycle among non-clean configurations is reported
// as a hard error.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "unison/core.hpp"
#include "unison/scheduler.hpp"
#include "unison/verifier.hpp"

namespace unison {

class StateSpace {
 public:
  StateSpace(const Topology& t, Period B) : t_(t), B_(B), n_(t.size()), per_(3 * B.B) {
    validate_period(B, t);
    total_ = 1;
    for (int i = 0; i < n_; ++i) total_ *= per_;
    pow_.resize(n_);
    long p = 1;
    for (int i = 0; i < n_; ++i) { pow_[i] = p; p *= per_; }

    clean_.resize(total_);
    almost_.resize(total_);
    root_count_.resize(total_);
    enabled_mask_.resize(total_);
    next_digit_.assign(total_ * n_, -1);
    rule_kind_.assign(total_ * n_, -1);
    for (long idx = 0; idx < total_; ++idx) {
      Configuration cfg = decode(idx);
      int roots = 0;
      unsigned mask = 0;
      for (int p2 = 0; p2 < n_; ++p2) {
        auto nbrs = neighbor_view(cfg, t_, p2);
        if (pred_root(cfg[p2], nbrs, B_)) ++roots;
        if (auto rule = enabled_rule(cfg[p2], nbrs, B_, true)) {
          mask |= 1u << p2;
          next_digit_[idx * n_ + p2] = digit(apply_rule(cfg[p2], *rule, B_));
          rule_kind_[idx * n_ + p2] = static_cast<int>(rule->kind);
        }
      }
      root_count_[idx] = roots;
      clean_[idx] = roots == 0;
      almost_[idx] = almost_clean_by_definition(cfg, t_, B_);
      enabled_mask_[idx] = mask;
    }
  }

  const Topology& topology() const { return t_; }
  Period period() const { return B_; }
  int n() const { return n_; }
  long size() const { return total_; }
  bool clean(long idx) const { return clean_[idx]; }
  bool almost_clean(long idx) const { return almost_[idx]; }
  int root_count(long idx) const { return root_count_[idx]; }
  unsigned enabled_mask(long idx) const { return enabled_mask_[idx]; }
  int rule_kind(long idx, int p) const { return rule_kind_[idx * n_ + p]; }

  long successor(long idx, unsigned mask) const {
    long next = idx;
    for (int p = 0; p < n_; ++p)
      if (mask & (1u << p)) {
        long old_d = (idx / pow_[p]) % per_;
        next += (next_digit_[idx * n_ + p] - old_d) * pow_[p];
      }
    return next;
  }

  Configuration decode(long idx) const {
    Configuration cfg(n_);
    for (int p = 0; p < n_; ++p) {
      int d = static_cast<int>((idx / pow_[p]) % per_);
      cfg[p] = d < B_.B ? NodeState{Status::E, d - B_.B} : NodeState{Status::C, d - 2 * B_.B};
    }
    return cfg;
  }

  long encode(const Configuration& cfg) const {
    long idx = 0;
    for (int p = 0; p < n_; ++p) idx += static_cast<long>(digit(cfg[p])) * pow_[p];
    return idx;
  }

 private:
  int digit(const NodeState& st) const {
    return erroneous(st) ? st.c + B_.B : st.c + 2 * B_.B;
  }

  Topology t_;
  Period B_;
  int n_;
  int per_;
  long total_ = 0;
  std::vector<long> pow_;
  std::vector<char> clean_, almost_;
  std::vector<int> root_count_;
  std::vector<unsigned> enabled_mask_;
  std::vector<int> next_digit_;
  std::vector<signed char> rule_kind_;
};

// Per-configuration and per-transition structural oracles over the whole
// space: classification cross-check, E-path existence, hole/interval in
// almost-clean configurations, liveness in clean ones, root monotonicity,
// closure, and root R_C behavior across every possible step.
inline CheckReport exhaustive_structural(const StateSpace& sp) {
  CheckReport rep;
  const Topology& t = sp.topology();
  Period B = sp.period();
  int n = sp.n();
  int D = t.diameter();

  bool classify_ok = true, epath_ok = true, hole_ok = true, vivant_ok = true;
  bool mono_ok = true, closure_ok = true, rootrc_ok = true, deadlock_ok = true;
  std::string detail;

  for (long idx = 0; idx < sp.size(); ++idx) {
    Configuration cfg = sp.decode(idx);
    try {
      classify_configuration(cfg, t, B);
    } catch (const Error& e) {
      if (classify_ok) detail = e.what();
      classify_ok = false;
    }
    for (int p = 0; p < n; ++p)
      if (erroneous(cfg[p])) {
        try {
          if (!valid_e_path(cfg, t, B, find_e_path(cfg, t, B, p))) epath_ok = false;
        } catch (const Error&) {
          epath_ok = false;
        }
      }
    if (sp.almost_clean(idx)) {
      std::set<int> clocks;
      for (const NodeState& st : cfg) clocks.insert(st.c);
      bool unused = false;
      for (int c = 0; c < B.B && !unused; ++c)
        if (!clocks.count(c)) unused = true;
      if (!unused) hole_ok = false;
      if (!clock_spread_ok(clocks, B, D)) hole_ok = false;
    }
    if (sp.clean(idx) && sp.enabled_mask(idx) == 0) vivant_ok = false;
    if (!sp.clean(idx) && sp.enabled_mask(idx) == 0) deadlock_ok = false;

    unsigned em = sp.enabled_mask(idx);
    for (unsigned mask = em; mask; mask = (mask - 1) & em) {
      long next = sp.successor(idx, mask);
      if (sp.root_count(next) > sp.root_count(idx)) mono_ok = false;
      // subset check, not just count: no root may appear
      if (mono_ok) {
        Configuration post = sp.decode(next);
        for (int p = 0; p < n; ++p)
          if (pred_root(post[p], neighbor_view(post, t, p), B) &&
              !pred_root(cfg[p], neighbor_view(cfg, t, p), B))
            mono_ok = false;
      }
      if (sp.almost_clean(idx) && !sp.almost_clean(next)) closure_ok = false;
      if (sp.clean(idx) && !sp.clean(next)) closure_ok = false;
      for (int p = 0; p < n; ++p)
        if ((mask & (1u << p)) &&
            sp.rule_kind(idx, p) == static_cast<int>(RuleId::Kind::RC) &&
            pred_root(cfg[p], neighbor_view(cfg, t, p), B)) {
          Configuration post = sp.decode(next);
          if (cfg[p].c != -B.B || pred_root(post[p], neighbor_view(post, t, p), B))
            rootrc_ok = false;
        }
    }
  }

  rep.add("classification cross-check", classify_ok, detail);
  rep.add("E-path existence", epath_ok);
  rep.add("hole and interval lemmas", hole_ok);
  rep.add("liveness in clean configurations", vivant_ok);
  rep.add("no non-clean deadlock", deadlock_ok);
  rep.add("root monotonicity", mono_ok);
  rep.add("almost-clean/clean closure", closure_ok);
  rep.add("root R_C behavior", rootrc_ok);
  return rep;
}

// Worst-case round count to the first clean configuration, over every
// initial configuration and every daemon choice. Explores states
// (configuration, pending round set, completed rounds); fails if any
// non-clean configuration survives `round_limit` completed rounds.
inline CheckReport exhaustive_round_bound(const StateSpace& sp, int round_limit) {
  CheckReport rep;
  int n = sp.n();
  long masks = 1L << n;
  std::vector<char> visited(sp.size() * masks * (round_limit + 1), 0);
  auto key = [&](long idx, unsigned pending, int r) {
    return (idx * masks + pending) * (round_limit + 1) + r;
  };

  bool ok = true;
  std::string detail;
  struct Item { long idx; unsigned pending; int r; };
  std::vector<Item> stack;

  for (long start = 0; start < sp.size() && ok; ++start) {
    if (sp.clean(start)) continue;  // clean at round 0, bound holds
    unsigned em0 = sp.enabled_mask(start);
    if (em0 == 0) {  // non-clean deadlock; caught by structural check too
      ok = false;
      detail = "non-clean terminal configuration";
      break;
    }
    if (!visited[key(start, em0, 0)]) {
      visited[key(start, em0, 0)] = 1;
      stack.push_back({start, em0, 0});
    }
    while (!stack.empty() && ok) {
      auto [idx, pending, r] = stack.back();
      stack.pop_back();
      unsigned em = sp.enabled_mask(idx);
      for (unsigned mask = em; mask; mask = (mask - 1) & em) {
        long next = sp.successor(idx, mask);
        if (sp.clean(next)) continue;  // stabilized on this branch
        unsigned em_next = sp.enabled_mask(next);
        unsigned pend = pending & ~mask & em_next;
        int r2 = r;
        if (pend == 0) {
          ++r2;
          if (r2 >= round_limit) {
            ok = false;
            detail = "non-clean configuration after " + std::to_string(round_limit) +
                     " rounds";
            break;
          }
          pend = em_next;
          if (pend == 0) {
            ok = false;
            detail = "non-clean terminal configuration";
            break;
          }
        }
        if (!visited[key(next, pend, r2)]) {
          visited[key(next, pend, r2)] = 1;
          stack.push_back({next, pend, r2});
        }
      }
    }
  }
  rep.add("clean within " + std::to_string(round_limit) + " rounds (exhaustive)", ok, detail);
  return rep;
}

// Longest-path DP over the acyclic non-clean step graph: exact worst-case
// per-node move counts and clock growth over every execution from every
// initial configuration.
inline CheckReport exhaustive_move_budgets(const StateSpace& sp) {
  CheckReport rep;
  int n = sp.n();
  int D = sp.topology().diameter();
  int B = sp.period().B;

  // memo values per non-clean configuration
  std::vector<std::vector<int>> max_r(sp.size()), max_p(sp.size()), max_useg(sp.size()),
      best_gain(sp.size());
  std::vector<int> max_cp(sp.size());
  std::vector<char> state(sp.size(), 0);  // 0 new, 1 on stack, 2 done

  std::function<void(long)> visit = [&](long idx) {
    if (state[idx] == 2) return;
    if (state[idx] == 1)
      throw Error(Error::Kind::InternalInvariantBroken,
                  "cycle among non-clean configurations");
    state[idx] = 1;
    Configuration cfg = sp.decode(idx);
    std::vector<int> r(n, 0), p(n, 0), u(n, 0), g(n, 0);
    int cp = 0;
    unsigned em = sp.enabled_mask(idx);
    for (unsigned mask = em; mask; mask = (mask - 1) & em) {
      long next = sp.successor(idx, mask);
      bool next_clean = sp.clean(next);
      bool shrink = sp.root_count(next) < sp.root_count(idx);
      if (!next_clean) visit(next);
      int d_cp = 0;
      for (int q = 0; q < n; ++q) {
        if (!(mask & (1u << q))) continue;
        int kind = sp.rule_kind(idx, q);
        if (kind == static_cast<int>(RuleId::Kind::RC)) ++d_cp;
        if (kind == static_cast<int>(RuleId::Kind::RP)) --d_cp;
        int fired_r = kind == static_cast<int>(RuleId::Kind::RR) ? 1 : 0;
        int fired_p = kind == static_cast<int>(RuleId::Kind::RP) ? 1 : 0;
        int fired_u = kind == static_cast<int>(RuleId::Kind::RU) ? 1 : 0;
        r[q] = std::max(r[q], fired_r + (next_clean ? 0 : max_r[next][q]));
        p[q] = std::max(p[q], fired_p + (next_clean ? 0 : max_p[next][q]));
        u[q] = std::max(u[q], fired_u + (next_clean || shrink ? 0 : max_useg[next][q]));
      }
      for (int q = 0; q < n; ++q) {
        if (mask & (1u << q)) continue;
        r[q] = std::max(r[q], next_clean ? 0 : max_r[next][q]);
        p[q] = std::max(p[q], next_clean ? 0 : max_p[next][q]);
        u[q] = std::max(u[q], next_clean || shrink ? 0 : max_useg[next][q]);
      }
      cp = std::max(cp, d_cp + (next_clean ? 0 : max_cp[next]));
      if (!next_clean) {
        Configuration post = sp.decode(next);
        for (int q = 0; q < n; ++q) {
          int delta = post[q].c - cfg[q].c;
          g[q] = std::max(g[q], delta + std::max(0, best_gain[next][q]));
        }
      }
    }
    max_r[idx] = std::move(r);
    max_p[idx] = std::move(p);
    max_useg[idx] = std::move(u);
    best_gain[idx] = std::move(g);
    max_cp[idx] = cp;
    state[idx] = 2;
  };

  bool r_ok = true, p_ok = true, u_ok = true, cp_ok = true, growth_ok = true;
  std::string detail;
  try {
    for (long idx = 0; idx < sp.size(); ++idx) {
      if (sp.clean(idx)) continue;
      visit(idx);
      for (int q = 0; q < n; ++q) {
        if (max_r[idx][q] > 1) r_ok = false;
        if (max_p[idx][q] > n * B) p_ok = false;
        if (max_useg[idx][q] > 2 * D) u_ok = false;
        if (best_gain[idx][q] > 2 * D) growth_ok = false;
      }
      if (max_cp[idx] > n) cp_ok = false;
    }
  } catch (const Error& e) {
    rep.add("acyclic pre-clean step graph", false, e.what());
    return rep;
  }
  rep.add("acyclic pre-clean step graph", true);
  rep.add("per-node R-moves <= 1 (exhaustive)", r_ok);
  rep.add("per-node P-moves <= nB (exhaustive)", p_ok);
  rep.add("per-node U-moves <= 2D per unclean segment (exhaustive)", u_ok);
  rep.add("C-moves <= P-moves + n (exhaustive)", cp_ok);
  rep.add("pre-clean clock growth <= 2D (exhaustive)", growth_ok);
  return rep;
}

}  // namespace unison
