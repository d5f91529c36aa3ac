#pragma once

// Daemons (selection policies), the execution engine producing replayable
// traces, round accounting via neutralization, and exhaustive schedule
// enumeration for tiny instances.

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "unison/core.hpp"
#include "unison/error.hpp"
#include "unison/topology.hpp"

namespace unison {

struct DaemonStrategy {
  enum class Kind { Synchronous, CentralRandom, DistributedRandom, Scripted };

  Kind kind = Kind::Synchronous;
  double p_select = 0.5;                   // DistributedRandom only
  std::vector<std::vector<int>> script;    // Scripted only

  static DaemonStrategy synchronous() { return {Kind::Synchronous}; }
  static DaemonStrategy central_random() { return {Kind::CentralRandom}; }
  static DaemonStrategy distributed_random(double p) {
    if (p <= 0.0 || p > 1.0)
      throw Error(Error::Kind::InvalidParams, "dist-random probability must be in (0,1]");
    return {Kind::DistributedRandom, p};
  }
  static DaemonStrategy scripted(std::vector<std::vector<int>> sel) {
    DaemonStrategy d{Kind::Scripted};
    d.script = std::move(sel);
    return d;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Synchronous: return "sync";
      case Kind::CentralRandom: return "central-random";
      case Kind::DistributedRandom: return "dist-random:" + std::to_string(p_select);
      case Kind::Scripted: return "script";
    }
    return "?";
  }
};

inline DaemonStrategy parse_daemon(const std::string& spec) {
  if (spec == "sync" || spec == "synchronous") return DaemonStrategy::synchronous();
  if (spec == "central-random") return DaemonStrategy::central_random();
  if (spec.rfind("dist-random:", 0) == 0)
    return DaemonStrategy::distributed_random(std::stod(spec.substr(12)));
  throw Error(Error::Kind::InvalidParams, "unknown daemon: " + spec);
}

// P_aux mode carried by a run; `fn` is evaluated per node against the
// pre-step configuration. Lazy mode lives in the synchronizer, which builds
// its own PauxMode from the input algorithm.
struct PauxMode {
  std::string name;
  PauxFn fn;

  static PauxMode greedy() { return {"greedy", paux_always(true)}; }
  static PauxMode always_false() { return {"false", paux_always(false)}; }
  static PauxMode custom(std::string name, PauxFn fn) { return {std::move(name), std::move(fn)}; }
};

inline PauxMode parse_paux(const std::string& spec) {
  if (spec == "greedy" || spec == "true") return PauxMode::greedy();
  if (spec == "false") return PauxMode::always_false();
  throw Error(Error::Kind::InvalidParams, "unknown paux mode: " + spec);
}

enum class Termination { Terminal, StepLimit, CleanReachedAndStopped, ScriptInvalid };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::Terminal: return "Terminal";
    case Termination::StepLimit: return "StepLimit";
    case Termination::CleanReachedAndStopped: return "CleanReachedAndStopped";
    case Termination::ScriptInvalid: return "ScriptInvalid";
  }
  return "?";
}

enum class StopOn { Terminal, Clean, Never };

struct RunLimits {
  long max_steps = 100000;
  StopOn stop_on = StopOn::Terminal;
};

// Algorithm payload (old, curr) per node; used only by synchronizer traces.
using AlgPair = std::pair<std::int64_t, std::int64_t>;

struct StepRecord {
  int index = 0;
  std::vector<int> selected;                     // sorted
  std::vector<std::pair<int, RuleId>> fired;     // keyed by selected, sorted
  Configuration post;
  std::vector<AlgPair> alg_post;                 // empty for plain runs

  bool operator==(const StepRecord&) const = default;
};

struct TraceHeader {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  int B = 0;
  Configuration init;
  std::string daemon;
  std::string paux;
  std::uint64_t seed = 0;
  std::string alg;                 // empty for plain unison runs
  std::vector<AlgPair> alg_init;   // empty for plain unison runs

  bool operator==(const TraceHeader&) const = default;

  Topology topology() const { return Topology(n, edges); }
  Period period() const { return Period{B}; }
};

struct Trace {
  TraceHeader header;
  std::vector<StepRecord> steps;
  Termination termination = Termination::Terminal;

  bool operator==(const Trace&) const = default;

  // Configurations are indexed 0..steps.size(); 0 is the initial one.
  const Configuration& config(size_t i) const {
    return i == 0 ? header.init : steps[i - 1].post;
  }
  size_t config_count() const { return steps.size() + 1; }
};

inline bool is_clean(const Configuration& cfg, const Topology& t, Period B) {
  for (int p = 0; p < t.size(); ++p)
    if (pred_root(cfg[p], neighbor_view(cfg, t, p), B)) return false;
  return true;
}

// --- daemon selection ------------------------------------------------------

inline std::vector<int> daemon_select(const DaemonStrategy& d, const std::vector<int>& enabled,
                                      std::mt19937_64& rng) {
  switch (d.kind) {
    case DaemonStrategy::Kind::Synchronous:
      return enabled;
    case DaemonStrategy::Kind::CentralRandom: {
      std::uniform_int_distribution<size_t> pick(0, enabled.size() - 1);
      return {enabled[pick(rng)]};
    }
    case DaemonStrategy::Kind::DistributedRandom: {
      std::bernoulli_distribution coin(d.p_select);
      // Resample on an empty pick; bounded retries, then one central pick so
      // the step always makes progress.
      for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<int> sel;
        for (int p : enabled)
          if (coin(rng)) sel.push_back(p);
        if (!sel.empty()) return sel;
      }
      std::uniform_int_distribution<size_t> pick(0, enabled.size() - 1);
      return {enabled[pick(rng)]};
    }
    case DaemonStrategy::Kind::Scripted:
      throw Error(Error::Kind::ScriptInvalid, "scripted daemon handled by run loop");
  }
  throw Error(Error::Kind::InvalidParams, "bad daemon kind");
}

// --- execution engine ------------------------------------------------------

inline Trace run_execution(const Topology& t, Period B, const Configuration& cfg0,
                           const DaemonStrategy& daemon, const PauxMode& paux,
                           RunLimits limits, std::uint64_t seed) {
  validate_period(B, t);
  if (static_cast<int>(cfg0.size()) != t.size() || !validate_configuration(cfg0, B).empty())
    throw Error(Error::Kind::InvalidInitialConfiguration,
                "initial configuration violates the state domain");

  Trace tr;
  tr.header = {t.size(), t.edges(), B.B, cfg0, daemon.describe(), paux.name, seed, "", {}};

  std::mt19937_64 rng(seed);
  Configuration cfg = cfg0;
  for (long step = 0;; ++step) {
    if (limits.stop_on == StopOn::Clean && is_clean(cfg, t, B)) {
      tr.termination = Termination::CleanReachedAndStopped;
      break;
    }
    std::vector<int> enabled = enabled_set(cfg, t, B, paux.fn);
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

    try {
      auto [next, fired] = apply_step(cfg, t, B, selection, paux.fn);
      StepRecord rec;
      rec.index = static_cast<int>(step);
      rec.selected = selection;
      std::sort(rec.selected.begin(), rec.selected.end());
      std::sort(fired.begin(), fired.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      rec.fired = std::move(fired);
      rec.post = next;
      tr.steps.push_back(std::move(rec));
      cfg = std::move(next);
    } catch (const Error& err) {
      if (err.kind == Error::Kind::NodeNotEnabled &&
          daemon.kind == DaemonStrategy::Kind::Scripted) {
        tr.termination = Termination::ScriptInvalid;
        break;
      }
      throw;
    }
  }
  return tr;
}

// --- rounds ----------------------------------------------------------------

// Round accounting from per-configuration enabled flags plus the selections.
// Returns the 1-based configuration indices that end each round: per round,
// start from the nodes enabled at the round's first configuration and remove
// a node when it fires or is neutralized; the round ends when none are left.
inline std::vector<int> round_boundaries_from(const std::vector<std::vector<char>>& enabled,
                                              const std::vector<std::vector<int>>& selections) {
  std::vector<int> boundaries;
  if (enabled.empty()) return boundaries;
  std::set<int> pending;
  for (int p = 0; p < static_cast<int>(enabled[0].size()); ++p)
    if (enabled[0][p]) pending.insert(p);
  for (size_t i = 0; i < selections.size(); ++i) {
    for (int p : selections[i]) pending.erase(p);
    const auto& after = enabled[i + 1];
    std::erase_if(pending, [&](int p) { return !after[p]; });
    if (pending.empty()) {
      boundaries.push_back(static_cast<int>(i) + 1);
      for (int p = 0; p < static_cast<int>(after.size()); ++p)
        if (after[p]) pending.insert(p);
      if (pending.empty()) break;  // terminal; all further rounds are empty
    }
  }
  return boundaries;
}

inline std::vector<std::vector<char>> enabled_flags_along(const Trace& tr, const Topology& t,
                                                          Period B, const PauxFn& paux) {
  std::vector<std::vector<char>> flags;
  for (size_t i = 0; i < tr.config_count(); ++i) {
    std::vector<char> f(t.size(), 0);
    for (int p : enabled_set(tr.config(i), t, B, paux)) f[p] = 1;
    flags.push_back(std::move(f));
  }
  return flags;
}

inline std::vector<int> round_boundaries(const Trace& tr, const Topology& t, Period B,
                                         const PauxFn& paux) {
  std::vector<std::vector<int>> selections;
  for (const auto& s : tr.steps) selections.push_back(s.selected);
  return round_boundaries_from(enabled_flags_along(tr, t, B, paux), selections);
}

// --- exhaustive schedule enumeration ---------------------------------------

struct EnumBounds {
  int max_depth = 20;
  long max_visited = 1000000;
};

struct EnumResult {
  bool complete = true;  // false once a bound was hit anywhere in the stream
  long executions = 0;
};

// Depth-first enumeration over all nonempty subsets of the enabled set at
// each step. Configurations already on the current path cut the branch (the
// execution is infinite); such truncated traces are emitted as StepLimit,
// as are traces cut at max_depth. Intended for n <= 4 and small B.
inline EnumResult enumerate_executions(const Topology& t, Period B, const Configuration& cfg0,
                                       const PauxMode& paux, EnumBounds bounds,
                                       const std::function<void(const Trace&)>& sink) {
  validate_period(B, t);
  if (static_cast<int>(cfg0.size()) != t.size() || !validate_configuration(cfg0, B).empty())
    throw Error(Error::Kind::InvalidInitialConfiguration,
                "initial configuration violates the state domain");

  EnumResult result;
  long visited = 0;

  Trace tr;
  tr.header = {t.size(), t.edges(), B.B, cfg0, "exhaustive", paux.name, 0, "", {}};

  std::set<Configuration> on_path;
  std::function<void(const Configuration&, int)> dfs = [&](const Configuration& cfg,
                                                           int depth) {
    if (++visited > bounds.max_visited) {
      result.complete = false;
      return;
    }
    std::vector<int> enabled = enabled_set(cfg, t, B, paux.fn);
    if (enabled.empty()) {
      tr.termination = Termination::Terminal;
      ++result.executions;
      sink(tr);
      return;
    }
    if (depth >= bounds.max_depth || on_path.contains(cfg)) {
      result.complete = false;
      tr.termination = Termination::StepLimit;
      ++result.executions;
      sink(tr);
      return;
    }
    on_path.insert(cfg);
    int k = static_cast<int>(enabled.size());
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
      std::vector<int> selection;
      for (int b = 0; b < k; ++b)
        if (mask & (1u << b)) selection.push_back(enabled[b]);
      auto [next, fired] = apply_step(cfg, t, B, selection, paux.fn);
      StepRecord rec;
      rec.index = depth;
      rec.selected = selection;
      rec.fired = std::move(fired);
      rec.post = next;
      tr.steps.push_back(std::move(rec));
      dfs(next, depth + 1);
      tr.steps.pop_back();
      if (visited > bounds.max_visited) break;
    }
    on_path.erase(cfg);
  };
  dfs(cfg0, 0);
  return result;
}

}  // namespace unison
