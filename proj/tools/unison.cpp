// Command-line front end: run executions, verify traces, sweep campaigns,
// and drive the synchronizer. Exit codes: 0 ok, 1 invariant violation,
// 2 bound violation, 3 input error.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "unison/core.hpp"
#include "unison/error.hpp"
#include "unison/exhaustive.hpp"
#include "unison/scheduler.hpp"
#include "unison/synchronizer.hpp"
#include "unison/topology.hpp"
#include "unison/trace_io.hpp"
#include "unison/verifier.hpp"

namespace {

using namespace unison;

constexpr int kOk = 0;
constexpr int kInvariant = 1;
constexpr int kBound = 2;
constexpr int kInput = 3;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// graph spec: file:PATH or gen:KIND:P1:P2...
Topology parse_graph(const std::string& spec, std::uint64_t seed) {
  if (spec.rfind("file:", 0) == 0) return load_topology(spec.substr(5));
  if (spec.rfind("gen:", 0) == 0) {
    auto parts = split(spec.substr(4), ':');
    if (parts.empty()) throw Error(Error::Kind::InvalidParams, "empty generator spec");
    std::vector<int> params;
    for (size_t i = 1; i < parts.size(); ++i) params.push_back(std::stoi(parts[i]));
    return generate_topology(parts[0], params, seed);
  }
  throw Error(Error::Kind::InvalidParams, "graph spec must be file:... or gen:...");
}

Period parse_period(const std::string& spec, const Topology& t) {
  Period B = spec == "auto" ? auto_period(t) : Period{std::stoi(spec)};
  validate_period(B, t);
  return B;
}

Configuration random_configuration(int n, Period B, std::mt19937_64& rng) {
  Configuration cfg(n);
  std::uniform_int_distribution<int> pick(0, 3 * B.B - 1);
  for (int p = 0; p < n; ++p) {
    int d = pick(rng);
    cfg[p] = d < B.B ? NodeState{Status::E, d - B.B} : NodeState{Status::C, d - 2 * B.B};
  }
  return cfg;
}

// init spec: file:PATH | random | clean-uniform:C | all-error-floor
Configuration parse_init(const std::string& spec, const Topology& t, Period B,
                         std::uint64_t seed) {
  if (spec.rfind("file:", 0) == 0) {
    Configuration cfg = load_configuration(spec.substr(5));
    if (static_cast<int>(cfg.size()) != t.size() || !validate_configuration(cfg, B).empty())
      throw Error(Error::Kind::InvalidInitialConfiguration,
                  "configuration file does not fit the instance");
    return cfg;
  }
  if (spec == "random") {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    return random_configuration(t.size(), B, rng);
  }
  if (spec.rfind("clean-uniform:", 0) == 0) {
    int c = std::stoi(spec.substr(14));
    NodeState st{Status::C, c};
    if (!state_valid(st, B))
      throw Error(Error::Kind::InvalidInitialConfiguration, "clock out of range");
    return Configuration(t.size(), st);
  }
  if (spec == "all-error-floor") return Configuration(t.size(), {Status::E, -B.B});
  throw Error(Error::Kind::InvalidParams, "unknown init spec: " + spec);
}

StopOn parse_stop(const std::string& s) {
  if (s == "terminal") return StopOn::Terminal;
  if (s == "clean") return StopOn::Clean;
  if (s == "never") return StopOn::Never;
  throw Error(Error::Kind::InvalidParams, "unknown stop-on: " + s);
}

void print_report(const CheckReport& rep) {
  for (const auto& item : rep.items)
    std::cout << (item.ok ? "[ ok ] " : "[FAIL] ") << item.name
              << (item.detail.empty() ? "" : " (" + item.detail + ")") << '\n';
}

long completed_rounds_before(const std::vector<int>& boundaries, int cfg_index) {
  return std::count_if(boundaries.begin(), boundaries.end(),
                       [&](int h) { return h < cfg_index; });
}

void print_run_summary(const Trace& tr, const Topology& t, Period B,
                       const std::vector<int>& boundaries) {
  MoveCensus mc = move_census(tr, t, B);
  std::cout << "n=" << tr.header.n << " B=" << tr.header.B << " D=" << t.diameter()
            << " steps=" << tr.steps.size() << " termination=" << to_string(tr.termination)
            << '\n';
  std::cout << "moves: R=" << mc.total(mc.r_moves) << " P=" << mc.total(mc.p_moves)
            << " C=" << mc.total(mc.c_moves) << " U=" << mc.total(mc.u_moves)
            << " total=" << mc.total_moves << '\n';
  if (auto f = first_clean_index(tr, t, B))
    std::cout << "clean at configuration " << *f << " after "
              << completed_rounds_before(boundaries, *f) << " completed rounds\n";
  else
    std::cout << "never clean within trace\n";
}

SyncAlgorithm algorithm_by_name(const std::string& name, int n) {
  if (name == "min-prop") return alg_min_propagation();
  if (name == "min-id-bfs") return alg_min_id_bfs(n);
  throw Error(Error::Kind::InvalidParams, "unknown algorithm: " + name);
}

int verify_trace(const Trace& tr) {
  Topology t = tr.header.topology();
  Period B = tr.header.period();
  validate_period(B, t);

  if (tr.header.alg.empty()) {
    PauxMode paux = parse_paux(tr.header.paux);
    CheckReport replay = check_replay(tr, t, B, paux.fn);
    CheckReport inv = check_invariants(tr, t, B);
    CheckReport live = check_liveness(tr, t, B);
    CheckReport bounds = check_bounds(tr, t, B);
    print_report(replay);
    print_report(inv);
    print_report(live);
    print_report(bounds);
    if (!replay.all_ok() || !inv.all_ok() || !live.all_ok()) return kInvariant;
    if (!bounds.all_ok()) return kBound;
    return kOk;
  }

  SyncAlgorithm alg = algorithm_by_name(tr.header.alg, t.size());
  CheckReport inv = check_invariants(tr, t, B);
  CheckReport equiv = check_simulation_equivalence(tr, t, B, alg);
  print_report(inv);
  print_report(equiv);
  int code = kOk;
  if (!inv.all_ok() || !equiv.all_ok()) code = kInvariant;
  if (tr.header.paux == "lazy" && tr.termination == Termination::Terminal &&
      code == kOk) {
    int T = measure_T_of_trace(tr, t, B, alg);
    CheckReport lazy = check_lazy_bounds(tr, t, B, alg, T);
    print_report(lazy);
    if (!lazy.all_ok()) code = kBound;
  }
  return code;
}

// --- sweep -----------------------------------------------------------------

struct SweepCell {
  std::string kind;
  int n;
  std::string daemon;
  std::uint64_t seed;
};

struct CellResult {
  bool ran = false;
  bool invariant_fail = false;
  bool bound_fail = false;
  std::string detail;
  int n = 0, B = 0, D = 0;
  long moves = 0, rounds = -1;
};

CellResult run_cell(const SweepCell& cell, long max_steps, bool inject_fault) {
  CellResult res;
  Topology t = cell.kind == "random"
                   ? make_random_connected(cell.n, std::min(cell.n + 1, cell.n * (cell.n - 1) / 2),
                                           cell.seed)
                   : generate_topology(cell.kind, {cell.n}, cell.seed);
  Period B = auto_period(t);
  std::mt19937_64 rng(cell.seed ^ 0x9e3779b97f4a7c15ULL);
  Configuration cfg0 = random_configuration(t.size(), B, rng);
  DaemonStrategy daemon = parse_daemon(cell.daemon);
  Trace tr = run_execution(t, B, cfg0, daemon, PauxMode::greedy(),
                           {max_steps, StopOn::Clean}, cell.seed);
  if (inject_fault) {
    // deliberately corrupt the trace so the inline verifier must fire; with
    // no steps (initial configuration already clean) break the start instead
    if (!tr.steps.empty())
      tr.steps.back().post[0].c = increment_mod(tr.steps.back().post[0].c, B);
    else
      tr.header.init[0] = {Status::E, -1};
  }
  res.ran = true;
  res.n = t.size();
  res.B = B.B;
  res.D = t.diameter();

  CheckReport replay = check_replay(tr, t, B, paux_always(true));
  CheckReport inv = check_invariants(tr, t, B);
  CheckReport live = check_liveness(tr, t, B);
  if (!replay.all_ok() || !inv.all_ok() || !live.all_ok()) {
    res.invariant_fail = true;
    res.detail = !replay.all_ok() ? replay.first_failure()
                                  : (!inv.all_ok() ? inv.first_failure() : live.first_failure());
    return res;
  }
  CheckReport bounds = check_bounds(tr, t, B);
  if (!bounds.all_ok()) {
    res.bound_fail = true;
    res.detail = bounds.first_failure();
    return res;
  }
  MoveCensus mc = move_census(tr, t, B);
  res.moves = mc.total_moves;
  auto boundaries = round_boundaries(tr, t, B, paux_always(true));
  if (auto f = first_clean_index(tr, t, B))
    res.rounds = completed_rounds_before(boundaries, *f);
  return res;
}

int sweep_threads() {
  if (const char* env = std::getenv("UNISON_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous unison simulator and verifier"};
  app.require_subcommand(1);

  std::string graph_spec, b_spec = "auto", init_spec = "random", daemon_spec = "sync";
  std::string paux_spec = "greedy", stop_spec = "terminal", out_path, trace_path;
  std::uint64_t seed = 0;
  long max_steps = 100000;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--graph", graph_spec, "file:PATH or gen:KIND:PARAMS")->required();
    cmd->add_option("--B", b_spec, "clock period or 'auto'");
    cmd->add_option("--init", init_spec, "file:PATH | random | clean-uniform:C | all-error-floor");
    cmd->add_option("--daemon", daemon_spec, "sync | central-random | dist-random:P");
    cmd->add_option("--seed", seed, "rng seed");
    cmd->add_option("--max-steps", max_steps, "step cap");
    cmd->add_option("--out", out_path, "trace output path");
  };

  CLI::App* run = app.add_subcommand("run", "run one execution");
  add_common(run);
  run->add_option("--paux", paux_spec, "greedy | false");
  run->add_option("--stop-on", stop_spec, "terminal | clean | never");

  CLI::App* verify = app.add_subcommand("verify", "verify a trace file");
  verify->add_option("trace", trace_path, "trace file")->required();

  std::string alg_name = "min-prop", mode = "greedy", values_csv, ids_csv;
  CLI::App* simulate = app.add_subcommand("simulate", "run a synchronous algorithm on the clock");
  add_common(simulate);
  simulate->add_option("--alg", alg_name, "min-prop | min-id-bfs");
  simulate->add_option("--mode", mode, "greedy | lazy");
  simulate->add_option("--values", values_csv, "min-prop initial values, comma separated");
  simulate->add_option("--ids", ids_csv, "min-id-bfs node ids, comma separated");

  int n_min = 4, n_max = 8, seeds = 100;
  std::string kinds_csv = "path,ring,star,random", daemons_csv = "sync,central-random,dist-random:0.5";
  std::string csv_path;
  bool exhaustive = false, inject_fault = false;
  CLI::App* sweep = app.add_subcommand("sweep", "verified campaign over many instances");
  sweep->add_option("--n-min", n_min);
  sweep->add_option("--n-max", n_max);
  sweep->add_option("--seeds", seeds, "cells per (kind, n, daemon)");
  sweep->add_option("--kinds", kinds_csv);
  sweep->add_option("--daemons", daemons_csv);
  sweep->add_option("--csv", csv_path, "observational (n,B,D,moves,rounds) output");
  sweep->add_option("--max-steps", max_steps);
  sweep->add_flag("--exhaustive", exhaustive, "also run full state-space checks for n <= 3");
  sweep->add_flag("--inject-fault", inject_fault, "corrupt one trace (self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kInput;
  }

  try {
    if (run->parsed()) {
      Topology t = parse_graph(graph_spec, seed);
      Period B = parse_period(b_spec, t);
      Configuration cfg0 = parse_init(init_spec, t, B, seed);
      DaemonStrategy daemon = parse_daemon(daemon_spec);
      PauxMode paux = parse_paux(paux_spec);
      Trace tr = run_execution(t, B, cfg0, daemon, paux, {max_steps, parse_stop(stop_spec)},
                               seed);
      print_run_summary(tr, t, B, round_boundaries(tr, t, B, paux.fn));
      if (!out_path.empty()) save_trace(out_path, tr);
      return kOk;
    }

    if (verify->parsed()) return verify_trace(load_trace(trace_path));

    if (simulate->parsed()) {
      Topology t = parse_graph(graph_spec, seed);
      Period B = parse_period(b_spec, t);
      Configuration cfg0 = parse_init(init_spec, t, B, seed);
      DaemonStrategy daemon = parse_daemon(daemon_spec);
      SyncAlgorithm alg = algorithm_by_name(alg_name, t.size());
      bool lazy = mode == "lazy";
      if (!lazy && mode != "greedy")
        throw Error(Error::Kind::InvalidParams, "unknown mode: " + mode);

      std::vector<AlgPair> alg0;
      std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
      if (alg_name == "min-id-bfs") {
        std::vector<int> ids;
        if (!ids_csv.empty())
          for (const std::string& s : split(ids_csv, ',')) ids.push_back(std::stoi(s));
        else {
          for (int p = 0; p < t.size(); ++p) ids.push_back(p);
          std::shuffle(ids.begin(), ids.end(), rng);
        }
        for (std::int64_t st : min_id_initial_states(ids)) alg0.push_back({st, st});
      } else {
        std::vector<std::int64_t> vals;
        if (!values_csv.empty())
          for (const std::string& s : split(values_csv, ',')) vals.push_back(std::stoll(s));
        else {
          std::uniform_int_distribution<std::int64_t> pick(0, 999);
          for (int p = 0; p < t.size(); ++p) vals.push_back(pick(rng));
        }
        if (static_cast<int>(vals.size()) != t.size())
          throw Error(Error::Kind::InvalidParams, "--values length mismatch");
        for (std::int64_t v : vals) alg0.push_back({v, v});
      }

      Trace tr = sim_run_execution(t, B, cfg0, alg0, alg, lazy, daemon,
                                   {max_steps, StopOn::Terminal}, seed);
      std::cout << "alg=" << alg.name << " mode=" << (lazy ? "lazy" : "greedy")
                << " steps=" << tr.steps.size() << " termination="
                << to_string(tr.termination) << '\n';
      if (!out_path.empty()) save_trace(out_path, tr);

      CheckReport equiv = check_simulation_equivalence(tr, t, B, alg);
      print_report(equiv);
      int code = equiv.all_ok() ? kOk : kInvariant;
      if (lazy && tr.termination == Termination::Terminal && code == kOk) {
        int T = measure_T_of_trace(tr, t, B, alg);
        CheckReport lazybounds = check_lazy_bounds(tr, t, B, alg, T);
        print_report(lazybounds);
        if (!lazybounds.all_ok()) code = kBound;
      }
      return code;
    }

    if (sweep->parsed()) {
      bool inv_fail = false, bound_fail = false;

      if (exhaustive) {
        struct Tiny { const char* name; Topology t; };
        std::vector<Tiny> tiny{{"K1", make_path(1)},
                               {"K2", make_path(2)},
                               {"P3", make_path(3)},
                               {"K3", make_complete(3)}};
        for (const Tiny& g : tiny) {
          Period B = auto_period(g.t);
          StateSpace sp(g.t, B);
          CheckReport structural = exhaustive_structural(sp);
          CheckReport rounds = exhaustive_round_bound(sp, 2 * g.t.diameter() + 2);
          CheckReport budgets = exhaustive_move_budgets(sp);
          std::cout << "exhaustive " << g.name << ":\n";
          print_report(structural);
          print_report(rounds);
          print_report(budgets);
          if (!structural.all_ok()) inv_fail = true;
          if (!rounds.all_ok() || !budgets.all_ok()) bound_fail = true;
        }
      }

      std::vector<SweepCell> cells;
      for (const std::string& kind : split(kinds_csv, ','))
        for (int n = n_min; n <= n_max; ++n) {
          if (kind == "ring" && n < 3) continue;
          if (kind == "star" && n < 2) continue;
          for (const std::string& d : split(daemons_csv, ','))
            for (int s = 0; s < seeds; ++s)
              cells.push_back({kind, n, d, static_cast<std::uint64_t>(s) * 1000003u +
                                               static_cast<std::uint64_t>(n)});
        }

      std::vector<CellResult> results(cells.size());
      std::atomic<size_t> next{0};
      int nthreads = std::min<int>(sweep_threads(), static_cast<int>(cells.size()));
      auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
          try {
            results[i] = run_cell(cells[i], max_steps, inject_fault && i == 0);
          } catch (const Error& e) {
            results[i].invariant_fail = true;
            results[i].detail = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();

      long ok_count = 0;
      for (size_t i = 0; i < cells.size(); ++i) {
        const CellResult& r = results[i];
        if (r.invariant_fail) {
          inv_fail = true;
          std::cout << "[FAIL] " << cells[i].kind << " n=" << cells[i].n << " daemon="
                    << cells[i].daemon << " seed=" << cells[i].seed << ": " << r.detail
                    << '\n';
        } else if (r.bound_fail) {
          bound_fail = true;
          std::cout << "[FAIL] " << cells[i].kind << " n=" << cells[i].n << " daemon="
                    << cells[i].daemon << " seed=" << cells[i].seed << ": " << r.detail
                    << '\n';
        } else {
          ++ok_count;
        }
      }
      std::cout << "sweep: " << ok_count << "/" << cells.size() << " cells passed\n";

      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw Error(Error::Kind::ParseError, "cannot open csv: " + csv_path);
        csv << "n,B,D,moves,rounds\n";
        for (const CellResult& r : results)
          if (r.ran && !r.invariant_fail && !r.bound_fail)
            csv << r.n << ',' << r.B << ',' << r.D << ',' << r.moves << ',' << r.rounds
                << '\n';
      }
      if (inv_fail) return kInvariant;
      if (bound_fail) return kBound;
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kInput;
}
