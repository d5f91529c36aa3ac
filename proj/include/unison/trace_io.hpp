#pragma once

// JSON Lines trace format. Line 1 is the header object, then one object per
// step, then a final termination object. Bit-exact replay is the
// compatibility contract, so serialization is canonical: sorted node lists,
// fixed field layout.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "unison/error.hpp"
#include "unison/scheduler.hpp"

namespace unison {

namespace detail {

using nlohmann::json;

inline json state_to_json(const NodeState& st) {
  return json::array({st.s == Status::C ? "C" : "E", st.c});
}

inline json state_to_json(const NodeState& st, const AlgPair& alg) {
  return json::array({st.s == Status::C ? "C" : "E", st.c, alg.first, alg.second});
}

inline NodeState state_from_json(const json& j, AlgPair* alg) {
  if (!j.is_array() || j.size() < 2) throw Error(Error::Kind::ParseError, "bad state tuple");
  std::string s = j[0].get<std::string>();
  if (s != "C" && s != "E") throw Error(Error::Kind::ParseError, "bad status: " + s);
  if (alg) {
    if (j.size() >= 4)
      *alg = {j[2].get<std::int64_t>(), j[3].get<std::int64_t>()};
    else
      *alg = {0, 0};
  }
  return {s == "C" ? Status::C : Status::E, j[1].get<int>()};
}

inline json rule_to_json(int node, RuleId r) {
  switch (r.kind) {
    case RuleId::Kind::RR: return json::array({node, "RR"});
    case RuleId::Kind::RP: return json::array({node, "RP", r.target});
    case RuleId::Kind::RC: return json::array({node, "RC"});
    case RuleId::Kind::RU: return json::array({node, "RU"});
  }
  throw Error(Error::Kind::ParseError, "bad rule kind");
}

inline std::pair<int, RuleId> rule_from_json(const json& j) {
  int node = j.at(0).get<int>();
  std::string k = j.at(1).get<std::string>();
  if (k == "RR") return {node, RuleId::rr()};
  if (k == "RP") return {node, RuleId::rp(j.at(2).get<int>())};
  if (k == "RC") return {node, RuleId::rc()};
  if (k == "RU") return {node, RuleId::ru()};
  throw Error(Error::Kind::ParseError, "bad rule name: " + k);
}

inline Termination termination_from_string(const std::string& s) {
  if (s == "Terminal") return Termination::Terminal;
  if (s == "StepLimit") return Termination::StepLimit;
  if (s == "CleanReachedAndStopped") return Termination::CleanReachedAndStopped;
  if (s == "ScriptInvalid") return Termination::ScriptInvalid;
  throw Error(Error::Kind::ParseError, "bad termination: " + s);
}

}  // namespace detail

inline void write_trace(std::ostream& out, const Trace& tr) {
  using nlohmann::json;
  const bool sim = !tr.header.alg.empty();

  json init = json::array();
  for (size_t p = 0; p < tr.header.init.size(); ++p)
    init.push_back(sim ? detail::state_to_json(tr.header.init[p], tr.header.alg_init[p])
                       : detail::state_to_json(tr.header.init[p]));

  json header = {{"version", 1},
                 {"n", tr.header.n},
                 {"edges", tr.header.edges},
                 {"B", tr.header.B},
                 {"init", init},
                 {"daemon", tr.header.daemon},
                 {"paux", tr.header.paux},
                 {"seed", tr.header.seed}};
  if (sim) header["alg"] = tr.header.alg;
  out << header.dump() << '\n';

  for (const StepRecord& rec : tr.steps) {
    json fired = json::array();
    for (auto [p, r] : rec.fired) fired.push_back(detail::rule_to_json(p, r));
    json post = json::array();
    for (size_t p = 0; p < rec.post.size(); ++p)
      post.push_back(sim ? detail::state_to_json(rec.post[p], rec.alg_post[p])
                         : detail::state_to_json(rec.post[p]));
    json line = {{"i", rec.index}, {"sel", rec.selected}, {"fired", fired}, {"post", post}};
    out << line.dump() << '\n';
  }
  out << nlohmann::json{{"termination", to_string(tr.termination)}}.dump() << '\n';
}

inline Trace read_trace(std::istream& in) {
  using nlohmann::json;
  std::string line;
  if (!std::getline(in, line)) throw Error(Error::Kind::ParseError, "empty trace file");

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(Error::Kind::ParseError, std::string("bad trace header: ") + e.what());
  }

  Trace tr;
  try {
    tr.header.n = header.at("n").get<int>();
    tr.header.edges = header.at("edges").get<std::vector<std::pair<int, int>>>();
    tr.header.B = header.at("B").get<int>();
    tr.header.daemon = header.at("daemon").get<std::string>();
    tr.header.paux = header.at("paux").get<std::string>();
    tr.header.seed = header.at("seed").get<std::uint64_t>();
    if (header.contains("alg")) tr.header.alg = header["alg"].get<std::string>();
    const bool sim = !tr.header.alg.empty();
    for (const json& j : header.at("init")) {
      AlgPair alg;
      tr.header.init.push_back(detail::state_from_json(j, sim ? &alg : nullptr));
      if (sim) tr.header.alg_init.push_back(alg);
    }

    bool terminated = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      if (j.contains("termination")) {
        tr.termination = detail::termination_from_string(j["termination"].get<std::string>());
        terminated = true;
        break;
      }
      StepRecord rec;
      rec.index = j.at("i").get<int>();
      rec.selected = j.at("sel").get<std::vector<int>>();
      for (const json& f : j.at("fired")) rec.fired.push_back(detail::rule_from_json(f));
      for (const json& s : j.at("post")) {
        AlgPair alg;
        rec.post.push_back(detail::state_from_json(s, sim ? &alg : nullptr));
        if (sim) rec.alg_post.push_back(alg);
      }
      tr.steps.push_back(std::move(rec));
    }
    if (!terminated)
      throw Error(Error::Kind::ParseError, "trace file missing termination line");
  } catch (const json::exception& e) {
    throw Error(Error::Kind::ParseError, std::string("malformed trace: ") + e.what());
  }
  return tr;
}

inline void save_trace(const std::string& path, const Trace& tr) {
  std::ofstream out(path);
  if (!out) throw Error(Error::Kind::ParseError, "cannot open for writing: " + path);
  write_trace(out, tr);
}

inline Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::ParseError, "cannot open trace file: " + path);
  return read_trace(in);
}

// Configuration text format: one line per node, `C <clock>` or `E <clock>`.
inline Configuration read_configuration(std::istream& in) {
  Configuration cfg;
  std::string status;
  int clock;
  while (in >> status >> clock) {
    if (status != "C" && status != "E")
      throw Error(Error::Kind::ParseError, "bad status in configuration file: " + status);
    cfg.push_back({status == "C" ? Status::C : Status::E, clock});
  }
  if (cfg.empty()) throw Error(Error::Kind::ParseError, "empty configuration file");
  return cfg;
}

inline Configuration load_configuration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::ParseError, "cannot open configuration file: " + path);
  return read_configuration(in);
}

inline void write_configuration(std::ostream& out, const Configuration& cfg) {
  for (const NodeState& st : cfg)
    out << (st.s == Status::C ? 'C' : 'E') << ' ' << st.c << '\n';
}

}  // namespace unison
