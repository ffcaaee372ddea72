#pragma once

// Scenario files drive a run: timed request/cancel/block/unblock events plus
// an optional expected trace of per-cycle plans.
//
//   # scenario
//   at 1 request office3 office2 1
//   at 3 cancel 1
//   at 4 block office2 office3
//
// Expected trace files list step-normalized plans, "-" for an empty plan:
//
//   cycle 1: _action(move_base,office2,1) _action(move_base,office3,2)
//   cycle 3: -

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aspctl/parser.hpp"

namespace aspctl {

struct ScenarioEvent {
  enum class Kind { request, cancel, block, unblock };

  int cycle = 1;
  Kind kind = Kind::request;
  Term goal;        // request
  int package = 0;  // cancel
  std::string a, b;  // block / unblock
};

struct Scenario {
  std::vector<ScenarioEvent> events;

  static Scenario parse(std::istream& in) {
    Scenario s;
    std::string line;
    int lineno = 0;
    int last_cycle = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string word;
      if (!(ls >> word)) continue;
      if (word != "at") throw ParseError(lineno, 1, "scenario lines start with 'at <cycle>'");
      ScenarioEvent ev;
      std::string kind;
      if (!(ls >> ev.cycle >> kind)) throw ParseError(lineno, 1, "expected 'at <cycle> <event>'");
      if (ev.cycle < last_cycle)
        throw ParseError(lineno, 1, "event cycles must be non-decreasing");
      last_cycle = ev.cycle;
      if (kind == "request") {
        std::string from, to;
        int id;
        if (!(ls >> from >> to >> id))
          throw ParseError(lineno, 1, "request needs '<from> <to> <id>'");
        ev.kind = ScenarioEvent::Kind::request;
        ev.goal = Term::compound(
            "goal", {Term::symbol(from), Term::symbol(to), Term::integer(id)});
        ev.package = id;
      } else if (kind == "cancel") {
        if (!(ls >> ev.package)) throw ParseError(lineno, 1, "cancel needs '<id>'");
        ev.kind = ScenarioEvent::Kind::cancel;
      } else if (kind == "block" || kind == "unblock") {
        if (!(ls >> ev.a >> ev.b)) throw ParseError(lineno, 1, kind + " needs '<a> <b>'");
        ev.kind = kind == "block" ? ScenarioEvent::Kind::block : ScenarioEvent::Kind::unblock;
      } else {
        throw ParseError(lineno, 1, "unknown scenario event '" + kind + "'");
      }
      s.events.push_back(std::move(ev));
    }
    return s;
  }

  static Scenario load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ControlError("cannot open scenario '" + path + "'");
    return parse(in);
  }
};

struct ExpectedTrace {
  std::map<int, std::vector<std::string>> plans;  // cycle -> atom texts by step

  static ExpectedTrace parse(std::istream& in) {
    ExpectedTrace t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string word;
      if (!(ls >> word)) continue;
      if (word != "cycle") throw ParseError(lineno, 1, "trace lines start with 'cycle N:'");
      std::string cycle_text;
      if (!(ls >> cycle_text)) throw ParseError(lineno, 1, "missing cycle number");
      if (!cycle_text.empty() && cycle_text.back() == ':') cycle_text.pop_back();
      int cycle = std::stoi(cycle_text);
      std::vector<std::string> atoms;
      std::string atom;
      while (ls >> atom) {
        if (atom == "-") continue;
        atoms.push_back(parse_atom_text(atom).str());  // normalize
      }
      t.plans[cycle] = std::move(atoms);
    }
    return t;
  }

  static ExpectedTrace load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ControlError("cannot open trace file '" + path + "'");
    return parse(in);
  }
};

}  // namespace aspctl
