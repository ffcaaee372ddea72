#pragma once

// The reactive solving service: accepts an online progression, drives the
// incremental state, and returns answer sets. Also speaks a line protocol so
// the service can run out of process:
//
//   client -> "#step N." ... "#endstep."   one update block per query
//   server -> "Answer: <atoms sorted lexicographically>"
//   client -> "#stop."                     terminates the service
//
// Malformed input is answered with a single "Error: ..." line and closes the
// session; an unsatisfiable-within-cap query reports an Error line but keeps
// the session open.

#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "aspctl/incremental.hpp"

namespace aspctl {

class ReactiveServer {
 public:
  explicit ReactiveServer(ReactiveProgram program, SolveConfig config = {})
      : externals_(program.externals),
        known_preds_(program.predicates()),
        state_(std::move(program), config) {}

  int last_step() const { return last_step_; }

  // Installs one update. Steps must be strictly increasing; fact predicates
  // must be declared #external, and constraints may only mention predicates
  // the program knows about.
  void feed(const OnlineUpdate& update) {
    if (update.step <= last_step_)
      throw ProtocolError("out-of-order step " + std::to_string(update.step) +
                          " after " + std::to_string(last_step_));
    for (const OnlineItem& item : update.items) validate(item);
    for (const OnlineItem& item : update.items) state_.install(item, update.step);
    last_step_ = update.step;
    fed_ = true;
  }

  struct Answer {
    int horizon = 0;
    AnswerSet model;
  };

  // Model at the smallest horizon admitting one, never below the last fed
  // step. Throws HorizonCapExceeded if the cap is reached first.
  Answer get_answer() {
    if (!fed_) throw ProtocolError("get_answer before any update was fed");
    auto [h, model] = state_.solve_min_horizon(last_step_);
    return {h, std::move(model)};
  }

  IncrementalState& state() { return state_; }
  const IncrementalState& state() const { return state_; }

  bool knows_predicate(const std::string& name, int arity) const {
    return known_preds_.count({name, arity}) > 0;
  }

  // Serves one client over a line-oriented stream pair.
  void serve(std::istream& in, std::ostream& out) {
    std::string line;
    std::string block;
    bool in_block = false;
    while (std::getline(in, line)) {
      std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (!in_block) {
        if (trimmed == "#stop.") return;
        block.clear();
        in_block = true;
      }
      block += line;
      block += '\n';
      if (trimmed != "#endstep.") continue;
      in_block = false;
      try {
        feed(parse_online(block));
        Answer a = get_answer();
        out << "Answer: " << a.model.render() << "\n" << std::flush;
      } catch (const HorizonCapExceeded& e) {
        out << "Error: " << e.what() << "\n" << std::flush;
      } catch (const std::exception& e) {
        out << "Error: " << e.what() << "\n" << std::flush;
        return;
      }
    }
  }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  void validate(const OnlineItem& item) const {
    if (item.kind == OnlineItem::Kind::fact) {
      if (!is_external(item.fact))
        throw ProtocolError("undeclared external predicate " + item.fact.predicate + "/" +
                            std::to_string(item.fact.arity()));
      return;
    }
    auto known = [this](const Atom& a) {
      return is_external(a) || known_preds_.count({a.predicate, a.arity()}) > 0;
    };
    for (const Atom& a : item.constraint.body_pos)
      if (!known(a)) throw ProtocolError("unknown predicate in constraint: " + a.str());
    for (const Atom& a : item.constraint.body_neg)
      if (!known(a)) throw ProtocolError("unknown predicate in constraint: " + a.str());
  }

  bool is_external(const Atom& a) const {
    for (const auto& [p, n] : externals_)
      if (p == a.predicate && n == a.arity()) return true;
    return false;
  }

  std::vector<std::pair<std::string, int>> externals_;
  std::set<std::pair<std::string, int>> known_preds_;
  IncrementalState state_;
  int last_step_ = 0;
  bool fed_ = false;
};

}  // namespace aspctl

#ifdef __linux__
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <ext/stdio_filebuf.h>
#include <iostream>

namespace aspctl {

// Runs the service on an endpoint: "-" for stdin/stdout, "tcp:<port>" or a
// bare port number for a TCP socket serving a single client.
inline void serve_endpoint(ReactiveServer& server, const std::string& endpoint,
                           std::istream& in = std::cin, std::ostream& out = std::cout) {
  if (endpoint == "-") {
    server.serve(in, out);
    return;
  }
  std::string port_text = endpoint.rfind("tcp:", 0) == 0 ? endpoint.substr(4) : endpoint;
  int port = 0;
  try {
    port = std::stoi(port_text);
  } catch (...) {
    throw ControlError("bad endpoint '" + endpoint + "'; use '-', 'tcp:<port>' or a port");
  }
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw ControlError("socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(listener);
    throw ControlError("endpoint not free: " + endpoint);
  }
  if (::listen(listener, 1) != 0) {
    ::close(listener);
    throw ControlError("listen: " + std::string(std::strerror(errno)));
  }
  int client = ::accept(listener, nullptr, nullptr);
  ::close(listener);
  if (client < 0) throw ControlError("accept: " + std::string(std::strerror(errno)));
  {
    __gnu_cxx::stdio_filebuf<char> in_buf(client, std::ios::in);
    __gnu_cxx::stdio_filebuf<char> out_buf(::dup(client), std::ios::out);
    std::istream client_in(&in_buf);
    std::ostream client_out(&out_buf);
    server.serve(client_in, client_out);
  }
  ::close(client);
}

}  // namespace aspctl
#endif  // __linux__
