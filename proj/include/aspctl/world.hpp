#pragma once

// Topological office world with action servers for navigation, pickup, and
// delivery. The world advances on a tick clock owned by a single driver;
// everything else interacts with it through action goals.
//
// World file format, '#' comments, sections in any order:
//
//   locations:
//   office1 office2 ...
//   edges:
//   office1 office2 2        # two labels plus traversal duration in ticks
//   blocked:
//   office2 office3 0 6      # edge blocked for ticks [0,6); omit 6 = forever
//   robot:
//   office1
//   capacity:
//   3
//   packages:
//   1 office3

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aspctl/action.hpp"
#include "aspctl/tags.hpp"
#include "aspctl/term.hpp"

namespace aspctl {

struct BlockWindow {
  std::string a, b;
  long from = 0;
  long to = std::numeric_limits<long>::max();
};

struct WorldConfig {
  std::set<std::string> locations;
  struct Edge {
    std::string a, b;
    int duration = 1;
  };
  std::vector<Edge> edges;
  std::vector<BlockWindow> blocks;
  std::string robot;
  int capacity = 3;
  std::map<int, std::string> packages;

  static WorldConfig parse(std::istream& in) {
    WorldConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string first;
      if (!(ls >> first)) continue;
      if (first.back() == ':') {
        section = first.substr(0, first.size() - 1);
        // Entries may share the header line.
        std::string rest;
        std::getline(ls, rest);
        if (!rest.empty()) parse_entry(cfg, section, rest, lineno);
        continue;
      }
      std::string rest;
      std::getline(ls, rest);
      parse_entry(cfg, section, first + rest, lineno);
    }
    cfg.validate();
    return cfg;
  }

  static WorldConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ControlError("cannot open world file '" + path + "'");
    return parse(in);
  }

  void validate() const {
    auto known = [this](const std::string& l) { return locations.count(l) > 0; };
    if (!known(robot)) throw ControlError("robot start '" + robot + "' is not a location");
    for (const Edge& e : edges)
      if (!known(e.a) || !known(e.b))
        throw ControlError("edge references unknown location: " + e.a + " " + e.b);
    for (const auto& [id, loc] : packages)
      if (!known(loc)) throw ControlError("package " + std::to_string(id) + " at unknown location");
    // The static graph must be connected.
    if (locations.empty()) throw ControlError("world has no locations");
    std::set<std::string> seen{*locations.begin()};
    std::queue<std::string> frontier;
    frontier.push(*locations.begin());
    while (!frontier.empty()) {
      std::string cur = frontier.front();
      frontier.pop();
      for (const Edge& e : edges) {
        std::string other;
        if (e.a == cur) other = e.b;
        else if (e.b == cur) other = e.a;
        else continue;
        if (seen.insert(other).second) frontier.push(other);
      }
    }
    if (seen.size() != locations.size()) throw ControlError("world graph is not connected");
  }

 private:
  static void parse_entry(WorldConfig& cfg, const std::string& section, const std::string& text,
                          int lineno) {
    std::istringstream ls(text);
    if (section == "locations") {
      std::string l;
      while (ls >> l) cfg.locations.insert(l);
    } else if (section == "edges") {
      Edge e;
      if (!(ls >> e.a >> e.b)) throw ParseError(lineno, 1, "edge needs two labels");
      if (!(ls >> e.duration)) e.duration = 1;
      cfg.edges.push_back(e);
    } else if (section == "blocked") {
      BlockWindow w;
      if (!(ls >> w.a >> w.b)) throw ParseError(lineno, 1, "blocked needs two labels");
      if (!(ls >> w.from)) w.from = 0;
      if (!(ls >> w.to)) w.to = std::numeric_limits<long>::max();
      cfg.blocks.push_back(w);
    } else if (section == "robot") {
      ls >> cfg.robot;
    } else if (section == "capacity") {
      ls >> cfg.capacity;
    } else if (section == "packages") {
      int id;
      std::string loc;
      if (!(ls >> id >> loc)) throw ParseError(lineno, 1, "package needs 'id location'");
      cfg.packages[id] = loc;
    } else {
      throw ParseError(lineno, 1, "unknown world section '" + section + "'");
    }
  }
};

class World {
 public:
  World(WorldConfig cfg, TagTable tags) : cfg_(std::move(cfg)), tags_(std::move(tags)) {
    for (const auto& e : cfg_.edges) durations_[norm(e.a, e.b)] = e.duration;
    blocks_ = cfg_.blocks;
    robot_ = cfg_.robot;
    for (const auto& [id, loc] : cfg_.packages) packages_[id] = Package{loc, false};
    for (const std::string& l : cfg_.locations)
      if (!tags_.has(l)) throw ControlError("location '" + l + "' has no tag entry");
  }

  void attach(ActionHub& hub) {
    nav_ = hub.register_server("move_base");
    pickup_ = hub.register_server("pickup");
    deliver_ = hub.register_server("deliver");
  }

  long now() const { return tick_; }
  const std::string& robot_location() const { return robot_; }
  int capacity() const { return cfg_.capacity; }

  bool package_exists(int id) const { return packages_.count(id) > 0; }
  bool package_carried(int id) const {
    auto it = packages_.find(id);
    return it != packages_.end() && it->second.carried;
  }
  std::optional<std::string> package_location(int id) const {
    auto it = packages_.find(id);
    if (it == packages_.end() || it->second.carried) return std::nullopt;
    return it->second.location;
  }

  int carried_count() const {
    int n = 0;
    for (const auto& [id, p] : packages_)
      if (p.carried) ++n;
    return n;
  }
  int max_carried_observed() const { return max_carried_; }

  void spawn_package(int id, const std::string& location) {
    if (!cfg_.locations.count(location))
      throw ControlError("spawn at unknown location '" + location + "'");
    if (!packages_.count(id)) packages_[id] = Package{location, false};
  }

  void block_edge(const std::string& a, const std::string& b) {
    blocks_.push_back({a, b, tick_, std::numeric_limits<long>::max()});
  }

  void unblock_edge(const std::string& a, const std::string& b) {
    for (BlockWindow& w : blocks_)
      if (norm(w.a, w.b) == norm(a, b) && w.to > tick_) w.to = tick_;
  }

  bool edge_blocked(const std::string& a, const std::string& b) const {
    for (const BlockWindow& w : blocks_)
      if (norm(w.a, w.b) == norm(a, b) && w.from <= tick_ && tick_ < w.to) return true;
    return false;
  }

  // One simulated tick: progress every server, then advance the clock.
  void tick() {
    step_nav();
    step_pickup();
    step_deliver();
    ++tick_;
    check_invariants();
  }

  void check_invariants() const {
    if (carried_count() > cfg_.capacity) throw ControlError("capacity invariant violated");
    for (const auto& [id, p] : packages_)
      if (!p.carried && !cfg_.locations.count(p.location))
        throw ControlError("package " + std::to_string(id) + " at unknown location");
    if (!cfg_.locations.count(robot_)) throw ControlError("robot off the map");
  }

 private:
  struct Package {
    std::string location;
    bool carried = false;
  };

  struct NavJob {
    uint64_t id = 0;
    std::string target;
    std::vector<std::string> path;  // remaining waypoints
    int progress = 0;
    bool rerouted = false;
  };

  struct ManipJob {
    uint64_t id = 0;
    int package = 0;
  };

  static std::pair<std::string, std::string> norm(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  std::vector<std::string> neighbors(const std::string& l) const {
    std::vector<std::string> out;
    for (const auto& [key, d] : durations_) {
      if (key.first == l) out.push_back(key.second);
      if (key.second == l) out.push_back(key.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  int duration(const std::string& a, const std::string& b) const {
    return durations_.at(norm(a, b));
  }

  // Shortest path by summed duration; lexicographic tie-break on the node
  // sequence keeps routes deterministic.
  std::optional<std::vector<std::string>> shortest_path(const std::string& from,
                                                        const std::string& to,
                                                        bool avoid_blocked) const {
    if (from == to) return std::vector<std::string>{};
    std::map<std::string, long> dist;
    std::map<std::string, std::string> prev;
    auto cmp = [](const std::pair<long, std::string>& x, const std::pair<long, std::string>& y) {
      return x > y;
    };
    std::priority_queue<std::pair<long, std::string>, std::vector<std::pair<long, std::string>>,
                        decltype(cmp)>
        heap(cmp);
    dist[from] = 0;
    heap.push({0, from});
    while (!heap.empty()) {
      auto [d, cur] = heap.top();
      heap.pop();
      if (d != dist[cur]) continue;
      for (const std::string& next : neighbors(cur)) {
        if (avoid_blocked && edge_blocked(cur, next)) continue;
        long nd = d + duration(cur, next);
        auto it = dist.find(next);
        if (it == dist.end() || nd < it->second ||
            (nd == it->second && cur < prev[next])) {
          dist[next] = nd;
          prev[next] = cur;
          heap.push({nd, next});
        }
      }
    }
    if (!dist.count(to)) return std::nullopt;
    std::vector<std::string> path;
    for (std::string cur = to; cur != from; cur = prev[cur]) path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return path;
  }

  void step_nav() {
    // A newer goal preempts the one in flight; the robot stops at the last
    // reached location.
    if (nav_job_ && nav_->has_pending()) {
      nav_->confirm_preempt(nav_job_->id, Term::symbol(robot_));
      nav_job_.reset();
    }
    if (nav_job_ && nav_->preempt_requested(nav_job_->id)) {
      nav_->confirm_preempt(nav_job_->id, Term::symbol(robot_));
      nav_job_.reset();
    }
    if (!nav_job_) {
      auto ticket = nav_->try_accept();
      if (!ticket) return;
      Pose goal = std::any_cast<Pose>(ticket->goal);
      auto label = tags_.nearest(goal, 0.5);
      if (!label) {
        nav_->abort(ticket->id, Term::symbol("unknown_pose"));
        return;
      }
      NavJob job;
      job.id = ticket->id;
      job.target = *label;
      auto path = shortest_path(robot_, *label, /*avoid_blocked=*/false);
      if (!path) {
        nav_->abort(ticket->id, Term::compound("unreachable", {Term::symbol(*label)}));
        return;
      }
      job.path = std::move(*path);
      nav_job_ = job;
      if (nav_job_->path.empty()) {
        nav_->succeed(nav_job_->id, Term::symbol(robot_));
        nav_job_.reset();
      }
      return;  // accepting consumes the tick
    }

    NavJob& job = *nav_job_;
    const std::string& next = job.path.front();
    if (edge_blocked(robot_, next)) {
      // One recovery attempt: replan from here avoiding everything blocked
      // right now. Failing that the goal aborts, naming the blocked edge.
      if (!job.rerouted) {
        job.rerouted = true;
        auto alt = shortest_path(robot_, job.target, /*avoid_blocked=*/true);
        if (alt && !(alt->size() == 1 && edge_blocked(robot_, alt->front()))) {
          job.path = std::move(*alt);
          job.progress = 0;
          return;  // recovery consumed this tick
        }
      }
      Term reason = Term::compound("blocked", {Term::symbol(robot_), Term::symbol(next)});
      nav_->abort(job.id, reason);
      nav_job_.reset();
      return;
    }
    ++job.progress;
    if (job.progress >= duration(robot_, next)) {
      robot_ = next;
      job.path.erase(job.path.begin());
      job.progress = 0;
      nav_->publish_feedback(job.id, Term::symbol(robot_));
      if (job.path.empty()) {
        nav_->succeed(job.id, Term::symbol(robot_));
        nav_job_.reset();
      }
    }
  }

  void step_pickup() {
    if (pickup_job_ && pickup_->preempt_requested(pickup_job_->id)) {
      pickup_->confirm_preempt(pickup_job_->id, Term::symbol("preempted"));
      pickup_job_.reset();
    }
    if (pickup_job_) {
      const ManipJob& job = *pickup_job_;
      auto it = packages_.find(job.package);
      if (it == packages_.end()) {
        pickup_->abort(job.id, Term::symbol("unknown_package"));
      } else if (it->second.carried) {
        pickup_->abort(job.id, Term::symbol("already_carried"));
      } else if (it->second.location != robot_) {
        pickup_->abort(job.id, Term::symbol("wrong_location"));
      } else if (carried_count() >= cfg_.capacity) {
        pickup_->abort(job.id, Term::symbol("capacity_exceeded"));
      } else {
        it->second.carried = true;
        max_carried_ = std::max(max_carried_, carried_count());
        pickup_->succeed(job.id, Term::integer(job.package));
      }
      pickup_job_.reset();
      return;
    }
    if (auto ticket = pickup_->try_accept())
      pickup_job_ = ManipJob{ticket->id, std::any_cast<int>(ticket->goal)};
  }

  void step_deliver() {
    if (deliver_job_ && deliver_->preempt_requested(deliver_job_->id)) {
      deliver_->confirm_preempt(deliver_job_->id, Term::symbol("preempted"));
      deliver_job_.reset();
    }
    if (deliver_job_) {
      const ManipJob& job = *deliver_job_;
      auto it = packages_.find(job.package);
      if (it == packages_.end() || !it->second.carried) {
        deliver_->abort(job.id, Term::symbol("not_carried"));
      } else {
        it->second.carried = false;
        it->second.location = robot_;
        deliver_->succeed(job.id, Term::integer(job.package));
      }
      deliver_job_.reset();
      return;
    }
    if (auto ticket = deliver_->try_accept())
      deliver_job_ = ManipJob{ticket->id, std::any_cast<int>(ticket->goal)};
  }

  WorldConfig cfg_;
  TagTable tags_;
  std::map<std::pair<std::string, std::string>, int> durations_;
  std::vector<BlockWindow> blocks_;
  std::string robot_;
  std::map<int, Package> packages_;
  long tick_ = 0;
  int max_carried_ = 0;

  std::shared_ptr<ActionServer> nav_, pickup_, deliver_;
  std::optional<NavJob> nav_job_;
  std::optional<ManipJob> pickup_job_, deliver_job_;
};

}  // namespace aspctl
