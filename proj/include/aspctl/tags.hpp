#pragma once

// Label-to-pose tag table. The reasoner plans over labels; metric poses only
// exist at tagged points, which is what isolates it from coordinates.
// File format: one "label x y theta" entry per line, '#' comments.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "aspctl/errors.hpp"

namespace aspctl {

struct Pose {
  double x = 0;
  double y = 0;
  double theta = 0;
};

class TagTable {
 public:
  void add(const std::string& label, Pose pose) {
    if (entries_.count(label)) throw ControlError("duplicate tag label '" + label + "'");
    entries_[label] = pose;
  }

  std::optional<Pose> lookup(const std::string& label) const {
    auto it = entries_.find(label);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  bool has(const std::string& label) const { return entries_.count(label) > 0; }
  size_t size() const { return entries_.size(); }

  // Closest label within `tolerance` meters; ties break on the smaller
  // label so lookups stay deterministic.
  std::optional<std::string> nearest(const Pose& pose, double tolerance) const {
    std::optional<std::string> best;
    double best_dist = tolerance;
    for (const auto& [label, p] : entries_) {
      double d = std::hypot(p.x - pose.x, p.y - pose.y);
      if (d < best_dist || (best && d == best_dist && label < *best)) {
        best = label;
        best_dist = d;
      }
    }
    return best;
  }

  static TagTable parse(std::istream& in) {
    TagTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string label;
      if (!(ls >> label)) continue;
      Pose pose;
      if (!(ls >> pose.x >> pose.y >> pose.theta))
        throw ParseError(lineno, 1, "tag entry needs 'label x y theta'");
      t.add(label, pose);
    }
    return t;
  }

  static TagTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ControlError("cannot open tag table '" + path + "'");
    return parse(in);
  }

 private:
  std::map<std::string, Pose> entries_;
};

}  // namespace aspctl
