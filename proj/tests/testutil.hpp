#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

inline std::string asset_path(const std::string& rel) {
  return std::string(ASPCTL_ASSET_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Map file plus task encoding, the way the command line assembles them.
inline std::string mail_program(const std::string& map = "offices4") {
  return slurp(asset_path("encodings/" + map + ".map.lp")) + "\n" +
         slurp(asset_path("encodings/mailbot.lp"));
}

// The three reference plans for the office3/office2/office4 request scenario.
inline const std::vector<std::string>& plan1() {
  static const std::vector<std::string> v{
      "_action(move_base,office2,1)", "_action(move_base,office3,2)",
      "_action(pickup,1,3)",          "_action(move_base,office2,4)",
      "_action(deliver,1,5)"};
  return v;
}

inline const std::vector<std::string>& plan2() {
  static const std::vector<std::string> v{"_action(move_base,office2,1)",
                                          "_action(move_base,office3,2)"};
  return v;
}

inline const std::vector<std::string>& plan3() {
  static const std::vector<std::string> v{
      "_action(move_base,office2,1)", "_action(move_base,office3,2)",
      "_action(pickup,2,4)",          "_action(move_base,office4,5)",
      "_action(deliver,2,6)"};
  return v;
}

}  // namespace testutil
