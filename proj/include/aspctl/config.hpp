#pragma once

namespace aspctl {

struct SolveConfig {
  // Maximum nesting depth of any term produced while grounding. Guards the
  // naive instantiator against runaway function symbols.
  int term_depth_cap = 4;
  // Largest horizon solve_min_horizon may ground before giving up.
  int horizon_cap = 30;
};

}  // namespace aspctl
