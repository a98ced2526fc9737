#pragma once

#include <string>

#include "spg/governor.hpp"
#include "spg/safesets.hpp"

namespace spg {

/// Everything needed to build a ladder and run the governor. Loaded from a
/// YAML document; see configs/acc.yaml for the layout.
struct ProblemConfig {
  LinearSystem system;
  VirtualFeedback feedback;
  Polytope safe_set;
  Polytope input_set;
  DisturbanceSet disturbance;
  PenaltyConfig penalty;
  double eps_tight = 1e-3;
  int k_cap = 50;

  LadderOptions ladder_options() const;
  /// Dimension and sign checks; throws ContractViolation.
  void validate() const;
};

/// Strict parse: unknown keys and missing required keys raise InputError.
ProblemConfig parse_config(const std::string& yaml_text);
ProblemConfig load_config(const std::string& path);

SafeSetLadder build_ladder(const ProblemConfig& cfg);

/// Adaptive cruise control instance (dt = 0.25).
ProblemConfig acc_config();

}  // namespace spg
