#pragma once

#include <string>

#include "spg/config.hpp"
#include "spg/oracle.hpp"
#include "spg/sim.hpp"

/// Adaptive cruise control reproduction: the three closed-loop cases and the
/// pass/fail gates used by `spg reproduce-acc`.
namespace spg::acc {

/// Out-of-model pulse for case 3. Not taken from measured data; it is large
/// enough to push the state out of the infinite-step set while staying
/// inside X0, and the lead vehicle stops accelerating afterwards.
inline constexpr int kPulseStart = 6;
inline constexpr int kPulseLast = 10;
inline constexpr double kPulseValue = -3.0;
inline constexpr double kPulseBaseline = 0.0;
inline constexpr int kRecoveryWindow = 40;

inline constexpr int kCase1Steps = 100;
inline constexpr int kCase2Steps = 10;
inline constexpr int kCase3Steps = 60;

struct Case {
  int id = 0;
  Eigen::VectorXd x0;
  DisturbanceProfile profile;
  int steps = 0;
};

/// id in {1, 2, 3}; throws ContractViolation otherwise.
Case make_case(int id);

/// State box used for the governor/oracle agreement check.
Eigen::VectorXd sample_lower();
Eigen::VectorXd sample_upper();

struct Gate {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// "PASS name: detail" / "FAIL name: detail"
std::string format(const Gate& gate);

Gate case1_gate(const SafeSetLadder& ladder, const SimTrace& trace, double seconds);
Gate case2_gate(const SimTrace& trace, double seconds);
Gate case3_gate(const SafeSetLadder& ladder, const SimTrace& trace);
Gate agreement_gate(const AgreementReport& rep);
Gate timing_gate(const AgreementReport& rep);
Gate nesting_gate(const SafeSetLadder& ladder);

}  // namespace spg::acc
