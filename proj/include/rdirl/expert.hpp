#pragma once

#include <cstdint>

#include "rdirl/env.hpp"
#include "rdirl/mppi.hpp"
#include "rdirl/trajectory.hpp"

namespace rdirl {

// Runs the sampling-based planner against the true reward (cost = -reward)
// for n_steps and records the visited states, applied controls, and true
// rewards. If the env reaches a terminal state early, the trajectory ends
// with that terminal state (zero-filled control) and is flagged truncated.
// Deterministic in `seed`.
Trajectory generate_expert(const EnvModel& env, const MppiConfig& mppi_cfg, int n_steps,
                           std::uint64_t seed);

// Cumulative true reward of the zero-control policy from a seeded reset:
// the normalization floor.
double zero_control_reward(const EnvModel& env, std::uint64_t seed, int n_steps);

}  // namespace rdirl
