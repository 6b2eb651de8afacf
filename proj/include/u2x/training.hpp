#pragma once

#include <vector>

#include "u2x/agent.hpp"
#include "u2x/scenario.hpp"

namespace u2x {

struct TrainingResult {
    std::vector<DqnAgent> agents;
    // Per episode: sum over agents and cycles of gamma^t * reward_t.
    std::vector<double> episode_utility;
    std::vector<std::vector<double>> per_agent_utility;  // [episode][agent]
    std::vector<double> epsilon_schedule;                // per episode
    std::vector<double> mean_loss;                       // per episode, -1 before training starts
};

/// The full learning loop. Each cycle every agent observes, picks a lattice
/// action, the protocol runs one cycle, and the resulting rewards are
/// credited to the action taken one cycle earlier (a cycle's reward is
/// evaluated at the pre-move positions, so it reflects the previous move).
/// The first reward of an episode is attributable to no action and is not
/// stored; the last stored transition of an episode is terminal.
TrainingResult run_training(const Scenario& sc, uint64_t seed,
                            Framework framework = Framework::U2X);

/// Reference score-function learner over the same action lattice: softmax
/// policy on the network outputs, per-episode reinforce updates with
/// discounted returns. Comparison stub, not a tuned method.
TrainingResult run_training_pg(const Scenario& sc, uint64_t seed,
                               Framework framework = Framework::U2X);

}  // namespace u2x
