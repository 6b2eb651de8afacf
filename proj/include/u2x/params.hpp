#pragma once

#include <cstdint>

#include "u2x/geometry.hpp"

namespace u2x {

/// Terrestrial uplink transmitter occupying a subchannel for the whole run.
/// Occupied subchannels are closed to U2N overlay but open to underlay links.
struct CellularOccupant {
    int subchannel = 0;
    Vec3 position;
    double tx_dbm = 20.0;
};

struct RrmParams {
    int underlay_cap = 2;         // max underlay links admitted per subchannel
    double tol = 1e-4;            // relative utility improvement threshold
    int max_outer_iters = 50;
    int match_max_rounds = 200;
    double sca_step_frac = 0.1;   // gradient step as a fraction of p_max (linear)
    double sca_inner_tol = 1e-6;
    int sca_inner_max_iters = 400;
    int sca_max_iters = 50;
};

struct DqnConfig {
    double gamma = 0.9;
    int hidden_width = 64;
    int hidden_depth = 1;         // Z hidden layers
    int capacity = 10000;
    int batch_size = 32;
    double learning_rate = 1e-3;
    int target_sync_cycles = 20;  // r
    // Epsilon is the greedy probability (literal protocol semantics); set
    // greedy_prob_is_epsilon = false for the conventional reading.
    double epsilon_start = 0.5;
    double epsilon_end = 0.95;
    bool greedy_prob_is_epsilon = true;
};

struct TrainParams {
    int episodes = 150;
    int cycles_per_episode = 40;
    int eval_cycles = 50;         // greedy-policy evaluation phase
};

}  // namespace u2x
