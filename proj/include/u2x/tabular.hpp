#pragma once

#include <vector>

#include "u2x/rng.hpp"

namespace u2x {

/// Deterministic planar gridworld with the simulator's move set restricted
/// to two dimensions (9 actions). Rewards depend on the landing cell, the
/// same one-cycle lag the full simulator has.
struct ToyMdp {
    int width = 5;
    int height = 5;
    double gamma = 0.9;
    std::vector<double> field;  // landing reward per cell, row-major

    static constexpr int kNumActions = 9;

    int num_states() const { return width * height; }
    int clip_move(int s, int a) const;  // landing state, moves clipped to the grid
    double reward(int s, int a) const { return field[clip_move(s, a)]; }

    /// Two-bump surface shaped like a sensing-times-transmission product,
    /// peaks off-center so no action ties arise along the greedy path.
    static ToyMdp sensing_toy();
};

using QTable = std::vector<std::vector<double>>;  // [state][action]

QTable make_table(const ToyMdp& mdp, double fill = 0.0);

/// Standard one-step update; returns the temporal-difference error before
/// the update.
double tabular_q_update(QTable& table, const ToyMdp& mdp, int state, int action,
                        double reward, int next_state, double alpha, double gamma);

/// Exact optimal action values via synchronous value iteration.
QTable value_iteration(const ToyMdp& mdp, double tol = 1e-12, int max_iters = 100000);

/// Q-learning over uniformly random (state, action) visits. With alpha = 1
/// on a deterministic chain this is asynchronous value iteration.
QTable train_tabular(const ToyMdp& mdp, int num_updates, double alpha, Rng& rng);

int greedy_action(const QTable& table, int state);

/// Fraction of states where the greedy action of `table` is optimal under
/// `optimal_q` (any action whose optimal value ties the best counts).
double greedy_match_fraction(const QTable& table, const QTable& optimal_q, double tol = 1e-9);

}  // namespace u2x
