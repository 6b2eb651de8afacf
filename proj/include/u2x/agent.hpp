#pragma once

#include <vector>

#include "u2x/net.hpp"
#include "u2x/protocol.hpp"
#include "u2x/replay.hpp"

namespace u2x {

/// Everything one UAV can see when choosing its next waypoint: its own
/// position, its task geometry and the positions the BS broadcasts.
struct AgentObservation {
    Vec3 own;
    Vec3 target;
    Vec3 destination;
    EntityKind destination_kind = EntityKind::BS;
    std::vector<Vec3> others;  // other UAVs, ascending index
    Vec3 center;
    double radius = 1.0;
};

AgentObservation observe(const World& world, int uav_index);

/// Relative positions scaled by the cell radius, then a destination-kind
/// one-hot. Identical worlds encode identically; translating every entity
/// and the cell center together leaves the encoding unchanged.
std::vector<double> encode(const AgentObservation& obs);

int feature_length(int num_uavs);

int argmax_action(const std::vector<double>& values);

/// Greedy action with probability greedy_prob (ties to the lowest index),
/// otherwise uniform over all actions. Callers decide whether their epsilon
/// is the greedy or the exploration probability.
int policy(const std::vector<double>& values, double greedy_prob, Rng& rng);

double td_target(double reward, const std::vector<double>& next_values, double gamma,
                 bool terminal);

/// One stochastic gradient step on the mean squared temporal-difference
/// error of the batch, touching only each sample's chosen action output.
/// Returns the pre-step loss.
double train_step(Mlp& net, const Mlp& target_net, const std::vector<Transition>& batch,
                  double gamma, double lr);

class DqnAgent {
public:
    DqnAgent(int obs_len, int num_actions, const DqnConfig& cfg, Rng& init_rng);

    int act(const std::vector<double>& obs, double epsilon, Rng& rng) const;
    int act_greedy(const std::vector<double>& obs) const;

    void remember(Transition t) { buffer_.push(std::move(t)); }

    /// Samples a mini-batch and trains once the buffer holds a full batch.
    /// Returns the pre-step loss, or a negative value when skipped.
    double learn(Rng& rng);

    void sync_target() { target_ = net_; }

    const Mlp& net() const { return net_; }
    const Mlp& target_net() const { return target_; }
    Mlp& mutable_net() { return net_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const DqnConfig& config() const { return cfg_; }

private:
    DqnConfig cfg_;
    Mlp net_;
    Mlp target_;
    ReplayBuffer buffer_;
};

}  // namespace u2x
