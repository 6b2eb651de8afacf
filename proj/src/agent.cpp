#include "u2x/agent.hpp"

#include <algorithm>
#include <stdexcept>

namespace u2x {

AgentObservation observe(const World& world, int uav_index) {
    const Scenario& sc = *world.sc;
    if (uav_index < 0 || uav_index >= sc.num_uavs())
        throw std::out_of_range("observe: uav index");
    const SensingTask& task = sc.tasks[uav_index];
    AgentObservation obs;
    obs.own = world.uav_pos[uav_index];
    obs.target = task.target;
    obs.destination = world.position_of(task.destination_id);
    obs.destination_kind = world.kind_of(task.destination_id);
    for (int i = 0; i < sc.num_uavs(); ++i)
        if (i != uav_index) obs.others.push_back(world.uav_pos[i]);
    obs.center = sc.cell.center;
    obs.radius = sc.cell.radius;
    return obs;
}

std::vector<double> encode(const AgentObservation& obs) {
    std::vector<double> f;
    f.reserve(feature_length(int(obs.others.size()) + 1));
    double r = obs.radius;
    auto push_rel = [&](const Vec3& v, const Vec3& base) {
        f.push_back((v.x - base.x) / r);
        f.push_back((v.y - base.y) / r);
        f.push_back((v.z - base.z) / r);
    };
    push_rel(obs.own, obs.center);
    push_rel(obs.target, obs.own);
    push_rel(obs.destination, obs.own);
    f.push_back(obs.destination_kind == EntityKind::BS ? 1.0 : 0.0);
    f.push_back(obs.destination_kind == EntityKind::UE ? 1.0 : 0.0);
    f.push_back(obs.destination_kind == EntityKind::UAV ? 1.0 : 0.0);
    for (const Vec3& o : obs.others) push_rel(o, obs.own);
    return f;
}

int feature_length(int num_uavs) {
    // own + target + destination + one other slot per remaining UAV,
    // 3 coordinates each, plus the 3 destination-kind flags
    return 3 * (2 + 1 + (num_uavs - 1)) + 3;
}

int argmax_action(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("argmax_action: empty values");
    int best = 0;
    for (int i = 1; i < int(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

int policy(const std::vector<double>& values, double greedy_prob, Rng& rng) {
    if (greedy_prob < 0.0 || greedy_prob > 1.0)
        throw std::domain_error("policy: greedy_prob outside [0,1]");
    if (rng.uniform01() < greedy_prob) return argmax_action(values);
    return int(rng.uniform_int(uint64_t(values.size())));
}

double td_target(double reward, const std::vector<double>& next_values, double gamma,
                 bool terminal) {
    if (gamma < 0.0 || gamma >= 1.0) throw std::domain_error("td_target: gamma outside [0,1)");
    if (terminal) return reward;
    return reward + gamma * *std::max_element(next_values.begin(), next_values.end());
}

double train_step(Mlp& net, const Mlp& target_net, const std::vector<Transition>& batch,
                  double gamma, double lr) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    Mlp::Gradients grads = net.zero_gradients();
    double loss = 0.0;
    double inv_b = 1.0 / double(batch.size());
    for (const Transition& t : batch) {
        Mlp::Cache cache;
        std::vector<double> q = net.forward(t.obs, cache);
        double y = td_target(t.reward, target_net.forward(t.next_obs), gamma, t.terminal);
        double err = q[t.action] - y;
        loss += err * err * inv_b;
        std::vector<double> dl(q.size(), 0.0);
        dl[t.action] = 2.0 * err * inv_b;
        net.backward(cache, dl, grads);
    }
    net.sgd_step(grads, lr);
    return loss;
}

namespace {
std::vector<int> layer_plan(int obs_len, int num_actions, const DqnConfig& cfg) {
    std::vector<int> sizes{obs_len};
    for (int z = 0; z < cfg.hidden_depth; ++z) sizes.push_back(cfg.hidden_width);
    sizes.push_back(num_actions);
    return sizes;
}
}  // namespace

DqnAgent::DqnAgent(int obs_len, int num_actions, const DqnConfig& cfg, Rng& init_rng)
    : cfg_(cfg), net_(layer_plan(obs_len, num_actions, cfg)), buffer_(cfg.capacity) {
    net_.init(init_rng);
    target_ = net_;
}

int DqnAgent::act(const std::vector<double>& obs, double epsilon, Rng& rng) const {
    double greedy_prob = cfg_.greedy_prob_is_epsilon ? epsilon : 1.0 - epsilon;
    return policy(net_.forward(obs), greedy_prob, rng);
}

int DqnAgent::act_greedy(const std::vector<double>& obs) const {
    return argmax_action(net_.forward(obs));
}

double DqnAgent::learn(Rng& rng) {
    if (buffer_.size() < cfg_.batch_size) return -1.0;
    std::vector<int> idx = buffer_.sample_indices(cfg_.batch_size, rng);
    std::vector<Transition> batch;
    batch.reserve(idx.size());
    for (int i : idx) batch.push_back(buffer_.at(i));
    return train_step(net_, target_, batch, cfg_.gamma, cfg_.learning_rate);
}

}  // namespace u2x
