#include "u2x/training.hpp"

#include <cmath>

#include "u2x/rrm.hpp"

namespace u2x {

namespace {

double epsilon_for_episode(const DqnConfig& cfg, int episode, int episodes) {
    if (episodes <= 1) return cfg.epsilon_end;
    double s = double(episode) / double(episodes - 1);
    return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * s;
}

std::vector<Vec3> initial_positions(const Scenario& sc) {
    std::vector<Vec3> p;
    for (const auto& u : sc.uavs) p.push_back(u.position);
    return p;
}

}  // namespace

TrainingResult run_training(const Scenario& sc, uint64_t seed, Framework framework) {
    int n = sc.num_uavs();
    int obs_len = feature_length(n);
    Rng init_rng = Rng::seeded(seed, stream::kInit);
    Rng train_rng = Rng::seeded(seed, stream::kTrain);

    TrainingResult result;
    result.agents.reserve(n);
    for (int i = 0; i < n; ++i)
        result.agents.emplace_back(obs_len, kLatticeActions, sc.dqn, init_rng);

    RrmProvider provider = rrm::make_provider();
    World world(sc);
    std::vector<Vec3> start = initial_positions(sc);

    long long global_cycle = 0;
    for (int ep = 0; ep < sc.train.episodes; ++ep) {
        double eps = epsilon_for_episode(sc.dqn, ep, sc.train.episodes);
        result.epsilon_schedule.push_back(eps);
        world.uav_pos = start;

        std::vector<std::vector<double>> prev_obs;
        std::vector<int> prev_actions;
        std::vector<double> agent_utility(n, 0.0);
        double gamma_pow = 1.0;
        double loss_sum = 0.0;
        int loss_count = 0;

        for (int t = 0; t < sc.train.cycles_per_episode; ++t) {
            std::vector<std::vector<double>> obs(n);
            std::vector<int> actions(n);
            for (int i = 0; i < n; ++i) {
                obs[i] = encode(observe(world, i));
                actions[i] = result.agents[i].act(obs[i], eps, train_rng);
            }
            std::vector<CycleReport> reports =
                run_cycle(world, actions, provider, framework, train_rng);

            for (int i = 0; i < n; ++i) agent_utility[i] += gamma_pow * reports[i].reward;
            gamma_pow *= sc.dqn.gamma;

            if (t >= 1) {
                bool terminal = t == sc.train.cycles_per_episode - 1;
                for (int i = 0; i < n; ++i)
                    result.agents[i].remember(
                        {prev_obs[i], prev_actions[i], reports[i].reward, obs[i], terminal});
            }
            for (int i = 0; i < n; ++i) {
                double loss = result.agents[i].learn(train_rng);
                if (loss >= 0.0) {
                    loss_sum += loss;
                    ++loss_count;
                }
            }
            ++global_cycle;
            if (global_cycle % sc.dqn.target_sync_cycles == 0)
                for (auto& a : result.agents) a.sync_target();

            prev_obs = std::move(obs);
            prev_actions = std::move(actions);
        }

        double total = 0.0;
        for (double u : agent_utility) total += u;
        result.episode_utility.push_back(total);
        result.per_agent_utility.push_back(agent_utility);
        result.mean_loss.push_back(loss_count > 0 ? loss_sum / loss_count : -1.0);
    }
    return result;
}

TrainingResult run_training_pg(const Scenario& sc, uint64_t seed, Framework framework) {
    int n = sc.num_uavs();
    int obs_len = feature_length(n);
    Rng init_rng = Rng::seeded(seed, stream::kInit);
    Rng train_rng = Rng::seeded(seed, stream::kTrain);

    TrainingResult result;
    result.agents.reserve(n);
    for (int i = 0; i < n; ++i)
        result.agents.emplace_back(obs_len, kLatticeActions, sc.dqn, init_rng);

    RrmProvider provider = rrm::make_provider();
    World world(sc);
    std::vector<Vec3> start = initial_positions(sc);

    auto softmax = [](const std::vector<double>& logits) {
        double mx = logits[0];
        for (double v : logits) mx = std::max(mx, v);
        std::vector<double> p(logits.size());
        double sum = 0.0;
        for (size_t i = 0; i < logits.size(); ++i) {
            p[i] = std::exp(logits[i] - mx);
            sum += p[i];
        }
        for (double& v : p) v /= sum;
        return p;
    };
    auto sample = [&](const std::vector<double>& probs, Rng& rng) {
        double u = rng.uniform01();
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return int(i);
        }
        return int(probs.size()) - 1;
    };

    for (int ep = 0; ep < sc.train.episodes; ++ep) {
        result.epsilon_schedule.push_back(1.0);  // no exploration knob in the stub
        world.uav_pos = start;

        int T = sc.train.cycles_per_episode;
        std::vector<std::vector<std::vector<double>>> obs_hist(
            n, std::vector<std::vector<double>>(T));
        std::vector<std::vector<int>> act_hist(n, std::vector<int>(T));
        std::vector<std::vector<double>> rew_hist(n, std::vector<double>(T));
        std::vector<double> agent_utility(n, 0.0);
        double gamma_pow = 1.0;

        for (int t = 0; t < T; ++t) {
            std::vector<int> actions(n);
            for (int i = 0; i < n; ++i) {
                obs_hist[i][t] = encode(observe(world, i));
                std::vector<double> probs =
                    softmax(result.agents[i].net().forward(obs_hist[i][t]));
                actions[i] = sample(probs, train_rng);
                act_hist[i][t] = actions[i];
            }
            std::vector<CycleReport> reports =
                run_cycle(world, actions, provider, framework, train_rng);
            for (int i = 0; i < n; ++i) {
                rew_hist[i][t] = reports[i].reward;
                agent_utility[i] += gamma_pow * reports[i].reward;
            }
            gamma_pow *= sc.dqn.gamma;
        }

        // reinforce: credit each action with the discounted return from the
        // following cycle on (rewards lag actions by one cycle)
        for (int i = 0; i < n; ++i) {
            Mlp& net = result.agents[i].mutable_net();
            Mlp::Gradients grads = net.zero_gradients();
            std::vector<double> ret(T, 0.0);
            double g = 0.0;
            for (int t = T - 1; t >= 1; --t) {
                g = rew_hist[i][t] + sc.dqn.gamma * g;
                ret[t - 1] = g;
            }
            for (int t = 0; t + 1 < T; ++t) {
                Mlp::Cache cache;
                std::vector<double> logits = net.forward(obs_hist[i][t], cache);
                std::vector<double> probs = softmax(logits);
                std::vector<double> dl(probs.size());
                for (size_t a = 0; a < probs.size(); ++a) {
                    double ind = int(a) == act_hist[i][t] ? 1.0 : 0.0;
                    dl[a] = (probs[a] - ind) * ret[t];  // gradient of -log pi(a) * G
                }
                net.backward(cache, dl, grads);
            }
            grads.scale(1.0 / double(std::max(1, T - 1)));
            net.sgd_step(grads, sc.dqn.learning_rate);
        }

        double total = 0.0;
        for (double u : agent_utility) total += u;
        result.episode_utility.push_back(total);
        result.per_agent_utility.push_back(agent_utility);
        result.mean_loss.push_back(-1.0);
    }
    return result;
}

}  // namespace u2x
