#include "u2x/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace u2x {

int ToyMdp::clip_move(int s, int a) const {
    int x = s % width, y = s / width;
    int dx = a % 3 - 1, dy = a / 3 - 1;
    x = std::clamp(x + dx, 0, width - 1);
    y = std::clamp(y + dy, 0, height - 1);
    return y * width + x;
}

ToyMdp ToyMdp::sensing_toy() {
    ToyMdp mdp;
    mdp.field.resize(mdp.num_states());
    // sensing-like bump at (4,2), transmission-like bump at (1,1)
    for (int y = 0; y < mdp.height; ++y) {
        for (int x = 0; x < mdp.width; ++x) {
            double ds = std::hypot(x - 4.0, y - 2.0);
            double dt = std::hypot(x - 1.0, y - 1.0);
            mdp.field[y * mdp.width + x] =
                std::exp(-0.40 * ds) * (0.25 + 0.75 * std::exp(-0.22 * dt));
        }
    }
    return mdp;
}

QTable make_table(const ToyMdp& mdp, double fill) {
    return QTable(mdp.num_states(), std::vector<double>(ToyMdp::kNumActions, fill));
}

double tabular_q_update(QTable& table, const ToyMdp& mdp, int state, int action,
                        double reward, int next_state, double alpha, double gamma) {
    if (alpha < 0.0 || alpha > 1.0) throw std::domain_error("tabular_q_update: alpha");
    if (gamma < 0.0 || gamma >= 1.0) throw std::domain_error("tabular_q_update: gamma");
    (void)mdp;
    double best_next =
        *std::max_element(table[next_state].begin(), table[next_state].end());
    double td = reward + gamma * best_next - table[state][action];
    table[state][action] += alpha * td;
    return td;
}

QTable value_iteration(const ToyMdp& mdp, double tol, int max_iters) {
    QTable q = make_table(mdp);
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        QTable next = q;
        for (int s = 0; s < mdp.num_states(); ++s) {
            for (int a = 0; a < ToyMdp::kNumActions; ++a) {
                int sp = mdp.clip_move(s, a);
                double best = *std::max_element(q[sp].begin(), q[sp].end());
                double v = mdp.reward(s, a) + mdp.gamma * best;
                delta = std::max(delta, std::abs(v - next[s][a]));
                next[s][a] = v;
            }
        }
        q = std::move(next);
        if (delta < tol) break;
    }
    return q;
}

QTable train_tabular(const ToyMdp& mdp, int num_updates, double alpha, Rng& rng) {
    QTable q = make_table(mdp);
    for (int i = 0; i < num_updates; ++i) {
        int s = int(rng.uniform_int(uint64_t(mdp.num_states())));
        int a = int(rng.uniform_int(uint64_t(ToyMdp::kNumActions)));
        int sp = mdp.clip_move(s, a);
        tabular_q_update(q, mdp, s, a, mdp.reward(s, a), sp, alpha, mdp.gamma);
    }
    return q;
}

int greedy_action(const QTable& table, int state) {
    const std::vector<double>& row = table[state];
    return int(std::max_element(row.begin(), row.end()) - row.begin());
}

double greedy_match_fraction(const QTable& table, const QTable& optimal_q, double tol) {
    int matches = 0;
    int n = int(table.size());
    for (int s = 0; s < n; ++s) {
        double best = *std::max_element(optimal_q[s].begin(), optimal_q[s].end());
        if (optimal_q[s][greedy_action(table, s)] >= best - tol) ++matches;
    }
    return double(matches) / n;
}

}  // namespace u2x
