#include "u2x/net.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace u2x {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two layers");
    for (int s : sizes_)
        if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
    for (int l = 0; l < num_layers(); ++l) {
        weight_.emplace_back(size_t(sizes_[l + 1]) * sizes_[l], 0.0);
        bias_.emplace_back(sizes_[l + 1], 0.0);
    }
}

void Mlp::init(Rng& rng) {
    for (int l = 0; l < num_layers(); ++l) {
        double bound = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
        for (double& w : weight_[l]) w = (2.0 * rng.uniform01() - 1.0) * bound;
        for (double& b : bias_[l]) b = 0.0;
    }
}

std::vector<double> Mlp::forward(const std::vector<double>& x) const {
    Cache cache;
    return forward(x, cache);
}

std::vector<double> Mlp::forward(const std::vector<double>& x, Cache& cache) const {
    if (int(x.size()) != input_size())
        throw std::invalid_argument("Mlp::forward: input length mismatch");
    cache.act.assign(1, x);
    cache.pre.clear();
    std::vector<double> cur = x;
    for (int l = 0; l < num_layers(); ++l) {
        int in = sizes_[l], out = sizes_[l + 1];
        std::vector<double> z(out);
        for (int r = 0; r < out; ++r) {
            double sum = bias_[l][r];
            const double* wrow = &weight_[l][size_t(r) * in];
            for (int c = 0; c < in; ++c) sum += wrow[c] * cur[c];
            z[r] = sum;
        }
        cache.pre.push_back(z);
        if (l + 1 < num_layers())
            for (double& v : z) v = v > 0.0 ? v : 0.0;
        cache.act.push_back(z);
        cur = std::move(z);
    }
    return cur;
}

Mlp::Gradients Mlp::zero_gradients() const {
    Gradients g;
    for (int l = 0; l < num_layers(); ++l) {
        g.weight.emplace_back(weight_[l].size(), 0.0);
        g.bias.emplace_back(bias_[l].size(), 0.0);
    }
    return g;
}

void Mlp::Gradients::add_scaled(const Gradients& other, double scale) {
    for (size_t l = 0; l < weight.size(); ++l) {
        for (size_t i = 0; i < weight[l].size(); ++i) weight[l][i] += scale * other.weight[l][i];
        for (size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += scale * other.bias[l][i];
    }
}

void Mlp::Gradients::scale(double s) {
    for (auto& w : weight)
        for (double& v : w) v *= s;
    for (auto& b : bias)
        for (double& v : b) v *= s;
}

std::vector<double> Mlp::backward(const Cache& cache, const std::vector<double>& dl_dout,
                                  Gradients& grads) const {
    if (int(dl_dout.size()) != output_size())
        throw std::invalid_argument("Mlp::backward: gradient length mismatch");
    std::vector<double> delta = dl_dout;
    for (int l = num_layers() - 1; l >= 0; --l) {
        int in = sizes_[l], out = sizes_[l + 1];
        if (l + 1 < num_layers()) {
            // ReLU gate: gradient passes only where the pre-activation was
            // positive (subgradient 0 at exactly zero)
            for (int r = 0; r < out; ++r)
                if (cache.pre[l][r] <= 0.0) delta[r] = 0.0;
        }
        const std::vector<double>& a = cache.act[l];
        std::vector<double> prev(in, 0.0);
        for (int r = 0; r < out; ++r) {
            double d = delta[r];
            grads.bias[l][r] += d;
            double* grow = &grads.weight[l][size_t(r) * in];
            const double* wrow = &weight_[l][size_t(r) * in];
            for (int c = 0; c < in; ++c) {
                grow[c] += d * a[c];
                prev[c] += d * wrow[c];
            }
        }
        delta = std::move(prev);
    }
    return delta;
}

void Mlp::sgd_step(const Gradients& grads, double lr) {
    for (int l = 0; l < num_layers(); ++l) {
        for (size_t i = 0; i < weight_[l].size(); ++i) weight_[l][i] -= lr * grads.weight[l][i];
        for (size_t i = 0; i < bias_[l].size(); ++i) bias_[l][i] -= lr * grads.bias[l][i];
    }
}

int Mlp::param_count() const {
    int n = 0;
    for (int l = 0; l < num_layers(); ++l)
        n += int(weight_[l].size()) + int(bias_[l].size());
    return n;
}

double Mlp::get_param(int idx) const {
    for (int l = 0; l < num_layers(); ++l) {
        if (idx < int(weight_[l].size())) return weight_[l][idx];
        idx -= int(weight_[l].size());
    }
    for (int l = 0; l < num_layers(); ++l) {
        if (idx < int(bias_[l].size())) return bias_[l][idx];
        idx -= int(bias_[l].size());
    }
    throw std::out_of_range("Mlp::get_param");
}

void Mlp::set_param(int idx, double v) {
    for (int l = 0; l < num_layers(); ++l) {
        if (idx < int(weight_[l].size())) {
            weight_[l][idx] = v;
            return;
        }
        idx -= int(weight_[l].size());
    }
    for (int l = 0; l < num_layers(); ++l) {
        if (idx < int(bias_[l].size())) {
            bias_[l][idx] = v;
            return;
        }
        idx -= int(bias_[l].size());
    }
    throw std::out_of_range("Mlp::set_param");
}

std::string Mlp::to_json_text() const {
    nlohmann::json j;
    j["sizes"] = sizes_;
    j["weights"] = weight_;
    j["biases"] = bias_;
    return j.dump();
}

Mlp Mlp::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Mlp net(j.at("sizes").get<std::vector<int>>());
    auto w = j.at("weights").get<std::vector<std::vector<double>>>();
    auto b = j.at("biases").get<std::vector<std::vector<double>>>();
    if (w.size() != net.weight_.size() || b.size() != net.bias_.size())
        throw std::invalid_argument("Mlp::from_json_text: layer count mismatch");
    for (size_t l = 0; l < w.size(); ++l) {
        if (w[l].size() != net.weight_[l].size() || b[l].size() != net.bias_[l].size())
            throw std::invalid_argument("Mlp::from_json_text: layer shape mismatch");
        net.weight_[l] = w[l];
        net.bias_[l] = b[l];
    }
    return net;
}

bool Mlp::operator==(const Mlp& other) const {
    return sizes_ == other.sizes_ && weight_ == other.weight_ && bias_ == other.bias_;
}

}  // namespace u2x
