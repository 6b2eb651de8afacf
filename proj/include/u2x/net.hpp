#pragma once

#include <string>
#include <vector>

#include "u2x/rng.hpp"

namespace u2x {

/// Fully connected network, rectified-linear hidden units, linear output.
/// Row-major weights: weight(l)[r * in + c] maps input c to output r of
/// layer l.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<int> layer_sizes);

    /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
    void init(Rng& rng);

    struct Cache {
        std::vector<std::vector<double>> act;  // act[0] = input, act.back() = output
        std::vector<std::vector<double>> pre;  // pre-activation per non-input layer
    };

    struct Gradients {
        std::vector<std::vector<double>> weight;
        std::vector<std::vector<double>> bias;

        void add_scaled(const Gradients& other, double scale);
        void scale(double s);
    };

    std::vector<double> forward(const std::vector<double>& x) const;
    std::vector<double> forward(const std::vector<double>& x, Cache& cache) const;

    Gradients zero_gradients() const;

    /// Backpropagates dL/d(output) through a cached forward pass,
    /// accumulating parameter gradients. Returns dL/d(input).
    std::vector<double> backward(const Cache& cache, const std::vector<double>& dl_dout,
                                 Gradients& grads) const;

    void sgd_step(const Gradients& grads, double lr);

    int num_layers() const { return int(sizes_.size()) - 1; }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }

    /// Flat parameter view, used by the finite-difference checks: weights
    /// layer by layer, then biases layer by layer.
    int param_count() const;
    double get_param(int idx) const;
    void set_param(int idx, double v);

    std::string to_json_text() const;
    static Mlp from_json_text(const std::string& text);

    bool operator==(const Mlp& other) const;
    bool operator!=(const Mlp& other) const { return !(*this == other); }

private:
    std::vector<int> sizes_;
    std::vector<std::vector<double>> weight_;  // [l]: sizes_[l+1] x sizes_[l]
    std::vector<std::vector<double>> bias_;    // [l]: sizes_[l+1]
};

}  // namespace u2x
