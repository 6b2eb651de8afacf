#pragma once

#include <deque>
#include <stdexcept>
#include <vector>

#include "u2x/rng.hpp"

namespace u2x {

struct Transition {
    std::vector<double> obs;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool terminal = false;
};

/// Bounded FIFO of transitions. At capacity the oldest entry is evicted.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity) : capacity_(capacity) {
        if (capacity <= 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    }

    void push(Transition t) {
        if (int(buf_.size()) == capacity_) buf_.pop_front();
        buf_.push_back(std::move(t));
    }

    int size() const { return int(buf_.size()); }
    int capacity() const { return capacity_; }
    const Transition& at(int i) const { return buf_.at(i); }

    /// Uniform sample of min(n, size) distinct indices, partial
    /// Fisher-Yates so the draw count is fixed given n and size.
    std::vector<int> sample_indices(int n, Rng& rng) const {
        int m = int(buf_.size());
        if (n > m) n = m;
        std::vector<int> idx(m);
        for (int i = 0; i < m; ++i) idx[i] = i;
        for (int i = 0; i < n; ++i) {
            int j = int(rng.uniform_int(uint64_t(m - i))) + i;
            std::swap(idx[i], idx[j]);
        }
        idx.resize(n);
        return idx;
    }

private:
    int capacity_;
    std::deque<Transition> buf_;
};

}  // namespace u2x
