#pragma once

#include <vector>

#include "u2x/protocol.hpp"

namespace u2x {

struct FrameCounts {
    long long u2n = 0;
    long long u2d = 0;
    long long u2u = 0;
    long long idle = 0;
    long long no_subchannel = 0;

    long long total() const { return u2n + u2d + u2u + idle + no_subchannel; }

    void add(const FrameOutcome& f) {
        switch (f.kind) {
            case FrameOutcome::Kind::U2NFrame: ++u2n; break;
            case FrameOutcome::Kind::U2DFrame: ++u2d; break;
            case FrameOutcome::Kind::U2UFrame: ++u2u; break;
            case FrameOutcome::Kind::Idle: ++idle; break;
            case FrameOutcome::Kind::NoSubchannel: ++no_subchannel; break;
        }
    }
};

/// Accumulates per-cycle reports from an evaluation phase.
struct Metrics {
    int cycles = 0;
    int links = 0;
    int frames_per_cycle = 0;
    long long valid_count = 0;        // sampled valid transmissions over all links
    double expected_valid_sum = 0.0;  // sum of per-cycle expected valid transmissions
    double discounted_utility = 0.0;  // sum over links of gamma^t-weighted rewards
    FrameCounts frames;
    int rrm_unconverged_cycles = 0;

    void add_cycle(const std::vector<CycleReport>& reports, double gamma_pow) {
        ++cycles;
        links = int(reports.size());
        bool conv = true;
        for (const auto& r : reports) {
            if (r.valid) ++valid_count;
            expected_valid_sum += r.reward;
            discounted_utility += gamma_pow * r.reward;
            for (const auto& f : r.frames) frames.add(f);
            frames_per_cycle = int(r.frames.size());
            conv = conv && r.rrm_converged;
        }
        if (!conv) ++rrm_unconverged_cycles;
    }

    double mean_valid_per_cycle() const {
        return cycles > 0 ? double(valid_count) / cycles : 0.0;
    }
    double mean_expected_valid_per_cycle() const {
        return cycles > 0 ? expected_valid_sum / cycles : 0.0;
    }

    /// Frame bookkeeping identity: every link produces one outcome per frame.
    bool accounting_exact() const {
        return frames.total() == (long long)frames_per_cycle * links * cycles;
    }
};

}  // namespace u2x
