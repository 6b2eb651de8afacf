#pragma once

#include <cmath>
#include <vector>

namespace u2x {

/// Per-cycle subchannel decision of the BS. Stored as link -> subchannel
/// (-1 when no subchannel is granted); the binary psi matrix view is
/// derivable via assigned().
struct Assignment {
    std::vector<int> channel_of;  // indexed by link id
    bool converged = true;

    explicit Assignment(int num_links = 0) : channel_of(num_links, -1) {}
    bool assigned(int link, int ch) const { return channel_of[link] == ch; }
    bool has_channel(int link) const { return channel_of[link] >= 0; }
};

/// Per-cycle transmission powers in dBm; entries of unassigned links are NaN.
struct PowerVector {
    std::vector<double> dbm;
    bool converged = true;

    explicit PowerVector(int num_links = 0)
        : dbm(num_links, std::nan("")) {}
};

struct RrmDecision {
    Assignment assignment;
    PowerVector powers;
    bool converged = true;
    double global_utility = 0.0;
};

}  // namespace u2x
