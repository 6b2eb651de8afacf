#pragma once

#include <vector>

#include "u2x/protocol.hpp"

namespace u2x {
namespace rrm {

/// Per-link weights for the power-control objective, normalized so the
/// weights sum to the number of links. Scaling all raw weights by a
/// positive constant therefore leaves the stored values unchanged.
struct UtilityWeights {
    std::vector<double> w;

    static UtilityWeights normalized(const std::vector<double>& raw);
};

/// Snapshot of one cycle's resource problem with precomputed linear gains.
/// gain[i][k] is the power gain from the transmitter of link k to the
/// receiver of link i; cellular_mw[ch][i] is the occupant power received on
/// channel ch at the receiver of link i.
struct RrmInstance {
    int num_subchannels = 0;
    int frames_per_cycle = 10;
    double noise_mw = 0.0;
    double p_max_mw = 0.0;
    RrmParams params;
    std::vector<ActiveLink> links;
    std::vector<std::vector<double>> gain;
    std::vector<std::vector<double>> cellular_mw;
    std::vector<bool> channel_has_cellular;
    UtilityWeights weights;

    int num_links() const { return int(links.size()); }
    bool u2n(int i) const { return links[i].mode == TransmissionMode::U2N; }
};

RrmInstance build_instance(const std::vector<ActiveLink>& links, const World& world);

/// Spectral efficiency of link i if placed on subchannel j under the
/// current co-channel occupancy and powers (mW). i's own entry in ch_of is
/// ignored.
double link_utility(const RrmInstance& inst, int i, int j,
                    const std::vector<int>& ch_of, const std::vector<double>& p_mw);

/// Sum of expected valid data transmissions of the links on subchannel j.
double subchannel_utility(const RrmInstance& inst, int j, const std::vector<int>& ch_of,
                          const std::vector<double>& p_mw);

/// Weighted sum rate over all assigned links (the global objective used
/// for convergence and oracle comparisons).
double global_utility(const RrmInstance& inst, const std::vector<int>& ch_of,
                      const std::vector<double>& p_mw);

struct MatchState {
    int rounds = 0;
    int proposals = 0;
    int acceptances = 0;
    bool converged = true;
};

/// One-to-one overlay placement of the U2N links on occupant-free
/// subchannels, maximizing the sum of interference-free utilities (exact
/// for this separable objective). Surplus links stay unassigned.
void allocate_u2n_overlay(const RrmInstance& inst, std::vector<int>& ch_of,
                          const std::vector<double>& p_mw);

/// Two-sided propose/accept matching at fixed powers. Every link proposes
/// to the best admissible subchannel that would strictly raise its own
/// utility, and a subchannel accepts only proposals that strictly raise the
/// subchannel utility. Quiescence implies pairwise stability.
MatchState match_subchannels(const RrmInstance& inst, std::vector<int>& ch_of,
                             const std::vector<double>& p_mw);

struct PowerControlResult {
    bool converged = true;
    int iterations = 0;
    std::vector<double> objective_trace;  // weighted utility after each iteration
};

/// Difference-of-convex power control for the links sharing subchannel j:
/// maximizes the weighted sum rate over (0, p_max] by successive convex
/// approximation. A single occupant gets p_max exactly.
PowerControlResult power_control_subchannel(const RrmInstance& inst, int j,
                                            const std::vector<int>& ch_of,
                                            std::vector<double>& p_mw);

struct RrmResult {
    Assignment assignment;
    PowerVector powers;
    bool converged = true;
    double global_utility = 0.0;
    int outer_iterations = 0;
    std::vector<double> utility_trace;  // best-so-far per outer iteration
};

/// Alternates subchannel allocation (overlay + matching, powers frozen) and
/// per-subchannel power control (assignment frozen) until the global
/// weighted utility stops improving. Returns the best configuration seen.
RrmResult rrm_iterate(const RrmInstance& inst);

/// RRM provider for protocol::run_cycle, weighting links by their queued
/// packet counts.
RrmProvider make_provider();

}  // namespace rrm
}  // namespace u2x
