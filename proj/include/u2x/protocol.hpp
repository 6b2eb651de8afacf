#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "u2x/allocation.hpp"
#include "u2x/rng.hpp"
#include "u2x/scenario.hpp"

namespace u2x {

enum class TransmissionMode { U2N, U2U, U2D };

inline const char* to_string(TransmissionMode m) {
    switch (m) {
        case TransmissionMode::U2N: return "U2N";
        case TransmissionMode::U2U: return "U2U";
        case TransmissionMode::U2D: return "U2D";
    }
    return "?";
}

/// Raised when the BS decision is inconsistent with the protocol, e.g. a
/// subchannel granted to a link that selected no mode.
class ProtocolViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Framework { U2X, ConventionalCellular };

/// Mutable simulation state on top of an immutable scenario.
struct World {
    const Scenario* sc = nullptr;
    std::vector<Vec3> uav_pos;  // by UAV index

    explicit World(const Scenario& s) : sc(&s) {
        for (const auto& u : s.uavs) uav_pos.push_back(u.position);
    }

    Vec3 position_of(int entity_id) const {
        int ui = sc->uav_index_of(entity_id);
        if (ui >= 0) return uav_pos[ui];
        return sc->entity(entity_id).position;
    }
    EntityKind kind_of(int entity_id) const { return sc->entity(entity_id).kind; }
};

struct ModeChoice {
    TransmissionMode mode = TransmissionMode::U2N;
    int relay_id = -1;           // receiving UAV entity for U2U
    double spectral_eff = 0.0;   // interference-free large-scale value at selection

    int receiver_id(const Scenario& sc, const SensingTask& task) const {
        switch (mode) {
            case TransmissionMode::U2N: return sc.bs.id;
            case TransmissionMode::U2D: return task.destination_id;
            case TransmissionMode::U2U: return relay_id;
        }
        return -1;
    }
};

/// Decentralized per-link mode selection on large-scale state only.
/// Candidates: U2N always; U2D when the destination is a UE; U2U when
/// another UAV works as a relay toward the destination (ranked by the
/// bottleneck hop). Returns nullopt when no mode meets the QoS threshold.
std::optional<ModeChoice> select_mode(int uav_index, const World& world,
                                      double assumed_power_dbm);

/// One UAV-to-destination flow as seen by the BS for this cycle.
struct ActiveLink {
    int link_id = -1;   // == UAV index
    int tx_id = -1;     // transmitting UAV entity id
    int rx_id = -1;     // receiver entity id for the selected mode
    TransmissionMode mode = TransmissionMode::U2N;
    double rho = 1.0;   // per-frame spectral load (= QoS threshold)
    int packets = 1;
    double sensing_prob = 1.0;
};

struct FrameOutcome {
    enum class Kind { U2NFrame, U2DFrame, U2UFrame, Idle, NoSubchannel };
    Kind kind = Kind::NoSubchannel;
    int packets_delivered = 0;
};

inline char frame_code(FrameOutcome::Kind k) {
    switch (k) {
        case FrameOutcome::Kind::U2NFrame: return 'N';
        case FrameOutcome::Kind::U2UFrame: return 'U';
        case FrameOutcome::Kind::U2DFrame: return 'D';
        case FrameOutcome::Kind::Idle: return 'I';
        case FrameOutcome::Kind::NoSubchannel: return 'X';
    }
    return '?';
}

enum class OuterState { SensingSuccess, SensingFailure };
enum class InnerState { SuccessU2N, SuccessU2U, SuccessU2D, TransmissionFailure };

struct CycleReport {
    int link_id = -1;
    std::optional<ModeChoice> mode;
    bool sensing_success = false;
    std::vector<FrameOutcome> frames;
    bool transmission_success = false;
    bool second_hop_success = true;  // baseline downlink hop; true when absent
    bool valid = false;
    double reward = 0.0;  // expected valid transmissions under this cycle's RRM
    int subchannel = -1;
    double power_dbm = std::nan("");
    bool rrm_converged = true;

    std::string frames_encoded() const {
        std::string s;
        for (const auto& f : frames) s.push_back(frame_code(f.kind));
        return s;
    }
};

inline std::string cycle_trace_header() {
    return "cycle,uav_id,mode,sensing,frames,subchannel,power_dbm,valid";
}

/// One audit row per link per cycle; frames is the per-frame outcome string
/// over {N,U,D,I,X}.
inline std::string cycle_trace_row(int cycle, int uav_id, const CycleReport& r) {
    std::string s = std::to_string(cycle) + "," + std::to_string(uav_id) + ",";
    s += r.mode ? to_string(r.mode->mode) : "None";
    s += r.sensing_success ? ",1," : ",0,";
    s += r.frames_encoded();
    s += "," + std::to_string(r.subchannel) + ",";
    if (std::isnan(r.power_dbm)) {
        s += "nan";
    } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", r.power_dbm);
        s += buf;
    }
    s += r.valid ? ",1" : ",0";
    return s;
}

using RrmProvider =
    std::function<RrmDecision(const std::vector<ActiveLink>&, const World&)>;

/// Runs one protocol cycle: mode selection, BS resource decision, sensing,
/// F transmission frames, report assembly; finally advances positions by
/// the chosen lattice actions.
std::vector<CycleReport> run_cycle(World& world, const std::vector<int>& actions,
                                   const RrmProvider& rrm, Framework framework,
                                   Rng& rng);

/// Pr[Bin(k, q) >= n]: probability that n packets fit into k granted frames.
double transmission_success_prob(int frames_allocated, double per_frame_prob,
                                 int packets);

inline double valid_prob(double p_sense, double p_transmit) {
    if (p_sense < 0 || p_sense > 1 || p_transmit < 0 || p_transmit > 1)
        throw std::domain_error("valid_prob: probabilities outside [0,1]");
    return p_sense * p_transmit;
}

/// Outer sensing chain: rows (from success, from failure), columns
/// (to success, to failure). Sensing is independent per cycle, so both
/// rows equal (p_s, 1-p_s).
std::array<std::array<double, 2>, 2> outer_transition(double p_sense);

/// Inner per-cycle transmission outcome over (SuccessU2N, SuccessU2U,
/// SuccessU2D, TransmissionFailure). A cycle without a selected mode fails
/// with probability 1.
std::array<double, 4> inner_distribution(const std::optional<TransmissionMode>& mode,
                                         double p_transmit);

/// Interference-free spectral efficiency between two entities at the given
/// transmit power (helper shared by mode selection and the heatmaps).
double link_spectral_efficiency(const World& world, int tx_id, int rx_id,
                                double tx_dbm);

/// Per-frame success probability of the baseline downlink hop
/// (BS -> destination) over a dedicated subchannel.
double second_hop_frame_prob(const World& world, const SensingTask& task);

}  // namespace u2x
