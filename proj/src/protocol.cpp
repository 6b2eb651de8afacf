#include "u2x/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "u2x/sensing.hpp"

namespace u2x {

double link_spectral_efficiency(const World& world, int tx_id, int rx_id,
                                double tx_dbm) {
    const Scenario& sc = *world.sc;
    Vec3 a = world.position_of(tx_id);
    Vec3 b = world.position_of(rx_id);
    double d = std::max(distance(a, b), 1.0);  // entities never closer than 1 m
    LinkClass cls = classify_link(world.kind_of(tx_id), world.kind_of(rx_id));
    double loss = path_loss_db(d, cls, sc.channel);
    return spectral_efficiency(mean_sinr(tx_dbm, loss, {}, sc.channel.noise_dbm));
}

std::optional<ModeChoice> select_mode(int uav_index, const World& world,
                                      double assumed_power_dbm) {
    const Scenario& sc = *world.sc;
    const SensingTask& task = sc.tasks[uav_index];
    int self_id = sc.uavs[uav_index].id;
    EntityKind dest_kind = world.kind_of(task.destination_id);

    std::vector<ModeChoice> candidates;
    candidates.push_back({TransmissionMode::U2N, -1,
                          link_spectral_efficiency(world, self_id, sc.bs.id,
                                                   assumed_power_dbm)});
    if (dest_kind == EntityKind::UE) {
        candidates.push_back({TransmissionMode::U2D, -1,
                              link_spectral_efficiency(world, self_id, task.destination_id,
                                                       assumed_power_dbm)});
    }
    // U2U: relay ranked by the bottleneck of both hops; a UAV destination
    // acts as its own relay with only the first hop counted.
    int best_relay = -1;
    double best_relay_se = -1.0;
    for (int k = 0; k < sc.num_uavs(); ++k) {
        int relay_id = sc.uavs[k].id;
        if (relay_id == self_id) continue;
        double hop1 = link_spectral_efficiency(world, self_id, relay_id, assumed_power_dbm);
        double se;
        if (relay_id == task.destination_id) {
            se = hop1;
        } else {
            double hop2 =
                link_spectral_efficiency(world, relay_id, task.destination_id, assumed_power_dbm);
            se = std::min(hop1, hop2);
        }
        if (se > best_relay_se) {
            best_relay_se = se;
            best_relay = relay_id;
        }
    }
    if (best_relay >= 0)
        candidates.push_back({TransmissionMode::U2U, best_relay, best_relay_se});

    // Highest spectral efficiency among threshold-satisfying modes; ties
    // resolved by the fixed order U2N > U2D > U2U.
    auto rank = [](TransmissionMode m) {
        switch (m) {
            case TransmissionMode::U2N: return 0;
            case TransmissionMode::U2D: return 1;
            case TransmissionMode::U2U: return 2;
        }
        return 3;
    };
    std::optional<ModeChoice> best;
    for (const auto& c : candidates) {
        if (c.spectral_eff + 1e-12 < task.qos_threshold) continue;
        if (!best || c.spectral_eff > best->spectral_eff + 1e-12 ||
            (std::abs(c.spectral_eff - best->spectral_eff) <= 1e-12 &&
             rank(c.mode) < rank(best->mode))) {
            best = c;
        }
    }
    return best;
}

double transmission_success_prob(int k, double q, int n) {
    if (q < 0.0 || q > 1.0) throw std::domain_error("transmission_success_prob: q outside [0,1]");
    if (k < 0 || n < 0) throw std::domain_error("transmission_success_prob: negative count");
    if (n == 0) return 1.0;
    if (k < n) return 0.0;
    if (q == 0.0) return 0.0;
    if (q == 1.0) return 1.0;
    double log_q = std::log(q);
    double log_1mq = std::log1p(-q);
    double sum = 0.0;
    for (int m = n; m <= k; ++m) {
        double log_c = std::lgamma(k + 1.0) - std::lgamma(m + 1.0) - std::lgamma(k - m + 1.0);
        sum += std::exp(log_c + m * log_q + (k - m) * log_1mq);
    }
    return std::min(sum, 1.0);
}

std::array<std::array<double, 2>, 2> outer_transition(double p_sense) {
    if (p_sense < 0 || p_sense > 1) throw std::domain_error("outer_transition: p outside [0,1]");
    return {{{p_sense, 1.0 - p_sense}, {p_sense, 1.0 - p_sense}}};
}

std::array<double, 4> inner_distribution(const std::optional<TransmissionMode>& mode,
                                         double p_transmit) {
    if (p_transmit < 0 || p_transmit > 1)
        throw std::domain_error("inner_distribution: p outside [0,1]");
    std::array<double, 4> d{0.0, 0.0, 0.0, 1.0};
    if (!mode) return d;
    int idx = 0;
    switch (*mode) {
        case TransmissionMode::U2N: idx = 0; break;
        case TransmissionMode::U2U: idx = 1; break;
        case TransmissionMode::U2D: idx = 2; break;
    }
    d[idx] = p_transmit;
    d[3] = 1.0 - p_transmit;
    return d;
}

double second_hop_frame_prob(const World& world, const SensingTask& task) {
    const Scenario& sc = *world.sc;
    if (task.destination_id == sc.bs.id) return 1.0;
    double se_needed = task.qos_threshold;
    Vec3 a = world.position_of(sc.bs.id);
    Vec3 b = world.position_of(task.destination_id);
    double d = std::max(distance(a, b), 1.0);
    LinkClass cls = classify_link(EntityKind::BS, world.kind_of(task.destination_id));
    double loss = path_loss_db(d, cls, sc.channel);
    MeanSinr snr = mean_sinr(sc.bs_tx_dbm, loss, {}, sc.channel.noise_dbm);
    return frame_success_prob(snr, se_needed);
}

namespace {

struct FrameLinkState {
    ActiveLink link;
    int channel = -1;
    double power_dbm = std::nan("");
    int remaining = 0;
    FrameOutcome::Kind mode_kind = FrameOutcome::Kind::NoSubchannel;
};

FrameOutcome::Kind kind_for_mode(TransmissionMode m) {
    switch (m) {
        case TransmissionMode::U2N: return FrameOutcome::Kind::U2NFrame;
        case TransmissionMode::U2U: return FrameOutcome::Kind::U2UFrame;
        case TransmissionMode::U2D: return FrameOutcome::Kind::U2DFrame;
    }
    return FrameOutcome::Kind::NoSubchannel;
}

// Linear received power (mW) from the transmitter of entity tx to the
// receiver of entity rx.
double received_mw(const World& world, int tx_id, int rx_id, double tx_dbm) {
    double d = std::max(distance(world.position_of(tx_id), world.position_of(rx_id)), 1.0);
    LinkClass cls = classify_link(world.kind_of(tx_id), world.kind_of(rx_id));
    return dbm_to_mw(tx_dbm - path_loss_db(d, cls, world.sc->channel));
}

double occupant_interference_mw(const World& world, int channel, int rx_id) {
    double sum = 0.0;
    for (const auto& occ : world.sc->cellular) {
        if (occ.subchannel != channel) continue;
        double d = std::max(distance(occ.position, world.position_of(rx_id)), 1.0);
        LinkClass cls = classify_link(EntityKind::UE, world.kind_of(rx_id));
        sum += dbm_to_mw(occ.tx_dbm - path_loss_db(d, cls, world.sc->channel));
    }
    return sum;
}

// Mean SINR of link i given the set of links actively transmitting on its
// subchannel (active excludes i itself).
double co_channel_sinr(const World& world, const FrameLinkState& me,
                       const std::vector<const FrameLinkState*>& co_active) {
    double signal = received_mw(world, me.link.tx_id, me.link.rx_id, me.power_dbm);
    double denom = dbm_to_mw(world.sc->channel.noise_dbm) +
                   occupant_interference_mw(world, me.channel, me.link.rx_id);
    for (const FrameLinkState* other : co_active)
        denom += received_mw(world, other->link.tx_id, me.link.rx_id, other->power_dbm);
    return signal / denom;
}

}  // namespace

std::vector<CycleReport> run_cycle(World& world, const std::vector<int>& actions,
                                   const RrmProvider& rrm, Framework framework,
                                   Rng& rng) {
    const Scenario& sc = *world.sc;
    int n = sc.num_uavs();
    int F = sc.frames_per_cycle;
    if (int(actions.size()) != n)
        throw ProtocolViolation("run_cycle: one action per UAV required");

    // (1) decentralized mode selection
    std::vector<std::optional<ModeChoice>> modes(n);
    std::vector<ActiveLink> active;
    for (int i = 0; i < n; ++i) {
        const SensingTask& task = sc.tasks[i];
        if (framework == Framework::ConventionalCellular) {
            modes[i] = ModeChoice{TransmissionMode::U2N, -1,
                                  link_spectral_efficiency(world, sc.uavs[i].id, sc.bs.id,
                                                           sc.p_max_dbm)};
            if (modes[i]->spectral_eff + 1e-12 < task.qos_threshold) modes[i].reset();
        } else {
            modes[i] = select_mode(i, world, sc.p_max_dbm);
        }
        if (modes[i]) {
            ActiveLink l;
            l.link_id = i;
            l.tx_id = sc.uavs[i].id;
            l.rx_id = modes[i]->receiver_id(sc, task);
            l.mode = modes[i]->mode;
            l.rho = task.qos_threshold;
            l.packets = task.data_packets;
            l.sensing_prob =
                sensing_success_prob(distance(world.uav_pos[i], task.target), sc.sensing);
            active.push_back(l);
        }
    }

    // (2) centralized resource decision
    RrmDecision decision = rrm(active, world);
    if (int(decision.assignment.channel_of.size()) != n || int(decision.powers.dbm.size()) != n)
        throw ProtocolViolation("run_cycle: assignment size mismatch");
    for (int i = 0; i < n; ++i) {
        if (decision.assignment.has_channel(i) && !modes[i])
            throw ProtocolViolation("run_cycle: subchannel granted to a link with no mode");
        if (decision.assignment.has_channel(i) &&
            decision.assignment.channel_of[i] >= sc.num_subchannels)
            throw ProtocolViolation("run_cycle: subchannel index out of range");
    }

    // (3) sensing at the pre-move position
    std::vector<bool> sensed(n);
    std::vector<double> p_sense(n);
    for (int i = 0; i < n; ++i) {
        p_sense[i] = sensing_success_prob(distance(world.uav_pos[i], sc.tasks[i].target),
                                          sc.sensing);
        sensed[i] = sample_sensing(p_sense[i], rng);
    }

    // (4) frame loop; buffers refill every cycle, validity is settled later
    std::vector<FrameLinkState> st(n);
    for (int i = 0; i < n; ++i) {
        st[i].channel = decision.assignment.channel_of[i];
        st[i].power_dbm = decision.powers.dbm[i];
        st[i].remaining = sc.tasks[i].data_packets;
        if (modes[i]) {
            ActiveLink l;
            l.link_id = i;
            l.tx_id = sc.uavs[i].id;
            l.rx_id = modes[i]->receiver_id(sc, sc.tasks[i]);
            l.mode = modes[i]->mode;
            l.rho = sc.tasks[i].qos_threshold;
            st[i].link = l;
            st[i].mode_kind = kind_for_mode(modes[i]->mode);
        }
    }

    std::vector<CycleReport> reports(n);
    for (int i = 0; i < n; ++i) {
        reports[i].link_id = i;
        reports[i].mode = modes[i];
        reports[i].sensing_success = sensed[i];
        reports[i].subchannel = st[i].channel;
        reports[i].power_dbm = st[i].power_dbm;
        reports[i].rrm_converged = decision.converged;
        reports[i].frames.reserve(F);
    }

    for (int f = 0; f < F; ++f) {
        // active set fixed at the frame boundary
        std::vector<bool> transmitting(n, false);
        for (int i = 0; i < n; ++i)
            transmitting[i] = st[i].channel >= 0 && st[i].remaining > 0;
        for (int i = 0; i < n; ++i) {
            FrameOutcome out;
            if (st[i].channel < 0) {
                out.kind = FrameOutcome::Kind::NoSubchannel;
            } else if (st[i].remaining == 0) {
                out.kind = FrameOutcome::Kind::Idle;
            } else {
                out.kind = st[i].mode_kind;
                std::vector<const FrameLinkState*> co;
                for (int k = 0; k < n; ++k)
                    if (k != i && transmitting[k] && st[k].channel == st[i].channel)
                        co.push_back(&st[k]);
                double q = frame_success_prob({co_channel_sinr(world, st[i], co)},
                                              st[i].link.rho);
                if (rng.bernoulli(q)) {
                    out.packets_delivered = 1;
                    st[i].remaining -= 1;
                }
            }
            reports[i].frames.push_back(out);
        }
    }

    // baseline second hop: dedicated downlink band, simulated as F frames
    std::vector<bool> hop2(n, true);
    if (framework == Framework::ConventionalCellular) {
        for (int i = 0; i < n; ++i) {
            const SensingTask& task = sc.tasks[i];
            if (task.destination_id == sc.bs.id) continue;
            double q2 = second_hop_frame_prob(world, task);
            int delivered = 0;
            for (int f = 0; f < F; ++f)
                if (rng.bernoulli(q2)) ++delivered;
            hop2[i] = delivered >= task.data_packets;
        }
    }

    // (5) reports: validity and the expected-valid reward
    for (int i = 0; i < n; ++i) {
        CycleReport& r = reports[i];
        r.second_hop_success = hop2[i];
        r.transmission_success = st[i].remaining == 0 && hop2[i];
        r.valid = r.sensing_success && r.transmission_success;

        double pt = 0.0;
        if (st[i].channel >= 0) {
            // expectation under all-active co-channel interference
            std::vector<const FrameLinkState*> co;
            for (int k = 0; k < n; ++k)
                if (k != i && st[k].channel == st[i].channel && modes[k]) co.push_back(&st[k]);
            double q = frame_success_prob({co_channel_sinr(world, st[i], co)}, st[i].link.rho);
            pt = transmission_success_prob(F, q, sc.tasks[i].data_packets);
            if (framework == Framework::ConventionalCellular) {
                double q2 = second_hop_frame_prob(world, sc.tasks[i]);
                pt *= transmission_success_prob(F, q2, sc.tasks[i].data_packets);
            }
        }
        r.reward = valid_prob(p_sense[i], pt);
    }

    // positions advance by the chosen lattice actions
    for (int i = 0; i < n; ++i) {
        if (actions[i] < 0 || actions[i] >= kLatticeActions)
            throw ProtocolViolation("run_cycle: action index out of range");
        world.uav_pos[i] =
            lattice_actions(world.uav_pos[i], sc.motion.lattice_step, sc.cell)[actions[i]];
    }
    return reports;
}

}  // namespace u2x
