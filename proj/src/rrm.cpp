#include "u2x/rrm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace u2x {
namespace rrm {

namespace {
constexpr double kEps = 1e-12;
constexpr double kPowerFloorFrac = 1e-6;  // lower clamp as fraction of p_max
}  // namespace

UtilityWeights UtilityWeights::normalized(const std::vector<double>& raw) {
    UtilityWeights out;
    out.w = raw;
    double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (sum <= 0.0) {
        std::fill(out.w.begin(), out.w.end(), 1.0);
        return out;
    }
    double scale = double(raw.size()) / sum;
    for (double& x : out.w) x *= scale;
    return out;
}

RrmInstance build_instance(const std::vector<ActiveLink>& links, const World& world) {
    const Scenario& sc = *world.sc;
    RrmInstance inst;
    inst.num_subchannels = sc.num_subchannels;
    inst.frames_per_cycle = sc.frames_per_cycle;
    inst.noise_mw = dbm_to_mw(sc.channel.noise_dbm);
    inst.p_max_mw = dbm_to_mw(sc.p_max_dbm);
    inst.params = sc.rrm;
    inst.links = links;

    int L = inst.num_links();
    inst.gain.assign(L, std::vector<double>(L, 0.0));
    for (int i = 0; i < L; ++i) {
        Vec3 rx = world.position_of(links[i].rx_id);
        EntityKind rx_kind = world.kind_of(links[i].rx_id);
        for (int k = 0; k < L; ++k) {
            if (links[k].tx_id == links[i].rx_id) {
                // a relay cannot hear its own receiver slot; nothing transmits
                // to itself, but a link whose transmitter IS i's receiver
                // contributes no interference term either
                inst.gain[i][k] = 0.0;
                continue;
            }
            Vec3 tx = world.position_of(links[k].tx_id);
            double d = std::max(distance(tx, rx), 1.0);
            LinkClass cls = classify_link(world.kind_of(links[k].tx_id), rx_kind);
            inst.gain[i][k] = db_to_linear(-path_loss_db(d, cls, sc.channel));
        }
    }
    inst.cellular_mw.assign(sc.num_subchannels, std::vector<double>(L, 0.0));
    inst.channel_has_cellular.assign(sc.num_subchannels, false);
    for (const auto& occ : sc.cellular) {
        inst.channel_has_cellular[occ.subchannel] = true;
        for (int i = 0; i < L; ++i) {
            Vec3 rx = world.position_of(links[i].rx_id);
            double d = std::max(distance(occ.position, rx), 1.0);
            LinkClass cls = classify_link(EntityKind::UE, world.kind_of(links[i].rx_id));
            inst.cellular_mw[occ.subchannel][i] +=
                dbm_to_mw(occ.tx_dbm - path_loss_db(d, cls, sc.channel));
        }
    }
    std::vector<double> raw(L);
    for (int i = 0; i < L; ++i) raw[i] = double(links[i].packets);
    inst.weights = UtilityWeights::normalized(raw);
    return inst;
}

namespace {

double sinr_on_channel(const RrmInstance& inst, int i, int j, const std::vector<int>& ch_of,
                       const std::vector<double>& p_mw) {
    double signal = p_mw[i] * inst.gain[i][i];
    double denom = inst.noise_mw + inst.cellular_mw[j][i];
    for (int k = 0; k < inst.num_links(); ++k)
        if (k != i && ch_of[k] == j) denom += p_mw[k] * inst.gain[i][k];
    return signal / denom;
}

// expected valid transmissions of link i when sitting on channel j
double link_valid_prob(const RrmInstance& inst, int i, int j, const std::vector<int>& ch_of,
                       const std::vector<double>& p_mw) {
    double q = frame_success_prob({sinr_on_channel(inst, i, j, ch_of, p_mw)}, inst.links[i].rho);
    double pt = transmission_success_prob(inst.frames_per_cycle, q, inst.links[i].packets);
    return valid_prob(inst.links[i].sensing_prob, pt);
}

int underlay_count(const RrmInstance& inst, int j, const std::vector<int>& ch_of, int excluding) {
    int c = 0;
    for (int k = 0; k < inst.num_links(); ++k)
        if (k != excluding && ch_of[k] == j && !inst.u2n(k)) ++c;
    return c;
}

bool has_other_u2n(const RrmInstance& inst, int j, const std::vector<int>& ch_of, int excluding) {
    for (int k = 0; k < inst.num_links(); ++k)
        if (k != excluding && ch_of[k] == j && inst.u2n(k)) return true;
    return false;
}

// overlay rule: U2N needs an occupant-free channel with no other U2N link;
// underlay links respect the per-channel admission cap
bool admissible(const RrmInstance& inst, int i, int j, const std::vector<int>& ch_of) {
    if (inst.u2n(i))
        return !inst.channel_has_cellular[j] && !has_other_u2n(inst, j, ch_of, i);
    return underlay_count(inst, j, ch_of, i) < inst.params.underlay_cap;
}

}  // namespace

double link_utility(const RrmInstance& inst, int i, int j, const std::vector<int>& ch_of,
                    const std::vector<double>& p_mw) {
    std::vector<int> ch = ch_of;
    ch[i] = j;
    return std::log2(1.0 + sinr_on_channel(inst, i, j, ch, p_mw));
}

double subchannel_utility(const RrmInstance& inst, int j, const std::vector<int>& ch_of,
                          const std::vector<double>& p_mw) {
    double sum = 0.0;
    for (int i = 0; i < inst.num_links(); ++i)
        if (ch_of[i] == j) sum += link_valid_prob(inst, i, j, ch_of, p_mw);
    return sum;
}

double global_utility(const RrmInstance& inst, const std::vector<int>& ch_of,
                      const std::vector<double>& p_mw) {
    double sum = 0.0;
    for (int i = 0; i < inst.num_links(); ++i) {
        if (ch_of[i] < 0) continue;
        sum += inst.weights.w[i] *
               std::log2(1.0 + sinr_on_channel(inst, i, ch_of[i], ch_of, p_mw));
    }
    return sum;
}

void allocate_u2n_overlay(const RrmInstance& inst, std::vector<int>& ch_of,
                          const std::vector<double>& p_mw) {
    std::vector<int> channels;
    for (int j = 0; j < inst.num_subchannels; ++j)
        if (!inst.channel_has_cellular[j]) channels.push_back(j);

    // interference-free utilities do not depend on the channel, so sorting
    // by utility and filling channels in order is the exact assignment
    std::vector<std::pair<double, int>> ranked;
    std::vector<int> empty_ch(inst.num_links(), -1);
    for (int i = 0; i < inst.num_links(); ++i) {
        if (!inst.u2n(i)) continue;
        double u = channels.empty() ? 0.0 : link_utility(inst, i, channels[0], empty_ch, p_mw);
        ranked.push_back({u, i});
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t r = 0; r < ranked.size(); ++r)
        ch_of[ranked[r].second] = r < channels.size() ? channels[r] : -1;
}

MatchState match_subchannels(const RrmInstance& inst, std::vector<int>& ch_of,
                             const std::vector<double>& p_mw) {
    MatchState state;
    int L = inst.num_links();
    for (int round = 0; round < inst.params.match_max_rounds; ++round) {
        ++state.rounds;
        bool accepted_any = false;
        for (int i = 0; i < L; ++i) {
            // Admission only: a matched link keeps its subchannel. Every
            // acceptance then strictly raises one subchannel utility and
            // touches no other, which is what guarantees termination.
            if (ch_of[i] >= 0) continue;
            // best admissible channel among those that would accept
            int best_j = -1;
            double best_u = 0.0;
            for (int j = 0; j < inst.num_subchannels; ++j) {
                if (!admissible(inst, i, j, ch_of)) continue;
                double u = link_utility(inst, i, j, ch_of, p_mw);
                if (best_j >= 0 && u <= best_u + kEps) continue;
                // subchannel side: accept only strict utility improvements
                std::vector<int> trial = ch_of;
                trial[i] = j;
                double before = subchannel_utility(inst, j, ch_of, p_mw);
                double after = subchannel_utility(inst, j, trial, p_mw);
                ++state.proposals;
                if (after > before + kEps) {
                    best_j = j;
                    best_u = u;
                }
            }
            if (best_j >= 0) {
                ch_of[i] = best_j;
                ++state.acceptances;
                accepted_any = true;
            }
        }
        if (!accepted_any) return state;
    }
    state.converged = false;
    return state;
}

PowerControlResult power_control_subchannel(const RrmInstance& inst, int j,
                                            const std::vector<int>& ch_of,
                                            std::vector<double>& p_mw) {
    PowerControlResult res;
    std::vector<int> members;
    for (int i = 0; i < inst.num_links(); ++i)
        if (ch_of[i] == j) members.push_back(i);
    if (members.empty()) return res;
    if (members.size() == 1) {
        // rate is monotone in power without co-channel links
        p_mw[members[0]] = inst.p_max_mw;
        res.objective_trace.push_back(global_utility(inst, ch_of, p_mw));
        res.iterations = 1;
        return res;
    }

    int m = int(members.size());
    double p_floor = kPowerFloorFrac * inst.p_max_mw;
    std::vector<double> p(m, 0.5 * inst.p_max_mw);
    const double ln2 = std::log(2.0);

    // local views: s[a] direct gain, h[a][b] gain from tx b to rx a, c[a]
    // constant interference (noise + cellular occupant)
    std::vector<double> s(m), c(m);
    std::vector<std::vector<double>> h(m, std::vector<double>(m, 0.0));
    for (int a = 0; a < m; ++a) {
        int i = members[a];
        s[a] = inst.gain[i][i];
        c[a] = inst.noise_mw + inst.cellular_mw[j][i];
        for (int b = 0; b < m; ++b)
            if (b != a) h[a][b] = inst.gain[i][members[b]];
    }
    auto interference = [&](const std::vector<double>& pv, int a) {
        double d = c[a];
        for (int b = 0; b < m; ++b)
            if (b != a) d += pv[b] * h[a][b];
        return d;
    };
    auto objective = [&](const std::vector<double>& pv) {
        double f = 0.0;
        for (int a = 0; a < m; ++a)
            f += inst.weights.w[members[a]] *
                 std::log2(1.0 + pv[a] * s[a] / interference(pv, a));
        return f;
    };

    double f_prev = objective(p);
    for (int iter = 0; iter < inst.params.sca_max_iters; ++iter) {
        // linearize the subtracted concave term at the current iterate
        std::vector<double> denom0(m);
        for (int a = 0; a < m; ++a) denom0[a] = interference(p, a);

        auto surrogate = [&](const std::vector<double>& pv) {
            double f = 0.0;
            for (int a = 0; a < m; ++a) {
                double w = inst.weights.w[members[a]];
                double da = interference(pv, a);
                double lin = std::log2(denom0[a]);
                for (int b = 0; b < m; ++b)
                    if (b != a) lin += h[a][b] * (pv[b] - p[b]) / (ln2 * denom0[a]);
                f += w * (std::log2(pv[a] * s[a] + da) - lin);
            }
            return f;
        };
        auto surrogate_grad = [&](const std::vector<double>& pv, std::vector<double>& g) {
            std::fill(g.begin(), g.end(), 0.0);
            for (int a = 0; a < m; ++a) {
                double w = inst.weights.w[members[a]];
                double total = pv[a] * s[a] + interference(pv, a);
                g[a] += w * s[a] / (ln2 * total);
                for (int b = 0; b < m; ++b) {
                    if (b == a) continue;
                    // p_b raises a's denominator inside the kept log and
                    // appears in a's linearized term
                    g[b] += w * h[a][b] * (1.0 / (ln2 * total) - 1.0 / (ln2 * denom0[a]));
                }
            }
        };

        // projected gradient ascent on the concave surrogate
        std::vector<double> q = p, g(m);
        double step = inst.params.sca_step_frac * inst.p_max_mw;
        double sf = surrogate(q);
        for (int it = 0; it < inst.params.sca_inner_max_iters; ++it) {
            surrogate_grad(q, g);
            std::vector<double> qn(m);
            for (int a = 0; a < m; ++a)
                qn[a] = std::clamp(q[a] + step * g[a], p_floor, inst.p_max_mw);
            double sfn = surrogate(qn);
            if (sfn < sf) {
                step *= 0.5;  // overshoot; retry shorter
                if (step < 1e-12 * inst.p_max_mw) break;
                continue;
            }
            double gain = sfn - sf;
            q = qn;
            sf = sfn;
            if (gain < inst.params.sca_inner_tol) break;
        }

        p = q;
        double f_new = objective(p);
        res.objective_trace.push_back(f_new);
        res.iterations = iter + 1;
        if (std::abs(f_new - f_prev) < inst.params.tol * std::max(1.0, std::abs(f_prev))) {
            f_prev = f_new;
            break;
        }
        f_prev = f_new;
    }
    res.converged = true;
    for (int a = 0; a < m; ++a) p_mw[members[a]] = p[a];
    return res;
}

RrmResult rrm_iterate(const RrmInstance& inst) {
    int L = inst.num_links();
    RrmResult res;
    res.assignment = Assignment(L);
    res.powers = PowerVector(L);
    if (L == 0) return res;

    std::vector<double> p_mw(L, 0.5 * inst.p_max_mw);
    std::vector<int> ch_of(L, -1);
    std::vector<int> best_ch;
    std::vector<double> best_p;
    double best_g = -1.0;
    double g_prev = -1.0;
    bool converged = false;
    bool all_sub_converged = true;

    for (int iter = 0; iter < inst.params.max_outer_iters; ++iter) {
        res.outer_iterations = iter + 1;
        std::fill(ch_of.begin(), ch_of.end(), -1);
        allocate_u2n_overlay(inst, ch_of, p_mw);
        MatchState ms = match_subchannels(inst, ch_of, p_mw);
        all_sub_converged = all_sub_converged && ms.converged;

        for (int i = 0; i < L; ++i)
            if (ch_of[i] >= 0) p_mw[i] = 0.5 * inst.p_max_mw;
        for (int j = 0; j < inst.num_subchannels; ++j) {
            PowerControlResult pc = power_control_subchannel(inst, j, ch_of, p_mw);
            all_sub_converged = all_sub_converged && pc.converged;
        }

        double g = global_utility(inst, ch_of, p_mw);
        if (g > best_g) {
            best_g = g;
            best_ch = ch_of;
            best_p = p_mw;
        }
        res.utility_trace.push_back(best_g);
        if (g_prev >= 0.0 &&
            std::abs(g - g_prev) < inst.params.tol * std::max(1.0, std::abs(g_prev))) {
            converged = true;
            break;
        }
        g_prev = g;
    }

    res.converged = converged && all_sub_converged;
    if (best_ch.empty()) return res;

    // The matching accepts on the subchannel's expected-valid utility, which
    // saturates for strong links and can park the alternation short of the
    // weighted-rate optimum. Polish with single-link moves judged on the
    // global objective itself, repolishing powers of the touched channels.
    for (int pass = 0; pass < 4 * L; ++pass) {
        bool improved = false;
        for (int i = 0; i < L; ++i) {
            int from = best_ch[i];
            int pick = from;
            std::vector<double> pick_p;
            for (int j = -1; j < inst.num_subchannels; ++j) {
                if (j == from) continue;
                std::vector<int> trial = best_ch;
                trial[i] = -1;
                if (j >= 0 && !admissible(inst, i, j, trial)) continue;
                trial[i] = j;
                std::vector<double> tp = best_p;
                if (j >= 0) {
                    tp[i] = 0.5 * inst.p_max_mw;
                    power_control_subchannel(inst, j, trial, tp);
                }
                if (from >= 0) power_control_subchannel(inst, from, trial, tp);
                double val = global_utility(inst, trial, tp);
                if (val > best_g + 1e-12 * std::max(1.0, std::abs(best_g))) {
                    best_g = val;
                    pick = j;
                    pick_p = tp;
                }
            }
            if (pick != from) {
                best_ch[i] = pick;
                best_p = pick_p;
                improved = true;
            }
        }
        // Single moves cannot displace a weaker link from a cap-full channel
        // (the drop alone loses utility), so also try swapping an unassigned
        // link into an occupied slot.
        for (int u = 0; u < L; ++u) {
            if (best_ch[u] >= 0) continue;
            for (int i = 0; i < L; ++i) {
                int j = best_ch[i];
                if (i == u || j < 0) continue;
                std::vector<int> trial = best_ch;
                trial[i] = -1;
                trial[u] = -1;
                if (!admissible(inst, u, j, trial)) continue;
                trial[u] = j;
                std::vector<double> tp = best_p;
                tp[u] = 0.5 * inst.p_max_mw;
                power_control_subchannel(inst, j, trial, tp);
                double val = global_utility(inst, trial, tp);
                if (val > best_g + 1e-12 * std::max(1.0, std::abs(best_g))) {
                    best_g = val;
                    best_ch = trial;
                    best_p = tp;
                    improved = true;
                    break;
                }
            }
        }
        res.utility_trace.push_back(best_g);
        if (!improved) break;
    }

    res.global_utility = best_g;
    for (int i = 0; i < L; ++i) {
        res.assignment.channel_of[i] = best_ch[i];
        if (best_ch[i] >= 0) res.powers.dbm[i] = mw_to_dbm(best_p[i]);
    }
    res.assignment.converged = res.converged;
    res.powers.converged = res.converged;
    return res;
}

RrmProvider make_provider() {
    return [](const std::vector<ActiveLink>& links, const World& world) {
        int n = world.sc->num_uavs();
        RrmDecision d;
        d.assignment = Assignment(n);
        d.powers = PowerVector(n);
        if (links.empty()) return d;
        RrmInstance inst = build_instance(links, world);
        RrmResult r = rrm_iterate(inst);
        for (int a = 0; a < inst.num_links(); ++a) {
            int link = links[a].link_id;
            d.assignment.channel_of[link] = r.assignment.channel_of[a];
            d.powers.dbm[link] = r.powers.dbm[a];
        }
        d.converged = r.converged;
        d.global_utility = r.global_utility;
        return d;
    };
}

}  // namespace rrm
}  // namespace u2x
