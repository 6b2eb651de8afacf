#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "u2x/protocol.hpp"
#include "u2x/rrm.hpp"
#include "u2x/scenario.hpp"

using namespace u2x;

namespace {

/// Binomial tail by exhaustive outcome enumeration, independent of the
/// library's log-space evaluation. Usable for k <= 20.
double enumerated_tail(int k, double q, int n) {
    double total = 0.0;
    for (uint32_t mask = 0; mask < (1u << k); ++mask) {
        int successes = __builtin_popcount(mask);
        if (successes < n) continue;
        total += std::pow(q, successes) * std::pow(1.0 - q, k - successes);
    }
    return total;
}

/// Scenario shell with explicit entities: BS id 0, UEs 1..m, UAVs after.
Scenario shell() {
    Scenario sc = default_scenario();
    sc.placement.reset();
    sc.ues.clear();
    sc.uavs.clear();
    sc.tasks.clear();
    sc.cellular.clear();
    sc.cell.center = {0, 0, 0};
    sc.cell.radius = 500.0;
    sc.bs = {0, EntityKind::BS, {0, 0, 25}};
    return sc;
}

void add_ue(Scenario& sc, int id, Vec3 pos) { sc.ues.push_back({id, EntityKind::UE, pos}); }

void add_uav(Scenario& sc, int id, Vec3 pos, Vec3 target, int dest, int packets = 3,
             double qos = 1.0) {
    sc.uavs.push_back({id, EntityKind::UAV, pos});
    sc.tasks.push_back({id, target, dest, packets, qos});
}

/// Interference-free per-frame success at the given power, composed from
/// scratch for reward cross-checks.
double hand_frame_prob(const Scenario& sc, Vec3 tx, Vec3 rx, LinkClass cls, double p_dbm,
                       double rho) {
    double d = std::max(distance(tx, rx), 1.0);
    double loss = sc.channel.ref_loss_db + 10.0 * sc.channel.exponent(cls) * std::log10(d);
    double gamma = std::pow(10.0, (p_dbm - loss - sc.channel.noise_dbm) / 10.0);
    return std::exp(-(std::pow(2.0, rho) - 1.0) / gamma);
}

}  // namespace

TEST_CASE("binomial tail closed-form cases") {
    CHECK(transmission_success_prob(7, 0.3, 0) == 1.0);
    CHECK(transmission_success_prob(0, 0.9, 0) == 1.0);
    CHECK(transmission_success_prob(2, 0.99, 3) == 0.0);
    CHECK(transmission_success_prob(3, 0.5, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(transmission_success_prob(5, 0.9, 5) ==
          doctest::Approx(std::pow(0.9, 5)).epsilon(1e-12));
    CHECK(transmission_success_prob(4, 0.0, 2) == 0.0);
    CHECK(transmission_success_prob(4, 1.0, 4) == 1.0);
    CHECK(transmission_success_prob(4, 0.0, 0) == 1.0);
    CHECK_THROWS_AS(transmission_success_prob(3, 1.5, 1), std::domain_error);
    CHECK_THROWS_AS(transmission_success_prob(-1, 0.5, 1), std::domain_error);
    CHECK_THROWS_AS(transmission_success_prob(3, 0.5, -1), std::domain_error);
}

TEST_CASE("binomial tail matches outcome enumeration") {
    for (int k : {1, 2, 3, 5, 8, 11}) {
        for (double q : {0.05, 0.3, 0.5, 0.77, 0.95}) {
            for (int n = 0; n <= k + 1; ++n) {
                CHECK(transmission_success_prob(k, q, n) ==
                      doctest::Approx(enumerated_tail(k, q, n)).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("binomial tail matches Monte Carlo frequency") {
    const int cycles = 100000;
    const double tol = 0.01;
    Rng rng = Rng::seeded(42, 9);
    struct Triple {
        int k;
        double q;
        int n;
    };
    for (Triple t : {Triple{10, 0.6, 3}, Triple{10, 0.3, 4}, Triple{6, 0.8, 5}}) {
        int hits = 0;
        for (int c = 0; c < cycles; ++c) {
            int s = 0;
            for (int f = 0; f < t.k; ++f)
                if (rng.bernoulli(t.q)) ++s;
            if (s >= t.n) ++hits;
        }
        double freq = double(hits) / cycles;
        CHECK(std::abs(freq - transmission_success_prob(t.k, t.q, t.n)) < tol);
    }
}

TEST_CASE("valid probability is the product of both stages") {
    CHECK(valid_prob(1.0, 1.0) == 1.0);
    CHECK(valid_prob(0.0, 0.73) == 0.0);
    CHECK(valid_prob(0.3679, 0.5) == doctest::Approx(0.18395).epsilon(1e-12));
    CHECK_THROWS_AS(valid_prob(-0.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(valid_prob(0.5, 1.1), std::domain_error);
}

TEST_CASE("outer sensing chain rows") {
    auto m = outer_transition(0.3679);
    for (const auto& row : m) {
        CHECK(row[0] == doctest::Approx(0.3679).epsilon(1e-15));
        CHECK(row[0] + row[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    auto sure = outer_transition(1.0);
    CHECK(sure[0][0] == 1.0);
    CHECK(sure[1][0] == 1.0);
    CHECK(sure[0][1] == 0.0);
    CHECK_THROWS_AS(outer_transition(1.2), std::domain_error);
}

TEST_CASE("inner transmission distribution") {
    auto d = inner_distribution(TransmissionMode::U2D, 0.7);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(d[3] == doctest::Approx(0.3).epsilon(1e-15));

    auto u2n = inner_distribution(TransmissionMode::U2N, 0.4);
    CHECK(u2n[0] == doctest::Approx(0.4).epsilon(1e-15));
    auto u2u = inner_distribution(TransmissionMode::U2U, 0.4);
    CHECK(u2u[1] == doctest::Approx(0.4).epsilon(1e-15));

    auto none = inner_distribution(std::nullopt, 0.9);
    CHECK(none[3] == 1.0);
    for (auto dist : {d, u2n, u2u, none}) {
        double s = dist[0] + dist[1] + dist[2] + dist[3];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(inner_distribution(TransmissionMode::U2N, -0.1), std::domain_error);
}

TEST_CASE("outer chain long-run sensing fraction") {
    const double p = 0.3679;
    auto m = outer_transition(p);
    Rng rng = Rng::seeded(7, 11);
    int state = 1;
    int hits = 0;
    const int steps = 100000;
    for (int t = 0; t < steps; ++t) {
        state = rng.bernoulli(m[state][0]) ? 0 : 1;
        if (state == 0) ++hits;
    }
    CHECK(std::abs(double(hits) / steps - p) < 0.01);
}

TEST_CASE("mode selection by geometry") {
    SUBCASE("adjacent to the destination UE, far from the BS") {
        Scenario sc = shell();
        add_ue(sc, 1, {400, 0, 1.5});
        add_uav(sc, 2, {390, 0, 50}, {390, 0, 50}, 1);
        sc.validate();
        World w(sc);
        auto m = select_mode(0, w, sc.p_max_dbm);
        REQUIRE(m.has_value());
        CHECK(m->mode == TransmissionMode::U2D);
    }
    SUBCASE("near the BS, destination UE far away") {
        Scenario sc = shell();
        add_ue(sc, 1, {400, 0, 1.5});
        add_uav(sc, 2, {20, 0, 50}, {20, 0, 50}, 1);
        sc.validate();
        World w(sc);
        auto m = select_mode(0, w, sc.p_max_dbm);
        REQUIRE(m.has_value());
        CHECK(m->mode == TransmissionMode::U2N);
    }
    SUBCASE("far from everything with a relay midway to the BS") {
        Scenario sc = shell();
        add_uav(sc, 1, {-440, 0, 60}, {-440, 0, 60}, 0);
        add_uav(sc, 2, {-220, 0, 60}, {-220, 0, 60}, 0);
        sc.validate();
        World w(sc);
        auto m = select_mode(0, w, sc.p_max_dbm);
        REQUIRE(m.has_value());
        CHECK(m->mode == TransmissionMode::U2U);
        CHECK(m->relay_id == 2);
    }
    SUBCASE("threshold unreachable leaves the link silent") {
        Scenario sc = shell();
        add_ue(sc, 1, {400, 0, 1.5});
        add_uav(sc, 2, {-440, 0, 60}, {0, 0, 60}, 1, 3, 25.0);
        sc.validate();
        World w(sc);
        CHECK_FALSE(select_mode(0, w, sc.p_max_dbm).has_value());
    }
}

TEST_CASE("mode selection tie prefers the uplink") {
    // BS lowered to the UE height so both candidate distances are equal.
    Scenario sc = shell();
    sc.bs.position = {0, 0, 1.5};
    add_ue(sc, 1, {200, 0, 1.5});
    add_uav(sc, 2, {100, 0, 50}, {100, 0, 50}, 1);
    sc.validate();
    World w(sc);
    auto m = select_mode(0, w, sc.p_max_dbm);
    REQUIRE(m.has_value());
    CHECK(m->mode == TransmissionMode::U2N);

    // Breaking the symmetry toward the UE flips the choice.
    w.uav_pos[0] = {120, 0, 50};
    auto closer = select_mode(0, w, sc.p_max_dbm);
    REQUIRE(closer.has_value());
    CHECK(closer->mode == TransmissionMode::U2D);
}

TEST_CASE("mode selection ignores relabeling of bystanders") {
    auto build = [](bool swapped) {
        Scenario sc = shell();
        add_ue(sc, 1, {400, 0, 1.5});
        add_ue(sc, 2, swapped ? Vec3{-300, 100, 1.5} : Vec3{150, -200, 1.5});
        add_uav(sc, 3, {390, 0, 50}, {390, 0, 50}, 1);
        // two decoy UAVs trade ids and positions between the variants
        Vec3 a{-100, 250, 90}, b{200, -300, 120};
        add_uav(sc, 4, swapped ? b : a, {0, 0, 0}, 0);
        add_uav(sc, 5, swapped ? a : b, {0, 0, 0}, 0);
        sc.validate();
        return sc;
    };
    Scenario plain = build(false), relabeled = build(true);
    World wp(plain), wr(relabeled);
    auto mp = select_mode(0, wp, plain.p_max_dbm);
    auto mr = select_mode(0, wr, relabeled.p_max_dbm);
    REQUIRE(mp.has_value());
    REQUIRE(mr.has_value());
    CHECK(mp->mode == mr->mode);
    CHECK(mp->spectral_eff == doctest::Approx(mr->spectral_eff).epsilon(1e-12));
}

TEST_CASE("second hop succeeds trivially at the BS and follows the downlink") {
    Scenario sc = shell();
    add_ue(sc, 1, {400, 0, 1.5});
    add_uav(sc, 2, {100, 0, 50}, {100, 0, 50}, 0);
    add_uav(sc, 3, {200, 0, 50}, {200, 0, 50}, 1);
    sc.validate();
    World w(sc);
    CHECK(second_hop_frame_prob(w, sc.tasks[0]) == 1.0);

    double expect = hand_frame_prob(sc, sc.bs.position, sc.ues[0].position,
                                    LinkClass::GroundDownlink, sc.bs_tx_dbm,
                                    sc.tasks[1].qos_threshold);
    CHECK(second_hop_frame_prob(w, sc.tasks[1]) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cycle with certain sensing and a clean channel is valid") {
    Scenario sc = shell();
    add_uav(sc, 1, {30, 0, 50}, {30, 0, 50}, 0, 3, 0.5);
    sc.num_subchannels = 1;
    sc.validate();
    World w(sc);
    Rng rng = Rng::seeded(3, 5);
    auto reports = run_cycle(w, {13}, rrm::make_provider(), Framework::U2X, rng);
    REQUIRE(reports.size() == 1);
    const CycleReport& r = reports[0];
    CHECK(r.sensing_success);
    CHECK(r.transmission_success);
    CHECK(r.valid);
    CHECK(int(r.frames.size()) == sc.frames_per_cycle);
    CHECK(r.frames_encoded() == "NNNIIIIIII");
    CHECK(r.subchannel == 0);
    CHECK(r.power_dbm == doctest::Approx(sc.p_max_dbm).epsilon(1e-9));
    CHECK(r.rrm_converged);
}

TEST_CASE("cycle reward is the expected validity before the move") {
    Scenario sc = shell();
    Vec3 start{150, 0, 75};
    add_uav(sc, 1, start, {260, 40, 10}, 0, 3, 1.0);
    sc.num_subchannels = 2;
    sc.validate();
    World w(sc);
    Rng rng = Rng::seeded(9, 1);
    auto reports = run_cycle(w, {26}, rrm::make_provider(), Framework::U2X, rng);

    double p_sense = std::exp(-sc.sensing.lambda * distance(start, sc.tasks[0].target));
    double q = hand_frame_prob(sc, start, sc.bs.position, LinkClass::AirToGround,
                               sc.p_max_dbm, 1.0);
    double expect =
        p_sense * transmission_success_prob(sc.frames_per_cycle, q, 3);
    CHECK(reports[0].reward == doctest::Approx(expect).epsilon(1e-12));

    // the move happened after the reward was computed
    Vec3 moved = start + Vec3{25, 25, 25};
    CHECK(distance(w.uav_pos[0], moved) < 1e-9);
    double q_post = hand_frame_prob(sc, moved, sc.bs.position, LinkClass::AirToGround,
                                    sc.p_max_dbm, 1.0);
    CHECK(std::abs(q - q_post) > 1e-6);
}

TEST_CASE("link without a subchannel waits out the cycle") {
    Scenario sc = shell();
    add_uav(sc, 1, {30, 0, 50}, {30, 0, 50}, 0);
    sc.validate();
    World w(sc);
    Rng rng = Rng::seeded(1, 2);
    RrmProvider starve = [](const std::vector<ActiveLink>& links, const World&) {
        RrmDecision d;
        d.assignment = Assignment(int(links.size()));
        d.powers = PowerVector(int(links.size()));
        return d;
    };
    auto reports = run_cycle(w, {13}, starve, Framework::U2X, rng);
    CHECK(reports[0].frames_encoded() == std::string(sc.frames_per_cycle, 'X'));
    CHECK_FALSE(reports[0].transmission_success);
    CHECK_FALSE(reports[0].valid);
    CHECK(reports[0].subchannel == -1);
    CHECK(std::isnan(reports[0].power_dbm));
    CHECK(reports[0].reward == 0.0);
}

TEST_CASE("single subchannel starves the second uplink") {
    Scenario sc = shell();
    add_uav(sc, 1, {40, 0, 50}, {40, 0, 50}, 0, 3, 0.5);
    add_uav(sc, 2, {0, 40, 50}, {0, 40, 50}, 0, 3, 0.5);
    sc.num_subchannels = 1;
    sc.validate();
    World w(sc);
    Rng rng = Rng::seeded(5, 6);
    auto reports = run_cycle(w, {13, 13}, rrm::make_provider(), Framework::U2X, rng);
    int starved = 0;
    for (const auto& r : reports) {
        REQUIRE(r.mode.has_value());
        CHECK(r.mode->mode == TransmissionMode::U2N);
        if (r.subchannel < 0) {
            ++starved;
            CHECK(r.frames_encoded() == std::string(sc.frames_per_cycle, 'X'));
        }
    }
    CHECK(starved == 1);
}

TEST_CASE("conventional baseline never leaves the uplink") {
    Scenario sc = shell();
    add_ue(sc, 1, {400, 0, 1.5});
    add_uav(sc, 2, {390, 0, 50}, {390, 0, 50}, 1, 3, 0.5);
    sc.num_subchannels = 2;
    sc.validate();

    World direct(sc);
    Rng rng_a = Rng::seeded(11, 3);
    auto u2x = run_cycle(direct, {13}, rrm::make_provider(), Framework::U2X, rng_a);
    REQUIRE(u2x[0].mode.has_value());
    CHECK(u2x[0].mode->mode == TransmissionMode::U2D);

    World relayed(sc);
    Rng rng_b = Rng::seeded(11, 3);
    auto cell = run_cycle(relayed, {13}, rrm::make_provider(),
                          Framework::ConventionalCellular, rng_b);
    REQUIRE(cell[0].mode.has_value());
    CHECK(cell[0].mode->mode == TransmissionMode::U2N);
    for (const auto& f : cell[0].frames) {
        CHECK(f.kind != FrameOutcome::Kind::U2DFrame);
        CHECK(f.kind != FrameOutcome::Kind::U2UFrame);
    }

    // baseline reward carries the extra downlink hop
    double p_sense = std::exp(-sc.sensing.lambda * 0.0);
    double q1 = hand_frame_prob(sc, sc.uavs[0].position, sc.bs.position,
                                LinkClass::AirToGround, sc.p_max_dbm, 0.5);
    double q2 = hand_frame_prob(sc, sc.bs.position, sc.ues[0].position,
                                LinkClass::GroundDownlink, sc.bs_tx_dbm, 0.5);
    double expect = p_sense * transmission_success_prob(sc.frames_per_cycle, q1, 3) *
                    transmission_success_prob(sc.frames_per_cycle, q2, 3);
    CHECK(cell[0].reward == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cycle outcome grammar holds on randomized runs") {
    Scenario sc = default_scenario().instantiate(77);
    World w(sc);
    Rng rng = Rng::seeded(77, 13);
    RrmProvider provider = rrm::make_provider();
    int n = sc.num_uavs();
    for (int cycle = 0; cycle < 20; ++cycle) {
        std::vector<int> actions(n);
        for (int i = 0; i < n; ++i) actions[i] = rng.uniform_int(kLatticeActions);
        auto reports = run_cycle(w, actions, provider, Framework::U2X, rng);
        REQUIRE(int(reports.size()) == n);
        for (int i = 0; i < n; ++i) {
            const CycleReport& r = reports[i];
            REQUIRE(int(r.frames.size()) == sc.frames_per_cycle);
            int delivered = 0;
            bool idled = false;
            for (const auto& f : r.frames) {
                if (f.kind == FrameOutcome::Kind::Idle ||
                    f.kind == FrameOutcome::Kind::NoSubchannel)
                    CHECK(f.packets_delivered == 0);
                else
                    CHECK((f.packets_delivered == 0 || f.packets_delivered == 1));
                // once idle, idle for the rest of the cycle
                if (idled) CHECK(f.kind == FrameOutcome::Kind::Idle);
                if (f.kind == FrameOutcome::Kind::Idle) idled = true;
                delivered += f.packets_delivered;
            }
            CHECK(delivered <= sc.tasks[i].data_packets);
            CHECK(r.transmission_success == (delivered == sc.tasks[i].data_packets));
            CHECK(r.valid == (r.sensing_success && r.transmission_success));
            if (!r.mode.has_value())
                CHECK(r.subchannel == -1);
            if (r.subchannel < 0 && r.mode.has_value() && delivered == 0 && !idled)
                CHECK(r.frames_encoded() == std::string(sc.frames_per_cycle, 'X'));
            CHECK(r.reward >= 0.0);
            CHECK(r.reward <= 1.0);
        }
    }
}

TEST_CASE("cycle trace rows carry the audit fields") {
    Scenario sc = shell();
    add_uav(sc, 1, {30, 0, 50}, {30, 0, 50}, 0, 3, 0.5);
    sc.num_subchannels = 1;
    sc.validate();
    World w(sc);
    Rng rng = Rng::seeded(3, 5);
    auto reports = run_cycle(w, {13}, rrm::make_provider(), Framework::U2X, rng);
    CHECK(cycle_trace_header() == "cycle,uav_id,mode,sensing,frames,subchannel,power_dbm,valid");
    CHECK(cycle_trace_row(4, 1, reports[0]) == "4,1,U2N,1,NNNIIIIIII,0,10,1");
}

TEST_CASE("protocol violations are rejected") {
    Scenario sc = shell();
    add_uav(sc, 1, {30, 0, 50}, {30, 0, 50}, 0, 3, 0.5);
    sc.validate();
    Rng rng = Rng::seeded(1, 1);
    RrmProvider provider = rrm::make_provider();

    World w1(sc);
    CHECK_THROWS_AS(run_cycle(w1, {13, 13}, provider, Framework::U2X, rng),
                    ProtocolViolation);
    World w2(sc);
    CHECK_THROWS_AS(run_cycle(w2, {27}, provider, Framework::U2X, rng), ProtocolViolation);
    World w3(sc);
    CHECK_THROWS_AS(run_cycle(w3, {-1}, provider, Framework::U2X, rng), ProtocolViolation);

    // granting a channel to a silent link breaks the contract
    Scenario mute = shell();
    add_uav(mute, 1, {-440, 0, 60}, {0, 0, 0}, 0, 3, 25.0);
    mute.validate();
    World w4(mute);
    RrmProvider rogue = [](const std::vector<ActiveLink>&, const World& world) {
        RrmDecision d;
        int n = world.sc->num_uavs();
        d.assignment = Assignment(n);
        d.powers = PowerVector(n);
        d.assignment.channel_of[0] = 0;
        d.powers.dbm[0] = 10.0;
        return d;
    };
    CHECK_THROWS_AS(run_cycle(w4, {13}, rogue, Framework::U2X, rng), ProtocolViolation);
}
