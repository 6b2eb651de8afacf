#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "u2x/entities.hpp"

namespace u2x {

/// Large-scale link classes. U2N and U2D are air-to-ground, U2U is
/// air-to-air, and the BS-to-UE second hop of the cellular baseline (as
/// well as terrestrial interference paths) is the ground class.
enum class LinkClass { AirToGround, AirToAir, GroundDownlink };

/// Classify by endpoint kinds: two airborne ends give air-to-air, one gives
/// air-to-ground, none gives the terrestrial class.
inline LinkClass classify_link(EntityKind tx, EntityKind rx) {
    bool tx_air = tx == EntityKind::UAV;
    bool rx_air = rx == EntityKind::UAV;
    if (tx_air && rx_air) return LinkClass::AirToAir;
    if (tx_air || rx_air) return LinkClass::AirToGround;
    return LinkClass::GroundDownlink;
}

struct ChannelParams {
    // log-distance exponents per class
    double alpha_a2g = 2.7;
    double alpha_a2a = 2.2;
    double alpha_ground = 3.5;
    double ref_loss_db = 38.0;     // loss at 1 m, shared by all classes
    double noise_dbm = -100.0;     // per subchannel
    double bandwidth_hz = 180e3;
    double frame_duration_s = 0.01;

    double exponent(LinkClass c) const {
        switch (c) {
            case LinkClass::AirToGround: return alpha_a2g;
            case LinkClass::AirToAir: return alpha_a2a;
            case LinkClass::GroundDownlink: return alpha_ground;
        }
        return alpha_ground;
    }
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Log-distance path loss in dB. Entities closer than 1 m are rejected;
/// callers must keep transmitter and receiver separated.
inline double path_loss_db(double d_m, LinkClass c, const ChannelParams& p) {
    if (d_m <= 0.0) throw std::domain_error("path_loss: nonpositive distance");
    return p.ref_loss_db + 10.0 * p.exponent(c) * std::log10(d_m);
}

/// Mean SINR (linear) over large-scale terms only.
struct MeanSinr {
    double value = 0.0;  // linear ratio, >= 0
};

struct ReceivedTerm {
    double tx_dbm;
    double loss_db;
};

inline MeanSinr mean_sinr(double tx_dbm, double loss_db,
                          const std::vector<ReceivedTerm>& interference,
                          double noise_dbm) {
    double signal = dbm_to_mw(tx_dbm - loss_db);
    double denom = dbm_to_mw(noise_dbm);
    for (const auto& t : interference) denom += dbm_to_mw(t.tx_dbm - t.loss_db);
    return {signal / denom};
}

inline double spectral_efficiency(MeanSinr s) { return std::log2(1.0 + s.value); }

/// Probability that one frame at spectral load rho decodes under Rayleigh
/// fading with the given mean SINR: Pr[log2(1 + G*h) >= rho], h ~ Exp(1).
inline double frame_success_prob(MeanSinr mean, double rho) {
    if (rho < 0.0) throw std::domain_error("frame_success_prob: negative rho");
    if (rho == 0.0) return 1.0;
    if (mean.value <= 0.0) return 0.0;
    return std::exp(-(std::exp2(rho) - 1.0) / mean.value);
}

}  // namespace u2x
