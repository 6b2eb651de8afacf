#pragma once

#include <cstdint>
#include <string>

#include "u2x/geometry.hpp"

namespace u2x {

enum class EntityKind { BS, UE, UAV };

inline const char* to_string(EntityKind k) {
    switch (k) {
        case EntityKind::BS: return "BS";
        case EntityKind::UE: return "UE";
        case EntityKind::UAV: return "UAV";
    }
    return "?";
}

struct Entity {
    int id = -1;
    EntityKind kind = EntityKind::UAV;
    Vec3 position;
};

/// One sensing task per UAV: sense at `target`, deliver `data_packets`
/// fixed-size packets per cycle to `destination_id`.
struct SensingTask {
    int uav_id = -1;
    Vec3 target;
    int destination_id = -1;
    int data_packets = 3;
    double qos_threshold = 1.0;  // bit/s/Hz
};

struct CycleClock {
    int cycle_index = 0;
    int frames_per_cycle = 10;
    int frame_index = 0;

    void advance_frame() {
        if (++frame_index >= frames_per_cycle) {
            frame_index = 0;
            ++cycle_index;
        }
    }
};

}  // namespace u2x
