#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "u2x/channel.hpp"
#include "u2x/entities.hpp"
#include "u2x/params.hpp"
#include "u2x/sensing.hpp"

namespace u2x {

/// Configuration error carrying the offending field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Placement request for entities the config leaves unspecified; positions
/// are drawn per seed when the scenario is instantiated.
struct PlacementSpec {
    int num_uavs = 5;
    int num_ues = 2;
    bool randomize = true;
};

/// Immutable description of one simulated world. Entity ids: BS is 0, UEs
/// follow, then UAVs. Exactly one sensing task per UAV, in UAV order.
struct Scenario {
    CellRegion cell;
    double ground_height = 1.5;
    int frames_per_cycle = 10;
    int num_subchannels = 4;
    double p_max_dbm = 10.0;
    double bs_tx_dbm = 30.0;  // baseline second-hop downlink power

    Entity bs;
    std::vector<Entity> ues;
    std::vector<Entity> uavs;          // initial positions
    std::vector<SensingTask> tasks;    // tasks[i] belongs to uavs[i]
    std::vector<CellularOccupant> cellular;

    ChannelParams channel;
    SensingParams sensing;
    MotionLimits motion;
    RrmParams rrm;
    DqnConfig dqn;
    TrainParams train;

    std::optional<PlacementSpec> placement;  // pending randomized placement

    int num_uavs() const { return int(uavs.size()); }
    int num_links() const { return int(tasks.size()); }

    const Entity& entity(int id) const;
    int uav_index_of(int entity_id) const;  // -1 if not a UAV

    /// Fill randomized placement (if requested) from the seed's placement
    /// stream and check all invariants. Must be called before simulation.
    Scenario instantiate(uint64_t seed) const;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
};

Scenario default_scenario();

Scenario scenario_from_json_text(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json_text(const Scenario& s);

/// Stable 64-bit hash of the canonical serialized form.
uint64_t config_hash(const Scenario& s);

}  // namespace u2x
