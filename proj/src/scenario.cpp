#include "u2x/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "u2x/rng.hpp"

namespace u2x {

using nlohmann::json;

const Entity& Scenario::entity(int id) const {
    if (id == bs.id) return bs;
    for (const auto& e : ues)
        if (e.id == id) return e;
    for (const auto& e : uavs)
        if (e.id == id) return e;
    throw std::out_of_range("unknown entity id " + std::to_string(id));
}

int Scenario::uav_index_of(int entity_id) const {
    for (size_t i = 0; i < uavs.size(); ++i)
        if (uavs[i].id == entity_id) return int(i);
    return -1;
}

namespace {

Vec3 ground_point(const Vec3& p, double h) { return {p.x, p.y, h}; }

Vec3 random_in_disc(const CellRegion& cell, Rng& rng) {
    // uniform over the disc via sqrt radius
    double r = cell.radius * std::sqrt(rng.uniform01());
    double theta = rng.uniform(0.0, 2.0 * M_PI);
    return {cell.center.x + r * std::cos(theta), cell.center.y + r * std::sin(theta), 0.0};
}

}  // namespace

Scenario Scenario::instantiate(uint64_t seed) const {
    Scenario s = *this;
    Rng rng = Rng::seeded(seed, stream::kPlacement);

    if (s.placement) {
        const PlacementSpec& ps = *s.placement;
        s.ues.clear();
        s.uavs.clear();
        s.tasks.clear();
        s.bs.id = 0;
        s.bs.kind = EntityKind::BS;
        s.bs.position = ground_point(s.cell.center, s.ground_height);
        for (int i = 0; i < ps.num_ues; ++i) {
            Vec3 p = ground_point(random_in_disc(s.cell, rng), s.ground_height);
            s.ues.push_back({1 + i, EntityKind::UE, p});
        }
        for (int i = 0; i < ps.num_uavs; ++i) {
            Vec3 p = random_in_disc(s.cell, rng);
            p.z = rng.uniform(s.cell.min_alt, s.cell.max_alt);
            s.uavs.push_back({1 + ps.num_ues + i, EntityKind::UAV, p});
        }
        for (int i = 0; i < ps.num_uavs; ++i) {
            SensingTask t;
            t.uav_id = s.uavs[i].id;
            t.target = random_in_disc(s.cell, rng);  // ground-level target
            // destination uniform over BS and UEs
            int pick = int(rng.uniform_int(uint64_t(1 + ps.num_ues)));
            t.destination_id = pick == 0 ? s.bs.id : s.ues[pick - 1].id;
            s.tasks.push_back(t);
        }
        s.placement.reset();
    }
    s.validate();
    return s;
}

void Scenario::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw ConfigError(field, msg);
    };
    if (!(cell.radius > 0)) fail("cell.radius", "must be > 0");
    if (!(cell.min_alt >= 0 && cell.min_alt <= cell.max_alt))
        fail("cell.min_alt", "need 0 <= min_alt <= max_alt");
    if (frames_per_cycle < 1) fail("frames_per_cycle", "must be >= 1");
    if (num_subchannels < 1) fail("subchannels", "must be >= 1");
    if (!(motion.lattice_step > 0)) fail("motion.lattice_step", "must be > 0");
    if (!(sensing.lambda > 0)) fail("sensing.lambda", "must be > 0");
    if (!(channel.alpha_a2g >= 2 && channel.alpha_a2a >= 2 && channel.alpha_ground >= 2))
        fail("channel", "path-loss exponents must be >= 2");
    if (channel.alpha_a2a > channel.alpha_ground)
        fail("channel.alpha_a2a", "air exponent must not exceed ground exponent");
    if (!(channel.bandwidth_hz > 0)) fail("channel.bandwidth_hz", "must be > 0");
    if (!(channel.frame_duration_s > 0)) fail("channel.frame_duration_s", "must be > 0");
    if (!(dqn.gamma >= 0 && dqn.gamma < 1)) fail("dqn.gamma", "must be in [0,1)");
    if (dqn.hidden_width < 1) fail("dqn.hidden_width", "must be >= 1");
    if (dqn.hidden_depth < 1) fail("dqn.hidden_depth", "must be >= 1");
    if (dqn.batch_size < 1) fail("dqn.batch_size", "must be >= 1");
    if (dqn.capacity < dqn.batch_size) fail("dqn.capacity", "must be >= batch_size");
    if (rrm.underlay_cap < 0) fail("rrm.underlay_cap", "must be >= 0");

    if (placement) {
        if (placement->num_uavs < 1) fail("placement.num_uavs", "must be >= 1");
        if (placement->num_ues < 0) fail("placement.num_ues", "must be >= 0");
        return;  // entities not materialized yet
    }

    if (tasks.size() != uavs.size()) fail("tasks", "exactly one task per UAV");
    for (size_t i = 0; i < uavs.size(); ++i) {
        const auto& u = uavs[i];
        std::string path = "uavs[" + std::to_string(i) + "]";
        if (!cell.contains(u.position)) fail(path + ".position", "outside cell region");
    }
    for (size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        std::string path = "tasks[" + std::to_string(i) + "]";
        if (t.uav_id != uavs[i].id) fail(path + ".uav", "tasks must follow UAV order");
        if (t.data_packets < 1) fail(path + ".data_packets", "must be >= 1");
        if (!(t.qos_threshold > 0)) fail(path + ".qos_threshold", "must be > 0");
        bool found = t.destination_id == bs.id;
        for (const auto& e : ues) found = found || e.id == t.destination_id;
        for (const auto& e : uavs) found = found || (e.id == t.destination_id && e.id != t.uav_id);
        if (!found) fail(path + ".destination", "unknown destination entity");
    }
    for (size_t i = 0; i < cellular.size(); ++i) {
        const auto& c = cellular[i];
        std::string path = "cellular[" + std::to_string(i) + "]";
        if (c.subchannel < 0 || c.subchannel >= num_subchannels)
            fail(path + ".subchannel", "out of range");
    }
}

Scenario default_scenario() {
    Scenario s;
    s.cell = CellRegion{{0, 0, 0}, 500.0, 50.0, 150.0};
    s.bs = Entity{0, EntityKind::BS, {0, 0, s.ground_height}};
    s.placement = PlacementSpec{5, 2, true};
    s.cellular.push_back({0, {200.0, -150.0, s.ground_height}, 20.0});
    return s;
}

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || (j.size() != 2 && j.size() != 3))
        throw ConfigError(field, "expected [x, y] or [x, y, z]");
    Vec3 v{j[0].get<double>(), j[1].get<double>(), 0.0};
    if (j.size() == 3) v.z = j[2].get<double>();
    return v;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::string dest_to_string(const Scenario& s, int id) {
    if (id == s.bs.id) return "bs";
    for (size_t i = 0; i < s.ues.size(); ++i)
        if (s.ues[i].id == id) return "ue:" + std::to_string(i);
    for (size_t i = 0; i < s.uavs.size(); ++i)
        if (s.uavs[i].id == id) return "uav:" + std::to_string(i);
    return "?";
}

int dest_from_string(const Scenario& s, const std::string& d, const std::string& field) {
    if (d == "bs") return s.bs.id;
    auto parse_idx = [&](const std::string& prefix) -> int {
        try {
            return std::stoi(d.substr(prefix.size()));
        } catch (...) {
            throw ConfigError(field, "bad destination '" + d + "'");
        }
    };
    if (d.rfind("ue:", 0) == 0) {
        int i = parse_idx("ue:");
        if (i < 0 || i >= int(s.ues.size())) throw ConfigError(field, "UE index out of range");
        return s.ues[i].id;
    }
    if (d.rfind("uav:", 0) == 0) {
        int i = parse_idx("uav:");
        if (i < 0 || i >= int(s.uavs.size())) throw ConfigError(field, "UAV index out of range");
        return s.uavs[i].id;
    }
    throw ConfigError(field, "destination must be 'bs', 'ue:<i>', or 'uav:<i>'");
}

}  // namespace

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["cell"] = {{"center", json::array({s.cell.center.x, s.cell.center.y})},
                 {"radius", s.cell.radius},
                 {"min_alt", s.cell.min_alt},
                 {"max_alt", s.cell.max_alt}};
    j["ground_height"] = s.ground_height;
    j["frames_per_cycle"] = s.frames_per_cycle;
    j["subchannels"] = s.num_subchannels;
    j["p_max_dbm"] = s.p_max_dbm;
    j["bs_tx_dbm"] = s.bs_tx_dbm;
    j["channel"] = {{"alpha_a2g", s.channel.alpha_a2g},
                    {"alpha_a2a", s.channel.alpha_a2a},
                    {"alpha_ground", s.channel.alpha_ground},
                    {"ref_loss_db", s.channel.ref_loss_db},
                    {"noise_dbm", s.channel.noise_dbm},
                    {"bandwidth_hz", s.channel.bandwidth_hz},
                    {"frame_duration_s", s.channel.frame_duration_s}};
    j["sensing"] = {{"lambda", s.sensing.lambda}};
    j["motion"] = {{"lattice_step", s.motion.lattice_step}};
    j["rrm"] = {{"underlay_cap", s.rrm.underlay_cap},
                {"tol", s.rrm.tol},
                {"max_outer_iters", s.rrm.max_outer_iters},
                {"match_max_rounds", s.rrm.match_max_rounds},
                {"sca_step_frac", s.rrm.sca_step_frac},
                {"sca_inner_tol", s.rrm.sca_inner_tol},
                {"sca_inner_max_iters", s.rrm.sca_inner_max_iters},
                {"sca_max_iters", s.rrm.sca_max_iters}};
    j["dqn"] = {{"gamma", s.dqn.gamma},
                {"hidden_width", s.dqn.hidden_width},
                {"hidden_depth", s.dqn.hidden_depth},
                {"capacity", s.dqn.capacity},
                {"batch_size", s.dqn.batch_size},
                {"learning_rate", s.dqn.learning_rate},
                {"target_sync_cycles", s.dqn.target_sync_cycles},
                {"epsilon_start", s.dqn.epsilon_start},
                {"epsilon_end", s.dqn.epsilon_end},
                {"greedy_prob_is_epsilon", s.dqn.greedy_prob_is_epsilon}};
    j["train"] = {{"episodes", s.train.episodes},
                  {"cycles_per_episode", s.train.cycles_per_episode},
                  {"eval_cycles", s.train.eval_cycles}};
    if (!s.cellular.empty()) {
        json arr = json::array();
        for (const auto& c : s.cellular)
            arr.push_back({{"subchannel", c.subchannel},
                           {"position", json::array({c.position.x, c.position.y})},
                           {"tx_dbm", c.tx_dbm}});
        j["cellular"] = arr;
    }
    if (s.placement) {
        j["placement"] = {{"num_uavs", s.placement->num_uavs},
                          {"num_ues", s.placement->num_ues},
                          {"randomize", s.placement->randomize}};
    } else {
        json ues = json::array();
        for (const auto& e : s.ues) ues.push_back({{"position", json::array({e.position.x, e.position.y})}});
        j["ues"] = ues;
        json uavs = json::array();
        for (const auto& e : s.uavs) uavs.push_back({{"position", vec_to_json(e.position)}});
        j["uavs"] = uavs;
        json tasks = json::array();
        for (const auto& t : s.tasks)
            tasks.push_back({{"target", json::array({t.target.x, t.target.y})},
                             {"destination", dest_to_string(s, t.destination_id)},
                             {"data_packets", t.data_packets},
                             {"qos_threshold", t.qos_threshold}});
        j["tasks"] = tasks;
    }
    return j.dump(2) + "\n";
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("JSON parse error: ") + e.what());
    }
    Scenario s;
    try {
        if (j.contains("cell")) {
            const auto& c = j.at("cell");
            if (c.contains("center")) s.cell.center = vec_from_json(c.at("center"), "cell.center");
            read_opt(c, "radius", s.cell.radius);
            read_opt(c, "min_alt", s.cell.min_alt);
            read_opt(c, "max_alt", s.cell.max_alt);
        }
        read_opt(j, "ground_height", s.ground_height);
        read_opt(j, "frames_per_cycle", s.frames_per_cycle);
        if (j.contains("subchannels")) s.num_subchannels = j.at("subchannels").get<int>();
        read_opt(j, "p_max_dbm", s.p_max_dbm);
        read_opt(j, "bs_tx_dbm", s.bs_tx_dbm);
        if (j.contains("channel")) {
            const auto& c = j.at("channel");
            read_opt(c, "alpha_a2g", s.channel.alpha_a2g);
            read_opt(c, "alpha_a2a", s.channel.alpha_a2a);
            read_opt(c, "alpha_ground", s.channel.alpha_ground);
            read_opt(c, "ref_loss_db", s.channel.ref_loss_db);
            read_opt(c, "noise_dbm", s.channel.noise_dbm);
            read_opt(c, "bandwidth_hz", s.channel.bandwidth_hz);
            read_opt(c, "frame_duration_s", s.channel.frame_duration_s);
        }
        if (j.contains("sensing")) read_opt(j.at("sensing"), "lambda", s.sensing.lambda);
        if (j.contains("motion")) read_opt(j.at("motion"), "lattice_step", s.motion.lattice_step);
        if (j.contains("rrm")) {
            const auto& c = j.at("rrm");
            read_opt(c, "underlay_cap", s.rrm.underlay_cap);
            read_opt(c, "tol", s.rrm.tol);
            read_opt(c, "max_outer_iters", s.rrm.max_outer_iters);
            read_opt(c, "match_max_rounds", s.rrm.match_max_rounds);
            read_opt(c, "sca_step_frac", s.rrm.sca_step_frac);
            read_opt(c, "sca_inner_tol", s.rrm.sca_inner_tol);
            read_opt(c, "sca_inner_max_iters", s.rrm.sca_inner_max_iters);
            read_opt(c, "sca_max_iters", s.rrm.sca_max_iters);
        }
        if (j.contains("dqn")) {
            const auto& c = j.at("dqn");
            read_opt(c, "gamma", s.dqn.gamma);
            read_opt(c, "hidden_width", s.dqn.hidden_width);
            read_opt(c, "hidden_depth", s.dqn.hidden_depth);
            read_opt(c, "capacity", s.dqn.capacity);
            read_opt(c, "batch_size", s.dqn.batch_size);
            read_opt(c, "learning_rate", s.dqn.learning_rate);
            read_opt(c, "target_sync_cycles", s.dqn.target_sync_cycles);
            read_opt(c, "epsilon_start", s.dqn.epsilon_start);
            read_opt(c, "epsilon_end", s.dqn.epsilon_end);
            read_opt(c, "greedy_prob_is_epsilon", s.dqn.greedy_prob_is_epsilon);
        }
        if (j.contains("train")) {
            const auto& c = j.at("train");
            read_opt(c, "episodes", s.train.episodes);
            read_opt(c, "cycles_per_episode", s.train.cycles_per_episode);
            read_opt(c, "eval_cycles", s.train.eval_cycles);
        }
        if (j.contains("cellular")) {
            for (size_t i = 0; i < j.at("cellular").size(); ++i) {
                const auto& c = j.at("cellular")[i];
                CellularOccupant occ;
                occ.subchannel = c.at("subchannel").get<int>();
                occ.position = vec_from_json(c.at("position"), "cellular.position");
                occ.position.z = s.ground_height;
                read_opt(c, "tx_dbm", occ.tx_dbm);
                s.cellular.push_back(occ);
            }
        }

        s.bs = Entity{0, EntityKind::BS,
                      {s.cell.center.x, s.cell.center.y, s.ground_height}};
        bool explicit_entities = j.contains("uavs") || j.contains("tasks");
        if (j.contains("placement") && explicit_entities)
            throw ConfigError("placement", "give either placement or explicit uavs/tasks");
        if (j.contains("placement")) {
            const auto& c = j.at("placement");
            PlacementSpec ps;
            read_opt(c, "num_uavs", ps.num_uavs);
            read_opt(c, "num_ues", ps.num_ues);
            read_opt(c, "randomize", ps.randomize);
            s.placement = ps;
        } else if (explicit_entities) {
            if (j.contains("ues")) {
                int id = 1;
                for (const auto& e : j.at("ues")) {
                    Vec3 p = vec_from_json(e.at("position"), "ues.position");
                    p.z = s.ground_height;
                    s.ues.push_back({id++, EntityKind::UE, p});
                }
            }
            if (!j.contains("uavs")) throw ConfigError("uavs", "missing");
            int id = 1 + int(s.ues.size());
            for (const auto& e : j.at("uavs")) {
                Vec3 p = vec_from_json(e.at("position"), "uavs.position");
                s.uavs.push_back({id++, EntityKind::UAV, p});
            }
            if (!j.contains("tasks")) throw ConfigError("tasks", "missing");
            size_t ti = 0;
            for (const auto& e : j.at("tasks")) {
                std::string path = "tasks[" + std::to_string(ti) + "]";
                if (ti >= s.uavs.size()) throw ConfigError(path, "more tasks than UAVs");
                SensingTask t;
                t.uav_id = s.uavs[ti].id;
                t.target = vec_from_json(e.at("target"), path + ".target");
                t.destination_id =
                    dest_from_string(s, e.at("destination").get<std::string>(), path + ".destination");
                read_opt(e, "data_packets", t.data_packets);
                read_opt(e, "qos_threshold", t.qos_threshold);
                s.tasks.push_back(t);
                ++ti;
            }
        } else {
            s.placement = PlacementSpec{};  // defaults
        }
    } catch (const json::exception& e) {
        throw ConfigError("<document>", e.what());
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

uint64_t config_hash(const Scenario& s) {
    // FNV-1a over the canonical dump
    std::string text = scenario_to_json_text(s);
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace u2x
