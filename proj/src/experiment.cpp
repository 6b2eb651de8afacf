#include "u2x/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "u2x/rrm.hpp"
#include "u2x/sensing.hpp"

namespace u2x {

RunResult run_experiment(const Scenario& sc, Framework framework, uint64_t seed) {
    Scenario inst = sc.instantiate(seed);
    RunResult rr{run_training(inst, seed, framework), {}};

    World world(inst);
    Rng eval_rng = Rng::seeded(seed, stream::kEval);
    RrmProvider provider = rrm::make_provider();
    int n = inst.num_uavs();
    double gamma_pow = 1.0;
    std::string trace = cycle_trace_header() + "\n";
    for (int t = 0; t < inst.train.eval_cycles; ++t) {
        std::vector<int> actions(n);
        for (int i = 0; i < n; ++i)
            actions[i] = rr.training.agents[i].act_greedy(encode(observe(world, i)));
        std::vector<CycleReport> reports =
            run_cycle(world, actions, provider, framework, eval_rng);
        for (int i = 0; i < n; ++i)
            trace += cycle_trace_row(t, inst.uavs[i].id, reports[i]) + "\n";
        rr.eval.add_cycle(reports, gamma_pow);
        gamma_pow *= inst.dqn.gamma;
    }
    rr.eval_trace_csv = std::move(trace);
    return rr;
}

std::vector<SweepRow> sweep_subchannels(const ExperimentSpec& spec) {
    if (spec.seeds.empty()) throw ConfigError("seeds", "sweep needs at least one seed");
    std::set<int> counts(spec.subchannel_sweep.begin(), spec.subchannel_sweep.end());
    if (counts.size() < 2) throw ConfigError("subchannels", "sweep needs at least two points");

    std::vector<SweepRow> rows;
    for (int s : counts) {
        if (s < 1) throw ConfigError("subchannels", "sweep values must be >= 1");
        Scenario sc = spec.scenario;
        sc.num_subchannels = s;

        std::vector<double> u2x_vals, cell_vals;
        for (uint64_t seed : spec.seeds) {
            u2x_vals.push_back(run_experiment(sc, Framework::U2X, seed)
                                   .eval.mean_expected_valid_per_cycle());
            cell_vals.push_back(run_experiment(sc, Framework::ConventionalCellular, seed)
                                    .eval.mean_expected_valid_per_cycle());
        }
        auto mean_of = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            return m / double(v.size());
        };
        auto stderr_of = [&](const std::vector<double>& v, double m) {
            if (v.size() < 2) return 0.0;
            double ss = 0.0;
            for (double x : v) ss += (x - m) * (x - m);
            return std::sqrt(ss / double(v.size() - 1)) / std::sqrt(double(v.size()));
        };
        SweepRow row;
        row.subchannels = s;
        row.u2x_mean = mean_of(u2x_vals);
        row.u2x_stderr = stderr_of(u2x_vals, row.u2x_mean);
        row.cellular_mean = mean_of(cell_vals);
        row.cellular_stderr = stderr_of(cell_vals, row.cellular_mean);
        row.relative_gap =
            (row.u2x_mean - row.cellular_mean) / std::max(row.cellular_mean, 1e-12);
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::vector<std::pair<double, double>> grid_nodes(const CellRegion& cell, double step) {
    std::vector<std::pair<double, double>> nodes;
    int half = int(std::floor(cell.radius / step));
    for (int iy = -half; iy <= half; ++iy) {
        for (int ix = -half; ix <= half; ++ix) {
            double x = cell.center.x + ix * step;
            double y = cell.center.y + iy * step;
            double dx = x - cell.center.x, dy = y - cell.center.y;
            if (std::sqrt(dx * dx + dy * dy) <= cell.radius + 1e-9)
                nodes.push_back({x, y});
        }
    }
    return nodes;
}

double interference_free_q(const World& world, int tx_id, int rx_id, double tx_dbm,
                           double rho) {
    double d = std::max(distance(world.position_of(tx_id), world.position_of(rx_id)), 1.0);
    LinkClass cls = classify_link(world.kind_of(tx_id), world.kind_of(rx_id));
    double loss = path_loss_db(d, cls, world.sc->channel);
    return frame_success_prob(mean_sinr(tx_dbm, loss, {}, world.sc->channel.noise_dbm), rho);
}

std::optional<ModeChoice> probe_mode(const World& world, const Scenario& sc,
                                     Framework framework) {
    if (framework == Framework::U2X) return select_mode(0, world, sc.p_max_dbm);
    ModeChoice m{TransmissionMode::U2N, -1,
                 link_spectral_efficiency(world, sc.uavs[0].id, sc.bs.id, sc.p_max_dbm)};
    if (m.spectral_eff + 1e-12 < sc.tasks[0].qos_threshold) return std::nullopt;
    return m;
}

}  // namespace

HeatmapGrid mode_map(const Scenario& sc, double cell_size, double altitude) {
    if (sc.num_uavs() < 1) throw ConfigError("uavs", "mode map needs a probe UAV");
    HeatmapGrid g;
    g.altitude = altitude;
    g.cell_size = cell_size;
    World world(sc);
    for (auto [x, y] : grid_nodes(sc.cell, cell_size)) {
        world.uav_pos[0] = {x, y, altitude};
        std::optional<ModeChoice> m = probe_mode(world, sc, Framework::U2X);
        g.x.push_back(x);
        g.y.push_back(y);
        g.value.push_back(0.0);
        g.label.push_back(m ? to_string(m->mode) : "None");
    }
    return g;
}

HeatmapGrid success_heatmap(const Scenario& sc, double cell_size, double altitude,
                            Framework framework) {
    if (sc.num_uavs() < 1) throw ConfigError("uavs", "heatmap needs a probe UAV");
    HeatmapGrid g;
    g.altitude = altitude;
    g.cell_size = cell_size;
    World world(sc);
    const SensingTask& task = sc.tasks[0];
    for (auto [x, y] : grid_nodes(sc.cell, cell_size)) {
        world.uav_pos[0] = {x, y, altitude};
        double p_s = sensing_success_prob(distance(world.uav_pos[0], task.target), sc.sensing);
        std::optional<ModeChoice> m = probe_mode(world, sc, framework);
        double pt = 0.0;
        if (m) {
            int rx_id = m->receiver_id(sc, task);
            double q = interference_free_q(world, sc.uavs[0].id, rx_id, sc.p_max_dbm,
                                           task.qos_threshold);
            pt = transmission_success_prob(sc.frames_per_cycle, q, task.data_packets);
            if (framework == Framework::ConventionalCellular &&
                task.destination_id != sc.bs.id) {
                double q2 = second_hop_frame_prob(world, task);
                pt *= transmission_success_prob(sc.frames_per_cycle, q2, task.data_packets);
            }
        }
        g.x.push_back(x);
        g.y.push_back(y);
        g.value.push_back(valid_prob(p_s, pt));
        g.label.push_back(m ? to_string(m->mode) : "None");
    }
    return g;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, p);
}

std::string training_csv(const TrainingResult& tr) {
    std::ostringstream out;
    int n = int(tr.agents.size());
    out << "episode,epsilon,total_utility,mean_loss";
    for (int i = 0; i < n; ++i) out << ",utility_agent" << i;
    out << "\n";
    for (size_t e = 0; e < tr.episode_utility.size(); ++e) {
        out << e << ',' << format_double(tr.epsilon_schedule[e]) << ','
            << format_double(tr.episode_utility[e]) << ','
            << format_double(tr.mean_loss[e]);
        for (int i = 0; i < n; ++i) out << ',' << format_double(tr.per_agent_utility[e][i]);
        out << "\n";
    }
    return out.str();
}

std::string metrics_json(const Metrics& m) {
    nlohmann::json j;
    j["cycles"] = m.cycles;
    j["links"] = m.links;
    j["frames_per_cycle"] = m.frames_per_cycle;
    j["valid_count"] = m.valid_count;
    j["mean_valid_per_cycle"] = m.mean_valid_per_cycle();
    j["mean_expected_valid_per_cycle"] = m.mean_expected_valid_per_cycle();
    j["discounted_utility"] = m.discounted_utility;
    j["frames"] = {{"u2n", m.frames.u2n},
                   {"u2d", m.frames.u2d},
                   {"u2u", m.frames.u2u},
                   {"idle", m.frames.idle},
                   {"no_subchannel", m.frames.no_subchannel}};
    j["rrm_unconverged_cycles"] = m.rrm_unconverged_cycles;
    j["accounting_exact"] = m.accounting_exact();
    return j.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "subchannels,u2x_mean,u2x_stderr,cellular_mean,cellular_stderr,relative_gap\n";
    for (const auto& r : rows) {
        out << r.subchannels << ',' << format_double(r.u2x_mean) << ','
            << format_double(r.u2x_stderr) << ',' << format_double(r.cellular_mean) << ','
            << format_double(r.cellular_stderr) << ',' << format_double(r.relative_gap)
            << "\n";
    }
    return out.str();
}

std::string grid_csv(const HeatmapGrid& g) {
    std::ostringstream out;
    out << "x,y,value,label\n";
    for (int i = 0; i < g.size(); ++i) {
        out << format_double(g.x[i]) << ',' << format_double(g.y[i]) << ','
            << format_double(g.value[i]) << ',' << g.label[i] << "\n";
    }
    return out.str();
}

std::string manifest_json(const Scenario& sc, uint64_t seed, const std::string& command,
                          const std::vector<std::string>& outputs) {
    nlohmann::json j;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", (unsigned long long)config_hash(sc));
    j["config_hash"] = hash;
    j["seed"] = seed;
    j["command"] = command;
    j["artifact_version"] = kArtifactVersion;
    j["csv_contract"] = kCsvContractVersion;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

}  // namespace u2x
