#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "u2x/experiment.hpp"
#include "u2x/rrm.hpp"

namespace {

using namespace u2x;

struct Options {
    std::string config;
    uint64_t seed = 1;
    std::string out = "out";
    std::string framework = "u2x";
    int episodes = 0;  // 0: keep the config value
    std::vector<int> subchannels{2, 3, 4, 5};
    int num_seeds = 3;
    double altitude = -1.0;  // <0: mid-altitude of the cell
    double grid_step = 0.0;  // 0: lattice step
};

Framework parse_framework(const std::string& s) {
    if (s == "u2x") return Framework::U2X;
    if (s == "cellular") return Framework::ConventionalCellular;
    throw ConfigError("framework", "expected u2x or cellular, got '" + s + "'");
}

Scenario load(const Options& opt) {
    Scenario sc = opt.config.empty() ? default_scenario() : load_scenario(opt.config);
    if (opt.episodes > 0) sc.train.episodes = opt.episodes;
    return sc;
}

double grid_altitude(const Scenario& sc, const Options& opt) {
    if (opt.altitude >= 0.0) return opt.altitude;
    return 0.5 * (sc.cell.min_alt + sc.cell.max_alt);
}

double grid_step(const Scenario& sc, const Options& opt) {
    return opt.grid_step > 0.0 ? opt.grid_step : sc.motion.lattice_step;
}

int cmd_run(const Options& opt) {
    Scenario sc = load(opt);
    Framework fw = parse_framework(opt.framework);
    RunResult rr = run_experiment(sc, fw, opt.seed);
    write_text_file(opt.out + "/training.csv", training_csv(rr.training));
    write_text_file(opt.out + "/metrics.json", metrics_json(rr.eval));
    write_text_file(opt.out + "/trace.csv", rr.eval_trace_csv);
    write_text_file(
        opt.out + "/manifest.json",
        manifest_json(sc, opt.seed, "run", {"training.csv", "metrics.json", "trace.csv"}));
    std::cout << "mean_valid_per_cycle="
              << format_double(rr.eval.mean_expected_valid_per_cycle()) << "\n";
    return 0;
}

int cmd_sweep(const Options& opt) {
    ExperimentSpec spec;
    spec.scenario = load(opt);
    spec.subchannel_sweep = opt.subchannels;
    for (int i = 0; i < opt.num_seeds; ++i) spec.seeds.push_back(opt.seed + uint64_t(i));
    std::vector<SweepRow> rows = sweep_subchannels(spec);
    write_text_file(opt.out + "/sweep.csv", sweep_csv(rows));
    write_text_file(opt.out + "/manifest.json",
                    manifest_json(spec.scenario, opt.seed, "sweep", {"sweep.csv"}));
    for (const auto& r : rows)
        std::cout << r.subchannels << " subchannels: u2x=" << format_double(r.u2x_mean)
                  << " cellular=" << format_double(r.cellular_mean)
                  << " gap=" << format_double(r.relative_gap) << "\n";
    return 0;
}

int cmd_modemap(const Options& opt) {
    Scenario sc = load(opt).instantiate(opt.seed);
    HeatmapGrid g = mode_map(sc, grid_step(sc, opt), grid_altitude(sc, opt));
    write_text_file(opt.out + "/modemap.csv", grid_csv(g));
    write_text_file(opt.out + "/manifest.json",
                    manifest_json(sc, opt.seed, "modemap", {"modemap.csv"}));
    std::cout << g.size() << " grid cells\n";
    return 0;
}

int cmd_heatmap(const Options& opt) {
    Scenario sc = load(opt).instantiate(opt.seed);
    Framework fw = parse_framework(opt.framework);
    HeatmapGrid g = success_heatmap(sc, grid_step(sc, opt), grid_altitude(sc, opt), fw);
    write_text_file(opt.out + "/heatmap.csv", grid_csv(g));
    write_text_file(opt.out + "/manifest.json",
                    manifest_json(sc, opt.seed, "heatmap", {"heatmap.csv"}));
    std::cout << g.size() << " grid cells\n";
    return 0;
}

int cmd_train(const Options& opt) {
    Scenario sc = load(opt).instantiate(opt.seed);
    Framework fw = parse_framework(opt.framework);
    TrainingResult tr = run_training(sc, opt.seed, fw);
    write_text_file(opt.out + "/training.csv", training_csv(tr));
    std::vector<std::string> outputs{"training.csv"};
    for (size_t i = 0; i < tr.agents.size(); ++i) {
        std::string name = "weights_agent" + std::to_string(i) + ".json";
        write_text_file(opt.out + "/" + name, tr.agents[i].net().to_json_text() + "\n");
        outputs.push_back(name);
    }
    write_text_file(opt.out + "/manifest.json",
                    manifest_json(sc, opt.seed, "train", outputs));
    std::cout << tr.episode_utility.size() << " episodes, final utility="
              << format_double(tr.episode_utility.empty() ? 0.0
                                                          : tr.episode_utility.back())
              << "\n";
    return 0;
}

int cmd_validate(const Options& opt) {
    Scenario sc = load(opt);
    sc.instantiate(opt.seed);  // placement plus full invariant check
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", (unsigned long long)config_hash(sc));
    std::cout << "ok config_hash=" << hash << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cellular internet-of-UAVs simulator: sensing-and-transmission "
                 "protocol, matching plus convex-approximation resource management, "
                 "and multi-agent Q-learning trajectories"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub, bool with_framework) {
        sub->add_option("--config", opt.config, "Scenario JSON path (default: built-in)");
        sub->add_option("--seed", opt.seed, "Run seed");
        sub->add_option("--out", opt.out, "Output directory");
        if (with_framework)
            sub->add_option("--framework", opt.framework, "u2x or cellular");
        sub->add_option("--episodes", opt.episodes, "Override training episodes");
    };

    CLI::App* run = app.add_subcommand("run", "Train then evaluate one configuration");
    add_common(run, true);
    CLI::App* sweep =
        app.add_subcommand("sweep", "Paired-seed framework comparison over subchannel counts");
    add_common(sweep, false);
    sweep->add_option("--subchannels", opt.subchannels, "Sweep values")->delimiter(',');
    sweep->add_option("--seeds", opt.num_seeds, "Number of paired seeds");
    CLI::App* modemap =
        app.add_subcommand("modemap", "Mode-selection map over the cell at fixed altitude");
    add_common(modemap, false);
    modemap->add_option("--altitude", opt.altitude, "Probe altitude (default: mid-cell)");
    modemap->add_option("--grid-step", opt.grid_step, "Grid spacing (default: lattice step)");
    CLI::App* heatmap =
        app.add_subcommand("heatmap", "Valid-transmission probability map at fixed altitude");
    add_common(heatmap, true);
    heatmap->add_option("--altitude", opt.altitude, "Probe altitude (default: mid-cell)");
    heatmap->add_option("--grid-step", opt.grid_step, "Grid spacing (default: lattice step)");
    CLI::App* train = app.add_subcommand("train", "Training only, writes weights and series");
    add_common(train, true);
    CLI::App* validate =
        app.add_subcommand("validate-config", "Check a scenario file and print its hash");
    add_common(validate, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (modemap->parsed()) return cmd_modemap(opt);
        if (heatmap->parsed()) return cmd_heatmap(opt);
        if (train->parsed()) return cmd_train(opt);
        if (validate->parsed()) return cmd_validate(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
