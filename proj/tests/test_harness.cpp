#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "u2x/experiment.hpp"

using namespace u2x;

namespace {

/// Tiny scenario so full training pipelines stay in the millisecond range.
Scenario tiny_scenario() {
    Scenario sc = default_scenario();
    sc.placement = PlacementSpec{2, 1, true};
    sc.train.episodes = 2;
    sc.train.cycles_per_episode = 6;
    sc.train.eval_cycles = 20;
    sc.dqn.hidden_width = 8;
    sc.dqn.batch_size = 4;
    return sc;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fig.-5-style fixture: BS at the center, destination UE east, relay UAV
/// between them, probe UAV first.
Scenario map_scenario() {
    Scenario sc = default_scenario();
    sc.placement.reset();
    sc.cellular.clear();
    sc.cell = CellRegion{{0, 0, 0}, 500.0, 50.0, 150.0};
    sc.bs = {0, EntityKind::BS, {0, 0, 25}};
    sc.ues.push_back({1, EntityKind::UE, {400, 0, 1.5}});
    sc.uavs.push_back({2, EntityKind::UAV, {-100, 0, 50}});   // probe
    sc.uavs.push_back({3, EntityKind::UAV, {200, 0, 100}});   // relay
    sc.tasks.push_back({2, {-100, 0, 0}, 1, 3, 1.0});
    sc.tasks.push_back({3, {200, 0, 0}, 0, 3, 1.0});
    sc.validate();
    return sc;
}

int nearest_cell(const HeatmapGrid& g, double x, double y) {
    int best = 0;
    double best_d = 1e300;
    for (int i = 0; i < g.size(); ++i) {
        double dx = g.x[i] - x, dy = g.y[i] - y;
        if (dx * dx + dy * dy < best_d) {
            best_d = dx * dx + dy * dy;
            best = i;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("metrics keep exact frame accounts") {
    Metrics m;
    CycleReport a;
    a.frames.assign(10, {FrameOutcome::Kind::U2NFrame, 1});
    a.frames[9] = {FrameOutcome::Kind::Idle, 0};
    a.valid = true;
    a.reward = 0.4;
    CycleReport b;
    b.frames.assign(10, {FrameOutcome::Kind::NoSubchannel, 0});
    b.reward = 0.0;
    b.rrm_converged = false;

    m.add_cycle({a, b}, 1.0);
    m.add_cycle({a, b}, 0.9);

    CHECK(m.cycles == 2);
    CHECK(m.links == 2);
    CHECK(m.frames_per_cycle == 10);
    CHECK(m.valid_count == 2);
    CHECK(m.frames.u2n == 18);
    CHECK(m.frames.idle == 2);
    CHECK(m.frames.no_subchannel == 20);
    CHECK(m.frames.total() == 40);
    CHECK(m.accounting_exact());
    CHECK(m.expected_valid_sum == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(m.discounted_utility == doctest::Approx(0.4 + 0.9 * 0.4).epsilon(1e-15));
    CHECK(m.mean_valid_per_cycle() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.rrm_unconverged_cycles == 2);
}

TEST_CASE("experiment pipeline is deterministic") {
    Scenario sc = tiny_scenario();
    RunResult a = run_experiment(sc, Framework::U2X, 3);
    RunResult b = run_experiment(sc, Framework::U2X, 3);
    CHECK(a.eval.valid_count == b.eval.valid_count);
    CHECK(a.eval.expected_valid_sum == b.eval.expected_valid_sum);
    CHECK(a.eval_trace_csv == b.eval_trace_csv);
    CHECK(training_csv(a.training) == training_csv(b.training));

    CHECK(a.eval.cycles == sc.train.eval_cycles);
    CHECK(a.eval.links == 2);
    CHECK(a.eval.accounting_exact());
    // one header line plus one row per link per cycle
    int rows = 0;
    for (char c : a.eval_trace_csv)
        if (c == '\n') ++rows;
    CHECK(rows == 1 + sc.train.eval_cycles * 2);
}

TEST_CASE("baseline runs never leave the uplink") {
    Scenario sc = tiny_scenario();
    RunResult r = run_experiment(sc, Framework::ConventionalCellular, 5);
    CHECK(r.eval.frames.u2d == 0);
    CHECK(r.eval.frames.u2u == 0);
    CHECK(r.eval.accounting_exact());
}

TEST_CASE("sweep dedups points and recomputes its gap") {
    ExperimentSpec spec;
    spec.scenario = tiny_scenario();
    spec.subchannel_sweep = {3, 2, 3, 2};
    spec.seeds = {1, 2};
    std::vector<SweepRow> rows = sweep_subchannels(spec);
    REQUIRE(int(rows.size()) == 2);
    CHECK(rows[0].subchannels == 2);
    CHECK(rows[1].subchannels == 3);
    for (const auto& r : rows) {
        double gap = (r.u2x_mean - r.cellular_mean) / std::max(r.cellular_mean, 1e-12);
        CHECK(r.relative_gap == doctest::Approx(gap).epsilon(1e-12));
        CHECK(r.u2x_stderr >= 0.0);
        CHECK(r.cellular_stderr >= 0.0);
    }

    ExperimentSpec bad = spec;
    bad.seeds.clear();
    CHECK_THROWS_AS(sweep_subchannels(bad), ConfigError);
    bad = spec;
    bad.subchannel_sweep = {4};
    CHECK_THROWS_AS(sweep_subchannels(bad), ConfigError);
    bad = spec;
    bad.subchannel_sweep = {0, 2};
    CHECK_THROWS_AS(sweep_subchannels(bad), ConfigError);
}

TEST_CASE("mode map paints the three regions") {
    Scenario sc = map_scenario();
    HeatmapGrid g = mode_map(sc, 50.0, 100.0);
    REQUIRE(g.size() > 0);
    REQUIRE(int(g.label.size()) == g.size());

    for (int i = 0; i < g.size(); ++i) {
        CHECK((g.label[i] == "U2N" || g.label[i] == "U2U" || g.label[i] == "U2D" ||
               g.label[i] == "None"));
        CHECK(g.value[i] == 0.0);
        CHECK(std::sqrt(g.x[i] * g.x[i] + g.y[i] * g.y[i]) <= sc.cell.radius + 1e-9);
    }
    CHECK(g.label[nearest_cell(g, 400, 0)] == "U2D");
    CHECK(g.label[nearest_cell(g, 0, 0)] == "U2N");
    bool has_u2u = false;
    for (const auto& l : g.label) has_u2u = has_u2u || l == "U2U";
    CHECK(has_u2u);

    // deterministic across calls
    HeatmapGrid h = mode_map(sc, 50.0, 100.0);
    CHECK(grid_csv(g) == grid_csv(h));
}

TEST_CASE("success heatmap bounds and dominance") {
    Scenario sc = map_scenario();
    HeatmapGrid u2x = success_heatmap(sc, 50.0, 100.0, Framework::U2X);
    HeatmapGrid cell = success_heatmap(sc, 50.0, 100.0, Framework::ConventionalCellular);
    REQUIRE(u2x.size() == cell.size());

    bool strict = false;
    for (int i = 0; i < u2x.size(); ++i) {
        CHECK(u2x.value[i] >= 0.0);
        CHECK(u2x.value[i] <= 1.0);
        CHECK(u2x.value[i] >= cell.value[i] - 1e-12);
        strict = strict || u2x.value[i] > cell.value[i] + 1e-9;
    }
    CHECK(strict);

    // the probe's sensing target pins the map's maximum
    int at_target = nearest_cell(u2x, sc.tasks[0].target.x, sc.tasks[0].target.y);
    double best = 0.0;
    for (double v : u2x.value) best = std::max(best, v);
    CHECK(u2x.value[at_target] == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("csv and json writers are stable") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-3.0) == "-3");
    CHECK(format_double(1.0 / 3.0) == "0.333333333333");

    Scenario sc = tiny_scenario();
    RunResult r = run_experiment(sc, Framework::U2X, 4);

    std::string tcsv = training_csv(r.training);
    CHECK(tcsv.rfind("episode,epsilon,total_utility,mean_loss", 0) == 0);
    int lines = 0;
    for (char c : tcsv)
        if (c == '\n') ++lines;
    CHECK(lines == 1 + sc.train.episodes);

    std::string mjson = metrics_json(r.eval);
    CHECK(mjson.find("\"mean_valid_per_cycle\"") != std::string::npos);
    CHECK(mjson.find("\"frames\"") != std::string::npos);

    std::string grid = grid_csv(mode_map(map_scenario(), 100.0, 100.0));
    CHECK(grid.rfind("x,y,value,label", 0) == 0);

    std::vector<SweepRow> rows = {{2, 1.5, 0.1, 1.0, 0.05, 0.5}};
    std::string scsv = sweep_csv(rows);
    CHECK(scsv.rfind("subchannels,u2x_mean,u2x_stderr,cellular_mean,cellular_stderr,"
                     "relative_gap",
                     0) == 0);
    CHECK(scsv.find("\n2,1.5,0.1,1,0.05,0.5\n") != std::string::npos);

    Scenario inst = sc.instantiate(4);
    std::string man1 = manifest_json(inst, 4, "run", {"a.csv", "b.json"});
    std::string man2 = manifest_json(inst, 4, "run", {"a.csv", "b.json"});
    CHECK(man1 == man2);
    CHECK(man1.find("\"config_hash\"") != std::string::npos);
    CHECK(man1.find("\"seed\": 4") != std::string::npos);
    CHECK(man1.find(kArtifactVersion) != std::string::npos);
    // manifests must not embed wall-clock state
    CHECK(man1.find("time") == std::string::npos);
}

TEST_CASE("text files land atomically at their final name") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "u2x_harness_test";
    fs::remove_all(dir);
    std::string path = (dir / "nested" / "out.txt").string();
    write_text_file(path, "payload\n");
    CHECK(slurp(path) == "payload\n");
    // no temp droppings left behind
    int entries = 0;
    for (const auto& e : fs::directory_iterator(dir / "nested")) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);
    write_text_file(path, "second\n");
    CHECK(slurp(path) == "second\n");
    fs::remove_all(dir);
}
