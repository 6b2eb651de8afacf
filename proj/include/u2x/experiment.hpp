#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "u2x/metrics.hpp"
#include "u2x/scenario.hpp"
#include "u2x/training.hpp"

namespace u2x {

constexpr const char* kArtifactVersion = "1.0.0";
constexpr const char* kCsvContractVersion = "1";

struct ExperimentSpec {
    Scenario scenario;
    Framework framework = Framework::U2X;
    std::vector<int> subchannel_sweep;
    std::vector<uint64_t> seeds;
    std::string out_dir;  // empty: no files written
};

struct RunResult {
    TrainingResult training;
    Metrics eval;
    std::string eval_trace_csv;  // audit rows, one per link per evaluation cycle
};

/// Full pipeline for one (scenario, framework, seed): instantiate the
/// placement, train, then evaluate the greedy policy over
/// scenario.train.eval_cycles cycles on a separate evaluation stream.
RunResult run_experiment(const Scenario& sc, Framework framework, uint64_t seed);

struct SweepRow {
    int subchannels = 0;
    double u2x_mean = 0.0;
    double u2x_stderr = 0.0;
    double cellular_mean = 0.0;
    double cellular_stderr = 0.0;
    double relative_gap = 0.0;  // (u2x - cellular) / cellular
};

/// Paired-seed comparison of both frameworks across subchannel counts.
/// Sweep values are deduplicated and sorted; per-seed placement is shared
/// between frameworks so only the mode policy differs.
std::vector<SweepRow> sweep_subchannels(const ExperimentSpec& spec);

/// Planar probe grid over the cell at a fixed altitude. Cells are grid
/// nodes spaced cell_size apart, restricted to the cell footprint.
struct HeatmapGrid {
    double altitude = 0.0;
    double cell_size = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> value;        // probability maps; mode maps carry 0
    std::vector<std::string> label;   // mode maps: U2N/U2U/U2D/None

    int size() const { return int(x.size()); }
};

/// Communication mode the first UAV would select from each grid position,
/// all other entities fixed. Deterministic, no randomness involved.
HeatmapGrid mode_map(const Scenario& sc, double cell_size, double altitude);

/// Expected valid-transmission probability (sensing times delivery) of the
/// first UAV from each grid position under interference-free allocation.
HeatmapGrid success_heatmap(const Scenario& sc, double cell_size, double altitude,
                            Framework framework);

// Deterministic writers; files are written to a temp name then renamed.
std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);
std::string training_csv(const TrainingResult& tr);
std::string metrics_json(const Metrics& m);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string grid_csv(const HeatmapGrid& g);
std::string manifest_json(const Scenario& sc, uint64_t seed, const std::string& command,
                          const std::vector<std::string>& outputs);

}  // namespace u2x
