#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualtrack/config.hpp"
#include "dualtrack/eval.hpp"
#include "dualtrack/seqio.hpp"
#include "dualtrack/tracker.hpp"

namespace dualtrack {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitData = 4;

// DUALTRACK_THREADS caps worker threads; unset falls back to the hardware
// count. Never below 1.
int thread_budget();

// Applies a key=value config file on top of cfg. An empty path is a no-op;
// a missing or malformed file is a config error.
void overlay_app_config(AppConfig& cfg, const std::string& path);

// Features for one frame of a stored sequence: synthetic pyramid plus dense
// proposals and overlap scores in oracle mode, blurred intensity pyramid in
// image mode.
FrameFeatures sequence_frame_features(const LoadedSequence& seq, const AppConfig& cfg, int frame);

// Runs one tracker over one sequence under "reset" or "ope". The record
// carries the full config echo plus run.protocol and run.sequence_dir.
// A non-empty dump_dir receives one fused-response text file per frame.
RunRecord track_sequence(const LoadedSequence& seq, const AppConfig& cfg, const std::string& protocol,
                         const std::string& sequence_dir, const std::string& dump_dir = "");

// track_sequence over many sequences, fanned out across thread_budget()
// workers. Results keep the input order.
std::vector<RunRecord> track_all(const std::vector<LoadedSequence>& seqs, const AppConfig& cfg,
                                 const std::string& protocol, const std::vector<std::string>& dirs);

// One parameter sweep: a key and the value strings to try, in order.
// Inline form "key=lo:hi:step" expands an inclusive numeric range;
// "key=value" is a single row; anything without '=' names a grid file with
// one key=value row per line.
struct SweepSpec {
    std::string key;                  // empty for grid files with mixed keys
    std::vector<std::string> keys;    // per-row key
    std::vector<std::string> values;  // per-row value
};
SweepSpec parse_sweep(const std::string& spec);

// All weight vectors with `layers` nonnegative entries, multiples of 0.1,
// summing to 1, in lexicographic order.
std::vector<std::vector<double>> simplex_grid(int layers);

struct CalibrationSequence {
    std::vector<FrameFeatures> frames;
    std::vector<Box> groundtruth;
};

struct CalibrationResult {
    std::vector<double> alpha;
    std::vector<double> beta;
    double score = 0.0;  // best objective value seen
};

// Coordinate-wise grid search, beta then alpha, over simplex_grid steps.
// objective "eao" maximizes eao_lite over reset-protocol records;
// objective "loss" minimizes the mean per-frame localization loss
// (1 - overlap). Ties keep the earliest candidate.
CalibrationResult calibrate_weights(const std::vector<CalibrationSequence>& seqs, const AppConfig& cfg,
                                    const std::string& objective);

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool has_seed, std::uint64_t seed);

struct TrackOptions {
    std::string sequence_dir;
    std::string config_path;  // empty = sequence defaults
    std::string out_path;
    std::string protocol = "reset";  // reset | ope
    std::string dump_dir;            // empty = no heatmap dumps
    bool has_seed = false;
    std::uint64_t seed = 0;
};
int cmd_track(const TrackOptions& opt);

int cmd_eval(const std::vector<std::string>& record_paths, const std::string& protocol, const std::string& out_path,
             std::uint64_t seed);

int cmd_ablate(const std::vector<std::string>& sequence_dirs, const std::string& sweep,
               const std::string& config_path, const std::string& out_csv);

int cmd_calibrate(const std::vector<std::string>& sequence_dirs, const std::string& config_path,
                  const std::string& out_path, const std::string& objective);

}  // namespace dualtrack
