#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualtrack/config.hpp"
#include "dualtrack/eval.hpp"
#include "dualtrack/sim.hpp"

namespace dualtrack {

// Filesystem trouble: missing paths, failed opens, failed renames.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Content that was readable but inconsistent or malformed.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sequence directory holds groundtruth.txt (one "x,y,w,h" top-left line
// per frame, '.' decimals), meta.json (config echo, seed, mode, length), and
// either scene.jsonl (one scene record per line) or %08d.pgm frames.
struct LoadedSequence {
    std::string name;  // directory basename
    AppConfig config;  // rebuilt from the meta.json echo
    std::vector<Box> groundtruth;
    std::vector<SceneState> scenes;                 // oracle mode
    std::vector<std::vector<std::uint8_t>> images;  // image mode
    int frame_width = 0;
    int frame_height = 0;
    bool image_mode = false;
};

// Writes the full directory; image mode renders each scene to a PGM frame
// instead of storing the scene records. cfg.sim is replaced by seq.config in
// the echo so the metadata always describes the sequence actually written.
void write_sequence(const std::string& dir, const Sequence& seq, const AppConfig& cfg, bool image_mode);
LoadedSequence read_sequence(const std::string& dir);

void write_run_record(const std::string& path, const RunRecord& record);
RunRecord read_run_record(const std::string& path);

// Metric fields that are unset stay out of the report; the config echo, tool
// version, and seed always appear.
void write_metrics_report(const std::string& path, const MetricsReport& report,
                          const std::map<std::string, std::string>& config, std::uint64_t seed);

// Whole-file text helpers; writes land under a temp name in the same
// directory and are renamed into place.
void write_text_atomic(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// 8-bit binary PGM (P5, maxval 255).
void write_pgm(const std::string& path, const std::vector<std::uint8_t>& pixels, int width, int height);
std::vector<std::uint8_t> read_pgm(const std::string& path, int& width, int& height);

}  // namespace dualtrack
