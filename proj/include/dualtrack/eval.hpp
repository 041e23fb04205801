#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualtrack/geometry.hpp"
#include "dualtrack/gridmath.hpp"

namespace dualtrack {

// One evaluated sequence: per-frame predictions and overlaps against the
// groundtruth, failure frames under the reset protocol, and the effective
// configuration the run was produced with.
struct RunRecord {
    std::string sequence;
    std::vector<Box> boxes;
    std::vector<double> overlaps;
    std::vector<int> failures;
    std::map<std::string, std::string> config;
};

// overlaps in [0,1], one per box; failures strictly increasing, in range.
void validate_record(const RunRecord& record);

struct MetricsReport {
    std::optional<double> accuracy;
    std::optional<double> robustness;
    std::optional<double> eao;
    std::optional<double> auc;
    std::optional<double> precision;
    std::optional<double> norm_precision;
    std::optional<double> kld;
    std::optional<double> npd;
};

// Protocol-facing tracker surface. init must fully reset internal state;
// track is called once per subsequent frame, in order.
class FrameTracker {
  public:
    virtual ~FrameTracker() = default;
    virtual void init(int frame_index, const Box& gt) = 0;
    virtual Box track(int frame_index) = 0;
};

// Reset protocol: a frame whose predicted box has zero overlap with the
// groundtruth is a failure; the tracker is reinitialized from groundtruth
// reinit_delay frames later. Init frames echo the groundtruth (overlap 1);
// the frames between a failure and the next init carry empty boxes and
// overlap 0. burn_in only affects scoring, not this record.
RunRecord run_reset_protocol(FrameTracker& tracker, const std::vector<Box>& groundtruth,
                             int reinit_delay = 5, int burn_in = 10);

// One-pass evaluation: init once on the first frame, never reset.
RunRecord run_ope(FrameTracker& tracker, const std::vector<Box>& groundtruth);

struct AccuracyRobustness {
    double accuracy = 0.0;
    double robustness = 0.0;
};

// accuracy: mean overlap pooled over scored frames, where the burn_in
// frames from each (re)init on and the frames between a failure and the
// next init are excluded (the failure frame itself is scored).
// robustness: mean over sequences of failures / frames.
AccuracyRobustness accuracy_robustness(const std::vector<RunRecord>& records,
                                       int reinit_delay = 5, int burn_in = 10);

// Inclusive frame-number interval (1-based) for eao_lite.
struct EaoInterval {
    int lo = 1;
    int hi = 1;
};

// [round(0.5 * median length), max length].
EaoInterval default_eao_interval(const std::vector<RunRecord>& records);

// Mean over the interval of the per-frame expected overlap
// phi(i) = mean over the sequences that reach frame i of overlaps[i-1].
double eao_lite(const std::vector<RunRecord>& records, EaoInterval interval);
double eao_lite(const std::vector<RunRecord>& records);

struct OpeCurves {
    double auc = 0.0;
    double precision = 0.0;
    double norm_precision = 0.0;
};

// success(tau) = fraction of frames with overlap > tau over
// tau in {0, 0.01, ..., 1}; auc is its mean. precision: center error
// < 20 px. norm_precision: ||(dx/gt.w, dy/gt.h)|| < 0.2.
OpeCurves ope_curves(const std::vector<RunRecord>& records,
                     const std::vector<std::vector<Box>>& groundtruth);

enum class HeatmapNorm { Softmax, Sum };

// D(q || p): q is the groundtruth map under `norm`, p the softmax of the
// prediction, floored at 1e-12.
double kld(const Heatmap& gt_map, const Heatmap& pred_map, HeatmapNorm norm);

// Distance from the prediction's peak cell to the groundtruth center
// (grid coordinates), normalized by the grid diagonal sqrt(H^2 + W^2).
double npd(double gt_i, double gt_j, const Heatmap& pred_map);

// Prefix means: output[k] = mean(values[0..k]).
std::vector<double> sweep_cumulative(const std::vector<double>& values);

}  // namespace dualtrack
