#pragma once

#include <vector>

#include "dualtrack/geometry.hpp"

namespace dualtrack {

// Supervision targets over a score grid. Values live in [0, 1] except the
// ignore marker -1. Same storage layout as Heatmap: anchor fastest.
struct LabelMap {
    int height = 0;
    int width = 0;
    int anchors = 1;
    std::vector<double> values;

    static LabelMap zeros(int height, int width, int anchors = 1);

    int index(int i, int j, int a = 0) const { return (i * width + j) * anchors + a; }
    double& at(int i, int j, int a = 0) { return values[index(i, j, a)]; }
    double at(int i, int j, int a = 0) const { return values[index(i, j, a)]; }
};

enum class AtssVariant { MaxIoU, MinL2 };

struct LabelConfig {
    // Gaussian label width in cells; 0 means derive from the target size at
    // tracker initialization ((1/8) * min(w, h) / stride, floored at 1).
    double gaussian_sigma = 0.0;
    double iou_pos_thresh = 0.8;
    double iou_neg_thresh = 0.3;
    int atss_topk_multi = 15;
    int atss_topk_single = 11;
    AtssVariant atss_variant = AtssVariant::MaxIoU;
};

// Gaussian blob centered at (cy, cx) in continuous cell coordinates:
// value(i, j) = exp(-((i-cy)^2 + (j-cx)^2) / (2 sigma^2)). A=1.
LabelMap gaussian_label(int height, int width, double cy, double cx, double sigma);

// Per-anchor binary assignment against a single groundtruth box:
// 1 where IoU > pos threshold, plus the max-IoU anchor unconditionally;
// 0 where IoU < neg threshold; -1 (ignore) otherwise.
LabelMap assign_bernoulli_iou(const AnchorGrid& grid, const Box& gt, const LabelConfig& cfg);

// Adaptive training sample selection. Candidates are the topk anchors by
// descending IoU (MaxIoU) or ascending center distance to the gt center
// (MinL2). Threshold t = mean + population std of candidate IoUs. Positives
// are candidates with IoU >= t whose anchor center lies inside the gt box;
// everything else is 0. If nothing qualifies the max-IoU anchor is positive.
LabelMap assign_atss(const AnchorGrid& grid, const Box& gt, int topk, AtssVariant variant);

// Pseudo-label for online supervision, centered at the predicted target
// position on the response grid.
LabelMap online_pseudo_label(int height, int width, double cy, double cx, double sigma);

}  // namespace dualtrack
