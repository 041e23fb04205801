#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dualtrack/correlation.hpp"
#include "dualtrack/geometry.hpp"
#include "dualtrack/gridmath.hpp"
#include "dualtrack/labels.hpp"
#include "dualtrack/online_learner.hpp"

namespace dualtrack {

// Score-map branch trained online while tracking: Gaussian regression or
// anchor classification over one or five anchor shapes.
enum class RobustBranch { ONR, ONC1s, ONC5s, None };

// Template-matching branch fixed at init time.
enum class AccurateBranch { OFC5s, OFC1s, OFR, None };

// Per-anchor overlap predictions, laid out like a score map.
using IoUMap = Heatmap;

struct LayerWeights {
    std::vector<double> alpha;  // accurate-branch layer aggregation
    std::vector<double> beta;   // robust-branch feature fusion
};

struct TrackerConfig {
    double mu = 0.8;               // fusion weight on the robust map
    double vote_epsilon = 0.01;    // neighborhood IoU cutoff
    double vote_sigma = 0.0025;    // vote weight bandwidth
    double window_influence = 0.42;
    double penalty_k = 0.04;
    double smooth_lr = 0.3;
    double lost_ratio = 0.25;      // of the initial robust peak
    double distractor_ratio = 0.8;
    bool vote = true;
    RobustBranch robust_branch = RobustBranch::ONR;
    AccurateBranch accurate_branch = AccurateBranch::OFC5s;
    int search_cells = 32;         // expected feature grid side
    std::vector<double> alpha;     // empty = uniform
    std::vector<double> beta;      // empty = uniform
    OnlineLearnerConfig learner;
    LabelConfig labels;
    std::uint64_t seed = 0;
};

struct TrackerState {
    Box current_box;
    int frame_index = 0;
    OnlineFilter filter;
    SupportSet support;
    FeatureMap template_kernel;
    double template_energy = 0.0;
    LayerWeights layer_weights;
    bool lost = false;
    double initial_peak = 0.0;
    double label_sigma = 1.0;  // resolved Gaussian label width, cells
};

// Per-frame tracker input: the feature pyramid plus, when the scene oracle
// provides them, dense box proposals and overlap predictions. Without them
// the tracker falls back to sub-cell peak fitting and score-mass overlap.
struct FrameFeatures {
    FeaturePyramid pyramid;
    std::optional<DenseBoxes> oracle_boxes;
    std::optional<IoUMap> oracle_iou;
};

struct FrameResult {
    Box box;
    double peak_value = 0.0;  // fused score at the chosen cell
    bool lost = false;
    bool distractor = false;
    bool vote_fallback = false;
    UpdateKind update = UpdateKind::None;
    Heatmap robust;
    Heatmap accurate;
    Heatmap fused;
    Heatmap windowed;
};

// Anchor lattice matching the correlation response of a search grid:
// (cells - 4) per side, centered on 5x5 windows (offset 2.5 cells), five
// anchor shapes when the accurate branch is OFC5s, one otherwise.
AnchorGrid response_grid(const TrackerConfig& cfg, int feature_cells_h, int feature_cells_w,
                         double stride);

// Build the template kernel and the online filter from the first frame:
// kernel pooled from the groundtruth region of the fused features, filter
// optimized over a 5-entry augmented support set (identity, horizontal
// flip, +-4-cell shifts, 1.05x scale).
TrackerState initialize(const FeaturePyramid& first_frame, const Box& gt,
                        const TrackerConfig& cfg);

struct LocalizeResult {
    Heatmap fused;
    Peak peak;
};

// fused = mu * broadcast(robust) + (1 - mu) * accurate.
LocalizeResult localize(const Heatmap& robust, const Heatmap& accurate, double mu);

// Decode the box proposal at the peak cell/anchor.
Box regress_direct(const Peak& peak, const DenseBoxes& boxes);

struct VoteResult {
    Box box;
    bool fallback = false;  // degenerate weights, b_star returned
};

// Weighted component-wise mean over the neighborhood of b_star:
//   N = {y : IoU(b_y, b*) > epsilon},
//   w(y) = max(0, fused(y)) * exp(-(1 - IoU(b_y, b*))^2 / sigma),
// each weight further scaled by the overlap prediction o(y).
VoteResult score_vote(const DenseBoxes& boxes, const IoUMap& iou_map, const Heatmap& fused,
                      const Box& b_star, const TrackerConfig& cfg);

struct PostprocessResult {
    Heatmap windowed;  // penalized, cosine-windowed scores
    Heatmap penalty;   // scale/ratio-change penalty alone
};

// penalty(y) = exp(-(max(r, 1/r) * max(s, 1/s) - 1) * k) against prev_box,
// then windowed = penalty * fused * (1 - wi) + window * wi.
PostprocessResult postprocess(const Heatmap& fused, const DenseBoxes& boxes, const Box& prev_box,
                              const TrackerConfig& cfg);

struct StepResult {
    TrackerState state;
    FrameResult result;
};

// One tracked frame: correlate, fuse, penalize, localize, regress, vote,
// smooth, then update the online model per schedule. A lost frame (robust
// peak under lost_ratio * initial peak) freezes the box and skips learning.
StepResult step(const TrackerState& state, const FrameFeatures& features,
                const TrackerConfig& cfg);

}  // namespace dualtrack
