#pragma once

#include <vector>

#include "dualtrack/gridmath.hpp"
#include "dualtrack/labels.hpp"

namespace dualtrack {

struct LossConfig {
    double focal_gamma = 2.0;
    double fc_alpha = 2.0;
    double fc_beta = 4.0;
    // Weights of the combined objective: hinge, focal, box L1, IoU BCE.
    double lambda_r = 1.0;
    double lambda_a = 10.0;
    double lambda_b = 1.2;
    double lambda_o = 1.2;
};

// Scalar loss plus analytic gradient with respect to the prediction values,
// in the prediction's storage order.
struct LossResult {
    double value = 0.0;
    std::vector<double> grad;
};

// Focal loss over binary labels {1, 0} with ignore marker -1. Positive and
// negative terms are normalized by their own counts and summed. P in (0,1).
LossResult focal_loss(const Heatmap& pred, const LabelMap& labels, double gamma);

// Continuous-label focal variant, precision form. Cells with Y == 1 use
// (1-P)^alpha * (-log P); all others (1-Y)^beta * P^alpha * (-log(1-P)).
// Mean over all cells. P in (0,1), Y in [0,1].
LossResult fc_pr_loss(const Heatmap& pred, const LabelMap& labels, double alpha, double beta);

// Continuous-label focal variant, regression form:
// (1/N) * sum Y^beta * (Y-P)^alpha * (-log P), alpha a positive even integer
// so every term is non-negative and vanishes only at P == Y.
LossResult fc_rg_loss(const Heatmap& pred, const LabelMap& labels, double alpha, double beta);

// Region-gated squared error: (P-Y)^2 inside the target region,
// max(0, P)^2 outside. Mean over all cells. `inside` matches pred layout.
LossResult hinge_l2_loss(const Heatmap& pred, const LabelMap& labels,
                         const std::vector<unsigned char>& inside);

// Mean absolute error over paired arrays.
LossResult l1_loss(const std::vector<double>& pred, const std::vector<double>& gt);

// Binary cross entropy of probabilities against targets; targets are clamped
// to [1e-6, 1 - 1e-6] before use. Mean over all cells. P in (0,1).
LossResult bce_loss(const Heatmap& pred, const std::vector<double>& targets);

// Per-cell coefficients of the online residual, standing in for the trained
// per-sample weights: y is the supervision value, m blends the linear and
// hinge branches (1 on the target, 0 in the background), v scales the cell
// (0 excludes it entirely).
struct ResidualParams {
    std::vector<double> v;
    std::vector<double> m;
    std::vector<double> y;
};

// r(p) = v * (m*p + (1-m)*max(0, p) - y), per cell.
struct ResidualResult {
    std::vector<double> residual;
    // d r / d p at the current activation pattern; the hinge branch
    // contributes 0 at p <= 0.
    std::vector<double> jac_diag;
    // 0.5 * sum r^2
    double loss = 0.0;
};

ResidualResult disc_residual(const std::vector<double>& pred, const ResidualParams& params);

// Build residual coefficients from a pseudo-label map: m falls off linearly
// with cell distance from (cy, cx), reaching 0 at target_radius; v = 1 + m.
// Ignore cells (label -1) get v = 0 and y = 0.
ResidualParams make_residual_params(const LabelMap& pseudo, double cy, double cx,
                                    double target_radius);

// Weighted combination of the four training terms:
//   lambda_r * hinge(robust)   + lambda_a * focal(accurate)
// + lambda_b * L1(box offsets at positive cells)
// + lambda_o * BCE(iou slot).
// The hinge target region is where the robust label is at least 0.25.
// Box arrays hold 4 offsets per accurate-map slot; the L1 term averages
// over the 4 offsets of positive-label cells only.
struct TotalLossResult {
    double total = 0.0;
    double hinge = 0.0;
    double focal = 0.0;
    double l1 = 0.0;
    double bce = 0.0;
    std::vector<double> d_robust;
    std::vector<double> d_accurate;
    std::vector<double> d_box;
    std::vector<double> d_iou;
};

TotalLossResult total_loss(const Heatmap& robust_pred, const LabelMap& robust_labels,
                           const Heatmap& accurate_pred, const LabelMap& accurate_labels,
                           const std::vector<double>& box_pred, const std::vector<double>& box_gt,
                           const Heatmap& iou_pred, const std::vector<double>& iou_targets,
                           const LossConfig& cfg);

}  // namespace dualtrack
