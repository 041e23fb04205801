#pragma once

#include <cstdint>
#include <vector>

#include "dualtrack/correlation.hpp"
#include "dualtrack/losses.hpp"

namespace dualtrack {

// Discriminative correlation filter updated while tracking.
struct OnlineFilter {
    FeatureMap weights;  // C x k x k
};

// One remembered training frame: a feature grid and the residual
// coefficients of its response-sized supervision.
struct SupportEntry {
    FeatureMap feature;
    ResidualParams params;
    double weight = 1.0;
    bool initial = false;
    std::uint64_t order = 0;
};

struct SupportSet {
    int capacity = 50;
    std::uint64_t next_order = 0;
    std::vector<SupportEntry> entries;
};

struct OnlineLearnerConfig {
    int capacity = 50;
    int init_iterations = 10;
    int periodic_interval = 20;
    int periodic_iterations = 2;
    double periodic_lr = 0.1;
    int hard_iterations = 1;
    double hard_lr = 0.2;
    double hard_weight = 0.5;
};

enum class UpdateKind { None, Periodic, Hard };

// Average-pool a template feature onto a k x k filter. Bins follow the
// adaptive pooling convention: bin i spans [floor(i*n/k), ceil((i+1)*n/k)).
OnlineFilter init_filter(const FeatureMap& template_feature, int kernel_size = 5);

// Objective over the support set:
//   L(theta) = sum_e weight_e * 0.5 * || r_e(theta) ||^2,
// r_e from disc_residual of the entry's response upchannel_xcorr(F_e, theta).
double support_loss(const OnlineFilter& filter, const SupportSet& support);

struct SgdStepResult {
    OnlineFilter filter;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double grad_norm = 0.0;
    double step_size = 0.0;
    bool converged = false;
};

// One steepest-descent step with the Gauss-Newton optimal step length
//   alpha = (g^T g) / (g^T J^T J g),
// hinge activations frozen at the current response. lr scales the step.
// A zero gradient sets `converged` and leaves the filter unchanged.
SgdStepResult sgd_step(const OnlineFilter& filter, const SupportSet& support, double lr = 1.0);

struct OptimizeResult {
    OnlineFilter filter;
    std::vector<double> losses;  // loss before each applied step
    bool converged = false;
};

OptimizeResult optimize(const OnlineFilter& filter, const SupportSet& support, int iterations,
                        double lr = 1.0);

// Append an entry; over capacity the oldest non-initial entry is evicted.
// If every stored entry is initial the push is dropped.
void support_push(SupportSet& support, FeatureMap feature, ResidualParams params, double weight,
                  bool initial = false);

// Hard beats Periodic; a lost frame suppresses everything.
UpdateKind schedule_update(int frame_index, bool distractor, bool lost,
                           const OnlineLearnerConfig& cfg);

// A secondary local maximum more than 3 cells from the target cell whose
// value exceeds ratio * the target cell's value.
bool detect_distractor(const Heatmap& robust_map, int target_i, int target_j, double ratio);

}  // namespace dualtrack
