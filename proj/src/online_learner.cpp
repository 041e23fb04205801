#include "dualtrack/online_learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualtrack {

namespace {

// Adjoint of the valid cross correlation with respect to the kernel:
// accumulate q over every window position of the feature.
FeatureMap kernel_gradient(const FeatureMap& feature, const std::vector<double>& q, int oh,
                           int ow, int kh, int kw) {
    FeatureMap g = FeatureMap::zeros(feature.channels, kh, kw);
    for (int c = 0; c < feature.channels; ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                const double qv = q[y * ow + x];
                if (qv == 0.0) continue;
                for (int u = 0; u < kh; ++u)
                    for (int v = 0; v < kw; ++v)
                        g.at(c, u, v) += feature.at(c, y + u, x + v) * qv;
            }
    return g;
}

void check_entry(const SupportEntry& e, int channels, int kh, int kw) {
    if (e.feature.channels != channels)
        throw std::invalid_argument("support entry: channel mismatch with filter");
    const int oh = e.feature.height - kh + 1;
    const int ow = e.feature.width - kw + 1;
    if (oh <= 0 || ow <= 0)
        throw std::invalid_argument("support entry: feature smaller than filter");
    if (e.params.y.size() != static_cast<size_t>(oh) * ow)
        throw std::invalid_argument("support entry: params do not match response size");
    if (e.weight < 0.0) throw std::invalid_argument("support entry: negative weight");
}

}  // namespace

OnlineFilter init_filter(const FeatureMap& template_feature, int kernel_size) {
    if (kernel_size <= 0) throw std::invalid_argument("init_filter: bad kernel size");
    if (template_feature.values.empty()) throw std::invalid_argument("init_filter: empty template");
    const int n_h = template_feature.height;
    const int n_w = template_feature.width;
    OnlineFilter f;
    f.weights = FeatureMap::zeros(template_feature.channels, kernel_size, kernel_size);
    for (int c = 0; c < template_feature.channels; ++c)
        for (int i = 0; i < kernel_size; ++i) {
            const int y0 = (i * n_h) / kernel_size;
            const int y1 = ((i + 1) * n_h + kernel_size - 1) / kernel_size;
            for (int j = 0; j < kernel_size; ++j) {
                const int x0 = (j * n_w) / kernel_size;
                const int x1 = ((j + 1) * n_w + kernel_size - 1) / kernel_size;
                double acc = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) acc += template_feature.at(c, y, x);
                f.weights.at(c, i, j) = acc / double((y1 - y0) * (x1 - x0));
            }
        }
    return f;
}

double support_loss(const OnlineFilter& filter, const SupportSet& support) {
    double total = 0.0;
    for (const auto& e : support.entries) {
        check_entry(e, filter.weights.channels, filter.weights.height, filter.weights.width);
        Heatmap p = upchannel_xcorr(e.feature, filter.weights);
        total += e.weight * disc_residual(p.values, e.params).loss;
    }
    return total;
}

SgdStepResult sgd_step(const OnlineFilter& filter, const SupportSet& support, double lr) {
    if (support.entries.empty()) throw std::invalid_argument("sgd_step: empty support set");
    if (lr <= 0.0) throw std::invalid_argument("sgd_step: lr must be positive");
    const int kh = filter.weights.height;
    const int kw = filter.weights.width;

    SgdStepResult out;
    out.filter = filter;

    // Gradient g = sum_e w_e A_e^T (D_e . r_e) with the activation pattern
    // D_e frozen at the current response.
    FeatureMap grad = FeatureMap::zeros(filter.weights.channels, kh, kw);
    struct Frozen {
        std::vector<double> weighted;  // D_e . r_e
        std::vector<double> diag;      // D_e
        int oh = 0, ow = 0;
    };
    std::vector<Frozen> frozen(support.entries.size());
    double loss_before = 0.0;
    for (size_t e = 0; e < support.entries.size(); ++e) {
        const auto& entry = support.entries[e];
        check_entry(entry, filter.weights.channels, kh, kw);
        Heatmap p = upchannel_xcorr(entry.feature, filter.weights);
        ResidualResult res = disc_residual(p.values, entry.params);
        loss_before += entry.weight * res.loss;
        Frozen& fz = frozen[e];
        fz.oh = p.height;
        fz.ow = p.width;
        fz.diag = std::move(res.jac_diag);
        fz.weighted.resize(res.residual.size());
        for (size_t k = 0; k < res.residual.size(); ++k)
            fz.weighted[k] = entry.weight * fz.diag[k] * res.residual[k];
        FeatureMap g = kernel_gradient(entry.feature, fz.weighted, fz.oh, fz.ow, kh, kw);
        for (size_t k = 0; k < grad.values.size(); ++k) grad.values[k] += g.values[k];
    }
    out.loss_before = loss_before;

    double numer = 0.0;
    for (double v : grad.values) numer += v * v;
    out.grad_norm = std::sqrt(numer);
    if (numer <= 1e-30) {
        out.loss_after = loss_before;
        out.converged = true;
        return out;
    }

    // Curvature of the frozen quadratic along g: sum_e w_e || D_e (A_e g) ||^2.
    double denom = 0.0;
    for (size_t e = 0; e < support.entries.size(); ++e) {
        const auto& entry = support.entries[e];
        Heatmap h = upchannel_xcorr(entry.feature, grad);
        const Frozen& fz = frozen[e];
        for (size_t k = 0; k < h.values.size(); ++k) {
            const double dv = fz.diag[k] * h.values[k];
            denom += entry.weight * dv * dv;
        }
    }
    if (denom <= 1e-30) {
        // Flat model along the gradient; nothing to gain from this step.
        out.loss_after = loss_before;
        out.converged = true;
        return out;
    }

    const double alpha = lr * numer / denom;
    out.step_size = alpha;
    for (size_t k = 0; k < grad.values.size(); ++k)
        out.filter.weights.values[k] = filter.weights.values[k] - alpha * grad.values[k];
    out.loss_after = support_loss(out.filter, support);
    return out;
}

OptimizeResult optimize(const OnlineFilter& filter, const SupportSet& support, int iterations,
                        double lr) {
    if (iterations < 0) throw std::invalid_argument("optimize: negative iteration count");
    OptimizeResult out;
    out.filter = filter;
    for (int it = 0; it < iterations; ++it) {
        SgdStepResult step = sgd_step(out.filter, support, lr);
        out.losses.push_back(step.loss_before);
        out.filter = std::move(step.filter);
        if (step.converged) {
            out.converged = true;
            break;
        }
    }
    return out;
}

void support_push(SupportSet& support, FeatureMap feature, ResidualParams params, double weight,
                  bool initial) {
    if (support.capacity <= 0) throw std::invalid_argument("support_push: bad capacity");
    if (weight < 0.0) throw std::invalid_argument("support_push: negative weight");
    SupportEntry entry;
    entry.feature = std::move(feature);
    entry.params = std::move(params);
    entry.weight = weight;
    entry.initial = initial;
    entry.order = support.next_order++;
    if (static_cast<int>(support.entries.size()) >= support.capacity) {
        int victim = -1;
        for (size_t k = 0; k < support.entries.size(); ++k) {
            if (support.entries[k].initial) continue;
            if (victim < 0 || support.entries[k].order < support.entries[victim].order)
                victim = static_cast<int>(k);
        }
        if (victim < 0) return;  // only protected entries remain
        support.entries.erase(support.entries.begin() + victim);
    }
    support.entries.push_back(std::move(entry));
}

UpdateKind schedule_update(int frame_index, bool distractor, bool lost,
                           const OnlineLearnerConfig& cfg) {
    if (lost) return UpdateKind::None;
    if (distractor) return UpdateKind::Hard;
    if (cfg.periodic_interval > 0 && frame_index > 0 && frame_index % cfg.periodic_interval == 0)
        return UpdateKind::Periodic;
    return UpdateKind::None;
}

bool detect_distractor(const Heatmap& robust_map, int target_i, int target_j, double ratio) {
    if (robust_map.anchors != 1)
        throw std::invalid_argument("detect_distractor: map must have A=1");
    if (target_i < 0 || target_i >= robust_map.height || target_j < 0 ||
        target_j >= robust_map.width)
        throw std::invalid_argument("detect_distractor: target cell out of range");
    const double peak = robust_map.at(target_i, target_j);
    for (int i = 0; i < robust_map.height; ++i)
        for (int j = 0; j < robust_map.width; ++j) {
            const double di = i - target_i, dj = j - target_j;
            if (di * di + dj * dj <= 9.0) continue;
            const double v = robust_map.at(i, j);
            if (v <= ratio * peak) continue;
            bool local_max = true;
            for (int oi = -1; oi <= 1 && local_max; ++oi)
                for (int oj = -1; oj <= 1; ++oj) {
                    if (oi == 0 && oj == 0) continue;
                    const int ni = i + oi, nj = j + oj;
                    if (ni < 0 || ni >= robust_map.height || nj < 0 || nj >= robust_map.width)
                        continue;
                    if (robust_map.at(ni, nj) > v) {
                        local_max = false;
                        break;
                    }
                }
            if (local_max) return true;
        }
    return false;
}

}  // namespace dualtrack
