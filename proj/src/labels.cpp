#include "dualtrack/labels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dualtrack {

LabelMap LabelMap::zeros(int height, int width, int anchors) {
    if (height <= 0 || width <= 0 || anchors <= 0)
        throw std::invalid_argument("LabelMap::zeros: non-positive dimension");
    LabelMap m;
    m.height = height;
    m.width = width;
    m.anchors = anchors;
    m.values.assign(static_cast<size_t>(height) * width * anchors, 0.0);
    return m;
}

LabelMap gaussian_label(int height, int width, double cy, double cx, double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_label: sigma must be positive");
    LabelMap m = LabelMap::zeros(height, width, 1);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) {
            const double d2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
            m.at(i, j) = std::exp(-d2 * inv);
        }
    return m;
}

LabelMap assign_bernoulli_iou(const AnchorGrid& grid, const Box& gt, const LabelConfig& cfg) {
    if (!gt.valid()) throw std::invalid_argument("assign_bernoulli_iou: degenerate gt box");
    if (!(cfg.iou_neg_thresh <= cfg.iou_pos_thresh))
        throw std::invalid_argument("assign_bernoulli_iou: thresholds out of order");
    LabelMap m = LabelMap::zeros(grid.height, grid.width, grid.num_anchors());
    int best = 0;
    double best_iou = -1.0;
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j)
            for (int a = 0; a < grid.num_anchors(); ++a) {
                const double v = iou(grid.anchor_at(i, j, a), gt);
                const int k = grid.linear_index(i, j, a);
                if (v > cfg.iou_pos_thresh)
                    m.values[k] = 1.0;
                else if (v < cfg.iou_neg_thresh)
                    m.values[k] = 0.0;
                else
                    m.values[k] = -1.0;
                if (v > best_iou) {
                    best_iou = v;
                    best = k;
                }
            }
    // The best-overlap anchor is always a positive, so at least one exists.
    m.values[best] = 1.0;
    return m;
}

LabelMap assign_atss(const AnchorGrid& grid, const Box& gt, int topk, AtssVariant variant) {
    if (!gt.valid()) throw std::invalid_argument("assign_atss: degenerate gt box");
    if (topk <= 0) throw std::invalid_argument("assign_atss: topk must be positive");
    const int n = grid.count();
    std::vector<double> ious(n);
    std::vector<double> dist2(n);
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j)
            for (int a = 0; a < grid.num_anchors(); ++a) {
                const int k = grid.linear_index(i, j, a);
                const Box anchor = grid.anchor_at(i, j, a);
                ious[k] = iou(anchor, gt);
                const double dx = anchor.cx - gt.cx;
                const double dy = anchor.cy - gt.cy;
                dist2[k] = dx * dx + dy * dy;
            }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const int m = std::min(topk, n);
    if (variant == AtssVariant::MaxIoU) {
        // Stable tie-break on the linear index.
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return ious[a] > ious[b]; });
    } else {
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return dist2[a] < dist2[b]; });
    }
    order.resize(m);

    double mean = 0.0;
    for (int k : order) mean += ious[k];
    mean /= m;
    double var = 0.0;
    for (int k : order) var += (ious[k] - mean) * (ious[k] - mean);
    var /= m;
    const double t = mean + std::sqrt(var);

    LabelMap out = LabelMap::zeros(grid.height, grid.width, grid.num_anchors());
    bool any = false;
    for (int k : order) {
        if (ious[k] < t) continue;
        const int a = k % grid.num_anchors();
        const int cell = k / grid.num_anchors();
        const Box anchor = grid.anchor_at(cell / grid.width, cell % grid.width, a);
        const bool inside = anchor.cx > gt.left() && anchor.cx < gt.right() &&
                            anchor.cy > gt.top() && anchor.cy < gt.bottom();
        if (!inside) continue;
        out.values[k] = 1.0;
        any = true;
    }
    if (!any) {
        int best = 0;
        for (int k = 1; k < n; ++k)
            if (ious[k] > ious[best]) best = k;
        out.values[best] = 1.0;
    }
    return out;
}

LabelMap online_pseudo_label(int height, int width, double cy, double cx, double sigma) {
    return gaussian_label(height, width, cy, cx, sigma);
}

}  // namespace dualtrack
