#include "dualtrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualtrack {

Box Box::from_topleft(double x, double y, double w, double h) {
    return Box{x + 0.5 * w, y + 0.5 * h, w, h};
}

double iou(const Box& a, const Box& b) {
    if (!a.valid() || !b.valid()) return 0.0;
    const double ix = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

std::vector<double> iou_matrix(const std::vector<Box>& as, const std::vector<Box>& bs) {
    std::vector<double> out(as.size() * bs.size());
    for (size_t i = 0; i < as.size(); ++i)
        for (size_t j = 0; j < bs.size(); ++j)
            out[i * bs.size() + j] = iou(as[i], bs[j]);
    return out;
}

Box AnchorGrid::anchor_at(int i, int j, int a) const {
    return Box{origin_offset + stride * j, origin_offset + stride * i,
               scales[a].w, scales[a].h};
}

std::vector<AnchorScale> default_anchor_scales(double stride, int num_anchors) {
    const double base = stride * 8.0;
    std::vector<double> ratios;
    if (num_anchors == 5)
        ratios = {1.0 / 3.0, 0.5, 1.0, 2.0, 3.0};
    else if (num_anchors == 1)
        ratios = {1.0};
    else
        throw std::invalid_argument("default_anchor_scales: unsupported anchor count");
    std::vector<AnchorScale> out;
    out.reserve(ratios.size());
    for (double r : ratios)
        out.push_back({base / std::sqrt(r), base * std::sqrt(r)});
    return out;
}

AnchorGrid make_anchor_grid(int height, int width, double stride,
                            std::vector<AnchorScale> scales, double origin_offset) {
    if (height <= 0 || width <= 0) throw std::invalid_argument("make_anchor_grid: empty grid");
    if (stride <= 0.0) throw std::invalid_argument("make_anchor_grid: stride must be positive");
    if (scales.empty()) throw std::invalid_argument("make_anchor_grid: no anchor scales");
    for (const auto& s : scales)
        if (s.w <= 0.0 || s.h <= 0.0)
            throw std::invalid_argument("make_anchor_grid: degenerate anchor scale");
    return AnchorGrid{height, width, stride, origin_offset, std::move(scales)};
}

Box apply_offsets(const Box& anchor, const std::array<double, 4>& d) {
    return Box{anchor.cx + d[0] * anchor.w, anchor.cy + d[1] * anchor.h,
               anchor.w * std::exp(d[2]), anchor.h * std::exp(d[3])};
}

std::array<double, 4> encode_offsets(const Box& anchor, const Box& target) {
    if (!anchor.valid() || !target.valid())
        throw std::invalid_argument("encode_offsets: degenerate box");
    return {(target.cx - anchor.cx) / anchor.w, (target.cy - anchor.cy) / anchor.h,
            std::log(target.w / anchor.w), std::log(target.h / anchor.h)};
}

Box DenseBoxes::decode_at(int i, int j, int a) const {
    const int base = grid.linear_index(i, j, a) * 4;
    return apply_offsets(grid.anchor_at(i, j, a),
                         {offsets[base], offsets[base + 1], offsets[base + 2], offsets[base + 3]});
}

DenseBoxes make_zero_boxes(const AnchorGrid& grid) {
    DenseBoxes out;
    out.grid = grid;
    out.offsets.assign(static_cast<size_t>(grid.count()) * 4, 0.0);
    return out;
}

std::vector<Box> decode_all(const DenseBoxes& boxes) {
    std::vector<Box> out(boxes.grid.count());
    for (int i = 0; i < boxes.grid.height; ++i)
        for (int j = 0; j < boxes.grid.width; ++j)
            for (int a = 0; a < boxes.grid.num_anchors(); ++a)
                out[boxes.grid.linear_index(i, j, a)] = boxes.decode_at(i, j, a);
    return out;
}

}  // namespace dualtrack
