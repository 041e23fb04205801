#pragma once

#include <array>
#include <vector>

namespace dualtrack {

// Axis-aligned box, center parameterization. Pixel coordinates, y down.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    static Box from_topleft(double x, double y, double w, double h);

    double left() const { return cx - 0.5 * w; }
    double top() const { return cy - 0.5 * h; }
    double right() const { return cx + 0.5 * w; }
    double bottom() const { return cy + 0.5 * h; }
    double area() const { return w * h; }
    bool valid() const { return w > 0.0 && h > 0.0; }
};

// Intersection over union. Degenerate (non-positive area) operands give 0.
double iou(const Box& a, const Box& b);

// Row-major matrix of pairwise IoUs, rows index `as`, columns index `bs`.
std::vector<double> iou_matrix(const std::vector<Box>& as, const std::vector<Box>& bs);

struct AnchorScale {
    double w = 0.0;
    double h = 0.0;
};

// Regular anchor lattice over a score grid. Anchor (i, j, a) is centered at
// origin_offset + stride * (j, i) and has the extent of scales[a].
struct AnchorGrid {
    int height = 0;
    int width = 0;
    double stride = 0.0;
    double origin_offset = 0.0;
    std::vector<AnchorScale> scales;

    int num_anchors() const { return static_cast<int>(scales.size()); }
    int count() const { return height * width * num_anchors(); }
    Box anchor_at(int i, int j, int a) const;
    // Linear index convention shared with score maps: a fastest, then j, then i.
    int linear_index(int i, int j, int a) const {
        return (i * width + j) * num_anchors() + a;
    }
};

// Single base size of stride*8, aspect ratios {1/3, 1/2, 1, 2, 3} when
// num_anchors == 5, ratio {1} when num_anchors == 1. Ratio r scales the base
// as w = base/sqrt(r), h = base*sqrt(r).
std::vector<AnchorScale> default_anchor_scales(double stride, int num_anchors);

AnchorGrid make_anchor_grid(int height, int width, double stride,
                            std::vector<AnchorScale> scales,
                            double origin_offset = 0.0);

// SiamRPN-style box coding relative to an anchor:
//   cx' = cx_a + dcx * w_a,  cy' = cy_a + dcy * h_a,
//   w'  = w_a * exp(dw),     h'  = h_a * exp(dh).
Box apply_offsets(const Box& anchor, const std::array<double, 4>& offsets);
std::array<double, 4> encode_offsets(const Box& anchor, const Box& target);

// Dense per-anchor box offsets over a grid; layout matches
// AnchorGrid::linear_index with the 4 offset slots fastest.
struct DenseBoxes {
    AnchorGrid grid;
    std::vector<double> offsets;

    Box decode_at(int i, int j, int a) const;
};

DenseBoxes make_zero_boxes(const AnchorGrid& grid);

// Decode every anchor of `boxes`; result indexed by AnchorGrid::linear_index.
std::vector<Box> decode_all(const DenseBoxes& boxes);

}  // namespace dualtrack
