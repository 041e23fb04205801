#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dualtrack {

// Score map over an H x W grid with A anchor slices per cell.
// Storage is row-major with the anchor index fastest:
//   values[(i * width + j) * anchors + a]
struct Heatmap {
    int height = 0;
    int width = 0;
    int anchors = 1;
    std::vector<double> values;

    static Heatmap zeros(int height, int width, int anchors = 1);

    int index(int i, int j, int a = 0) const { return (i * width + j) * anchors + a; }
    double& at(int i, int j, int a = 0) { return values[index(i, j, a)]; }
    double at(int i, int j, int a = 0) const { return values[index(i, j, a)]; }
    size_t size() const { return values.size(); }
};

// Dense feature grid, channel-major: values[(c * height + i) * width + j].
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    static FeatureMap zeros(int channels, int height, int width);

    int index(int c, int i, int j) const { return (c * height + i) * width + j; }
    double& at(int c, int i, int j) { return values[index(c, i, j)]; }
    double at(int c, int i, int j) const { return values[index(c, i, j)]; }
};

struct Peak {
    int i = 0;
    int j = 0;
    int a = 0;
    double value = 0.0;
};

// Softmax over all cells of the map (anchor slices included). The max value
// is subtracted before exponentiation; required, not an optimization.
Heatmap softmax_norm(const Heatmap& map);

// Divide by the sum of values. Inputs must be non-negative; an all-zero map
// has no meaningful normalization and raises "degenerate distribution".
Heatmap sum_norm(const Heatmap& map);

// Global argmax. Ties resolve to the smallest linear index, i.e. anchor
// fastest, then column, then row.
Peak argmax_peak(const Heatmap& map);

// Align-corners bilinear interpolation of a C x H x W grid to out_h x out_w.
// Output corners sample input corners exactly.
FeatureMap bilinear_resize(const FeatureMap& grid, int out_h, int out_w);

// Outer product of 1-D Hann windows, w(k) = 0.5 - 0.5*cos(2*pi*k/(n-1)).
// Size 1 degenerates to a single 1.
Heatmap cosine_window(int height, int width);

// Replicate an A=1 map across `anchors` slices.
Heatmap broadcast_anchor(const Heatmap& map, int anchors);

// Sub-cell peak refinement: fits a quadratic to the 3x3 neighborhood of
// (pi, pj) in anchor slice a and returns the offset of its extremum,
// clamped to [-1, 1] per axis. Border peaks return (0, 0).
std::pair<double, double> quadratic_peak_offset(const Heatmap& map, int pi, int pj, int a = 0);

// Text serialization: first line "H W A", then the values in storage order,
// 9 significant digits. write/read round-trip is exact at that precision.
void write_heatmap_text(std::ostream& os, const Heatmap& map);
Heatmap read_heatmap_text(std::istream& is);
void save_heatmap_text(const std::string& path, const Heatmap& map);
Heatmap load_heatmap_text(const std::string& path);

// Locale-independent shortest-round-trip formatting used by all text output.
std::string format_double(double v);
// Fixed significant-digit formatting (heatmap dumps).
std::string format_double_sig(double v, int digits);

}  // namespace dualtrack
