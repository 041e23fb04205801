#include "dualtrack/gridmath.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace dualtrack {

Heatmap Heatmap::zeros(int height, int width, int anchors) {
    if (height <= 0 || width <= 0 || anchors <= 0)
        throw std::invalid_argument("Heatmap::zeros: non-positive dimension");
    Heatmap m;
    m.height = height;
    m.width = width;
    m.anchors = anchors;
    m.values.assign(static_cast<size_t>(height) * width * anchors, 0.0);
    return m;
}

FeatureMap FeatureMap::zeros(int channels, int height, int width) {
    if (channels <= 0 || height <= 0 || width <= 0)
        throw std::invalid_argument("FeatureMap::zeros: non-positive dimension");
    FeatureMap f;
    f.channels = channels;
    f.height = height;
    f.width = width;
    f.values.assign(static_cast<size_t>(channels) * height * width, 0.0);
    return f;
}

Heatmap softmax_norm(const Heatmap& map) {
    if (map.values.empty()) throw std::invalid_argument("softmax_norm: empty map");
    Heatmap out = map;
    const double mx = *std::max_element(map.values.begin(), map.values.end());
    double sum = 0.0;
    for (size_t k = 0; k < out.values.size(); ++k) {
        out.values[k] = std::exp(map.values[k] - mx);
        sum += out.values[k];
    }
    for (double& v : out.values) v /= sum;
    return out;
}

Heatmap sum_norm(const Heatmap& map) {
    if (map.values.empty()) throw std::invalid_argument("sum_norm: empty map");
    double sum = 0.0;
    for (double v : map.values) {
        if (v < 0.0) throw std::invalid_argument("sum_norm: negative value");
        sum += v;
    }
    if (sum <= 0.0) throw std::invalid_argument("sum_norm: degenerate distribution");
    Heatmap out = map;
    for (double& v : out.values) v /= sum;
    return out;
}

Peak argmax_peak(const Heatmap& map) {
    if (map.values.empty()) throw std::invalid_argument("argmax_peak: empty map");
    size_t best = 0;
    for (size_t k = 1; k < map.values.size(); ++k)
        if (map.values[k] > map.values[best]) best = k;
    Peak p;
    p.a = static_cast<int>(best % map.anchors);
    const size_t cell = best / map.anchors;
    p.j = static_cast<int>(cell % map.width);
    p.i = static_cast<int>(cell / map.width);
    p.value = map.values[best];
    return p;
}

FeatureMap bilinear_resize(const FeatureMap& grid, int out_h, int out_w) {
    if (grid.values.empty()) throw std::invalid_argument("bilinear_resize: empty grid");
    if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("bilinear_resize: empty output");
    FeatureMap out = FeatureMap::zeros(grid.channels, out_h, out_w);
    const double sy = out_h > 1 ? double(grid.height - 1) / (out_h - 1) : 0.0;
    const double sx = out_w > 1 ? double(grid.width - 1) / (out_w - 1) : 0.0;
    for (int i = 0; i < out_h; ++i) {
        const double fy = i * sy;
        const int y0 = std::min(static_cast<int>(fy), grid.height - 1);
        const int y1 = std::min(y0 + 1, grid.height - 1);
        const double wy = fy - y0;
        for (int j = 0; j < out_w; ++j) {
            const double fx = j * sx;
            const int x0 = std::min(static_cast<int>(fx), grid.width - 1);
            const int x1 = std::min(x0 + 1, grid.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < grid.channels; ++c) {
                const double top = grid.at(c, y0, x0) * (1.0 - wx) + grid.at(c, y0, x1) * wx;
                const double bot = grid.at(c, y1, x0) * (1.0 - wx) + grid.at(c, y1, x1) * wx;
                out.at(c, i, j) = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

namespace {
std::vector<double> hann(int n) {
    std::vector<double> w(n);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    for (int k = 0; k < n; ++k)
        w[k] = 0.5 - 0.5 * std::cos(2.0 * M_PI * k / (n - 1));
    return w;
}
}  // namespace

Heatmap cosine_window(int height, int width) {
    Heatmap out = Heatmap::zeros(height, width, 1);
    const auto wy = hann(height);
    const auto wx = hann(width);
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j)
            out.at(i, j) = wy[i] * wx[j];
    return out;
}

Heatmap broadcast_anchor(const Heatmap& map, int anchors) {
    if (map.anchors != 1) throw std::invalid_argument("broadcast_anchor: input must have A=1");
    if (anchors <= 0) throw std::invalid_argument("broadcast_anchor: non-positive anchor count");
    Heatmap out = Heatmap::zeros(map.height, map.width, anchors);
    for (int i = 0; i < map.height; ++i)
        for (int j = 0; j < map.width; ++j)
            for (int a = 0; a < anchors; ++a)
                out.at(i, j, a) = map.at(i, j);
    return out;
}

std::pair<double, double> quadratic_peak_offset(const Heatmap& map, int pi, int pj, int a) {
    if (pi <= 0 || pi >= map.height - 1 || pj <= 0 || pj >= map.width - 1)
        return {0.0, 0.0};
    // Central-difference gradient and Hessian of the 3x3 patch.
    const double dx = 0.5 * (map.at(pi, pj + 1, a) - map.at(pi, pj - 1, a));
    const double dy = 0.5 * (map.at(pi + 1, pj, a) - map.at(pi - 1, pj, a));
    const double dxx = map.at(pi, pj + 1, a) - 2.0 * map.at(pi, pj, a) + map.at(pi, pj - 1, a);
    const double dyy = map.at(pi + 1, pj, a) - 2.0 * map.at(pi, pj, a) + map.at(pi - 1, pj, a);
    const double dxy = 0.25 * (map.at(pi + 1, pj + 1, a) - map.at(pi + 1, pj - 1, a) -
                               map.at(pi - 1, pj + 1, a) + map.at(pi - 1, pj - 1, a));
    const double det = dxx * dyy - dxy * dxy;
    if (std::abs(det) < 1e-12) return {0.0, 0.0};
    double ox = -(dyy * dx - dxy * dy) / det;
    double oy = -(dxx * dy - dxy * dx) / det;
    ox = std::clamp(ox, -1.0, 1.0);
    oy = std::clamp(oy, -1.0, 1.0);
    return {oy, ox};
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

std::string format_double_sig(double v, int digits) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
    if (res.ec != std::errc())
        throw std::runtime_error("format_double_sig: conversion failed");
    return std::string(buf, res.ptr);
}

void write_heatmap_text(std::ostream& os, const Heatmap& map) {
    os << map.height << ' ' << map.width << ' ' << map.anchors << '\n';
    for (int i = 0; i < map.height; ++i) {
        for (int j = 0; j < map.width; ++j)
            for (int a = 0; a < map.anchors; ++a) {
                if (j != 0 || a != 0) os << ' ';
                os << format_double_sig(map.at(i, j, a), 9);
            }
        os << '\n';
    }
}

Heatmap read_heatmap_text(std::istream& is) {
    int h = 0, w = 0, a = 0;
    if (!(is >> h >> w >> a)) throw std::runtime_error("heatmap text: bad header");
    if (h <= 0 || w <= 0 || a <= 0) throw std::runtime_error("heatmap text: bad dimensions");
    Heatmap map = Heatmap::zeros(h, w, a);
    for (size_t k = 0; k < map.values.size(); ++k) {
        std::string tok;
        if (!(is >> tok)) throw std::runtime_error("heatmap text: truncated values");
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw std::runtime_error("heatmap text: bad value");
        map.values[k] = v;
    }
    return map;
}

void save_heatmap_text(const std::string& path, const Heatmap& map) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_heatmap_text(os, map);
    if (!os) throw std::runtime_error("write failed: " + path);
}

Heatmap load_heatmap_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_heatmap_text(is);
}

}  // namespace dualtrack
