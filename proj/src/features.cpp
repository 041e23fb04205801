#include "dualtrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dualtrack/online_learner.hpp"
#include "dualtrack/rng.hpp"

namespace dualtrack {

namespace {

void validate(const FeatureProviderConfig& cfg) {
    if (cfg.channels < 1) throw std::invalid_argument("features: channels must be >= 1");
    if (cfg.stride < 1) throw std::invalid_argument("features: stride must be >= 1");
    if (cfg.layer_count < 1) throw std::invalid_argument("features: layer_count must be >= 1");
    if (cfg.noise_sigma < 0) throw std::invalid_argument("features: negative noise_sigma");
    if (cfg.identity_dim < 1 || cfg.identity_dim > cfg.channels)
        throw std::invalid_argument("features: identity_dim outside [1, channels]");
}

bool object_visible(const SceneState& scene, size_t index) {
    return !(scene.occluded && static_cast<int>(index) == scene.target_index);
}

double blob_sigma_px(const Box& box) {
    return std::max(0.35 * std::sqrt(box.w * box.h), 1e-6);
}

// 3x3 box blur with clamped borders, applied `passes` times.
void box_blur(std::vector<double>& img, int h, int w, int passes) {
    std::vector<double> tmp(img.size());
    for (int p = 0; p < passes; ++p) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int yy = std::clamp(y + dy, 0, h - 1);
                        const int xx = std::clamp(x + dx, 0, w - 1);
                        s += img[static_cast<size_t>(yy) * w + xx];
                    }
                tmp[static_cast<size_t>(y) * w + x] = s / 9.0;
            }
        img.swap(tmp);
    }
}

}  // namespace

FeaturePyramid synth_features(const SceneState& scene, const FeatureProviderConfig& cfg) {
    validate(cfg);
    if (scene.frame_size < cfg.stride)
        throw std::invalid_argument("synth_features: frame smaller than one cell");
    for (const auto& obj : scene.objects)
        if (static_cast<int>(obj.identity.size()) != cfg.channels)
            throw std::invalid_argument("synth_features: identity dimension != channels");

    const int h0 = scene.frame_size / cfg.stride;
    const int w0 = h0;
    FeaturePyramid pyr;
    pyr.stride = cfg.stride;
    for (int l = 0; l < cfg.layer_count; ++l) {
        const int sl = cfg.stride << l;
        const int hl = std::max(1, scene.frame_size / sl);
        FeatureMap layer = FeatureMap::zeros(cfg.channels, hl, hl);
        for (size_t k = 0; k < scene.objects.size(); ++k) {
            if (!object_visible(scene, k)) continue;
            const SceneObject& obj = scene.objects[k];
            const double sigma = blob_sigma_px(obj.box);
            const double inv = 1.0 / (2.0 * sigma * sigma);
            for (int i = 0; i < hl; ++i)
                for (int j = 0; j < hl; ++j) {
                    const double px = (j + 0.5) * sl;
                    const double py = (i + 0.5) * sl;
                    const double d2 = (px - obj.box.cx) * (px - obj.box.cx) +
                                      (py - obj.box.cy) * (py - obj.box.cy);
                    const double g = std::exp(-d2 * inv);
                    if (g < 1e-8) continue;
                    for (int c = 0; c < cfg.channels; ++c)
                        layer.at(c, i, j) += g * obj.identity[c];
                }
        }
        if (hl != h0) layer = bilinear_resize(layer, h0, w0);
        if (cfg.noise_sigma > 0) {
            std::mt19937_64 rng(mix_seed(scene.seed, 0xFEA70000ull + static_cast<unsigned>(l),
                                         static_cast<std::uint64_t>(scene.frame_index)));
            std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
            for (double& v : layer.values) v += noise(rng);
        }
        pyr.layers.push_back(std::move(layer));
    }
    validate_pyramid(pyr);
    return pyr;
}

FeaturePyramid image_features(const std::vector<std::uint8_t>& frame, int height, int width,
                              const FeatureProviderConfig& cfg) {
    validate(cfg);
    if (height < cfg.stride || width < cfg.stride)
        throw std::invalid_argument("image_features: frame smaller than one cell");
    if (frame.size() != static_cast<size_t>(height) * width)
        throw std::invalid_argument("image_features: frame buffer size mismatch");

    const int cells_h = height / cfg.stride;
    const int cells_w = width / cfg.stride;
    FeaturePyramid pyr;
    pyr.stride = cfg.stride;
    std::vector<double> base(frame.begin(), frame.end());
    for (int l = 0; l < cfg.layer_count; ++l) {
        std::vector<double> img = base;
        box_blur(img, height, width, 2 * l);
        FeatureMap layer = FeatureMap::zeros(8, cells_h, cells_w);
        for (int y = 0; y < cells_h * cfg.stride; ++y)
            for (int x = 0; x < cells_w * cfg.stride; ++x) {
                if (y == 0 || x == 0 || y == height - 1 || x == width - 1) continue;
                const double gx = 0.5 * (img[static_cast<size_t>(y) * width + x + 1] -
                                         img[static_cast<size_t>(y) * width + x - 1]);
                const double gy = 0.5 * (img[static_cast<size_t>(y + 1) * width + x] -
                                         img[static_cast<size_t>(y - 1) * width + x]);
                const double mag = std::hypot(gx, gy);
                if (mag <= 0) continue;
                int bin = static_cast<int>((std::atan2(gy, gx) + 3.14159265358979323846) /
                                           (3.14159265358979323846 / 4.0));
                if (bin >= 8) bin = 0;
                layer.at(bin, y / cfg.stride, x / cfg.stride) +=
                    mag / (cfg.stride * cfg.stride);
            }
        pyr.layers.push_back(std::move(layer));
    }
    validate_pyramid(pyr);
    return pyr;
}

FeatureMap extract_template(const FeatureMap& grid, const Box& box, double stride,
                            int kernel_size) {
    if (stride <= 0) throw std::invalid_argument("extract_template: stride must be positive");
    if (kernel_size < 1) throw std::invalid_argument("extract_template: bad kernel size");
    int j0 = static_cast<int>(std::floor(box.left() / stride));
    int j1 = static_cast<int>(std::ceil(box.right() / stride));
    int i0 = static_cast<int>(std::floor(box.top() / stride));
    int i1 = static_cast<int>(std::ceil(box.bottom() / stride));
    j0 = std::max(j0, 0);
    i0 = std::max(i0, 0);
    j1 = std::min(j1, grid.width);
    i1 = std::min(i1, grid.height);
    if (j1 <= j0 || i1 <= i0)
        throw std::invalid_argument("extract_template: box outside feature extent");
    FeatureMap crop = FeatureMap::zeros(grid.channels, i1 - i0, j1 - j0);
    for (int c = 0; c < grid.channels; ++c)
        for (int i = i0; i < i1; ++i)
            for (int j = j0; j < j1; ++j) crop.at(c, i - i0, j - j0) = grid.at(c, i, j);
    return init_filter(crop, kernel_size).weights;
}

FeatureMap extract_template(const FeaturePyramid& pyr, const Box& box,
                            const std::vector<double>& beta, int kernel_size) {
    validate_pyramid(pyr);
    std::vector<double> w = beta;
    if (w.empty()) w.assign(pyr.layers.size(), 1.0 / static_cast<double>(pyr.layers.size()));
    const FeatureMap fused = fuse_features(pyr, w);
    return extract_template(fused, box, pyr.stride, kernel_size);
}

DenseBoxes make_oracle_boxes(const SceneState& scene, const AnchorGrid& grid,
                             double noise_sigma) {
    if (!(noise_sigma >= 0.0))
        throw std::invalid_argument("make_oracle_boxes: noise_sigma must be >= 0");
    DenseBoxes boxes = make_zero_boxes(grid);
    std::mt19937_64 rng(mix_seed(scene.seed, 0xB0CE5ull,
                                 static_cast<std::uint64_t>(scene.frame_index)));
    std::normal_distribution<double> noise(0.0, 1.0);
    const double radius = 1.5 * grid.stride;
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j)
            for (int a = 0; a < static_cast<int>(grid.scales.size()); ++a) {
                const Box anchor = grid.anchor_at(i, j, a);
                int best = -1;
                double best_d = radius;
                for (size_t k = 0; k < scene.objects.size(); ++k) {
                    if (!object_visible(scene, k)) continue;
                    const Box& b = scene.objects[k].box;
                    const double d = std::hypot(b.cx - anchor.cx, b.cy - anchor.cy);
                    if (d <= best_d) {
                        best_d = d;
                        best = static_cast<int>(k);
                    }
                }
                if (best < 0) continue;
                const Box& target = scene.objects[best].box;
                const auto enc = encode_offsets(anchor, target);
                const size_t idx = static_cast<size_t>(grid.linear_index(i, j, a)) * 4;
                // Noise sigma is noise_sigma * object size per component:
                // center offsets are anchor-normalized, log sizes already
                // relative.
                boxes.offsets[idx + 0] =
                    enc[0] + noise(rng) * noise_sigma * target.w / anchor.w;
                boxes.offsets[idx + 1] =
                    enc[1] + noise(rng) * noise_sigma * target.h / anchor.h;
                boxes.offsets[idx + 2] = enc[2] + noise(rng) * noise_sigma;
                boxes.offsets[idx + 3] = enc[3] + noise(rng) * noise_sigma;
            }
    return boxes;
}

Heatmap make_oracle_iou(const SceneState& scene, const DenseBoxes& boxes) {
    if (scene.objects.empty() || scene.target_index < 0 ||
        scene.target_index >= static_cast<int>(scene.objects.size()))
        throw std::invalid_argument("make_oracle_iou: scene has no target");
    const Box gt = scene.objects[scene.target_index].box;
    const std::vector<Box> decoded = decode_all(boxes);
    Heatmap map = Heatmap::zeros(boxes.grid.height, boxes.grid.width,
                                 static_cast<int>(boxes.grid.scales.size()));
    std::mt19937_64 rng(mix_seed(scene.seed, 0x10E5ull,
                                 static_cast<std::uint64_t>(scene.frame_index)));
    std::normal_distribution<double> noise(0.0, 0.05);
    for (size_t idx = 0; idx < decoded.size(); ++idx)
        map.values[idx] = std::clamp(iou(decoded[idx], gt) + noise(rng), 0.0, 1.0);
    return map;
}

}  // namespace dualtrack
