#pragma once

#include <cstdint>
#include <vector>

#include "dualtrack/correlation.hpp"
#include "dualtrack/geometry.hpp"
#include "dualtrack/gridmath.hpp"
#include "dualtrack/sim.hpp"

namespace dualtrack {

enum class FeatureMode { Oracle, Image };

struct FeatureProviderConfig {
    FeatureMode mode = FeatureMode::Oracle;
    int channels = 16;
    int stride = 8;
    int layer_count = 3;
    double noise_sigma = 0.02;      // oracle mode feature noise
    double box_noise_sigma = 0.02;  // oracle proposal noise, fraction of object size
    int identity_dim = 8;
};

// Scene-oracle features: each visible object paints a Gaussian blob of its
// identity vector. Layer l is rendered at stride*2^l and resized back to
// the stride-l0 grid, so later layers are progressively blurrier. Additive
// noise is drawn per (seed, frame, layer).
FeaturePyramid synth_features(const SceneState& scene, const FeatureProviderConfig& cfg);

// Hand-crafted image features: 8-bin signed gradient-orientation
// histograms pooled over stride x stride cells, one layer per smoothing
// scale. channels/identity_dim are ignored (always 8 channels).
FeaturePyramid image_features(const std::vector<std::uint8_t>& frame, int height, int width,
                              const FeatureProviderConfig& cfg);

// Crop the box extent in cell coordinates and adaptive-average-pool it to
// kernel_size x kernel_size.
FeatureMap extract_template(const FeatureMap& grid, const Box& box, double stride,
                            int kernel_size = 5);
FeatureMap extract_template(const FeaturePyramid& pyr, const Box& box,
                            const std::vector<double>& beta = {}, int kernel_size = 5);

// Detector stand-in: anchors whose center lies within capture_radius_cells
// of a visible object center regress to that object (noisy SiamRPN
// offsets); all others keep zero offsets. Deterministic per (scene, grid).
// noise_sigma is the per-component offset noise as a fraction of object size.
DenseBoxes make_oracle_boxes(const SceneState& scene, const AnchorGrid& grid,
                             double noise_sigma = 0.02);

// IoU-prediction stand-in: clamp(iou(decoded box, target gt) + noise, 0, 1)
// per anchor.
Heatmap make_oracle_iou(const SceneState& scene, const DenseBoxes& boxes);

}  // namespace dualtrack
