#pragma once

#include <vector>

#include "dualtrack/gridmath.hpp"

namespace dualtrack {

// Multi-layer feature stack. All layers share channel count and spatial size
// (deeper layers are resampled to the common grid before they get here).
struct FeaturePyramid {
    std::vector<FeatureMap> layers;
    double stride = 0.0;
};

void validate_pyramid(const FeaturePyramid& pyr);

// Valid-mode cross correlation (no kernel flip), one output channel per
// input channel:
//   out(c, y, x) = sum_{u,v} f(c, y+u, x+v) * k(c, u, v)
// Output is C x (H-kh+1) x (W-kw+1); kernel must fit inside the feature.
FeatureMap depthwise_xcorr(const FeatureMap& feature, const FeatureMap& kernel);

// Same sliding product summed over channels, yielding a single score map.
Heatmap upchannel_xcorr(const FeatureMap& feature, const FeatureMap& kernel);

// Weighted sum of equally-shaped score maps: sum_l weights[l] * maps[l].
Heatmap aggregate_layers(const std::vector<Heatmap>& maps, const std::vector<double>& weights);

// Weighted sum of pyramid layers into one feature grid.
FeatureMap fuse_features(const FeaturePyramid& pyr, const std::vector<double>& weights);

}  // namespace dualtrack
