#include "dualtrack/correlation.hpp"

#include <stdexcept>

namespace dualtrack {

void validate_pyramid(const FeaturePyramid& pyr) {
    if (pyr.layers.empty()) throw std::invalid_argument("pyramid: no layers");
    if (pyr.stride <= 0.0) throw std::invalid_argument("pyramid: stride must be positive");
    const auto& first = pyr.layers.front();
    for (const auto& l : pyr.layers)
        if (l.channels != first.channels || l.height != first.height || l.width != first.width)
            throw std::invalid_argument("pyramid: layer shape mismatch");
}

namespace {

void check_corr_shapes(const FeatureMap& f, const FeatureMap& k) {
    if (f.channels != k.channels) throw std::invalid_argument("xcorr: channel mismatch");
    if (k.height > f.height || k.width > f.width)
        throw std::invalid_argument("xcorr: kernel larger than feature");
    if (f.values.empty() || k.values.empty()) throw std::invalid_argument("xcorr: empty input");
}

}  // namespace

FeatureMap depthwise_xcorr(const FeatureMap& feature, const FeatureMap& kernel) {
    check_corr_shapes(feature, kernel);
    const int oh = feature.height - kernel.height + 1;
    const int ow = feature.width - kernel.width + 1;
    FeatureMap out = FeatureMap::zeros(feature.channels, oh, ow);
    for (int c = 0; c < feature.channels; ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (int u = 0; u < kernel.height; ++u) {
                    const double* frow = &feature.values[feature.index(c, y + u, x)];
                    const double* krow = &kernel.values[kernel.index(c, u, 0)];
                    for (int v = 0; v < kernel.width; ++v) acc += frow[v] * krow[v];
                }
                out.at(c, y, x) = acc;
            }
    return out;
}

Heatmap upchannel_xcorr(const FeatureMap& feature, const FeatureMap& kernel) {
    check_corr_shapes(feature, kernel);
    const int oh = feature.height - kernel.height + 1;
    const int ow = feature.width - kernel.width + 1;
    Heatmap out = Heatmap::zeros(oh, ow, 1);
    for (int c = 0; c < feature.channels; ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double acc = 0.0;
                for (int u = 0; u < kernel.height; ++u) {
                    const double* frow = &feature.values[feature.index(c, y + u, x)];
                    const double* krow = &kernel.values[kernel.index(c, u, 0)];
                    for (int v = 0; v < kernel.width; ++v) acc += frow[v] * krow[v];
                }
                out.at(y, x) += acc;
            }
    return out;
}

Heatmap aggregate_layers(const std::vector<Heatmap>& maps, const std::vector<double>& weights) {
    if (maps.empty()) throw std::invalid_argument("aggregate_layers: no maps");
    if (maps.size() != weights.size())
        throw std::invalid_argument("aggregate_layers: weight count mismatch");
    const auto& first = maps.front();
    Heatmap out = Heatmap::zeros(first.height, first.width, first.anchors);
    for (size_t l = 0; l < maps.size(); ++l) {
        const auto& m = maps[l];
        if (m.height != first.height || m.width != first.width || m.anchors != first.anchors)
            throw std::invalid_argument("aggregate_layers: map shape mismatch");
        for (size_t k = 0; k < out.values.size(); ++k) out.values[k] += weights[l] * m.values[k];
    }
    return out;
}

FeatureMap fuse_features(const FeaturePyramid& pyr, const std::vector<double>& weights) {
    validate_pyramid(pyr);
    if (pyr.layers.size() != weights.size())
        throw std::invalid_argument("fuse_features: weight count mismatch");
    const auto& first = pyr.layers.front();
    FeatureMap out = FeatureMap::zeros(first.channels, first.height, first.width);
    for (size_t l = 0; l < pyr.layers.size(); ++l)
        for (size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += weights[l] * pyr.layers[l].values[k];
    return out;
}

}  // namespace dualtrack
