#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dualtrack/features.hpp"

using namespace dualtrack;

namespace {

SceneState manual_scene(std::vector<std::pair<Box, int>> objects, int channels = 16) {
    SceneState scene;
    scene.frame_size = 256;
    scene.target_index = 0;
    scene.seed = 42;
    int id = 0;
    for (auto& [box, axis] : objects) {
        SceneObject obj;
        obj.id = id++;
        obj.identity.assign(channels, 0.0);
        obj.identity[axis] = 1.0;
        obj.box = box;
        scene.objects.push_back(obj);
    }
    return scene;
}

// Gaussian blob value of an object at a cell center, written out in full
// so it is independent of the implementation.
double blob_at(const Box& box, double px, double py) {
    const double sigma = 0.35 * std::sqrt(box.w * box.h);
    const double d2 = (px - box.cx) * (px - box.cx) + (py - box.cy) * (py - box.cy);
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

double cell_norm2(const FeatureMap& f, int i, int j) {
    double s = 0.0;
    for (int c = 0; c < f.channels; ++c) s += f.at(c, i, j) * f.at(c, i, j);
    return s;
}

std::vector<std::uint8_t> rotate90(const std::vector<std::uint8_t>& img, int n) {
    std::vector<std::uint8_t> out(img.size());
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            out[static_cast<size_t>(r) * n + c] = img[static_cast<size_t>(n - 1 - c) * n + r];
    return out;
}

}  // namespace

TEST_CASE("empty scene with zero noise gives an all-zero pyramid") {
    SceneState scene = manual_scene({});
    FeatureProviderConfig cfg;
    cfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(scene, cfg);
    REQUIRE(pyr.layers.size() == 3);
    for (const auto& layer : pyr.layers) {
        CHECK(layer.channels == 16);
        CHECK(layer.height == 32);
        for (double v : layer.values) CHECK(v == 0.0);
    }
}

TEST_CASE("single object peaks at its own cell") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 40.0}, 0}});
    FeatureProviderConfig cfg;
    cfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(scene, cfg);
    const FeatureMap& f = pyr.layers[0];
    int best_i = -1, best_j = -1;
    double best = -1.0;
    for (int i = 0; i < f.height; ++i)
        for (int j = 0; j < f.width; ++j)
            if (cell_norm2(f, i, j) > best) {
                best = cell_norm2(f, i, j);
                best_i = i;
                best_j = j;
            }
    // Cell centers sit at (j + 0.5) * stride; (100, 60) is exactly (12, 7).
    CHECK(best_i == 7);
    CHECK(best_j == 12);
    CHECK(f.at(0, 7, 12) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cross-object feature inner products match the blob-overlap form") {
    SceneState scene = manual_scene(
        {{Box{60.0, 60.0, 40.0, 40.0}, 0}, {Box{100.0, 60.0, 40.0, 40.0}, 1}});
    FeatureProviderConfig cfg;
    cfg.noise_sigma = 0.0;
    cfg.layer_count = 1;
    FeaturePyramid pyr = synth_features(scene, cfg);
    const FeatureMap& f = pyr.layers[0];

    // Cells holding the two object centers.
    const int ja = 7, jb = 12, i = 7;
    double inner = 0.0;
    for (int c = 0; c < f.channels; ++c) inner += f.at(c, i, ja) * f.at(c, i, jb);

    const Box& ba = scene.objects[0].box;
    const Box& bb = scene.objects[1].box;
    const double pax = (ja + 0.5) * 8.0, pbx = (jb + 0.5) * 8.0, py = (i + 0.5) * 8.0;
    // Orthogonal identities: only same-object blob products survive.
    const double bound = blob_at(ba, pax, py) * blob_at(ba, pbx, py) +
                         blob_at(bb, pax, py) * blob_at(bb, pbx, py);
    CHECK(inner <= bound + 1e-12);
    CHECK(inner == doctest::Approx(bound).epsilon(1e-6));
}

TEST_CASE("later layers are blurrier at the peak") {
    SceneState scene = manual_scene({{Box{12.0, 12.0, 40.0, 40.0}, 0}});
    FeatureProviderConfig cfg;
    cfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(scene, cfg);
    const double l0 = pyr.layers[0].at(0, 1, 1);
    const double l1 = pyr.layers[1].at(0, 1, 1);
    const double l2 = pyr.layers[2].at(0, 1, 1);
    CHECK(l0 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(l1 < l0);
    CHECK(l2 < l1);
    CHECK(l2 > 0.0);
}

TEST_CASE("synthetic features are deterministic per scene and vary per frame") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 40.0}, 0}});
    FeatureProviderConfig cfg;
    FeaturePyramid a = synth_features(scene, cfg);
    FeaturePyramid b = synth_features(scene, cfg);
    for (size_t l = 0; l < a.layers.size(); ++l) CHECK(a.layers[l].values == b.layers[l].values);

    SceneState next = scene;
    next.frame_index = 1;
    FeaturePyramid c = synth_features(next, cfg);
    CHECK(c.layers[0].values != a.layers[0].values);
}

TEST_CASE("occluded target leaves no blob") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 40.0}, 0}});
    scene.occluded = true;
    FeatureProviderConfig cfg;
    cfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(scene, cfg);
    for (const auto& layer : pyr.layers)
        for (double v : layer.values) CHECK(v == 0.0);
}

TEST_CASE("feature provider validation") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 40.0}, 0}}, 4);
    FeatureProviderConfig cfg;  // channels 16, scene identities have 4
    CHECK_THROWS_AS(synth_features(scene, cfg), std::invalid_argument);
    cfg.identity_dim = 20;
    CHECK_THROWS_AS(synth_features(scene, cfg), std::invalid_argument);
    cfg = FeatureProviderConfig{};
    std::vector<std::uint8_t> tiny(16, 0);
    CHECK_THROWS_AS(image_features(tiny, 4, 4, cfg), std::invalid_argument);
    CHECK_THROWS_AS(image_features(tiny, 16, 16, cfg), std::invalid_argument);
}

TEST_CASE("constant image has all-zero gradient features") {
    std::vector<std::uint8_t> img(64 * 64, 137);
    FeatureProviderConfig cfg;
    FeaturePyramid pyr = image_features(img, 64, 64, cfg);
    REQUIRE(pyr.layers.size() == 3);
    for (const auto& layer : pyr.layers) {
        CHECK(layer.channels == 8);
        CHECK(layer.height == 8);
        for (double v : layer.values) CHECK(v == 0.0);
    }
}

TEST_CASE("vertical step edge concentrates energy in one orientation bin") {
    const int n = 64;
    std::vector<std::uint8_t> img(n * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) img[static_cast<size_t>(y) * n + x] = x < 32 ? 20 : 220;
    FeatureProviderConfig cfg;
    cfg.layer_count = 1;
    FeaturePyramid pyr = image_features(img, n, n, cfg);
    std::vector<double> hist(8, 0.0);
    for (int b = 0; b < 8; ++b)
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) hist[b] += pyr.layers[0].at(b, i, j);
    double total = 0.0;
    for (double h : hist) total += h;
    REQUIRE(total > 0.0);
    // Rising intensity along +x: angle 0, which lands in bin 4 of 8 over [-pi, pi).
    CHECK(hist[4] == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("quarter-turn rotation shifts orientation bins by two") {
    const int n = 64;
    std::vector<std::uint8_t> img(n * n);
    const double theta = 0.5236;  // 30 degrees
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double phase = (x * std::cos(theta) + y * std::sin(theta)) / 10.0;
            img[static_cast<size_t>(y) * n + x] = static_cast<std::uint8_t>(
                std::lround(128.0 + 100.0 * std::sin(2.0 * 3.14159265358979 * phase)));
        }
    std::vector<std::uint8_t> rot = rotate90(img, n);
    FeatureProviderConfig cfg;
    cfg.layer_count = 1;
    FeaturePyramid p1 = image_features(img, n, n, cfg);
    FeaturePyramid p2 = image_features(rot, n, n, cfg);
    std::vector<double> h1(8, 0.0), h2(8, 0.0);
    for (int b = 0; b < 8; ++b)
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                h1[b] += p1.layers[0].at(b, i, j);
                h2[b] += p2.layers[0].at(b, i, j);
            }
    for (int b = 0; b < 8; ++b)
        CHECK(h2[(b + 2) % 8] == doctest::Approx(h1[b]).epsilon(1e-9));
}

TEST_CASE("template extraction over an exact 5x5 cell box is the raw crop") {
    FeatureMap grid = FeatureMap::zeros(2, 16, 16);
    for (size_t k = 0; k < grid.values.size(); ++k) grid.values[k] = static_cast<double>(k);
    // Cells [3,8) x [2,7): pixel extent [24,64) x [16,56) at stride 8.
    Box box = Box::from_topleft(16.0, 24.0, 40.0, 40.0);
    FeatureMap tmpl = extract_template(grid, box, 8.0);
    REQUIRE(tmpl.height == 5);
    REQUIRE(tmpl.width == 5);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                CHECK(tmpl.at(c, i, j) == grid.at(c, i + 3, j + 2));
}

TEST_CASE("template extraction pools a 10x10 cell box into 2x2 bin means") {
    FeatureMap grid = FeatureMap::zeros(1, 16, 16);
    for (size_t k = 0; k < grid.values.size(); ++k) grid.values[k] = static_cast<double>(k % 37);
    Box box = Box::from_topleft(8.0, 8.0, 80.0, 80.0);  // cells [1,11) x [1,11)
    FeatureMap tmpl = extract_template(grid, box, 8.0);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            double mean = 0.0;
            for (int u = 0; u < 2; ++u)
                for (int v = 0; v < 2; ++v) mean += grid.at(0, 1 + 2 * i + u, 1 + 2 * j + v);
            CHECK(tmpl.at(0, i, j) == doctest::Approx(mean / 4.0).epsilon(1e-12));
        }
}

TEST_CASE("template extraction is linear and rejects empty intersections") {
    FeatureMap grid = FeatureMap::zeros(3, 12, 12);
    for (size_t k = 0; k < grid.values.size(); ++k)
        grid.values[k] = std::sin(static_cast<double>(k));
    Box box{40.0, 44.0, 30.0, 26.0};
    FeatureMap t1 = extract_template(grid, box, 8.0);
    FeatureMap scaled = grid;
    for (double& v : scaled.values) v *= 2.0;
    FeatureMap t2 = extract_template(scaled, box, 8.0);
    for (size_t k = 0; k < t1.values.size(); ++k)
        CHECK(t2.values[k] == doctest::Approx(2.0 * t1.values[k]).epsilon(1e-12));

    Box outside{2000.0, 2000.0, 10.0, 10.0};
    CHECK_THROWS_AS(extract_template(grid, outside, 8.0), std::invalid_argument);

    // Constant features give a constant kernel regardless of box placement.
    FeatureMap flat = FeatureMap::zeros(1, 12, 12);
    for (double& v : flat.values) v = 3.25;
    FeatureMap t3 = extract_template(flat, Box{50.0, 50.0, 37.0, 21.0}, 8.0);
    for (double v : t3.values) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("pyramid template defaults to uniform layer fusion") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 40.0}, 0}});
    FeatureProviderConfig cfg;
    cfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(scene, cfg);
    FeatureMap a = extract_template(pyr, scene.objects[0].box);
    FeatureMap b = extract_template(pyr, scene.objects[0].box, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    for (size_t k = 0; k < a.values.size(); ++k)
        CHECK(a.values[k] == doctest::Approx(b.values[k]).epsilon(1e-12));
    CHECK(a.channels == 16);
    CHECK(a.height == 5);
}

TEST_CASE("oracle boxes regress captured anchors to the object") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 44.0}, 0}});
    AnchorGrid grid = make_anchor_grid(28, 28, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_oracle_boxes(scene, grid);
    std::vector<Box> decoded = decode_all(boxes);

    int captured = 0;
    double mean_iou = 0.0;
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j) {
            const Box anchor = grid.anchor_at(i, j, 0);
            const double d = std::hypot(anchor.cx - 100.0, anchor.cy - 60.0);
            const int idx = grid.linear_index(i, j, 0);
            if (d <= 12.0) {
                ++captured;
                mean_iou += iou(decoded[idx], scene.objects[0].box);
            } else {
                // Untouched anchors carry exactly zero offsets.
                for (int k = 0; k < 4; ++k) CHECK(boxes.offsets[idx * 4 + k] == 0.0);
            }
        }
    REQUIRE(captured > 0);
    CHECK(mean_iou / captured > 0.55);

    DenseBoxes again = make_oracle_boxes(scene, grid);
    CHECK(again.offsets == boxes.offsets);
}

TEST_CASE("proposal noise scales with noise_sigma and vanishes at zero") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 44.0}, 0}});
    AnchorGrid grid = make_anchor_grid(28, 28, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes exact = make_oracle_boxes(scene, grid, 0.0);
    DenseBoxes mild = make_oracle_boxes(scene, grid, 0.02);
    DenseBoxes loud = make_oracle_boxes(scene, grid, 0.1);

    const int idx = grid.linear_index(5, 10, 0);
    const Box anchor = grid.anchor_at(5, 10, 0);
    const auto enc = encode_offsets(anchor, scene.objects[0].box);
    for (int k = 0; k < 4; ++k) {
        CHECK(exact.offsets[idx * 4 + k] == doctest::Approx(enc[k]).epsilon(1e-12));
        // Same normal draws, so the residual scales linearly with sigma.
        const double mild_err = mild.offsets[idx * 4 + k] - enc[k];
        const double loud_err = loud.offsets[idx * 4 + k] - enc[k];
        CHECK(loud_err == doctest::Approx(5.0 * mild_err).epsilon(1e-9));
    }
    CHECK_THROWS_AS(make_oracle_boxes(scene, grid, -0.1), std::invalid_argument);
}

TEST_CASE("an occluded target captures no anchors") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 40.0}, 0}});
    scene.occluded = true;
    AnchorGrid grid = make_anchor_grid(28, 28, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_oracle_boxes(scene, grid);
    for (double v : boxes.offsets) CHECK(v == 0.0);
}

TEST_CASE("oracle overlap scores are clamped and peak near the target") {
    SceneState scene = manual_scene({{Box{100.0, 60.0, 40.0, 40.0}, 0}});
    AnchorGrid grid = make_anchor_grid(28, 28, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_oracle_boxes(scene, grid);
    Heatmap map = make_oracle_iou(scene, boxes);
    for (double v : map.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    // Cell (5, 10) has anchor center (20 + 8*10, 20 + 8*5) = (100, 60).
    CHECK(map.at(5, 10) > 0.5);

    SceneState empty = scene;
    empty.objects.clear();
    CHECK_THROWS_AS(make_oracle_iou(empty, boxes), std::invalid_argument);
}
