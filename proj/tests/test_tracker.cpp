#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "dualtrack/features.hpp"
#include "dualtrack/sim.hpp"
#include "dualtrack/tracker.hpp"

using namespace dualtrack;

namespace {

SceneState manual_scene(std::vector<std::pair<Box, int>> objects, int channels = 16,
                        int frame_index = 0) {
    SceneState scene;
    scene.frame_size = 256;
    scene.target_index = 0;
    scene.frame_index = frame_index;
    scene.seed = 7;
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

FrameFeatures oracle_frame(const SceneState& scene, const TrackerConfig& cfg,
                           double feature_noise, double box_noise) {
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = feature_noise;
    FrameFeatures ff;
    ff.pyramid = synth_features(scene, fcfg);
    const int cells = scene.frame_size / fcfg.stride;
    const AnchorGrid grid = response_grid(cfg, cells, cells, fcfg.stride);
    ff.oracle_boxes = make_oracle_boxes(scene, grid, box_noise);
    ff.oracle_iou = make_oracle_iou(scene, *ff.oracle_boxes);
    return ff;
}

Heatmap random_map(std::mt19937_64& rng, int h, int w, int a) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Heatmap m = Heatmap::zeros(h, w, a);
    for (double& v : m.values) v = uni(rng);
    return m;
}

}  // namespace

TEST_CASE("response grid matches the correlation output and branch anchors") {
    TrackerConfig cfg;
    AnchorGrid grid = response_grid(cfg, 32, 32, 8.0);
    CHECK(grid.height == 28);
    CHECK(grid.width == 28);
    CHECK(grid.num_anchors() == 5);
    CHECK(grid.stride == 8.0);
    CHECK(grid.origin_offset == 20.0);

    cfg.accurate_branch = AccurateBranch::OFC1s;
    CHECK(response_grid(cfg, 32, 32, 8.0).num_anchors() == 1);
    cfg.accurate_branch = AccurateBranch::None;
    CHECK(response_grid(cfg, 32, 32, 8.0).num_anchors() == 1);
    CHECK_THROWS_AS(response_grid(cfg, 4, 4, 8.0), std::invalid_argument);
}

TEST_CASE("localization blends the two maps and finds the fused peak") {
    std::mt19937_64 rng(11);
    Heatmap robust = random_map(rng, 6, 7, 1);
    Heatmap accurate = random_map(rng, 6, 7, 3);

    LocalizeResult pure_r = localize(robust, accurate, 1.0);
    LocalizeResult pure_a = localize(robust, accurate, 0.0);
    LocalizeResult mix = localize(robust, accurate, 0.37);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 7; ++j)
            for (int a = 0; a < 3; ++a) {
                CHECK(pure_r.fused.at(i, j, a) == robust.at(i, j));
                CHECK(pure_a.fused.at(i, j, a) == accurate.at(i, j, a));
                const double want = 0.37 * robust.at(i, j) + 0.63 * accurate.at(i, j, a);
                CHECK(mix.fused.at(i, j, a) == doctest::Approx(want).epsilon(1e-12));
            }
}

TEST_CASE("a one-hot blend keeps the robust peak at mu 0.8") {
    Heatmap robust = Heatmap::zeros(2, 2, 1);
    robust.at(0, 1) = 1.0;
    Heatmap accurate = Heatmap::zeros(2, 2, 1);
    accurate.at(0, 0) = 1.0;

    LocalizeResult out = localize(robust, accurate, 0.8);
    CHECK(out.fused.at(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(out.fused.at(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(out.fused.at(1, 0) == 0.0);
    CHECK(out.fused.at(1, 1) == 0.0);
    CHECK(out.peak.i == 0);
    CHECK(out.peak.j == 1);
    CHECK(out.peak.value == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("localization validates its inputs") {
    Heatmap one = Heatmap::zeros(3, 3, 1);
    Heatmap multi = Heatmap::zeros(3, 3, 2);
    Heatmap other = Heatmap::zeros(3, 4, 1);
    CHECK_THROWS_AS(localize(multi, one, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(localize(one, other, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(localize(one, one, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(localize(one, one, -0.1), std::invalid_argument);
}

TEST_CASE("direct regression decodes the proposal at the peak") {
    AnchorGrid grid = make_anchor_grid(4, 4, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_zero_boxes(grid);

    Box plain = regress_direct(Peak{2, 3, 0, 0.0}, boxes);
    const Box anchor = grid.anchor_at(2, 3, 0);
    CHECK(plain.cx == anchor.cx);
    CHECK(plain.cy == anchor.cy);
    CHECK(plain.w == anchor.w);
    CHECK(plain.h == anchor.h);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-0.3, 0.3);
    for (double& v : boxes.offsets) v = uni(rng);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const size_t base = static_cast<size_t>(grid.linear_index(i, j, 0)) * 4;
            const Box want = apply_offsets(
                grid.anchor_at(i, j, 0), {boxes.offsets[base], boxes.offsets[base + 1],
                                          boxes.offsets[base + 2], boxes.offsets[base + 3]});
            const Box got = regress_direct(Peak{i, j, 0, 0.0}, boxes);
            CHECK(got.cx == want.cx);
            CHECK(got.cy == want.cy);
            CHECK(got.w == want.w);
            CHECK(got.h == want.h);
        }
    CHECK_THROWS_AS(regress_direct(Peak{4, 0, 0, 0.0}, boxes), std::out_of_range);
    CHECK_THROWS_AS(regress_direct(Peak{0, 0, 1, 0.0}, boxes), std::out_of_range);
}

TEST_CASE("voting averages a two-box neighborhood with hand-computed weights") {
    // Anchors at (10,10) and (12,10), both 4x4. Zero offsets keep them as
    // the candidate boxes; their IoU is 1/3, so the second candidate needs
    // its score to cancel the distance kernel for an effective 3:1 ratio.
    AnchorGrid grid = make_anchor_grid(1, 2, 2.0, {AnchorScale{4.0, 4.0}}, 10.0);
    DenseBoxes boxes = make_zero_boxes(grid);
    const Box b1 = grid.anchor_at(0, 0, 0);
    const Box b2 = grid.anchor_at(0, 1, 0);
    const double gap = 1.0 - iou(b1, b2);

    TrackerConfig cfg;
    Heatmap fused = Heatmap::zeros(1, 2, 1);
    fused.at(0, 0) = 3.0;
    fused.at(0, 1) = std::exp(gap * gap / cfg.vote_sigma);
    Heatmap overlap = Heatmap::zeros(1, 2, 1);
    overlap.values = {1.0, 1.0};

    VoteResult out = score_vote(boxes, overlap, fused, b1, cfg);
    CHECK_FALSE(out.fallback);
    CHECK(out.box.cx == doctest::Approx(10.5).epsilon(1e-9));
    CHECK(out.box.cy == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(out.box.w == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(out.box.h == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("voting over identical candidates returns that box exactly") {
    AnchorGrid grid = make_anchor_grid(2, 2, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_zero_boxes(grid);
    const Box target{30.0, 26.0, 50.0, 40.0};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const auto enc = encode_offsets(grid.anchor_at(i, j, 0), target);
            const size_t base = static_cast<size_t>(grid.linear_index(i, j, 0)) * 4;
            for (int k = 0; k < 4; ++k) boxes.offsets[base + k] = enc[k];
        }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.1, 1.0);
    Heatmap fused = Heatmap::zeros(2, 2, 1);
    Heatmap overlap = Heatmap::zeros(2, 2, 1);
    for (double& v : fused.values) v = uni(rng);
    for (double& v : overlap.values) v = uni(rng);

    TrackerConfig cfg;
    VoteResult out = score_vote(boxes, overlap, fused, target, cfg);
    CHECK_FALSE(out.fallback);
    CHECK(out.box.cx == doctest::Approx(target.cx).epsilon(1e-12));
    CHECK(out.box.cy == doctest::Approx(target.cy).epsilon(1e-12));
    CHECK(out.box.w == doctest::Approx(target.w).epsilon(1e-12));
    CHECK(out.box.h == doctest::Approx(target.h).epsilon(1e-12));
}

TEST_CASE("voting is invariant to positive scaling of the score map") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_real_distribution<double> off(-0.15, 0.15);
    for (int trial = 0; trial < 20; ++trial) {
        AnchorGrid grid = make_anchor_grid(3, 3, 8.0, default_anchor_scales(8.0, 1), 20.0);
        DenseBoxes boxes = make_zero_boxes(grid);
        for (double& v : boxes.offsets) v = off(rng);
        Heatmap fused = Heatmap::zeros(3, 3, 1);
        Heatmap overlap = Heatmap::zeros(3, 3, 1);
        for (double& v : fused.values) v = uni(rng);
        for (double& v : overlap.values) v = uni(rng);
        const Box b_star = regress_direct(Peak{1, 1, 0, 0.0}, boxes);

        TrackerConfig cfg;
        VoteResult base = score_vote(boxes, overlap, fused, b_star, cfg);
        Heatmap scaled = fused;
        for (double& v : scaled.values) v *= 7.0;
        VoteResult big = score_vote(boxes, overlap, scaled, b_star, cfg);
        CHECK(base.fallback == big.fallback);
        CHECK(big.box.cx == doctest::Approx(base.box.cx).epsilon(1e-12));
        CHECK(big.box.cy == doctest::Approx(base.box.cy).epsilon(1e-12));
        CHECK(big.box.w == doctest::Approx(base.box.w).epsilon(1e-12));
        CHECK(big.box.h == doctest::Approx(base.box.h).epsilon(1e-12));

        // Component-wise envelope of the contributing neighborhood.
        if (!base.fallback) {
            const std::vector<Box> decoded = decode_all(boxes);
            double lo_cx = 1e300, hi_cx = -1e300, lo_w = 1e300, hi_w = -1e300;
            for (const Box& b : decoded) {
                if (iou(b, b_star) <= cfg.vote_epsilon) continue;
                lo_cx = std::min(lo_cx, b.cx);
                hi_cx = std::max(hi_cx, b.cx);
                lo_w = std::min(lo_w, b.w);
                hi_w = std::max(hi_w, b.w);
            }
            CHECK(base.box.cx >= lo_cx - 1e-9);
            CHECK(base.box.cx <= hi_cx + 1e-9);
            CHECK(base.box.w >= lo_w - 1e-9);
            CHECK(base.box.w <= hi_w + 1e-9);
        }
    }
}

TEST_CASE("degenerate vote weights fall back to the peak box") {
    AnchorGrid grid = make_anchor_grid(2, 2, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_zero_boxes(grid);
    const Box b_star = grid.anchor_at(0, 0, 0);
    Heatmap overlap = Heatmap::zeros(2, 2, 1);
    for (double& v : overlap.values) v = 1.0;

    TrackerConfig cfg;
    Heatmap negative = Heatmap::zeros(2, 2, 1);
    for (double& v : negative.values) v = -0.5;
    VoteResult out = score_vote(boxes, overlap, negative, b_star, cfg);
    CHECK(out.fallback);
    CHECK(out.box.cx == b_star.cx);
    CHECK(out.box.w == b_star.w);

    // Negative overlap predictions clamp to zero weight as well.
    Heatmap fused = Heatmap::zeros(2, 2, 1);
    for (double& v : fused.values) v = 1.0;
    for (double& v : overlap.values) v = -1.0;
    VoteResult out2 = score_vote(boxes, overlap, fused, b_star, cfg);
    CHECK(out2.fallback);

    Heatmap wrong = Heatmap::zeros(3, 3, 1);
    CHECK_THROWS_AS(score_vote(boxes, overlap, wrong, b_star, cfg), std::invalid_argument);
}

TEST_CASE("postprocess reproduces the penalty formula") {
    AnchorGrid grid = make_anchor_grid(4, 4, 8.0, default_anchor_scales(8.0, 5), 20.0);
    DenseBoxes boxes = make_zero_boxes(grid);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> off(-0.2, 0.2);
    for (double& v : boxes.offsets) v = off(rng);
    Heatmap fused = random_map(rng, 4, 4, 5);
    const Box prev{44.0, 36.0, 48.0, 40.0};

    TrackerConfig cfg;
    PostprocessResult out = postprocess(fused, boxes, prev, cfg);

    const auto sz = [](const Box& b) {
        const double pad = (b.w + b.h) / 2.0;
        return std::sqrt((b.w + pad) * (b.h + pad));
    };
    const std::vector<Box> decoded = decode_all(boxes);
    for (size_t idx = 0; idx < decoded.size(); ++idx) {
        const Box& b = decoded[idx];
        const double r = (prev.w / prev.h) / (b.w / b.h);
        const double s = sz(b) / sz(prev);
        const double want =
            std::exp(-(std::max(r, 1.0 / r) * std::max(s, 1.0 / s) - 1.0) * cfg.penalty_k);
        CHECK(out.penalty.values[idx] == doctest::Approx(want).epsilon(1e-12));
    }
    // A doubled change factor costs exp(-k) at the default k = 0.04.
    CHECK(std::exp(-(2.0 * 1.0 - 1.0) * cfg.penalty_k) ==
          doctest::Approx(0.9607894391523232).epsilon(1e-12));
}

TEST_CASE("no penalty and no window leaves the score map unchanged") {
    AnchorGrid grid = make_anchor_grid(5, 5, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_zero_boxes(grid);
    std::mt19937_64 rng(29);
    for (double& v : boxes.offsets) v = 0.1;
    Heatmap fused = random_map(rng, 5, 5, 1);

    TrackerConfig cfg;
    cfg.penalty_k = 0.0;
    cfg.window_influence = 0.0;
    PostprocessResult out = postprocess(fused, boxes, Box{40.0, 40.0, 30.0, 20.0}, cfg);
    for (size_t idx = 0; idx < fused.values.size(); ++idx) {
        CHECK(out.penalty.values[idx] == 1.0);
        CHECK(out.windowed.values[idx] == fused.values[idx]);
    }

    // Candidates matching the previous shape are never penalized.
    cfg.penalty_k = 0.04;
    DenseBoxes same = make_zero_boxes(grid);
    PostprocessResult out2 = postprocess(fused, same, grid.anchor_at(2, 2, 0), cfg);
    for (double v : out2.penalty.values) CHECK(v == 1.0);
}

TEST_CASE("a pure window peaks at the previous target position") {
    AnchorGrid grid = make_anchor_grid(28, 28, 8.0, default_anchor_scales(8.0, 1), 20.0);
    DenseBoxes boxes = make_zero_boxes(grid);
    Heatmap fused = Heatmap::zeros(28, 28, 1);

    TrackerConfig cfg;
    cfg.window_influence = 1.0;
    // Previous box centered exactly on response cell (5, 10).
    const Box prev{20.0 + 8.0 * 10.0, 20.0 + 8.0 * 5.0, 64.0, 64.0};
    PostprocessResult out = postprocess(fused, boxes, prev, cfg);
    const Peak peak = argmax_peak(out.windowed);
    CHECK(peak.i == 5);
    CHECK(peak.j == 10);
    CHECK(peak.value == doctest::Approx(1.0).epsilon(1e-12));
    // Far corner sits outside the window support.
    CHECK(out.windowed.at(27, 27) == 0.0);
}

TEST_CASE("initialization builds a five-entry protected support set") {
    SceneState scene = manual_scene({{Box{128.0, 128.0, 40.0, 40.0}, 0}});
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(scene, fcfg);

    TrackerConfig cfg;
    TrackerState st = initialize(pyr, scene.objects[0].box, cfg);
    REQUIRE(st.support.entries.size() == 5);
    for (const auto& e : st.support.entries) CHECK(e.initial);
    CHECK(st.filter.weights.channels == 16);
    CHECK(st.filter.weights.height == 5);
    CHECK(st.filter.weights.width == 5);
    CHECK(st.template_kernel.height == 5);
    CHECK(st.template_energy > 0.0);
    CHECK(st.frame_index == 0);
    CHECK(st.current_box.cx == 128.0);
    CHECK(st.initial_peak > 0.5);
    CHECK(st.initial_peak < 1.5);
    // 40 px targets at stride 8 floor the label width at one cell.
    CHECK(st.label_sigma == 1.0);
    CHECK(st.layer_weights.alpha == std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});

    TrackerConfig wide = cfg;
    wide.labels.gaussian_sigma = 2.5;
    CHECK(initialize(pyr, scene.objects[0].box, wide).label_sigma == 2.5);

    TrackerState again = initialize(pyr, scene.objects[0].box, cfg);
    CHECK(again.filter.weights.values == st.filter.weights.values);
    CHECK(again.initial_peak == st.initial_peak);

    TrackerConfig no_robust = cfg;
    no_robust.robust_branch = RobustBranch::None;
    CHECK(initialize(pyr, scene.objects[0].box, no_robust).support.entries.empty());
}

TEST_CASE("initialization validates geometry and weights") {
    SceneState scene = manual_scene({{Box{128.0, 128.0, 40.0, 40.0}, 0}});
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(scene, fcfg);

    TrackerConfig cfg;
    CHECK_THROWS_AS(initialize(pyr, Box{300.0, 128.0, 40.0, 40.0}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(initialize(pyr, Box{-5.0, 128.0, 40.0, 40.0}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(initialize(pyr, Box{128.0, 128.0, 0.0, 40.0}, cfg), std::invalid_argument);

    TrackerConfig bad = cfg;
    bad.alpha = {0.5, 0.5};
    CHECK_THROWS_AS(initialize(pyr, scene.objects[0].box, bad), std::invalid_argument);
    bad = cfg;
    bad.mu = 1.5;
    CHECK_THROWS_AS(initialize(pyr, scene.objects[0].box, bad), std::invalid_argument);
    bad = cfg;
    bad.robust_branch = RobustBranch::None;
    bad.accurate_branch = AccurateBranch::None;
    CHECK_THROWS_AS(initialize(pyr, scene.objects[0].box, bad), std::invalid_argument);

    SceneState small = manual_scene({{Box{60.0, 60.0, 30.0, 30.0}, 0}});
    small.frame_size = 128;
    FeaturePyramid tiny = synth_features(small, fcfg);
    CHECK_THROWS_AS(initialize(tiny, small.objects[0].box, cfg), std::invalid_argument);
}

TEST_CASE("a stationary target is tracked above 0.9 overlap on every frame") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    TrackerConfig cfg;
    SceneState first = manual_scene({{gt, 0}});
    FeatureProviderConfig fcfg;
    FeaturePyramid pyr0 = synth_features(first, fcfg);
    TrackerState st = initialize(pyr0, gt, cfg);

    for (int f = 1; f <= 30; ++f) {
        SceneState scene = manual_scene({{gt, 0}}, 16, f);
        FrameFeatures ff = oracle_frame(scene, cfg, 0.02, 0.0);
        StepResult out = step(st, ff, cfg);
        st = out.state;
        CHECK_FALSE(out.result.lost);
        CHECK(iou(out.result.box, gt) > 0.9);
        CHECK(st.frame_index == f);
    }
    // One pushed frame per tracked frame on top of the initial entries.
    CHECK(st.support.entries.size() == 35);
}

TEST_CASE("noisy proposals still land near the stationary target") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    TrackerConfig cfg;
    FeatureProviderConfig fcfg;
    FeaturePyramid pyr0 = synth_features(manual_scene({{gt, 0}}), fcfg);
    TrackerState st = initialize(pyr0, gt, cfg);

    double mean = 0.0;
    double worst = 1.0;
    for (int f = 1; f <= 30; ++f) {
        SceneState scene = manual_scene({{gt, 0}}, 16, f);
        FrameFeatures ff = oracle_frame(scene, cfg, 0.02, 0.02);
        StepResult out = step(st, ff, cfg);
        st = out.state;
        const double v = iou(out.result.box, gt);
        mean += v;
        worst = std::min(worst, v);
    }
    CHECK(mean / 30.0 > 0.93);
    CHECK(worst > 0.8);
}

TEST_CASE("tracking steps are deterministic") {
    const Box gt{120.0, 140.0, 44.0, 36.0};
    TrackerConfig cfg;
    SceneState first = manual_scene({{gt, 2}});
    FeatureProviderConfig fcfg;
    FeaturePyramid pyr0 = synth_features(first, fcfg);
    TrackerState st = initialize(pyr0, gt, cfg);

    SceneState scene = manual_scene({{gt, 2}}, 16, 1);
    FrameFeatures ff = oracle_frame(scene, cfg, 0.02, 0.02);
    StepResult a = step(st, ff, cfg);
    StepResult b = step(st, ff, cfg);
    CHECK(a.result.box.cx == b.result.box.cx);
    CHECK(a.result.box.cy == b.result.box.cy);
    CHECK(a.result.box.w == b.result.box.w);
    CHECK(a.result.box.h == b.result.box.h);
    CHECK(a.result.fused.values == b.result.fused.values);
    CHECK(a.state.filter.weights.values == b.state.filter.weights.values);
}

TEST_CASE("a vanished target is declared lost and the state freezes") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    TrackerConfig cfg;
    SceneState first = manual_scene({{gt, 0}});
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = 0.0;
    FeaturePyramid pyr0 = synth_features(first, fcfg);
    TrackerState st = initialize(pyr0, gt, cfg);

    SceneState empty = manual_scene({}, 16, 1);
    FrameFeatures blank;
    blank.pyramid = synth_features(empty, fcfg);
    StepResult out = step(st, blank, cfg);
    CHECK(out.result.lost);
    CHECK(out.state.lost);
    CHECK(out.state.frame_index == 1);
    CHECK(out.result.box.cx == gt.cx);
    CHECK(out.result.box.w == gt.w);
    CHECK(out.state.support.entries.size() == 5);
    CHECK(out.state.filter.weights.values == st.filter.weights.values);
    CHECK(out.result.fused.values.empty());

    // The target coming back is picked up again.
    SceneState back = manual_scene({{gt, 0}}, 16, 2);
    FrameFeatures ff = oracle_frame(back, cfg, 0.0, 0.0);
    StepResult rec = step(out.state, ff, cfg);
    CHECK_FALSE(rec.result.lost);
    CHECK(iou(rec.result.box, gt) > 0.8);
}

TEST_CASE("fusion at mu 0.8 resists an impostor that fools the template") {
    // Forge a state whose online filter knows the drifted appearance
    // (channel 1) while the fixed template still matches the original
    // appearance (channel 0). An impostor with the original appearance
    // then wins the accurate map but loses the fused one.
    const Box gt{100.0, 100.0, 40.0, 40.0};
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = 0.0;
    TrackerConfig cfg;
    cfg.window_influence = 0.0;

    FeaturePyramid drifted = synth_features(manual_scene({{gt, 1}}), fcfg);
    FeaturePyramid original = synth_features(manual_scene({{gt, 0}}), fcfg);
    TrackerState st = initialize(drifted, gt, cfg);
    TrackerState donor = initialize(original, gt, cfg);
    st.template_kernel = donor.template_kernel;
    st.template_energy = donor.template_energy;

    const Box impostor{180.0, 100.0, 40.0, 40.0};
    SceneState scene = manual_scene({{gt, 1}, {impostor, 0}}, 16, 1);
    FrameFeatures ff = oracle_frame(scene, cfg, 0.0, 0.0);

    StepResult fused_run = step(st, ff, cfg);
    CHECK(std::abs(fused_run.result.box.cx - gt.cx) < 2.0);
    CHECK(iou(fused_run.result.box, gt) > 0.8);

    TrackerConfig accurate_only = cfg;
    accurate_only.mu = 0.0;
    StepResult acc_run = step(st, ff, accurate_only);
    CHECK(std::abs(acc_run.result.box.cx - impostor.cx) < 2.0);
    CHECK(iou(acc_run.result.box, impostor) > 0.8);
}

TEST_CASE("image mode refines the peak without proposals") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    TrackerConfig cfg;
    cfg.accurate_branch = AccurateBranch::OFC1s;
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = 0.0;
    FeaturePyramid pyr0 = synth_features(manual_scene({{gt, 0}}), fcfg);
    TrackerState st = initialize(pyr0, gt, cfg);

    for (int f = 1; f <= 5; ++f) {
        FrameFeatures ff;
        ff.pyramid = synth_features(manual_scene({{gt, 0}}, 16, f), fcfg);
        StepResult out = step(st, ff, cfg);
        st = out.state;
        CHECK_FALSE(out.result.lost);
        CHECK(std::abs(out.result.box.cx - gt.cx) < 4.0);
        CHECK(std::abs(out.result.box.cy - gt.cy) < 4.0);
        CHECK(iou(out.result.box, gt) > 0.7);
    }
}

TEST_CASE("step validates its inputs against the configured grid") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    TrackerConfig cfg;
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = 0.0;
    SceneState scene = manual_scene({{gt, 0}});
    FeaturePyramid pyr = synth_features(scene, fcfg);
    TrackerState st = initialize(pyr, gt, cfg);

    FrameFeatures wrong_grid;
    wrong_grid.pyramid = pyr;
    wrong_grid.oracle_boxes =
        make_oracle_boxes(scene, make_anchor_grid(28, 28, 8.0, default_anchor_scales(8.0, 5), 0.0));
    CHECK_THROWS_AS(step(st, wrong_grid, cfg), std::invalid_argument);

    FrameFeatures fewer_layers;
    FeatureProviderConfig two = fcfg;
    two.layer_count = 2;
    fewer_layers.pyramid = synth_features(scene, two);
    CHECK_THROWS_AS(step(st, fewer_layers, cfg), std::invalid_argument);
}

TEST_CASE("branch variants produce distinct online filters") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    FeatureProviderConfig fcfg;
    fcfg.noise_sigma = 0.0;
    FeaturePyramid pyr = synth_features(manual_scene({{gt, 0}}), fcfg);

    const auto init_with = [&](RobustBranch b) {
        TrackerConfig cfg;
        cfg.robust_branch = b;
        return initialize(pyr, gt, cfg);
    };
    TrackerState onr = init_with(RobustBranch::ONR);
    TrackerState onc1 = init_with(RobustBranch::ONC1s);
    TrackerState onc5 = init_with(RobustBranch::ONC5s);

    const auto max_diff = [](const TrackerState& a, const TrackerState& b) {
        double d = 0.0;
        for (size_t k = 0; k < a.filter.weights.values.size(); ++k)
            d = std::max(d, std::abs(a.filter.weights.values[k] - b.filter.weights.values[k]));
        return d;
    };
    CHECK(max_diff(onr, onc1) > 1e-6);
    CHECK(max_diff(onr, onc5) > 1e-6);
    CHECK(max_diff(onc1, onc5) > 1e-6);
}

TEST_CASE("disabled branches collapse the fusion weight") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    FeatureProviderConfig fcfg;
    SceneState scene0 = manual_scene({{gt, 0}});
    FeaturePyramid pyr0 = synth_features(scene0, fcfg);
    SceneState scene1 = manual_scene({{gt, 0}}, 16, 1);

    TrackerConfig robust_only;
    robust_only.accurate_branch = AccurateBranch::None;
    TrackerState st_r = initialize(pyr0, gt, robust_only);
    FrameFeatures ff = oracle_frame(scene1, robust_only, 0.02, 0.02);
    StepResult r = step(st_r, ff, robust_only);
    CHECK(r.result.fused.values == r.result.robust.values);

    TrackerConfig accurate_only;
    accurate_only.robust_branch = RobustBranch::None;
    accurate_only.accurate_branch = AccurateBranch::OFC1s;
    TrackerState st_a = initialize(pyr0, gt, accurate_only);
    FrameFeatures fa = oracle_frame(scene1, accurate_only, 0.02, 0.02);
    StepResult a = step(st_a, fa, accurate_only);
    CHECK(a.result.fused.values == a.result.accurate.values);
    CHECK(a.state.support.entries.empty());
}

TEST_CASE("the offline regression variants coincide at inference") {
    const Box gt{128.0, 128.0, 40.0, 40.0};
    FeatureProviderConfig fcfg;
    FeaturePyramid pyr0 = synth_features(manual_scene({{gt, 0}}), fcfg);

    TrackerConfig c1;
    c1.accurate_branch = AccurateBranch::OFC1s;
    TrackerConfig cr;
    cr.accurate_branch = AccurateBranch::OFR;

    TrackerState s1 = initialize(pyr0, gt, c1);
    TrackerState sr = initialize(pyr0, gt, cr);
    SceneState scene1 = manual_scene({{gt, 0}}, 16, 1);
    FrameFeatures f1 = oracle_frame(scene1, c1, 0.02, 0.02);
    FrameFeatures fr = oracle_frame(scene1, cr, 0.02, 0.02);
    StepResult r1 = step(s1, f1, c1);
    StepResult rr = step(sr, fr, cr);
    CHECK(r1.result.box.cx == rr.result.box.cx);
    CHECK(r1.result.box.w == rr.result.box.w);
    CHECK(r1.result.accurate.values == rr.result.accurate.values);
}
