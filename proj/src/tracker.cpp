#include "dualtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dualtrack/features.hpp"

namespace dualtrack {

namespace {

constexpr int kKernelSize = 5;
constexpr double kOriginCells = 2.5;  // response cell 0 covers feature cells [0, 5)
constexpr double kPi = 3.14159265358979323846;

void validate_config(const TrackerConfig& cfg) {
    if (cfg.mu < 0.0 || cfg.mu > 1.0) throw std::invalid_argument("tracker: mu outside [0,1]");
    if (cfg.vote_epsilon <= 0.0 || cfg.vote_epsilon >= 1.0)
        throw std::invalid_argument("tracker: vote_epsilon outside (0,1)");
    if (cfg.vote_sigma <= 0.0) throw std::invalid_argument("tracker: vote_sigma must be > 0");
    if (cfg.window_influence < 0.0 || cfg.window_influence > 1.0)
        throw std::invalid_argument("tracker: window_influence outside [0,1]");
    if (cfg.smooth_lr < 0.0 || cfg.smooth_lr > 1.0)
        throw std::invalid_argument("tracker: smooth_lr outside [0,1]");
    if (cfg.penalty_k < 0.0) throw std::invalid_argument("tracker: negative penalty_k");
    if (cfg.lost_ratio < 0.0) throw std::invalid_argument("tracker: negative lost_ratio");
    if (cfg.distractor_ratio <= 0.0)
        throw std::invalid_argument("tracker: distractor_ratio must be > 0");
    if (cfg.robust_branch == RobustBranch::None && cfg.accurate_branch == AccurateBranch::None)
        throw std::invalid_argument("tracker: both branches disabled");
    if (cfg.search_cells < kKernelSize + 4)
        throw std::invalid_argument("tracker: search_cells too small");
}

std::vector<double> resolve_weights(const std::vector<double>& w, size_t layers,
                                    const char* name) {
    if (w.empty()) return std::vector<double>(layers, 1.0 / static_cast<double>(layers));
    if (w.size() != layers) throw std::invalid_argument(std::string("tracker: ") + name +
                                                        " size does not match layer count");
    return w;
}

double target_radius_cells(const Box& box, double stride) {
    return std::max(1.0, 0.5 * std::sqrt(box.w * box.h) / stride);
}

// Pseudo-supervision for the online filter, built on the response grid
// from a (predicted or groundtruth) target box. ONR uses a Gaussian score
// map; ONC uses binary anchor assignment collapsed over anchors.
ResidualParams build_pseudo_params(const Box& box, int rh, int rw, double stride,
                                   RobustBranch branch, const LabelConfig& lcfg, double sigma) {
    const double origin = kOriginCells * stride;
    const double cyc = (box.cy - origin) / stride;
    const double cxc = (box.cx - origin) / stride;
    LabelMap pseudo;
    if (branch == RobustBranch::ONR) {
        pseudo = online_pseudo_label(rh, rw, cyc, cxc, sigma);
    } else {
        const int anchors = branch == RobustBranch::ONC5s ? 5 : 1;
        const AnchorGrid grid =
            make_anchor_grid(rh, rw, stride, default_anchor_scales(stride, anchors), origin);
        const LabelMap full = assign_bernoulli_iou(grid, box, lcfg);
        pseudo = LabelMap::zeros(rh, rw, 1);
        for (int i = 0; i < rh; ++i)
            for (int j = 0; j < rw; ++j) {
                double collapsed = 0.0;
                bool ignored = false;
                for (int a = 0; a < anchors; ++a) {
                    const double v = full.values[(static_cast<size_t>(i) * rw + j) * anchors + a];
                    if (v == 1.0) collapsed = 1.0;
                    if (v == -1.0) ignored = true;
                }
                if (collapsed != 1.0 && ignored) collapsed = -1.0;
                pseudo.values[static_cast<size_t>(i) * rw + j] = collapsed;
            }
    }
    return make_residual_params(pseudo, cyc, cxc, target_radius_cells(box, stride));
}

FeatureMap hflip(const FeatureMap& f) {
    FeatureMap out = FeatureMap::zeros(f.channels, f.height, f.width);
    for (int c = 0; c < f.channels; ++c)
        for (int i = 0; i < f.height; ++i)
            for (int j = 0; j < f.width; ++j) out.at(c, i, j) = f.at(c, i, f.width - 1 - j);
    return out;
}

FeatureMap shift_x(const FeatureMap& f, int dx) {
    FeatureMap out = FeatureMap::zeros(f.channels, f.height, f.width);
    for (int c = 0; c < f.channels; ++c)
        for (int i = 0; i < f.height; ++i)
            for (int j = 0; j < f.width; ++j) {
                const int src = j - dx;
                if (src >= 0 && src < f.width) out.at(c, i, j) = f.at(c, i, src);
            }
    return out;
}

// Upscale by ~1.05 and center-crop back to the original grid. Returns the
// transformed features plus the box mapped through the same warp.
std::pair<FeatureMap, Box> scale_up(const FeatureMap& f, const Box& box, double stride) {
    const int out_h = static_cast<int>(std::lround(f.height * 1.05));
    const int out_w = static_cast<int>(std::lround(f.width * 1.05));
    FeatureMap big = bilinear_resize(f, out_h, out_w);
    const int crop_i = (out_h - f.height) / 2;
    const int crop_j = (out_w - f.width) / 2;
    FeatureMap out = FeatureMap::zeros(f.channels, f.height, f.width);
    for (int c = 0; c < f.channels; ++c)
        for (int i = 0; i < f.height; ++i)
            for (int j = 0; j < f.width; ++j) out.at(c, i, j) = big.at(c, i + crop_i, j + crop_j);
    // Align-corners scale factor of the resize, then the crop translation.
    const double fy = f.height > 1 ? static_cast<double>(out_h - 1) / (f.height - 1) : 1.0;
    const double fx = f.width > 1 ? static_cast<double>(out_w - 1) / (f.width - 1) : 1.0;
    Box mapped;
    mapped.cx = ((box.cx / stride - 0.5) * fx - crop_j + 0.5) * stride;
    mapped.cy = ((box.cy / stride - 0.5) * fy - crop_i + 0.5) * stride;
    mapped.w = box.w * fx;
    mapped.h = box.h * fy;
    return {std::move(out), mapped};
}

double kernel_energy(const FeatureMap& kernel) {
    double e = 0.0;
    for (double v : kernel.values) e += v * v;
    return e > 1e-12 ? e : 1.0;
}

Heatmap robust_response(const FeatureMap& fused_features, const OnlineFilter& filter) {
    return upchannel_xcorr(fused_features, filter.weights);
}

// Layer-aggregated template correlation, normalized so a perfect match
// scores about 1.
Heatmap accurate_response(const FeaturePyramid& pyr, const FeatureMap& kernel, double energy,
                          const std::vector<double>& alpha) {
    std::vector<Heatmap> maps;
    maps.reserve(pyr.layers.size());
    for (const auto& layer : pyr.layers) {
        Heatmap m = upchannel_xcorr(layer, kernel);
        for (double& v : m.values) v /= energy;
        maps.push_back(std::move(m));
    }
    return aggregate_layers(maps, alpha);
}

// Shape affinity of each anchor against the current box estimate: overlap
// of the two extents when centered together.
double shape_affinity(const AnchorScale& scale, const Box& box) {
    const double iw = std::min(scale.w, box.w);
    const double ih = std::min(scale.h, box.h);
    const double inter = iw * ih;
    return inter / (scale.w * scale.h + box.w * box.h - inter);
}

Heatmap collapse_anchors(const Heatmap& map) {
    if (map.anchors == 1) return map;
    Heatmap out = Heatmap::zeros(map.height, map.width, 1);
    for (int i = 0; i < map.height; ++i)
        for (int j = 0; j < map.width; ++j) {
            double best = map.at(i, j, 0);
            for (int a = 1; a < map.anchors; ++a) best = std::max(best, map.at(i, j, a));
            out.at(i, j) = best;
        }
    return out;
}

// Sub-cell proposals when no oracle boxes are supplied: previous-size
// anchors everywhere, plus a quadratic-fit center refinement at the peak.
DenseBoxes image_mode_boxes(const Heatmap& fused, const AnchorGrid& grid, const Peak& peak) {
    DenseBoxes boxes = make_zero_boxes(grid);
    const Heatmap flat = collapse_anchors(fused);
    const auto [di, dj] = quadratic_peak_offset(flat, peak.i, peak.j);
    const Box anchor = grid.anchor_at(peak.i, peak.j, peak.a);
    const size_t idx = static_cast<size_t>(grid.linear_index(peak.i, peak.j, peak.a)) * 4;
    boxes.offsets[idx + 0] = dj * grid.stride / anchor.w;
    boxes.offsets[idx + 1] = di * grid.stride / anchor.h;
    return boxes;
}

// Overlap-prediction stand-in: share of the positive fused score mass
// falling inside each candidate box.
IoUMap image_mode_iou(const Heatmap& fused, const DenseBoxes& boxes) {
    const Heatmap flat = collapse_anchors(fused);
    const AnchorGrid& grid = boxes.grid;
    double total = 0.0;
    for (double v : flat.values) total += std::max(0.0, v);
    IoUMap out = Heatmap::zeros(grid.height, grid.width, grid.num_anchors());
    if (total <= 0.0) return out;
    const std::vector<Box> decoded = decode_all(boxes);
    for (int i = 0; i < grid.height; ++i)
        for (int j = 0; j < grid.width; ++j)
            for (int a = 0; a < grid.num_anchors(); ++a) {
                const Box& b = decoded[boxes.grid.linear_index(i, j, a)];
                const int i0 = std::max(
                    0, static_cast<int>(std::ceil((b.top() - grid.origin_offset) / grid.stride)));
                const int i1 = std::min(
                    grid.height - 1,
                    static_cast<int>(std::floor((b.bottom() - grid.origin_offset) / grid.stride)));
                const int j0 = std::max(
                    0, static_cast<int>(std::ceil((b.left() - grid.origin_offset) / grid.stride)));
                const int j1 = std::min(
                    grid.width - 1,
                    static_cast<int>(std::floor((b.right() - grid.origin_offset) / grid.stride)));
                double mass = 0.0;
                for (int ii = i0; ii <= i1; ++ii)
                    for (int jj = j0; jj <= j1; ++jj) mass += std::max(0.0, flat.at(ii, jj));
                out.at(i, j, a) = std::clamp(mass / total, 0.0, 1.0);
            }
    return out;
}

double hann_at(double k, int n) {
    if (n <= 1) return 1.0;
    if (k < 0.0 || k > n - 1) return 0.0;
    return 0.5 - 0.5 * std::cos(2.0 * kPi * k / (n - 1));
}

}  // namespace

AnchorGrid response_grid(const TrackerConfig& cfg, int feature_cells_h, int feature_cells_w,
                         double stride) {
    const int rh = feature_cells_h - (kKernelSize - 1);
    const int rw = feature_cells_w - (kKernelSize - 1);
    if (rh < 1 || rw < 1) throw std::invalid_argument("response_grid: feature grid too small");
    const int anchors = cfg.accurate_branch == AccurateBranch::OFC5s ? 5 : 1;
    return make_anchor_grid(rh, rw, stride, default_anchor_scales(stride, anchors),
                            kOriginCells * stride);
}

TrackerState initialize(const FeaturePyramid& first_frame, const Box& gt,
                        const TrackerConfig& cfg) {
    validate_config(cfg);
    validate_pyramid(first_frame);
    const FeatureMap& l0 = first_frame.layers[0];
    if (l0.height != cfg.search_cells || l0.width != cfg.search_cells)
        throw std::invalid_argument("initialize: feature grid does not match search_cells");
    const double stride = first_frame.stride;
    const double extent = l0.width * stride;
    if (!gt.valid() || gt.cx < 0.0 || gt.cx > extent || gt.cy < 0.0 || gt.cy > extent)
        throw std::invalid_argument("initialize: box outside feature extent");

    TrackerState st;
    st.layer_weights.alpha = resolve_weights(cfg.alpha, first_frame.layers.size(), "alpha");
    st.layer_weights.beta = resolve_weights(cfg.beta, first_frame.layers.size(), "beta");
    st.label_sigma = cfg.labels.gaussian_sigma > 0.0
                         ? cfg.labels.gaussian_sigma
                         : std::max(1.0, std::min(gt.w, gt.h) / stride / 8.0);
    st.current_box = gt;
    st.frame_index = 0;
    st.support.capacity = cfg.learner.capacity;

    const FeatureMap fused = fuse_features(first_frame, st.layer_weights.beta);
    st.template_kernel = extract_template(fused, gt, stride, kKernelSize);
    st.template_energy = kernel_energy(st.template_kernel);
    st.filter.weights = st.template_kernel;

    if (cfg.robust_branch != RobustBranch::None) {
        const int rh = l0.height - (kKernelSize - 1);
        const int rw = l0.width - (kKernelSize - 1);
        std::vector<std::pair<FeatureMap, Box>> entries;
        entries.emplace_back(fused, gt);
        Box mirrored = gt;
        mirrored.cx = extent - gt.cx;
        entries.emplace_back(hflip(fused), mirrored);
        Box shifted = gt;
        shifted.cx = gt.cx + 4.0 * stride;
        entries.emplace_back(shift_x(fused, 4), shifted);
        shifted.cx = gt.cx - 4.0 * stride;
        entries.emplace_back(shift_x(fused, -4), shifted);
        entries.push_back(scale_up(fused, gt, stride));

        for (auto& [feat, box] : entries) {
            ResidualParams params = build_pseudo_params(box, rh, rw, stride, cfg.robust_branch,
                                                        cfg.labels, st.label_sigma);
            support_push(st.support, std::move(feat), std::move(params), 1.0, true);
        }
        st.filter = optimize(st.filter, st.support, cfg.learner.init_iterations, 1.0).filter;
    }
    st.initial_peak = argmax_peak(robust_response(fused, st.filter)).value;
    return st;
}

LocalizeResult localize(const Heatmap& robust, const Heatmap& accurate, double mu) {
    if (robust.anchors != 1)
        throw std::invalid_argument("localize: robust map must have a single anchor");
    if (robust.height != accurate.height || robust.width != accurate.width)
        throw std::invalid_argument("localize: map shapes differ");
    if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("localize: mu outside [0,1]");
    LocalizeResult out;
    out.fused = Heatmap::zeros(accurate.height, accurate.width, accurate.anchors);
    for (int i = 0; i < accurate.height; ++i)
        for (int j = 0; j < accurate.width; ++j)
            for (int a = 0; a < accurate.anchors; ++a)
                out.fused.at(i, j, a) = mu * robust.at(i, j) + (1.0 - mu) * accurate.at(i, j, a);
    out.peak = argmax_peak(out.fused);
    return out;
}

Box regress_direct(const Peak& peak, const DenseBoxes& boxes) {
    const AnchorGrid& grid = boxes.grid;
    if (peak.i < 0 || peak.i >= grid.height || peak.j < 0 || peak.j >= grid.width || peak.a < 0 ||
        peak.a >= grid.num_anchors())
        throw std::out_of_range("regress_direct: peak outside the grid");
    const size_t idx = static_cast<size_t>(grid.linear_index(peak.i, peak.j, peak.a)) * 4;
    return apply_offsets(grid.anchor_at(peak.i, peak.j, peak.a),
                         {boxes.offsets[idx], boxes.offsets[idx + 1], boxes.offsets[idx + 2],
                          boxes.offsets[idx + 3]});
}

VoteResult score_vote(const DenseBoxes& boxes, const IoUMap& iou_map, const Heatmap& fused,
                      const Box& b_star, const TrackerConfig& cfg) {
    const size_t count = boxes.grid.count();
    if (fused.values.size() != count || iou_map.values.size() != count)
        throw std::invalid_argument("score_vote: map sizes do not match the grid");
    const std::vector<Box> decoded = decode_all(boxes);
    double den = 0.0;
    double num_cx = 0.0, num_cy = 0.0, num_w = 0.0, num_h = 0.0;
    for (size_t idx = 0; idx < count; ++idx) {
        const double overlap = iou(decoded[idx], b_star);
        if (overlap <= cfg.vote_epsilon) continue;
        const double gap = 1.0 - overlap;
        const double w = std::max(0.0, fused.values[idx]) *
                         std::exp(-gap * gap / cfg.vote_sigma) *
                         std::max(0.0, iou_map.values[idx]);
        den += w;
        num_cx += w * decoded[idx].cx;
        num_cy += w * decoded[idx].cy;
        num_w += w * decoded[idx].w;
        num_h += w * decoded[idx].h;
    }
    if (den <= 1e-12) return {b_star, true};
    return {Box{num_cx / den, num_cy / den, num_w / den, num_h / den}, false};
}

PostprocessResult postprocess(const Heatmap& fused, const DenseBoxes& boxes, const Box& prev_box,
                              const TrackerConfig& cfg) {
    const size_t count = boxes.grid.count();
    if (fused.values.size() != count)
        throw std::invalid_argument("postprocess: map size does not match the grid");
    if (!prev_box.valid()) throw std::invalid_argument("postprocess: invalid previous box");
    const std::vector<Box> decoded = decode_all(boxes);

    const auto padded_size = [](const Box& b) {
        const double pad = (b.w + b.h) / 2.0;
        return std::sqrt((b.w + pad) * (b.h + pad));
    };
    const double prev_ratio = prev_box.w / prev_box.h;
    const double prev_sz = padded_size(prev_box);

    PostprocessResult out;
    out.penalty = Heatmap::zeros(fused.height, fused.width, fused.anchors);
    out.windowed = Heatmap::zeros(fused.height, fused.width, fused.anchors);

    const double origin = boxes.grid.origin_offset;
    const double stride = boxes.grid.stride;
    const double pi_cell = (prev_box.cy - origin) / stride;
    const double pj_cell = (prev_box.cx - origin) / stride;

    for (int i = 0; i < fused.height; ++i)
        for (int j = 0; j < fused.width; ++j) {
            // Position prior: Hann window centered on the previous target.
            const double wnd =
                hann_at(i - pi_cell + (fused.height - 1) / 2.0, fused.height) *
                hann_at(j - pj_cell + (fused.width - 1) / 2.0, fused.width);
            for (int a = 0; a < fused.anchors; ++a) {
                const size_t idx =
                    static_cast<size_t>(boxes.grid.linear_index(i, j, a));
                const Box& b = decoded[idx];
                const double r = prev_ratio / (b.w / b.h);
                const double s = padded_size(b) / prev_sz;
                const double pen = std::exp(
                    -(std::max(r, 1.0 / r) * std::max(s, 1.0 / s) - 1.0) * cfg.penalty_k);
                out.penalty.values[idx] = pen;
                out.windowed.values[idx] = pen * fused.values[idx] * (1.0 - cfg.window_influence) +
                                           wnd * cfg.window_influence;
            }
        }
    return out;
}

StepResult step(const TrackerState& state, const FrameFeatures& features,
                const TrackerConfig& cfg) {
    validate_config(cfg);
    validate_pyramid(features.pyramid);
    if (features.pyramid.layers.size() != state.layer_weights.beta.size())
        throw std::invalid_argument("step: layer count changed between frames");
    const FeatureMap& l0 = features.pyramid.layers[0];
    if (l0.height != cfg.search_cells || l0.width != cfg.search_cells)
        throw std::invalid_argument("step: feature grid does not match search_cells");
    const double stride = features.pyramid.stride;

    StepResult out;
    out.state = state;
    out.state.frame_index = state.frame_index + 1;

    const FeatureMap fused_features = fuse_features(features.pyramid, state.layer_weights.beta);
    Heatmap robust = robust_response(fused_features, state.filter);
    const Peak robust_peak = argmax_peak(robust);

    const bool lost = cfg.robust_branch != RobustBranch::None &&
                      robust_peak.value < cfg.lost_ratio * state.initial_peak;
    if (lost) {
        out.state.lost = true;
        out.result.box = state.current_box;
        out.result.lost = true;
        out.result.robust = std::move(robust);
        return out;
    }

    AnchorGrid grid = response_grid(cfg, l0.height, l0.width, stride);
    DenseBoxes boxes;
    bool image_mode = false;
    if (features.oracle_boxes) {
        boxes = *features.oracle_boxes;
        if (boxes.grid.height != grid.height || boxes.grid.width != grid.width ||
            boxes.grid.num_anchors() != grid.num_anchors() ||
            std::abs(boxes.grid.stride - grid.stride) > 1e-9 ||
            std::abs(boxes.grid.origin_offset - grid.origin_offset) > 1e-9)
            throw std::invalid_argument("step: proposal grid does not match the response grid");
    } else {
        image_mode = true;
        // Previous-size anchors; offsets are filled in after localization.
        grid = make_anchor_grid(grid.height, grid.width, stride,
                                {AnchorScale{state.current_box.w, state.current_box.h}},
                                grid.origin_offset);
        boxes = make_zero_boxes(grid);
    }

    Heatmap accurate;
    if (cfg.accurate_branch != AccurateBranch::None) {
        accurate = accurate_response(features.pyramid, state.template_kernel,
                                     state.template_energy, state.layer_weights.alpha);
        if (cfg.accurate_branch == AccurateBranch::OFC5s && grid.num_anchors() > 1) {
            Heatmap widened = Heatmap::zeros(accurate.height, accurate.width, grid.num_anchors());
            for (int a = 0; a < grid.num_anchors(); ++a) {
                const double aff = shape_affinity(grid.scales[a], state.current_box);
                for (int i = 0; i < accurate.height; ++i)
                    for (int j = 0; j < accurate.width; ++j)
                        widened.at(i, j, a) = accurate.at(i, j) * aff;
            }
            accurate = std::move(widened);
        }
    } else {
        accurate = Heatmap::zeros(robust.height, robust.width, grid.num_anchors());
    }

    double mu = cfg.mu;
    if (cfg.robust_branch == RobustBranch::None) mu = 0.0;
    if (cfg.accurate_branch == AccurateBranch::None) mu = 1.0;
    LocalizeResult loc = localize(robust, accurate, mu);

    PostprocessResult post = postprocess(loc.fused, boxes, state.current_box, cfg);
    const Peak peak = argmax_peak(post.windowed);

    if (image_mode) boxes = image_mode_boxes(loc.fused, grid, peak);

    IoUMap overlap_scores;
    if (features.oracle_iou) {
        overlap_scores = *features.oracle_iou;
        if (overlap_scores.values.size() != static_cast<size_t>(grid.count()))
            throw std::invalid_argument("step: overlap map does not match the response grid");
    } else {
        overlap_scores = image_mode_iou(loc.fused, boxes);
    }

    const Box b_star = regress_direct(peak, boxes);
    VoteResult vote{b_star, false};
    if (cfg.vote) vote = score_vote(boxes, overlap_scores, loc.fused, b_star, cfg);

    const size_t peak_idx = static_cast<size_t>(grid.linear_index(peak.i, peak.j, peak.a));
    const double peak_score = std::max(0.0, loc.fused.values[peak_idx]);
    const double eta =
        std::clamp(cfg.smooth_lr * post.penalty.values[peak_idx] * peak_score, 0.0, 1.0);

    Box next = vote.box;
    next.w = state.current_box.w * (1.0 - eta) + vote.box.w * eta;
    next.h = state.current_box.h * (1.0 - eta) + vote.box.h * eta;
    const double extent = l0.width * stride;
    next.cx = std::clamp(next.cx, 0.0, extent);
    next.cy = std::clamp(next.cy, 0.0, extent);
    next.w = std::clamp(next.w, 4.0, extent);
    next.h = std::clamp(next.h, 4.0, extent);

    bool distractor = false;
    UpdateKind kind = UpdateKind::None;
    if (cfg.robust_branch != RobustBranch::None) {
        distractor = detect_distractor(robust, peak.i, peak.j, cfg.distractor_ratio);
        kind = schedule_update(out.state.frame_index, distractor, false, cfg.learner);

        const int rh = robust.height, rw = robust.width;
        ResidualParams params = build_pseudo_params(next, rh, rw, stride, cfg.robust_branch,
                                                    cfg.labels, state.label_sigma);
        const double weight = distractor ? cfg.learner.hard_weight : 1.0;
        support_push(out.state.support, fused_features, std::move(params), weight);
        if (kind == UpdateKind::Periodic)
            out.state.filter = optimize(out.state.filter, out.state.support,
                                        cfg.learner.periodic_iterations, cfg.learner.periodic_lr)
                                   .filter;
        else if (kind == UpdateKind::Hard)
            out.state.filter = optimize(out.state.filter, out.state.support,
                                        cfg.learner.hard_iterations, cfg.learner.hard_lr)
                                   .filter;
    }

    out.state.current_box = next;
    out.state.lost = false;
    out.result.box = next;
    out.result.peak_value = loc.fused.values[peak_idx];
    out.result.lost = false;
    out.result.distractor = distractor;
    out.result.vote_fallback = vote.fallback;
    out.result.update = kind;
    out.result.robust = std::move(robust);
    out.result.accurate = std::move(accurate);
    out.result.fused = std::move(loc.fused);
    out.result.windowed = std::move(post.windowed);
    return out;
}

}  // namespace dualtrack
