#include "dualtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dualtrack/rng.hpp"

namespace dualtrack {

namespace {

constexpr double kMinSize = 16.0;

std::vector<double> random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& x : v) {
            x = n(rng);
            norm += x * x;
        }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Embed an identity_dim-dimensional appearance vector into channel space
// together with the shared objectness component, renormalized.
std::vector<double> compose_identity(const std::vector<double>& spec, const SimConfig& cfg) {
    std::vector<double> v(cfg.channels, 0.0);
    std::copy(spec.begin(), spec.end(), v.begin());
    if (cfg.identity_dim < cfg.channels) v[cfg.identity_dim] = cfg.shared_weight;
    double norm = std::sqrt(dot(v, v));
    for (double& x : v) x /= norm;
    return v;
}

void clamp_object(SceneObject& obj, int frame_size) {
    obj.box.w = std::clamp(obj.box.w, kMinSize, frame_size / 2.0);
    obj.box.h = std::clamp(obj.box.h, kMinSize, frame_size / 2.0);
    obj.box.cx = std::clamp(obj.box.cx, obj.box.w / 2.0, frame_size - obj.box.w / 2.0);
    obj.box.cy = std::clamp(obj.box.cy, obj.box.h / 2.0, frame_size - obj.box.h / 2.0);
}

void validate(const SimConfig& cfg) {
    if (cfg.length < 2) throw std::invalid_argument("gen_sequence: length must be >= 2");
    if (cfg.distractors < 0) throw std::invalid_argument("gen_sequence: negative distractors");
    if (cfg.motion_sigma < 0 || cfg.scale_walk_sigma < 0 || cfg.identity_drift < 0)
        throw std::invalid_argument("gen_sequence: negative sigma");
    if (cfg.occlusion_prob < 0 || cfg.occlusion_prob > 1)
        throw std::invalid_argument("gen_sequence: occlusion_prob outside [0,1]");
    if (cfg.identity_dim < 1 || cfg.identity_dim > cfg.channels)
        throw std::invalid_argument("gen_sequence: identity_dim outside [1, channels]");
    if (cfg.frame_size < 4 * static_cast<int>(kMinSize))
        throw std::invalid_argument("gen_sequence: frame_size too small");
    if (cfg.shared_weight < 0) throw std::invalid_argument("gen_sequence: negative shared_weight");
}

}  // namespace

Sequence gen_sequence(const SimConfig& cfg) {
    validate(cfg);
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x5C31Eull));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Target appearance basis: start vector plus an orthogonal drift axis.
    std::vector<double> spec0 = random_unit(rng, cfg.identity_dim);
    std::vector<double> drift_axis(cfg.identity_dim, 0.0);
    if (cfg.identity_dim > 1) {
        double norm = 0.0;
        do {
            drift_axis = random_unit(rng, cfg.identity_dim);
            const double p = dot(drift_axis, spec0);
            norm = 0.0;
            for (int i = 0; i < cfg.identity_dim; ++i) {
                drift_axis[i] -= p * spec0[i];
                norm += drift_axis[i] * drift_axis[i];
            }
        } while (norm < 1e-6);
        norm = std::sqrt(norm);
        for (double& x : drift_axis) x /= norm;
    }

    SceneState scene;
    scene.frame_size = cfg.frame_size;
    scene.target_index = 0;
    scene.seed = cfg.seed;

    SceneObject target;
    target.id = 0;
    target.identity = compose_identity(spec0, cfg);
    target.box.w = 36.0 + 12.0 * u01(rng);
    target.box.h = 36.0 + 12.0 * u01(rng);
    target.box.cx = cfg.frame_size / 2.0 + 40.0 * (u01(rng) - 0.5);
    target.box.cy = cfg.frame_size / 2.0 + 40.0 * (u01(rng) - 0.5);
    clamp_object(target, cfg.frame_size);
    scene.objects.push_back(target);

    const std::vector<double> target_full = compose_identity(spec0, cfg);
    for (int d = 0; d < cfg.distractors; ++d) {
        SceneObject obj;
        obj.id = d + 1;
        std::vector<double> spec;
        int attempts = 0;
        for (;;) {
            spec = random_unit(rng, cfg.identity_dim);
            const std::vector<double> full = compose_identity(spec, cfg);
            if (dot(full, target_full) < 0.3 && std::abs(dot(spec, drift_axis)) < 0.35) break;
            if (++attempts > 10000)
                throw std::runtime_error("gen_sequence: identity sampling stalled");
        }
        obj.identity = compose_identity(spec, cfg);
        if (dot(obj.identity, target_full) >= 0.3)
            throw std::logic_error("gen_sequence: distractor identity too close to target");
        const double angle = 2.0 * 3.14159265358979323846 * u01(rng);
        const double radius = 60.0 + 40.0 * u01(rng);
        obj.box.w = 36.0 + 12.0 * u01(rng);
        obj.box.h = 36.0 + 12.0 * u01(rng);
        obj.box.cx = scene.objects[0].box.cx + radius * std::cos(angle);
        obj.box.cy = scene.objects[0].box.cy + radius * std::sin(angle);
        clamp_object(obj, cfg.frame_size);
        scene.objects.push_back(obj);
    }

    Sequence seq;
    seq.config = cfg;
    seq.frames.reserve(cfg.length);
    seq.groundtruth.reserve(cfg.length);
    seq.frames.push_back(scene);
    seq.groundtruth.push_back(scene.objects[0].box);

    for (int f = 1; f < cfg.length; ++f) {
        scene.frame_index = f;
        scene.occluded = u01(rng) < cfg.occlusion_prob;
        for (auto& obj : scene.objects) {
            obj.vx = 0.9 * obj.vx + cfg.motion_sigma * gauss(rng);
            obj.vy = 0.9 * obj.vy + cfg.motion_sigma * gauss(rng);
            obj.box.cx += obj.vx;
            obj.box.cy += obj.vy;
            const double g = std::exp(cfg.scale_walk_sigma * gauss(rng));
            obj.box.w *= g;
            obj.box.h *= g;
            clamp_object(obj, cfg.frame_size);
        }
        const double theta = cfg.identity_drift * f;
        std::vector<double> spec(cfg.identity_dim);
        for (int i = 0; i < cfg.identity_dim; ++i)
            spec[i] = spec0[i] * std::cos(theta) + drift_axis[i] * std::sin(theta);
        scene.objects[0].identity = compose_identity(spec, cfg);
        seq.frames.push_back(scene);
        seq.groundtruth.push_back(scene.objects[0].box);
    }
    return seq;
}

std::vector<std::uint8_t> render_frame(const SceneState& scene) {
    const int n = scene.frame_size;
    std::vector<std::uint8_t> img(static_cast<size_t>(n) * n);
    std::mt19937_64 rng(mix_seed(scene.seed, 0x4E0157Eull, static_cast<std::uint64_t>(
                                                               scene.frame_index)));
    std::normal_distribution<double> noise(0.0, 8.0);
    for (auto& px : img)
        px = static_cast<std::uint8_t>(std::clamp(40.0 + noise(rng), 0.0, 255.0));

    // Distractors first, target on top; a hidden target is just skipped.
    for (size_t pass = 0; pass < 2; ++pass) {
        for (size_t k = 0; k < scene.objects.size(); ++k) {
            const bool is_target = static_cast<int>(k) == scene.target_index;
            if ((pass == 0) == is_target) continue;
            if (is_target && scene.occluded) continue;
            const SceneObject& obj = scene.objects[k];
            const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(obj.id) + 0x7E87ull);
            const double base = 120.0 + static_cast<double>(h & 0x3F);
            const double angle = static_cast<double>((h >> 8) & 0xFF) / 255.0 * 3.14159265;
            const double wavelength = 6.0 + static_cast<double>((h >> 16) & 0x7);
            const int x0 = std::max(0, static_cast<int>(std::floor(obj.box.left())));
            const int x1 = std::min(n, static_cast<int>(std::ceil(obj.box.right())));
            const int y0 = std::max(0, static_cast<int>(std::floor(obj.box.top())));
            const int y1 = std::min(n, static_cast<int>(std::ceil(obj.box.bottom())));
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    const double phase =
                        (x * std::cos(angle) + y * std::sin(angle)) / wavelength;
                    const double v = base + 50.0 * std::sin(2.0 * 3.14159265 * phase);
                    img[static_cast<size_t>(y) * n + x] =
                        static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
                }
        }
    }
    return img;
}

}  // namespace dualtrack
