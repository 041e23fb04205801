#pragma once

#include <cstdint>
#include <vector>

#include "dualtrack/geometry.hpp"

namespace dualtrack {

struct SceneObject {
    int id = 0;
    std::vector<double> identity;  // unit vector in feature space
    Box box;
    double vx = 0.0;
    double vy = 0.0;
};

// One frame of a synthetic scene. Carries enough context (seed, frame
// index) for feature providers to derive their noise streams.
struct SceneState {
    int frame_size = 256;
    std::vector<SceneObject> objects;
    int target_index = 0;
    int frame_index = 0;
    bool occluded = false;  // target hidden this frame
    std::uint64_t seed = 0;
};

struct SimConfig {
    int length = 120;
    int distractors = 2;
    double motion_sigma = 2.5;      // velocity kick, pixels/frame
    double scale_walk_sigma = 0.01; // log-scale random walk
    double occlusion_prob = 0.1;
    std::uint64_t seed = 1;
    int frame_size = 256;
    int channels = 16;
    int identity_dim = 8;
    double identity_drift = 0.01;  // target appearance rotation, radians/frame
    double shared_weight = 0.5;    // objectness component common to all objects
};

struct Sequence {
    SimConfig config;
    std::vector<SceneState> frames;
    std::vector<Box> groundtruth;  // target box per frame
};

// Damped random-walk motion for one target plus `distractors` decoys.
// Object identities are unit vectors sharing a fixed objectness component;
// distractor identities are rejection-sampled to stay distinct from the
// target (inner product < 0.3). The target identity rotates slowly over
// the sequence. Deterministic per seed.
Sequence gen_sequence(const SimConfig& cfg);

// Grayscale rendering: textured rectangle per visible object over a noisy
// background. Row-major frame_size x frame_size, deterministic per scene.
std::vector<std::uint8_t> render_frame(const SceneState& scene);

}  // namespace dualtrack
