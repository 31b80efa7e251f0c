#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "osmt/types.hpp"

namespace osmt {

struct ScoreModel {
    double mean = 0.9;
    double sigma = 0.05;
};

struct ClothingChange {
    int identity = 0;
    std::int64_t time_ms = 0;
    double magnitude = 0.0;  // latent shift along a random unit direction
};

struct AbsenceWindow {
    int identity = 0;
    std::int64_t start_ms = 0;  // inclusive
    std::int64_t end_ms = 0;    // exclusive
};

// Synthetic multi-camera world. People walk the cameras round-robin with a
// fixed dwell; every present identity emits one detection per frame interval.
// Embeddings are latent + Gaussian noise (occlusion multiplies the noise and
// draws the score from the occluded model). Deterministic per seed.
struct ScenarioConfig {
    int num_identities = 5;
    int num_cameras = 8;
    std::int64_t duration_ms = 60'000;
    std::int64_t frame_interval_ms = 100;
    int d = 64;
    double class_separation = 6.0;  // minimum pairwise latent distance
    double noise_sigma = 0.05;
    double occlusion_rate = 0.3;
    double occlusion_noise_factor = 4.0;
    ScoreModel score_clean{0.93, 0.05};
    ScoreModel score_occluded{0.55, 0.12};
    std::int64_t dwell_ms = 5'000;
    std::vector<ClothingChange> clothing_changes;
    std::vector<AbsenceWindow> absence_windows;
    std::uint64_t seed = 1;
};

void validate_scenario(const ScenarioConfig& cfg);  // throws ConfigError

struct LatentSegment {
    std::int64_t from_ms = 0;
    Embedding latent;
};

struct GroundTruthIndex {
    std::vector<std::string> identity_labels;
    // Per identity: latent vector history (clothing changes append segments).
    std::vector<std::vector<LatentSegment>> latent_history;
};

struct SimOutput {
    std::vector<DetectionEvent> events;  // ordered by timestamp
    GroundTruthIndex ground_truth;
};

// Throws ConfigError if the requested class separation cannot be met within
// the rejection-sampling retry bound.
SimOutput generate(const ScenarioConfig& cfg);

struct TrackSwitch {
    std::string camera_id;
    std::uint64_t track_a = 0;
    std::uint64_t track_b = 0;
    std::uint64_t from_frame = 0;
};

struct SwitchedStream {
    std::vector<DetectionEvent> events;
    std::vector<TrackSwitch> switches;
};

// Injects tracker identity-switch faults: per co-visible track pair per
// camera, with the given probability, swaps the two tracks' ids from a random
// frame onward. Ground-truth labels, timestamps, scores and embeddings are
// untouched.
SwitchedStream inject_track_switches(const std::vector<DetectionEvent>& events,
                                     double rate, std::uint64_t seed);

}  // namespace osmt
