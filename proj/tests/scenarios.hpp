#pragma once

// The standard desk-scale scenario and its run configuration, shared by unit
// and acceptance tests. data/scenarios/desk_standard.json and
// data/configs/desk_standard.json carry the same values for the CLI; the
// acceptance suite asserts the two stay in sync.

#include "osmt/config.hpp"
#include "osmt/sim.hpp"

namespace scenarios {

inline osmt::ScenarioConfig desk_standard() {
    osmt::ScenarioConfig cfg;
    cfg.num_identities = 5;
    cfg.num_cameras = 8;
    cfg.duration_ms = 60'000;
    cfg.frame_interval_ms = 100;
    cfg.d = 64;
    cfg.class_separation = 6.0;
    cfg.noise_sigma = 0.05;
    cfg.occlusion_rate = 0.3;
    cfg.occlusion_noise_factor = 4.0;
    cfg.score_clean = {0.93, 0.05};
    cfg.score_occluded = {0.55, 0.12};
    cfg.dwell_ms = 5'000;
    // Everyone changes clothes 8 times, staggered across people and time; the
    // latent shift (2.5) deliberately exceeds the run config's th_emb.
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 8; ++j) {
            cfg.clothing_changes.push_back(
                {i, 4'200 + 6'700 * j + 1'290 * i, 2.5});
        }
    }
    cfg.seed = 20240811;
    return cfg;
}

inline osmt::SystemConfig desk_standard_run_config() {
    osmt::SystemConfig cfg;
    cfg.d = 64;
    cfg.buffer_capacity = 8;
    cfg.th_emb = 1.0;
    cfg.th_score = 0.91;
    cfg.ttl_ms = 600'000;
    cfg.track_lost_ms = 1'000;
    cfg.seed = 20240811;
    return cfg;
}

}  // namespace scenarios
