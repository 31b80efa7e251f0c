#include "osmt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "osmt/distance.hpp"
#include "osmt/errors.hpp"
#include "osmt/rng.hpp"

namespace osmt {

void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.num_identities < 1) throw ConfigError("num_identities must be >= 1");
    if (cfg.num_cameras < 1) throw ConfigError("num_cameras must be >= 1");
    if (cfg.duration_ms <= 0) throw ConfigError("duration_ms must be > 0");
    if (cfg.frame_interval_ms <= 0) throw ConfigError("frame_interval_ms must be > 0");
    if (cfg.d < 1) throw ConfigError("d must be >= 1");
    if (!(cfg.class_separation > 0.0)) throw ConfigError("class_separation must be > 0");
    if (!(cfg.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
    if (!(cfg.occlusion_rate >= 0.0 && cfg.occlusion_rate <= 1.0))
        throw ConfigError("occlusion_rate must be in [0,1]");
    if (!(cfg.occlusion_noise_factor >= 0.0))
        throw ConfigError("occlusion_noise_factor must be >= 0");
    if (cfg.dwell_ms <= 0) throw ConfigError("dwell_ms must be > 0");
    for (const auto& c : cfg.clothing_changes) {
        if (c.identity < 0 || c.identity >= cfg.num_identities)
            throw ConfigError("clothing change references unknown identity");
        if (!(c.magnitude >= 0.0)) throw ConfigError("clothing change magnitude must be >= 0");
    }
    for (const auto& w : cfg.absence_windows) {
        if (w.identity < 0 || w.identity >= cfg.num_identities)
            throw ConfigError("absence window references unknown identity");
        if (w.end_ms < w.start_ms) throw ConfigError("absence window ends before it starts");
    }
}

namespace {

bool absent_at(const ScenarioConfig& cfg, int identity, std::int64_t t) {
    for (const auto& w : cfg.absence_windows) {
        // Half-open [start_ms, end_ms).
        if (w.identity == identity && t >= w.start_ms && t < w.end_ms) return true;
    }
    return false;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

SimOutput generate(const ScenarioConfig& cfg) {
    validate_scenario(cfg);
    Rng rng(cfg.seed);

    const int n = cfg.num_identities;
    const int ncam = cfg.num_cameras;

    // Latent identity vectors, rejection-sampled to the separation floor.
    constexpr int kMaxRetries = 1000;
    std::vector<Embedding> base(n);
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxRetries && !placed; ++attempt) {
            Embedding candidate = rng.gaussian_vector(cfg.d, cfg.class_separation);
            placed = true;
            for (int j = 0; j < i; ++j) {
                if (l2_distance(candidate, base[j]) < cfg.class_separation) {
                    placed = false;
                    break;
                }
            }
            if (placed) base[i] = std::move(candidate);
        }
        if (!placed) {
            throw ConfigError("could not place identity " + std::to_string(i) +
                              " at separation " + std::to_string(cfg.class_separation) +
                              " within " + std::to_string(kMaxRetries) + " attempts");
        }
    }

    GroundTruthIndex gt;
    gt.identity_labels.resize(n);
    gt.latent_history.resize(n);
    for (int i = 0; i < n; ++i) {
        gt.identity_labels[i] = "person" + std::to_string(i);
        gt.latent_history[i].push_back(LatentSegment{0, base[i]});
    }

    // Clothing shifts: directions drawn in declaration order, applied in time
    // order per identity.
    std::vector<Embedding> shift_of(cfg.clothing_changes.size());
    for (std::size_t c = 0; c < cfg.clothing_changes.size(); ++c) {
        Embedding dir = rng.unit_vector(cfg.d);
        for (auto& x : dir) x *= cfg.clothing_changes[c].magnitude;
        shift_of[c] = std::move(dir);
    }
    std::vector<std::vector<std::size_t>> changes_by_identity(n);
    for (std::size_t c = 0; c < cfg.clothing_changes.size(); ++c) {
        changes_by_identity[cfg.clothing_changes[c].identity].push_back(c);
    }
    for (int i = 0; i < n; ++i) {
        auto& idx = changes_by_identity[i];
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return cfg.clothing_changes[a].time_ms < cfg.clothing_changes[b].time_ms;
        });
        Embedding current = base[i];
        for (std::size_t c : idx) {
            for (int k = 0; k < cfg.d; ++k) current[k] += shift_of[c][k];
            gt.latent_history[i].push_back(
                LatentSegment{cfg.clothing_changes[c].time_ms, current});
        }
    }

    // Round-robin camera walk with a fixed dwell; phase staggers transitions.
    std::vector<std::int64_t> start_cam(n), phase(n);
    for (int i = 0; i < n; ++i) {
        start_cam[i] = static_cast<std::int64_t>(rng.uniform_int(0, ncam - 1));
        phase[i] = static_cast<std::int64_t>(rng.uniform_int(0, cfg.dwell_ms - 1));
    }
    auto camera_at = [&](int i, std::int64_t t) {
        return static_cast<int>((start_cam[i] + (t + phase[i]) / cfg.dwell_ms) % ncam);
    };

    SimOutput out;
    out.ground_truth = std::move(gt);

    std::vector<std::uint64_t> next_track(ncam, 1);
    std::vector<int> prev_camera(n, -1);  // -1: not present last frame
    std::vector<std::uint64_t> cur_track(n, 0);
    std::vector<std::size_t> latent_pos(n, 0);

    for (std::int64_t t = 0; t < cfg.duration_ms; t += cfg.frame_interval_ms) {
        const std::uint64_t frame = static_cast<std::uint64_t>(t / cfg.frame_interval_ms);
        for (int i = 0; i < n; ++i) {
            if (absent_at(cfg, i, t)) {
                prev_camera[i] = -1;
                continue;
            }
            int cam = camera_at(i, t);
            if (cam != prev_camera[i]) {
                cur_track[i] = next_track[cam]++;
                prev_camera[i] = cam;
            }

            const auto& history = out.ground_truth.latent_history[i];
            while (latent_pos[i] + 1 < history.size() &&
                   history[latent_pos[i] + 1].from_ms <= t) {
                ++latent_pos[i];
            }
            const Embedding& latent = history[latent_pos[i]].latent;

            bool occluded = rng.bernoulli(cfg.occlusion_rate);
            const ScoreModel& model = occluded ? cfg.score_occluded : cfg.score_clean;
            double score = clamp01(rng.normal(model.mean, model.sigma));
            double sigma =
                cfg.noise_sigma * (occluded ? cfg.occlusion_noise_factor : 1.0);
            Embedding emb = rng.gaussian_vector(cfg.d, sigma);
            for (int k = 0; k < cfg.d; ++k) emb[k] += latent[k];

            DetectionEvent ev;
            ev.camera_id = "cam" + std::to_string(cam);
            ev.frame_index = frame;
            ev.timestamp_ms = t;
            ev.track_id = cur_track[i];
            ev.bbox = BBox{40.0 + 30.0 * i + 2.0 * (frame % 10), 60.0,
                           55.0 + (i % 3), 150.0 + 2.0 * (i % 5)};
            ev.score = score;
            ev.embedding = std::move(emb);
            ev.gt_identity = out.ground_truth.identity_labels[i];
            out.events.push_back(std::move(ev));
        }
    }
    return out;
}

SwitchedStream inject_track_switches(const std::vector<DetectionEvent>& events,
                                     double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw std::invalid_argument("inject_track_switches: rate must be in [0,1]");
    }
    SwitchedStream out;
    out.events = events;
    if (rate == 0.0) return out;

    struct Span {
        std::uint64_t first_frame = 0;
        std::uint64_t last_frame = 0;
    };
    // Track lifespans per camera, from the original stream.
    std::map<std::string, std::map<std::uint64_t, Span>> spans;
    for (const auto& ev : events) {
        auto& per_cam = spans[ev.camera_id];
        auto [it, created] = per_cam.try_emplace(ev.track_id,
                                                 Span{ev.frame_index, ev.frame_index});
        if (!created) {
            it->second.first_frame = std::min(it->second.first_frame, ev.frame_index);
            it->second.last_frame = std::max(it->second.last_frame, ev.frame_index);
        }
    }

    Rng rng(seed);
    for (const auto& [cam, per_cam] : spans) {
        std::vector<std::pair<std::uint64_t, Span>> tracks(per_cam.begin(), per_cam.end());
        for (std::size_t a = 0; a < tracks.size(); ++a) {
            for (std::size_t b = a + 1; b < tracks.size(); ++b) {
                std::uint64_t lo =
                    std::max(tracks[a].second.first_frame, tracks[b].second.first_frame);
                std::uint64_t hi =
                    std::min(tracks[a].second.last_frame, tracks[b].second.last_frame);
                if (lo > hi) continue;  // never co-visible
                if (!rng.bernoulli(rate)) continue;
                std::uint64_t from = rng.uniform_int(lo, hi);
                std::uint64_t ta = tracks[a].first;
                std::uint64_t tb = tracks[b].first;
                for (auto& ev : out.events) {
                    if (ev.camera_id != cam || ev.frame_index < from) continue;
                    if (ev.track_id == ta) {
                        ev.track_id = tb;
                    } else if (ev.track_id == tb) {
                        ev.track_id = ta;
                    }
                }
                out.switches.push_back(TrackSwitch{cam, ta, tb, from});
            }
        }
    }
    return out;
}

}  // namespace osmt
