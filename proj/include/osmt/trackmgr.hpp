#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "osmt/config.hpp"
#include "osmt/types.hpp"

namespace osmt {

// Per-camera track with its (optional) bound global identity.
struct TrackState {
    std::string camera_id;
    std::uint64_t track_id = 0;
    std::optional<std::uint64_t> bound_global_id;
    std::deque<std::uint64_t> recent_votes;  // last n Re-ID results, newest last
    std::int64_t last_seen_ms = 0;
};

// Outcome of routing one detection through the score gate.
struct TrackDecision {
    enum class Kind {
        Filtered,        // low score, no binding to report
        ReIdRequested,   // score > th_score strictly; embedding attached
        Maintained,      // low score but the track already carries an identity
    };
    Kind kind = Kind::Filtered;
    std::uint64_t maintained_gid = 0;  // Maintained only
    Embedding embedding;               // ReIdRequested only
};

struct BindingOutcome {
    enum class Kind { FirstBind, Confirmed, Switched, HeldByPolicy };
    Kind kind = Kind::FirstBind;
    std::uint64_t previous_gid = 0;  // Switched / HeldByPolicy
    std::uint64_t bound_gid = 0;     // binding after this result was applied
};

// Track lifecycle and the score-gated Re-ID decision for one camera.
// Re-ID runs only on detections the gate passes; in between, the tracker
// carries the identity through occlusions and low-quality frames.
class TrackManager {
public:
    TrackManager(std::string camera_id, const ValidatedConfig& cfg);

    // Creates/refreshes the track, then gates. Throws DataError if the gate
    // passes but the event carries no embedding (malformed upstream stream),
    // std::invalid_argument if the event belongs to another camera.
    TrackDecision ingest(const DetectionEvent& event);

    // Applies a gallery result to the track's binding under the configured
    // conflict policy. Throws std::invalid_argument for unknown tracks.
    BindingOutcome apply_reid_result(std::uint64_t track_id, std::uint64_t new_global_id);

    // Drops tracks unseen for longer than track_lost_ms (strict inequality).
    std::vector<std::uint64_t> prune_lost_tracks(std::int64_t now_ms);

    const std::unordered_map<std::uint64_t, TrackState>& tracks() const { return tracks_; }
    const std::string& camera_id() const { return camera_id_; }

private:
    std::string camera_id_;
    SystemConfig cfg_;
    std::unordered_map<std::uint64_t, TrackState> tracks_;
};

}  // namespace osmt
