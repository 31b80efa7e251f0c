#include "osmt/trackmgr.hpp"

#include <algorithm>
#include <stdexcept>

#include "osmt/errors.hpp"

namespace osmt {

TrackManager::TrackManager(std::string camera_id, const ValidatedConfig& cfg)
    : camera_id_(std::move(camera_id)), cfg_(cfg.get()) {}

TrackDecision TrackManager::ingest(const DetectionEvent& event) {
    if (event.camera_id != camera_id_) {
        throw std::invalid_argument("ingest: event for camera \"" + event.camera_id +
                                    "\" routed to manager for \"" + camera_id_ + "\"");
    }
    auto [it, created] = tracks_.try_emplace(event.track_id);
    TrackState& track = it->second;
    if (created) {
        track.camera_id = camera_id_;
        track.track_id = event.track_id;
        track.last_seen_ms = event.timestamp_ms;
    } else {
        track.last_seen_ms = std::max(track.last_seen_ms, event.timestamp_ms);
    }

    // Strict gate: score must exceed th_score.
    if (event.score > cfg_.th_score) {
        if (!event.embedding.has_value()) {
            throw DataError("gate passed (score " + std::to_string(event.score) +
                            ") but event carries no embedding: camera " + camera_id_ +
                            ", track " + std::to_string(event.track_id));
        }
        TrackDecision d;
        d.kind = TrackDecision::Kind::ReIdRequested;
        d.embedding = *event.embedding;
        return d;
    }
    if (track.bound_global_id.has_value()) {
        TrackDecision d;
        d.kind = TrackDecision::Kind::Maintained;
        d.maintained_gid = *track.bound_global_id;
        return d;
    }
    return TrackDecision{};  // Filtered
}

BindingOutcome TrackManager::apply_reid_result(std::uint64_t track_id,
                                               std::uint64_t new_global_id) {
    auto it = tracks_.find(track_id);
    if (it == tracks_.end()) {
        throw std::invalid_argument("apply_reid_result: unknown track " +
                                    std::to_string(track_id) + " on camera " + camera_id_);
    }
    TrackState& track = it->second;
    track.recent_votes.push_back(new_global_id);
    while (track.recent_votes.size() > static_cast<std::size_t>(cfg_.vote_window)) {
        track.recent_votes.pop_front();
    }

    BindingOutcome out;
    if (!track.bound_global_id.has_value()) {
        track.bound_global_id = new_global_id;
        out.kind = BindingOutcome::Kind::FirstBind;
        out.bound_gid = new_global_id;
        return out;
    }
    std::uint64_t current = *track.bound_global_id;
    if (current == new_global_id) {
        out.kind = BindingOutcome::Kind::Confirmed;
        out.bound_gid = current;
        return out;
    }
    bool rebind = false;
    switch (cfg_.conflict_policy) {
        case ConflictPolicy::LatestWins:
            rebind = true;
            break;
        case ConflictPolicy::Sticky:
            rebind = false;
            break;
        case ConflictPolicy::VoteLastN: {
            // Strict majority over the stored window (up to n most recent
            // results, the current one included). With n=1 this degenerates
            // to latest_wins.
            std::size_t votes = static_cast<std::size_t>(
                std::count(track.recent_votes.begin(), track.recent_votes.end(),
                           new_global_id));
            rebind = 2 * votes > track.recent_votes.size();
            break;
        }
    }
    if (rebind) {
        track.bound_global_id = new_global_id;
        out.kind = BindingOutcome::Kind::Switched;
        out.previous_gid = current;
        out.bound_gid = new_global_id;
    } else {
        out.kind = BindingOutcome::Kind::HeldByPolicy;
        out.previous_gid = current;
        out.bound_gid = current;
    }
    return out;
}

std::vector<std::uint64_t> TrackManager::prune_lost_tracks(std::int64_t now_ms) {
    std::vector<std::uint64_t> pruned;
    for (auto it = tracks_.begin(); it != tracks_.end();) {
        if (now_ms - it->second.last_seen_ms > cfg_.track_lost_ms) {
            pruned.push_back(it->first);
            it = tracks_.erase(it);
        } else {
            ++it;
        }
    }
    std::sort(pruned.begin(), pruned.end());
    return pruned;
}

}  // namespace osmt
