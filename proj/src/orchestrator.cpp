#include "osmt/orchestrator.hpp"

#include <algorithm>

#include "osmt/errors.hpp"

namespace osmt {

const char* to_string(AssignmentOutcome::Decision d) {
    switch (d) {
        case AssignmentOutcome::Decision::Filtered: return "filtered";
        case AssignmentOutcome::Decision::Maintained: return "maintained";
        case AssignmentOutcome::Decision::Matched: return "matched";
        case AssignmentOutcome::Decision::NewIdentity: return "new_identity";
    }
    return "filtered";
}

const char* to_string(BindingOutcome::Kind k) {
    switch (k) {
        case BindingOutcome::Kind::FirstBind: return "first_bind";
        case BindingOutcome::Kind::Confirmed: return "confirmed";
        case BindingOutcome::Kind::Switched: return "switched";
        case BindingOutcome::Kind::HeldByPolicy: return "held_by_policy";
    }
    return "first_bind";
}

Orchestrator::Orchestrator(const ValidatedConfig& cfg)
    : cfg_(cfg.get()), validated_(cfg), gallery_(cfg) {}

void Orchestrator::register_camera(const std::string& camera_id) {
    if (cameras_.contains(camera_id)) {
        throw ConfigError("camera \"" + camera_id + "\" already registered");
    }
    cameras_.emplace(camera_id, TrackManager(camera_id, validated_));
}

void Orchestrator::sweep(std::int64_t now_ms) {
    gallery_.expire(now_ms);
    for (auto& [id, mgr] : cameras_) mgr.prune_lost_tracks(now_ms);
}

AssignmentOutcome Orchestrator::process(const DetectionEvent& event) {
    if (!saw_first_event_) {
        saw_first_event_ = true;
        watermark_ms_ = event.timestamp_ms;
        last_sweep_ms_ = event.timestamp_ms;
    } else if (event.timestamp_ms < watermark_ms_ - cfg_.order_tolerance_ms) {
        throw DataError("event " + std::to_string(events_processed_) +
                        " out of order: timestamp " + std::to_string(event.timestamp_ms) +
                        " behind stream time " + std::to_string(watermark_ms_));
    }
    watermark_ms_ = std::max(watermark_ms_, event.timestamp_ms);
    if (watermark_ms_ - last_sweep_ms_ >= cfg_.expiry_sweep_interval_ms) {
        sweep(watermark_ms_);
        last_sweep_ms_ = watermark_ms_;
    }

    auto it = cameras_.find(event.camera_id);
    if (it == cameras_.end()) {
        if (!cfg_.auto_register) {
            throw DataError("event " + std::to_string(events_processed_) +
                            " from unregistered camera \"" + event.camera_id + "\"");
        }
        it = cameras_.emplace(event.camera_id, TrackManager(event.camera_id, validated_))
                 .first;
    }
    TrackManager& mgr = it->second;

    AssignmentOutcome outcome;
    outcome.camera_id = event.camera_id;
    outcome.frame_index = event.frame_index;
    outcome.track_id = event.track_id;
    outcome.timestamp_ms = event.timestamp_ms;

    TrackDecision decision = mgr.ingest(event);
    switch (decision.kind) {
        case TrackDecision::Kind::Filtered:
            outcome.decision = AssignmentOutcome::Decision::Filtered;
            break;
        case TrackDecision::Kind::Maintained:
            outcome.decision = AssignmentOutcome::Decision::Maintained;
            outcome.global_id = decision.maintained_gid;
            break;
        case TrackDecision::Kind::ReIdRequested: {
            // Expire at probe time so a stale identity can never match past
            // its ttl, regardless of sweep granularity.
            gallery_.expire(event.timestamp_ms);
            Assignment a = gallery_.observe(decision.embedding, event.timestamp_ms);
            outcome.decision = a.kind == Assignment::Kind::MatchedAndStored
                                   ? AssignmentOutcome::Decision::Matched
                                   : AssignmentOutcome::Decision::NewIdentity;
            outcome.distance = a.distance;  // rejection echoes its min distance
            outcome.global_id = a.global_id;
            outcome.binding = mgr.apply_reid_result(event.track_id, a.global_id);

            // Two live tracks on one camera sharing a global id is legal but
            // suspicious; surface it.
            std::uint64_t bound = outcome.binding->bound_gid;
            std::vector<std::uint64_t> sharers;
            for (const auto& [tid, track] : mgr.tracks()) {
                if (tid != event.track_id && track.bound_global_id == bound) {
                    sharers.push_back(tid);
                }
            }
            if (!sharers.empty()) {
                std::sort(sharers.begin(), sharers.end());
                std::string msg = "global id " + std::to_string(bound) +
                                  " bound by multiple active tracks on " +
                                  event.camera_id + ":";
                msg += " " + std::to_string(event.track_id);
                for (auto tid : sharers) msg += ", " + std::to_string(tid);
                outcome.warnings.push_back(std::move(msg));
            }
            break;
        }
    }
    ++events_processed_;
    return outcome;
}

RunResult run_stream(const std::vector<DetectionEvent>& events,
                     const ValidatedConfig& cfg) {
    Orchestrator orch(cfg);
    RunResult result;
    result.outcomes.reserve(events.size());
    for (const auto& ev : events) result.outcomes.push_back(orch.process(ev));
    result.gallery_snapshot = orch.gallery().snapshot();
    return result;
}

}  // namespace osmt
