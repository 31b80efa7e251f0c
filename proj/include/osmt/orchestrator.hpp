#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osmt/config.hpp"
#include "osmt/gallery.hpp"
#include "osmt/trackmgr.hpp"
#include "osmt/types.hpp"

namespace osmt {

// One audit record per input event.
struct AssignmentOutcome {
    enum class Decision { Filtered, Maintained, Matched, NewIdentity };

    // event echo
    std::string camera_id;
    std::uint64_t frame_index = 0;
    std::uint64_t track_id = 0;
    std::int64_t timestamp_ms = 0;

    Decision decision = Decision::Filtered;
    std::optional<std::uint64_t> global_id;  // Maintained/Matched/NewIdentity
    // Match distance; for NewIdentity the min distance the gallery rejected
    // (absent on a cold start).
    std::optional<double> distance;
    std::optional<BindingOutcome> binding;  // when Re-ID ran
    std::vector<std::string> warnings;
};

const char* to_string(AssignmentOutcome::Decision d);
const char* to_string(BindingOutcome::Kind k);

// Global coordinator: owns the single gallery, one TrackManager per camera,
// routes gate-passing detections through the gallery in event-time order and
// applies the results back to the tracks.
//
// All gallery writes happen inside process(), which is the serialization
// point; time is event time throughout, so offline replay and live operation
// behave identically.
class Orchestrator {
public:
    explicit Orchestrator(const ValidatedConfig& cfg);

    // Throws ConfigError on duplicate registration.
    void register_camera(const std::string& camera_id);

    // Throws DataError for events out of order beyond the configured
    // tolerance or from unregistered cameras when auto_register is off.
    AssignmentOutcome process(const DetectionEvent& event);

    const OpenSetGallery& gallery() const { return gallery_; }
    std::size_t events_processed() const { return events_processed_; }

private:
    void sweep(std::int64_t now_ms);

    SystemConfig cfg_;
    ValidatedConfig validated_;
    OpenSetGallery gallery_;
    std::map<std::string, TrackManager> cameras_;
    std::int64_t watermark_ms_ = 0;
    std::int64_t last_sweep_ms_ = 0;
    bool saw_first_event_ = false;
    std::size_t events_processed_ = 0;
};

struct RunResult {
    std::vector<AssignmentOutcome> outcomes;
    std::string gallery_snapshot;
};

// Convenience driver: replays an ordered event sequence through a fresh
// orchestrator. Deterministic: identical (events, cfg) give byte-identical
// outcome serialization and snapshot.
RunResult run_stream(const std::vector<DetectionEvent>& events, const ValidatedConfig& cfg);

}  // namespace osmt
