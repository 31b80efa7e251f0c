#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace osmt {

// Appearance feature vector. Dimension is fixed per deployment (SystemConfig::d);
// every element must be finite. Distances are computed in double precision.
using Embedding = std::vector<double>;

struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

// One tracked detection from one camera, as delivered by the upstream
// detector+tracker (or the simulator). `track_id` is the per-camera tracker
// pseudo-id, not a global identity. `gt_identity` is simulator ground truth;
// the engine never reads it.
struct DetectionEvent {
    std::string camera_id;
    std::uint64_t frame_index = 0;
    std::int64_t timestamp_ms = 0;
    std::uint64_t track_id = 0;
    BBox bbox;
    double score = 0.0;
    std::optional<Embedding> embedding;
    std::optional<std::string> gt_identity;
};

bool is_finite(const Embedding& e);

}  // namespace osmt
