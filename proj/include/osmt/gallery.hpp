#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "osmt/config.hpp"
#include "osmt/types.hpp"

namespace osmt {

struct BufferSlot {
    Embedding embedding;
    std::int64_t inserted_at_ms = 0;
};

// One enrolled identity: a circular buffer of up to K timestamped embeddings,
// oldest first. The identity's representative point is the elementwise mean
// of the occupied slots (partial buffers divide by the occupied count).
struct IdentityRecord {
    std::uint64_t global_id = 0;
    std::vector<BufferSlot> slots;
    std::int64_t created_at_ms = 0;
    std::int64_t last_matched_at_ms = 0;
};

// Mean over the occupied slots, summed in slot order.
// Precondition (record invariant): at least one slot.
Embedding centroid(const IdentityRecord& record);

struct RetrievalResult {
    enum class Kind { GalleryEmpty, Matched, RejectedAsNew };
    Kind kind = Kind::GalleryEmpty;
    std::uint64_t global_id = 0;  // Matched only
    double distance = 0.0;        // Matched: match distance; RejectedAsNew: min distance
};

struct Assignment {
    enum class Kind { MatchedAndStored, NewIdentity };
    Kind kind = Kind::NewIdentity;
    std::uint64_t global_id = 0;
    // Match distance; for NewIdentity, the min distance that was rejected
    // (absent when the gallery was empty).
    std::optional<double> distance;
};

struct ExpiryReport {
    std::size_t slots_removed = 0;
    std::vector<std::uint64_t> identities_pruned;
};

// The open-set gallery: initially empty, grows as unmatched probes enroll.
// A probe matches the nearest identity centroid if the distance is within
// th_emb (ties to the lowest global id); otherwise it becomes a new identity.
//
// Single-writer: observe/expire/restore must be externally serialized.
// query is a pure read.
class OpenSetGallery {
public:
    explicit OpenSetGallery(const ValidatedConfig& cfg);

    // Nearest-centroid lookup. Does not mutate.
    // Throws std::invalid_argument on probe dimension mismatch.
    RetrievalResult query(const Embedding& probe) const;

    // query + mutation: a match pushes the probe into the matched identity's
    // buffer (evicting the oldest slot when full); a rejection or empty
    // gallery enrolls a new identity under the next global id.
    Assignment observe(const Embedding& probe, std::int64_t now_ms);

    // Removes slots older than ttl_ms (strict: age == ttl_ms survives) and
    // prunes identities whose buffers empty out. Pruned ids are never reused.
    ExpiryReport expire(std::int64_t now_ms);

    const std::vector<IdentityRecord>& identities() const { return identities_; }
    std::size_t size() const { return identities_.size(); }
    std::uint64_t next_global_id() const { return next_global_id_; }

    // Self-describing UTF-8 document; byte-stable for identical state.
    // restore round-trips everything including the global id counter.
    std::string snapshot() const;
    static OpenSetGallery restore(const std::string& bytes);

private:
    OpenSetGallery(SystemConfig cfg);  // restore path, cfg already validated

    void push_slot(std::size_t index, const Embedding& probe, std::int64_t now_ms);
    void recompute_centroid(std::size_t index);

    SystemConfig cfg_;
    std::vector<IdentityRecord> identities_;  // ascending global_id
    std::vector<Embedding> centroids_;        // cache, parallel to identities_
    std::uint64_t next_global_id_ = 0;
};

// Calibration from labeled embeddings: per-class centroids, each class's
// minimum distance to any other class centroid, mean of those minima.
// Throws std::invalid_argument with fewer than 2 distinct labels.
double calibrate_th_emb(const std::vector<std::pair<std::string, Embedding>>& labeled);

}  // namespace osmt
