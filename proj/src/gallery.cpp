#include "osmt/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "osmt/distance.hpp"
#include "osmt/errors.hpp"

namespace osmt {

using nlohmann::json;

Embedding centroid(const IdentityRecord& record) {
    const std::size_t n = record.slots.size();
    Embedding mean(record.slots.front().embedding.size(), 0.0);
    for (const auto& slot : record.slots) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += slot.embedding[i];
    }
    const double count = static_cast<double>(n);
    for (auto& x : mean) x /= count;
    return mean;
}

OpenSetGallery::OpenSetGallery(const ValidatedConfig& cfg) : cfg_(cfg.get()) {}

OpenSetGallery::OpenSetGallery(SystemConfig cfg) : cfg_(std::move(cfg)) {}

RetrievalResult OpenSetGallery::query(const Embedding& probe) const {
    if (probe.size() != static_cast<std::size_t>(cfg_.d)) {
        throw std::invalid_argument("query: probe dimension " +
                                    std::to_string(probe.size()) + ", gallery expects " +
                                    std::to_string(cfg_.d));
    }
    if (identities_.empty()) {
        return RetrievalResult{RetrievalResult::Kind::GalleryEmpty, 0, 0.0};
    }
    // Identities are kept in ascending global_id order and the comparison is
    // strict, so exact ties resolve to the lowest id.
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < identities_.size(); ++i) {
        double dist = l2_distance(probe, centroids_[i]);
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    if (best_dist <= cfg_.th_emb) {
        return RetrievalResult{RetrievalResult::Kind::Matched,
                               identities_[best].global_id, best_dist};
    }
    return RetrievalResult{RetrievalResult::Kind::RejectedAsNew, 0, best_dist};
}

Assignment OpenSetGallery::observe(const Embedding& probe, std::int64_t now_ms) {
    RetrievalResult r = query(probe);
    if (r.kind == RetrievalResult::Kind::Matched) {
        for (std::size_t i = 0; i < identities_.size(); ++i) {
            if (identities_[i].global_id == r.global_id) {
                push_slot(i, probe, now_ms);
                return Assignment{Assignment::Kind::MatchedAndStored, r.global_id,
                                  r.distance};
            }
        }
    }
    IdentityRecord rec;
    rec.global_id = next_global_id_++;
    rec.slots.push_back(BufferSlot{probe, now_ms});
    rec.created_at_ms = now_ms;
    rec.last_matched_at_ms = now_ms;
    identities_.push_back(std::move(rec));
    centroids_.push_back(probe);
    Assignment a{Assignment::Kind::NewIdentity, identities_.back().global_id,
                 std::nullopt};
    if (r.kind == RetrievalResult::Kind::RejectedAsNew) a.distance = r.distance;
    return a;
}

void OpenSetGallery::push_slot(std::size_t index, const Embedding& probe,
                               std::int64_t now_ms) {
    IdentityRecord& rec = identities_[index];
    // Slot timestamps stay non-decreasing even if a tolerated late event
    // arrives; the slot clamps to the newest time already stored.
    std::int64_t at = std::max(now_ms, rec.slots.back().inserted_at_ms);
    if (rec.slots.size() == static_cast<std::size_t>(cfg_.buffer_capacity)) {
        rec.slots.erase(rec.slots.begin());
    }
    rec.slots.push_back(BufferSlot{probe, at});
    rec.last_matched_at_ms = std::max(rec.last_matched_at_ms, at);
    recompute_centroid(index);
}

void OpenSetGallery::recompute_centroid(std::size_t index) {
    centroids_[index] = centroid(identities_[index]);
}

ExpiryReport OpenSetGallery::expire(std::int64_t now_ms) {
    ExpiryReport report;
    std::size_t out = 0;
    for (std::size_t i = 0; i < identities_.size(); ++i) {
        IdentityRecord& rec = identities_[i];
        // Slots are ordered by insertion time; expired ones form a prefix.
        std::size_t drop = 0;
        while (drop < rec.slots.size() &&
               now_ms - rec.slots[drop].inserted_at_ms > cfg_.ttl_ms) {
            ++drop;
        }
        if (drop == rec.slots.size()) {
            report.slots_removed += drop;
            report.identities_pruned.push_back(rec.global_id);
            continue;
        }
        if (drop > 0) {
            report.slots_removed += drop;
            rec.slots.erase(rec.slots.begin(), rec.slots.begin() + drop);
        }
        if (out != i) {
            identities_[out] = std::move(identities_[i]);
            centroids_[out] = std::move(centroids_[i]);
        }
        if (drop > 0) recompute_centroid(out);
        ++out;
    }
    identities_.resize(out);
    centroids_.resize(out);
    return report;
}

std::string OpenSetGallery::snapshot() const {
    json doc;
    doc["format"] = "osmt-gallery";
    doc["version"] = 1;
    doc["config"] = {{"d", cfg_.d},
                     {"k", cfg_.buffer_capacity},
                     {"th_emb", cfg_.th_emb},
                     {"ttl_ms", cfg_.ttl_ms}};
    doc["next_global_id"] = next_global_id_;
    json ids = json::array();
    for (const auto& rec : identities_) {
        json slots = json::array();
        for (const auto& slot : rec.slots) {
            slots.push_back({{"embedding", slot.embedding},
                             {"inserted_at_ms", slot.inserted_at_ms}});
        }
        ids.push_back({{"global_id", rec.global_id},
                       {"created_at_ms", rec.created_at_ms},
                       {"last_matched_at_ms", rec.last_matched_at_ms},
                       {"slots", std::move(slots)}});
    }
    doc["identities"] = std::move(ids);
    return doc.dump(2) + "\n";
}

OpenSetGallery OpenSetGallery::restore(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::exception& e) {
        throw DataError(std::string("snapshot: not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "osmt-gallery")
            throw DataError("snapshot: unexpected format tag");
        if (doc.at("version").get<int>() != 1)
            throw DataError("snapshot: unsupported version");
        const json& jc = doc.at("config");
        SystemConfig cfg;
        cfg.d = jc.at("d").get<int>();
        cfg.buffer_capacity = jc.at("k").get<int>();
        cfg.th_emb = jc.at("th_emb").get<double>();
        cfg.ttl_ms = jc.at("ttl_ms").get<std::int64_t>();
        if (cfg.d < 1 || cfg.buffer_capacity < 1 || !(cfg.th_emb >= 0.0) || cfg.ttl_ms <= 0)
            throw DataError("snapshot: invalid config echo");

        OpenSetGallery g(cfg);
        g.next_global_id_ = doc.at("next_global_id").get<std::uint64_t>();
        std::uint64_t prev_id = 0;
        bool first = true;
        for (const json& jr : doc.at("identities")) {
            IdentityRecord rec;
            rec.global_id = jr.at("global_id").get<std::uint64_t>();
            rec.created_at_ms = jr.at("created_at_ms").get<std::int64_t>();
            rec.last_matched_at_ms = jr.at("last_matched_at_ms").get<std::int64_t>();
            if (!first && rec.global_id <= prev_id)
                throw DataError("snapshot: global ids not strictly increasing");
            first = false;
            prev_id = rec.global_id;
            if (rec.global_id >= g.next_global_id_)
                throw DataError("snapshot: id counter collides with identity " +
                                std::to_string(rec.global_id));
            std::int64_t prev_ts = std::numeric_limits<std::int64_t>::min();
            for (const json& js : jr.at("slots")) {
                BufferSlot slot;
                slot.embedding = js.at("embedding").get<Embedding>();
                slot.inserted_at_ms = js.at("inserted_at_ms").get<std::int64_t>();
                if (slot.embedding.size() != static_cast<std::size_t>(cfg.d))
                    throw DataError("snapshot: slot dimension mismatch");
                if (!is_finite(slot.embedding))
                    throw DataError("snapshot: non-finite embedding");
                if (slot.inserted_at_ms < prev_ts)
                    throw DataError("snapshot: slot timestamps out of order");
                prev_ts = slot.inserted_at_ms;
                rec.slots.push_back(std::move(slot));
            }
            if (rec.slots.empty()) throw DataError("snapshot: identity with no slots");
            if (rec.slots.size() > static_cast<std::size_t>(cfg.buffer_capacity))
                throw DataError("snapshot: identity exceeds buffer capacity");
            g.identities_.push_back(std::move(rec));
            g.centroids_.push_back(centroid(g.identities_.back()));
        }
        return g;
    } catch (const json::exception& e) {
        throw DataError(std::string("snapshot: ") + e.what());
    }
}

double calibrate_th_emb(const std::vector<std::pair<std::string, Embedding>>& labeled) {
    // Class order follows first appearance; sums run in input order so the
    // result is reproducible bit-for-bit.
    std::vector<std::string> labels;
    std::vector<Embedding> sums;
    std::vector<std::size_t> counts;
    for (const auto& [label, emb] : labeled) {
        std::size_t idx = labels.size();
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) {
                idx = i;
                break;
            }
        }
        if (idx == labels.size()) {
            labels.push_back(label);
            sums.push_back(Embedding(emb.size(), 0.0));
            counts.push_back(0);
        }
        if (emb.size() != sums[idx].size())
            throw std::invalid_argument("calibrate_th_emb: dimension mismatch");
        for (std::size_t i = 0; i < emb.size(); ++i) sums[idx][i] += emb[i];
        counts[idx] += 1;
    }
    if (labels.size() < 2)
        throw std::invalid_argument("calibrate_th_emb: need at least 2 classes");

    std::vector<Embedding> cents(labels.size());
    for (std::size_t c = 0; c < labels.size(); ++c) {
        cents[c] = sums[c];
        for (auto& x : cents[c]) x /= static_cast<double>(counts[c]);
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cents.size(); ++c) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (std::size_t o = 0; o < cents.size(); ++o) {
            if (o == c) continue;
            min_dist = std::min(min_dist, l2_distance(cents[c], cents[o]));
        }
        total += min_dist;
    }
    return total / static_cast<double>(cents.size());
}

}  // namespace osmt
