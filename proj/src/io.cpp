#include "osmt/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "osmt/errors.hpp"

namespace osmt::io {

using nlohmann::json;

namespace {

std::string fmt3(const std::optional<double>& v) {
    if (!v.has_value()) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& what) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError(what + ": unknown field \"" + key + "\"");
    }
}

}  // namespace

std::string event_to_line(const DetectionEvent& ev) {
    json j;
    j["camera_id"] = ev.camera_id;
    j["frame_index"] = ev.frame_index;
    j["timestamp_ms"] = ev.timestamp_ms;
    j["track_id"] = ev.track_id;
    j["bbox"] = {ev.bbox.x, ev.bbox.y, ev.bbox.w, ev.bbox.h};
    j["score"] = ev.score;
    if (ev.embedding.has_value()) j["embedding"] = *ev.embedding;
    if (ev.gt_identity.has_value()) j["gt_identity"] = *ev.gt_identity;
    return j.dump();
}

DetectionEvent event_from_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(std::string("not valid JSON: ") + e.what());
    }
    try {
        DetectionEvent ev;
        ev.camera_id = j.at("camera_id").get<std::string>();
        ev.frame_index = j.at("frame_index").get<std::uint64_t>();
        ev.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
        ev.track_id = j.at("track_id").get<std::uint64_t>();
        const json& b = j.at("bbox");
        if (!b.is_array() || b.size() != 4) throw DataError("bbox must be [x,y,w,h]");
        ev.bbox = BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                       b[3].get<double>()};
        ev.score = j.at("score").get<double>();
        if (j.contains("embedding")) ev.embedding = j["embedding"].get<Embedding>();
        if (j.contains("gt_identity")) ev.gt_identity = j["gt_identity"].get<std::string>();

        if (ev.timestamp_ms < 0) throw DataError("timestamp_ms must be >= 0");
        if (!(ev.score >= 0.0 && ev.score <= 1.0))
            throw DataError("score must be in [0,1]");
        if (!(ev.bbox.w > 0.0 && ev.bbox.h > 0.0))
            throw DataError("bbox w and h must be > 0");
        if (ev.embedding.has_value() && !is_finite(*ev.embedding))
            throw DataError("embedding has non-finite values");
        return ev;
    } catch (const json::exception& e) {
        throw DataError(e.what());
    }
}

std::string outcome_to_line(const AssignmentOutcome& oc) {
    json j;
    j["camera_id"] = oc.camera_id;
    j["frame_index"] = oc.frame_index;
    j["timestamp_ms"] = oc.timestamp_ms;
    j["track_id"] = oc.track_id;
    j["decision"] = to_string(oc.decision);
    if (oc.global_id.has_value()) j["global_id"] = *oc.global_id;
    if (oc.distance.has_value()) j["distance"] = *oc.distance;
    if (oc.binding.has_value()) {
        j["binding"] = to_string(oc.binding->kind);
        j["binding_gid"] = oc.binding->bound_gid;
        if (oc.binding->kind == BindingOutcome::Kind::Switched ||
            oc.binding->kind == BindingOutcome::Kind::HeldByPolicy) {
            j["binding_prev"] = oc.binding->previous_gid;
        }
    }
    if (!oc.warnings.empty()) j["warnings"] = oc.warnings;
    return j.dump();
}

namespace {

AssignmentOutcome::Decision decision_from_string(const std::string& s) {
    if (s == "filtered") return AssignmentOutcome::Decision::Filtered;
    if (s == "maintained") return AssignmentOutcome::Decision::Maintained;
    if (s == "matched") return AssignmentOutcome::Decision::Matched;
    if (s == "new_identity") return AssignmentOutcome::Decision::NewIdentity;
    throw DataError("unknown decision \"" + s + "\"");
}

BindingOutcome::Kind binding_from_string(const std::string& s) {
    if (s == "first_bind") return BindingOutcome::Kind::FirstBind;
    if (s == "confirmed") return BindingOutcome::Kind::Confirmed;
    if (s == "switched") return BindingOutcome::Kind::Switched;
    if (s == "held_by_policy") return BindingOutcome::Kind::HeldByPolicy;
    throw DataError("unknown binding \"" + s + "\"");
}

}  // namespace

AssignmentOutcome outcome_from_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(std::string("not valid JSON: ") + e.what());
    }
    try {
        AssignmentOutcome oc;
        oc.camera_id = j.at("camera_id").get<std::string>();
        oc.frame_index = j.at("frame_index").get<std::uint64_t>();
        oc.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
        oc.track_id = j.at("track_id").get<std::uint64_t>();
        oc.decision = decision_from_string(j.at("decision").get<std::string>());
        if (j.contains("global_id")) oc.global_id = j["global_id"].get<std::uint64_t>();
        if (j.contains("distance")) oc.distance = j["distance"].get<double>();
        if (j.contains("binding")) {
            BindingOutcome b;
            b.kind = binding_from_string(j["binding"].get<std::string>());
            b.bound_gid = j.at("binding_gid").get<std::uint64_t>();
            if (j.contains("binding_prev"))
                b.previous_gid = j["binding_prev"].get<std::uint64_t>();
            oc.binding = b;
        }
        if (j.contains("warnings"))
            oc.warnings = j["warnings"].get<std::vector<std::string>>();
        return oc;
    } catch (const json::exception& e) {
        throw DataError(e.what());
    }
}

std::string events_header(int d) {
    json j;
    j["format"] = kEventsFormat;
    j["version"] = kFormatVersion;
    j["d"] = d;
    return j.dump();
}

std::string outcomes_header(const SystemConfig& cfg) {
    json j;
    j["format"] = kOutcomesFormat;
    j["version"] = kFormatVersion;
    j["config"] = json::parse(system_config_to_json(cfg));
    return j.dump();
}

EventsFile read_events(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("line 1: missing header");
    EventsFile out;
    try {
        json h = json::parse(line);
        if (h.at("format").get<std::string>() != kEventsFormat)
            throw DataError("line 1: not an events file");
        if (h.at("version").get<int>() != kFormatVersion)
            throw DataError("line 1: unsupported version");
        out.d = h.at("d").get<int>();
        if (out.d < 1) throw DataError("line 1: d must be >= 1");
    } catch (const json::exception& e) {
        throw DataError(std::string("line 1: ") + e.what());
    }

    std::map<std::string, std::uint64_t> last_frame;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        DetectionEvent ev;
        try {
            ev = event_from_line(line);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (ev.embedding.has_value() &&
            ev.embedding->size() != static_cast<std::size_t>(out.d)) {
            throw DataError("line " + std::to_string(line_no) + ": embedding dimension " +
                            std::to_string(ev.embedding->size()) + ", header says d=" +
                            std::to_string(out.d));
        }
        auto [it, created] = last_frame.try_emplace(ev.camera_id, ev.frame_index);
        if (!created) {
            if (ev.frame_index < it->second) {
                throw DataError("line " + std::to_string(line_no) +
                                ": frame_index regressed for camera " + ev.camera_id);
            }
            it->second = ev.frame_index;
        }
        out.events.push_back(std::move(ev));
    }
    return out;
}

void write_events(std::ostream& out, int d, const std::vector<DetectionEvent>& events) {
    out << events_header(d) << '\n';
    for (const auto& ev : events) out << event_to_line(ev) << '\n';
}

OutcomesFile read_outcomes(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("line 1: missing header");
    OutcomesFile out;
    try {
        json h = json::parse(line);
        if (h.at("format").get<std::string>() != kOutcomesFormat)
            throw DataError("line 1: not an outcomes file");
        if (h.at("version").get<int>() != kFormatVersion)
            throw DataError("line 1: unsupported version");
        out.config = system_config_from_json(h.at("config").dump());
    } catch (const json::exception& e) {
        throw DataError(std::string("line 1: ") + e.what());
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.outcomes.push_back(outcome_from_line(line));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_outcomes(std::ostream& out, const SystemConfig& cfg,
                    const std::vector<AssignmentOutcome>& outcomes) {
    out << outcomes_header(cfg) << '\n';
    for (const auto& oc : outcomes) out << outcome_to_line(oc) << '\n';
}

std::string system_config_to_json(const SystemConfig& cfg) {
    json j;
    j["d"] = cfg.d;
    j["k"] = cfg.buffer_capacity;
    j["th_emb"] = cfg.th_emb;
    j["th_score"] = cfg.th_score;
    j["ttl_ms"] = cfg.ttl_ms;
    j["track_lost_ms"] = cfg.track_lost_ms;
    j["tie_break"] = "lowest_global_id";
    j["conflict_policy"] = to_string(cfg.conflict_policy);
    j["vote_window"] = cfg.vote_window;
    j["seed"] = cfg.seed;
    j["expiry_sweep_interval_ms"] = cfg.expiry_sweep_interval_ms;
    j["order_tolerance_ms"] = cfg.order_tolerance_ms;
    j["auto_register"] = cfg.auto_register;
    return j.dump();
}

SystemConfig system_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    try {
        check_keys(j,
                   {"d", "k", "th_emb", "th_score", "ttl_ms", "track_lost_ms",
                    "tie_break", "conflict_policy", "vote_window", "seed",
                    "expiry_sweep_interval_ms", "order_tolerance_ms", "auto_register"},
                   "config");
        SystemConfig cfg;
        if (j.contains("d")) cfg.d = j["d"].get<int>();
        if (j.contains("k")) cfg.buffer_capacity = j["k"].get<int>();
        if (j.contains("th_emb")) cfg.th_emb = j["th_emb"].get<double>();
        if (j.contains("th_score")) cfg.th_score = j["th_score"].get<double>();
        if (j.contains("ttl_ms")) cfg.ttl_ms = j["ttl_ms"].get<std::int64_t>();
        if (j.contains("track_lost_ms"))
            cfg.track_lost_ms = j["track_lost_ms"].get<std::int64_t>();
        if (j.contains("tie_break") &&
            j["tie_break"].get<std::string>() != "lowest_global_id")
            throw ConfigError("config: unknown tie_break");
        if (j.contains("conflict_policy"))
            cfg.conflict_policy =
                conflict_policy_from_string(j["conflict_policy"].get<std::string>());
        if (j.contains("vote_window")) cfg.vote_window = j["vote_window"].get<int>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("expiry_sweep_interval_ms"))
            cfg.expiry_sweep_interval_ms =
                j["expiry_sweep_interval_ms"].get<std::int64_t>();
        if (j.contains("order_tolerance_ms"))
            cfg.order_tolerance_ms = j["order_tolerance_ms"].get<std::int64_t>();
        if (j.contains("auto_register")) cfg.auto_register = j["auto_register"].get<bool>();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["num_identities"] = cfg.num_identities;
    j["num_cameras"] = cfg.num_cameras;
    j["duration_ms"] = cfg.duration_ms;
    j["frame_interval_ms"] = cfg.frame_interval_ms;
    j["d"] = cfg.d;
    j["class_separation"] = cfg.class_separation;
    j["noise_sigma"] = cfg.noise_sigma;
    j["occlusion_rate"] = cfg.occlusion_rate;
    j["occlusion_noise_factor"] = cfg.occlusion_noise_factor;
    j["score_clean"] = {{"mean", cfg.score_clean.mean}, {"sigma", cfg.score_clean.sigma}};
    j["score_occluded"] =
        {{"mean", cfg.score_occluded.mean}, {"sigma", cfg.score_occluded.sigma}};
    j["dwell_ms"] = cfg.dwell_ms;
    json changes = json::array();
    for (const auto& c : cfg.clothing_changes) {
        changes.push_back({{"identity", c.identity},
                           {"time_ms", c.time_ms},
                           {"magnitude", c.magnitude}});
    }
    j["clothing_changes"] = std::move(changes);
    json windows = json::array();
    for (const auto& w : cfg.absence_windows) {
        windows.push_back({{"identity", w.identity},
                           {"start_ms", w.start_ms},
                           {"end_ms", w.end_ms}});
    }
    j["absence_windows"] = std::move(windows);
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: not valid JSON: ") + e.what());
    }
    try {
        check_keys(j,
                   {"num_identities", "num_cameras", "duration_ms", "frame_interval_ms",
                    "d", "class_separation", "noise_sigma", "occlusion_rate",
                    "occlusion_noise_factor", "score_clean", "score_occluded", "dwell_ms",
                    "clothing_changes", "absence_windows", "seed"},
                   "scenario");
        ScenarioConfig cfg;
        if (j.contains("num_identities")) cfg.num_identities = j["num_identities"].get<int>();
        if (j.contains("num_cameras")) cfg.num_cameras = j["num_cameras"].get<int>();
        if (j.contains("duration_ms")) cfg.duration_ms = j["duration_ms"].get<std::int64_t>();
        if (j.contains("frame_interval_ms"))
            cfg.frame_interval_ms = j["frame_interval_ms"].get<std::int64_t>();
        if (j.contains("d")) cfg.d = j["d"].get<int>();
        if (j.contains("class_separation"))
            cfg.class_separation = j["class_separation"].get<double>();
        if (j.contains("noise_sigma")) cfg.noise_sigma = j["noise_sigma"].get<double>();
        if (j.contains("occlusion_rate"))
            cfg.occlusion_rate = j["occlusion_rate"].get<double>();
        if (j.contains("occlusion_noise_factor"))
            cfg.occlusion_noise_factor = j["occlusion_noise_factor"].get<double>();
        if (j.contains("score_clean")) {
            cfg.score_clean.mean = j["score_clean"].at("mean").get<double>();
            cfg.score_clean.sigma = j["score_clean"].at("sigma").get<double>();
        }
        if (j.contains("score_occluded")) {
            cfg.score_occluded.mean = j["score_occluded"].at("mean").get<double>();
            cfg.score_occluded.sigma = j["score_occluded"].at("sigma").get<double>();
        }
        if (j.contains("dwell_ms")) cfg.dwell_ms = j["dwell_ms"].get<std::int64_t>();
        if (j.contains("clothing_changes")) {
            for (const json& c : j["clothing_changes"]) {
                cfg.clothing_changes.push_back(ClothingChange{
                    c.at("identity").get<int>(), c.at("time_ms").get<std::int64_t>(),
                    c.at("magnitude").get<double>()});
            }
        }
        if (j.contains("absence_windows")) {
            for (const json& w : j["absence_windows"]) {
                cfg.absence_windows.push_back(AbsenceWindow{
                    w.at("identity").get<int>(), w.at("start_ms").get<std::int64_t>(),
                    w.at("end_ms").get<std::int64_t>()});
            }
        }
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

namespace {

json report_to_json_obj(const MetricsReport& r) {
    json j;
    j["counts"] = {{"n_t", r.n_t},         {"n_nt", r.n_nt},
                   {"n_t2t", r.n_t2t},     {"n_nt2t", r.n_nt2t},
                   {"n_t2wrong", r.n_t2wrong}, {"n_t2nt", r.n_t2nt},
                   {"n_nt2new", r.n_nt2new}};
    if (r.ttr.has_value()) j["ttr"] = *r.ttr;
    if (r.ftr.has_value()) j["ftr"] = *r.ftr;
    if (r.precision.has_value()) j["precision"] = *r.precision;
    if (r.accuracy.has_value()) j["accuracy"] = *r.accuracy;
    return j;
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
    return report_to_json_obj(r).dump(2) + "\n";
}

std::string report_to_table(const MetricsReport& r) {
    char buf[256];
    std::string out;
    out += "    N_t   N_nt  N_t2t N_nt2t  precision  accuracy     TTR     FTR\n";
    std::snprintf(buf, sizeof(buf), "%7llu %6llu %6llu %6llu  %9s %9s %7s %7s\n",
                  static_cast<unsigned long long>(r.n_t),
                  static_cast<unsigned long long>(r.n_nt),
                  static_cast<unsigned long long>(r.n_t2t),
                  static_cast<unsigned long long>(r.n_nt2t), fmt3(r.precision).c_str(),
                  fmt3(r.accuracy).c_str(), fmt3(r.ttr).c_str(), fmt3(r.ftr).c_str());
    out += buf;
    return out;
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json j = report_to_json_obj(row.metrics);
        j["th_score"] = row.th_score;
        arr.push_back(std::move(j));
    }
    json doc;
    doc["rows"] = std::move(arr);
    return doc.dump(2) + "\n";
}

std::string sweep_to_table(const std::vector<SweepRow>& rows) {
    std::string out = "  th_score  precision  accuracy     TTR     FTR\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "  %8.2f  %9s %9s %7s %7s\n", row.th_score,
                      fmt3(row.metrics.precision).c_str(),
                      fmt3(row.metrics.accuracy).c_str(), fmt3(row.metrics.ttr).c_str(),
                      fmt3(row.metrics.ftr).c_str());
        out += buf;
    }
    return out;
}

}  // namespace osmt::io
