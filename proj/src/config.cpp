#include "osmt/config.hpp"

#include "osmt/errors.hpp"

namespace osmt {

std::string to_string(ConflictPolicy p) {
    switch (p) {
        case ConflictPolicy::LatestWins: return "latest_wins";
        case ConflictPolicy::Sticky: return "sticky";
        case ConflictPolicy::VoteLastN: return "vote_last_n";
    }
    return "latest_wins";
}

ConflictPolicy conflict_policy_from_string(const std::string& s) {
    if (s == "latest_wins") return ConflictPolicy::LatestWins;
    if (s == "sticky") return ConflictPolicy::Sticky;
    if (s == "vote_last_n") return ConflictPolicy::VoteLastN;
    throw ConfigError("unknown conflict_policy \"" + s + "\"");
}

ValidatedConfig validate_config(const SystemConfig& cfg) {
    if (cfg.buffer_capacity < 1) throw ConfigError("K must be >= 1");
    if (cfg.d < 1) throw ConfigError("d must be >= 1");
    if (!(cfg.th_emb >= 0.0)) throw ConfigError("th_emb must be >= 0");
    if (!(cfg.th_score >= 0.0 && cfg.th_score <= 1.0))
        throw ConfigError("th_score must be in [0,1]");
    if (cfg.ttl_ms <= 0) throw ConfigError("ttl_ms must be > 0");
    if (cfg.track_lost_ms <= 0) throw ConfigError("track_lost_ms must be > 0");
    if (cfg.vote_window < 1) throw ConfigError("vote_window must be >= 1");
    if (cfg.expiry_sweep_interval_ms <= 0)
        throw ConfigError("expiry_sweep_interval_ms must be > 0");
    if (cfg.order_tolerance_ms < 0)
        throw ConfigError("order_tolerance_ms must be >= 0");
    return ValidatedConfig(cfg);
}

}  // namespace osmt
