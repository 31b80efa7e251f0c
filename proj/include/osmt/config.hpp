#pragma once

#include <cstdint>
#include <string>

namespace osmt {

enum class TieBreak {
    LowestGlobalId,
};

enum class ConflictPolicy {
    LatestWins,  // a fresh high-quality Re-ID result always wins
    Sticky,      // first binding is final until the track is pruned
    VoteLastN,   // rebind only on a strict majority of the last n results
};

std::string to_string(ConflictPolicy p);
ConflictPolicy conflict_policy_from_string(const std::string& s);

// Engine configuration. Defaults follow the deployed system: th_emb from the
// production calibration, th_score from the threshold study's best-accuracy
// row, d from the ResNet50 feature width.
struct SystemConfig {
    int d = 2048;
    int buffer_capacity = 8;  // K: embeddings kept per identity
    double th_emb = 19.95;    // gallery rejection distance
    double th_score = 0.91;   // Re-ID gate on detection score
    std::int64_t ttl_ms = 600'000;
    std::int64_t track_lost_ms = 1'000;
    TieBreak tie_break = TieBreak::LowestGlobalId;
    ConflictPolicy conflict_policy = ConflictPolicy::LatestWins;
    int vote_window = 3;  // n for VoteLastN
    std::uint64_t seed = 0;

    // Orchestrator knobs. Stream time is event time; expiry sweeps fire when
    // it advances past the last sweep by the interval below.
    std::int64_t expiry_sweep_interval_ms = 1'000;
    std::int64_t order_tolerance_ms = 0;
    bool auto_register = true;
};

// SystemConfig that passed validate_config. Constructible only through it.
class ValidatedConfig {
public:
    const SystemConfig& get() const { return cfg_; }
    const SystemConfig* operator->() const { return &cfg_; }

private:
    friend ValidatedConfig validate_config(const SystemConfig& cfg);
    explicit ValidatedConfig(SystemConfig cfg) : cfg_(std::move(cfg)) {}
    SystemConfig cfg_;
};

// Checks every invariant and names the first failing field in the error.
// Throws ConfigError.
ValidatedConfig validate_config(const SystemConfig& cfg);

}  // namespace osmt
