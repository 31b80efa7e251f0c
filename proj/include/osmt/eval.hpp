#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osmt/config.hpp"
#include "osmt/orchestrator.hpp"
#include "osmt/types.hpp"

namespace osmt {

// Open-set verdict for one probe (a Matched or NewIdentity outcome).
// A probe is "target" iff its ground-truth identity owns at least one
// unexpired gallery identity at probe time; a global id is owned, for its
// whole lifetime, by the identity whose probe created it.
struct ProbeJudgment {
    enum class ProbeClass { Target, NonTarget };
    enum class Verdict {
        T2T,     // target matched to an owned id
        T2Wrong, // target matched to someone else's id
        T2NT,    // target rejected / enrolled as new
        NT2T,    // non-target matched to any id (false target)
        NT2New,  // non-target enrolled as new (correct rejection)
    };
    std::size_t event_index = 0;  // into the outcome/event sequence
    std::string camera_id;
    std::int64_t timestamp_ms = 0;
    std::string gt_identity;
    ProbeClass probe_class = ProbeClass::NonTarget;
    Verdict verdict = Verdict::NT2New;
};

const char* to_string(ProbeJudgment::Verdict v);

struct MetricsReport {
    std::uint64_t n_t = 0;      // target probes
    std::uint64_t n_nt = 0;     // non-target probes
    std::uint64_t n_t2t = 0;    // correct target matches
    std::uint64_t n_nt2t = 0;   // false target matches
    std::uint64_t n_t2wrong = 0;
    std::uint64_t n_t2nt = 0;
    std::uint64_t n_nt2new = 0;

    // Absent when the denominator is empty, never reported as 0/0.
    std::optional<double> ttr;        // n_t2t / n_t
    std::optional<double> ftr;        // n_nt2t / n_nt
    std::optional<double> precision;  // t2t / (t2t + t2wrong + nt2t)
    std::optional<double> accuracy;   // (t2t + nt2new) / total probes
};

// Replays the outcome stream against the labeled events. Outcomes must be
// 1:1, in order, with the events that produced them (run_stream output);
// throws DataError on misalignment. Pure: no engine state involved.
std::vector<ProbeJudgment> judge(const std::vector<AssignmentOutcome>& outcomes,
                                 const std::vector<DetectionEvent>& events,
                                 const ValidatedConfig& cfg);

MetricsReport report(const std::vector<ProbeJudgment>& judgments);

struct SweepRow {
    double th_score = 0.0;
    MetricsReport metrics;
};

// Full orchestrator replay per threshold, identical stream, th_emb held at
// its configured value. Rows ordered by threshold descending. `parallel`
// runs sweep points on worker threads; results are identical to serial.
std::vector<SweepRow> sweep_th_score(const std::vector<DetectionEvent>& events,
                                     const ValidatedConfig& cfg,
                                     std::vector<double> thresholds,
                                     bool parallel = false);

struct OperatingPoint {
    double th_emb = 0.0;
    MetricsReport metrics;   // at the returned threshold
    std::vector<double> grid;  // thresholds the bisection searched over
};

// Largest grid th_emb whose measured FTR stays within target_ftr, found by
// bisection over replays of the same stream. The default grid spans
// [0, max probe min-distance observed in an unbounded-threshold replay].
// Throws DataError if no grid point achieves the target.
OperatingPoint operating_point(const std::vector<DetectionEvent>& events,
                               const ValidatedConfig& cfg, double target_ftr,
                               int grid_points = 33,
                               std::optional<double> grid_max = std::nullopt);

}  // namespace osmt
