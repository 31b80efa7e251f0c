#include "osmt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "osmt/errors.hpp"

namespace osmt {

const char* to_string(ProbeJudgment::Verdict v) {
    switch (v) {
        case ProbeJudgment::Verdict::T2T: return "t2t";
        case ProbeJudgment::Verdict::T2Wrong: return "t2wrong";
        case ProbeJudgment::Verdict::T2NT: return "t2nt";
        case ProbeJudgment::Verdict::NT2T: return "nt2t";
        case ProbeJudgment::Verdict::NT2New: return "nt2new";
    }
    return "nt2new";
}

namespace {

// Reconstructed lifetime of one gallery identity: owner label fixed at
// creation, slot timestamps mirroring the engine's circular buffer.
struct IdentityTrace {
    std::string owner;
    std::deque<std::int64_t> slot_times;
};

bool alive_at(const IdentityTrace& trace, std::int64_t t, std::int64_t ttl_ms) {
    for (std::int64_t ts : trace.slot_times) {
        if (t - ts <= ttl_ms) return true;
    }
    return false;
}

}  // namespace

std::vector<ProbeJudgment> judge(const std::vector<AssignmentOutcome>& outcomes,
                                 const std::vector<DetectionEvent>& events,
                                 const ValidatedConfig& cfg) {
    if (outcomes.size() != events.size()) {
        throw DataError("judge: " + std::to_string(outcomes.size()) + " outcomes vs " +
                        std::to_string(events.size()) + " events");
    }
    const std::int64_t ttl = cfg->ttl_ms;
    const std::size_t capacity = static_cast<std::size_t>(cfg->buffer_capacity);

    std::unordered_map<std::uint64_t, IdentityTrace> traces;
    std::vector<ProbeJudgment> judgments;

    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const AssignmentOutcome& oc = outcomes[i];
        const DetectionEvent& ev = events[i];
        if (oc.camera_id != ev.camera_id || oc.frame_index != ev.frame_index ||
            oc.track_id != ev.track_id || oc.timestamp_ms != ev.timestamp_ms) {
            throw DataError("judge: outcome " + std::to_string(i) +
                            " does not echo event " + std::to_string(i));
        }
        if (oc.decision != AssignmentOutcome::Decision::Matched &&
            oc.decision != AssignmentOutcome::Decision::NewIdentity) {
            continue;  // Filtered/Maintained are not probes
        }
        if (!ev.gt_identity.has_value()) {
            throw DataError("judge: probe event " + std::to_string(i) +
                            " carries no gt_identity");
        }
        if (!oc.global_id.has_value()) {
            throw DataError("judge: probe outcome " + std::to_string(i) + " has no global_id");
        }
        const std::string& gt = *ev.gt_identity;
        const std::int64_t t = oc.timestamp_ms;

        // Probe class from gallery state before this probe's own effect.
        bool target = false;
        for (const auto& [gid, trace] : traces) {
            if (trace.owner == gt && alive_at(trace, t, ttl)) {
                target = true;
                break;
            }
        }

        ProbeJudgment j;
        j.event_index = i;
        j.camera_id = oc.camera_id;
        j.timestamp_ms = t;
        j.gt_identity = gt;
        j.probe_class = target ? ProbeJudgment::ProbeClass::Target
                               : ProbeJudgment::ProbeClass::NonTarget;

        if (oc.decision == AssignmentOutcome::Decision::Matched) {
            auto it = traces.find(*oc.global_id);
            if (it == traces.end()) {
                throw DataError("judge: outcome " + std::to_string(i) +
                                " matched unknown global id " +
                                std::to_string(*oc.global_id));
            }
            if (target) {
                j.verdict = it->second.owner == gt ? ProbeJudgment::Verdict::T2T
                                                   : ProbeJudgment::Verdict::T2Wrong;
            } else {
                j.verdict = ProbeJudgment::Verdict::NT2T;
            }
            // Mirror the engine's buffer: push, clamp, evict oldest when full.
            auto& slots = it->second.slot_times;
            std::int64_t at = slots.empty() ? t : std::max(t, slots.back());
            if (slots.size() == capacity) slots.pop_front();
            slots.push_back(at);
        } else {
            j.verdict = target ? ProbeJudgment::Verdict::T2NT
                               : ProbeJudgment::Verdict::NT2New;
            auto [it, created] = traces.try_emplace(*oc.global_id);
            if (!created) {
                throw DataError("judge: outcome " + std::to_string(i) +
                                " reuses global id " + std::to_string(*oc.global_id));
            }
            it->second.owner = gt;
            it->second.slot_times.push_back(t);
        }
        judgments.push_back(std::move(j));
    }
    return judgments;
}

MetricsReport report(const std::vector<ProbeJudgment>& judgments) {
    MetricsReport r;
    for (const auto& j : judgments) {
        switch (j.verdict) {
            case ProbeJudgment::Verdict::T2T: ++r.n_t2t; break;
            case ProbeJudgment::Verdict::T2Wrong: ++r.n_t2wrong; break;
            case ProbeJudgment::Verdict::T2NT: ++r.n_t2nt; break;
            case ProbeJudgment::Verdict::NT2T: ++r.n_nt2t; break;
            case ProbeJudgment::Verdict::NT2New: ++r.n_nt2new; break;
        }
    }
    r.n_t = r.n_t2t + r.n_t2wrong + r.n_t2nt;
    r.n_nt = r.n_nt2t + r.n_nt2new;
    if (r.n_t > 0) r.ttr = static_cast<double>(r.n_t2t) / static_cast<double>(r.n_t);
    if (r.n_nt > 0) r.ftr = static_cast<double>(r.n_nt2t) / static_cast<double>(r.n_nt);
    std::uint64_t attempted = r.n_t2t + r.n_t2wrong + r.n_nt2t;
    if (attempted > 0)
        r.precision = static_cast<double>(r.n_t2t) / static_cast<double>(attempted);
    std::uint64_t total = r.n_t + r.n_nt;
    if (total > 0)
        r.accuracy =
            static_cast<double>(r.n_t2t + r.n_nt2new) / static_cast<double>(total);
    return r;
}

namespace {

MetricsReport run_and_score(const std::vector<DetectionEvent>& events,
                            const SystemConfig& cfg) {
    ValidatedConfig v = validate_config(cfg);
    RunResult run = run_stream(events, v);
    return report(judge(run.outcomes, events, v));
}

}  // namespace

std::vector<SweepRow> sweep_th_score(const std::vector<DetectionEvent>& events,
                                     const ValidatedConfig& cfg,
                                     std::vector<double> thresholds, bool parallel) {
    if (thresholds.size() < 2) {
        throw std::invalid_argument("sweep_th_score: need at least 2 thresholds");
    }
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());

    std::vector<SweepRow> rows(thresholds.size());
    auto run_one = [&](std::size_t i) {
        SystemConfig point = cfg.get();
        point.th_score = thresholds[i];
        rows[i] = SweepRow{thresholds[i], run_and_score(events, point)};
    };
    if (parallel) {
        std::vector<std::future<void>> futures;
        futures.reserve(thresholds.size());
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            futures.push_back(std::async(std::launch::async, run_one, i));
        }
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < thresholds.size(); ++i) run_one(i);
    }
    return rows;
}

OperatingPoint operating_point(const std::vector<DetectionEvent>& events,
                               const ValidatedConfig& cfg, double target_ftr,
                               int grid_points, std::optional<double> grid_max) {
    if (!(target_ftr > 0.0 && target_ftr <= 1.0)) {
        throw std::invalid_argument("operating_point: target_ftr must be in (0,1]");
    }
    if (grid_points < 2) {
        throw std::invalid_argument("operating_point: need at least 2 grid points");
    }

    double hi = 0.0;
    if (grid_max.has_value()) {
        hi = *grid_max;
    } else {
        // Replay with th_emb = 0: every probe is rejected and echoes its
        // nearest-centroid distance, so the largest echo bounds the range
        // where the threshold can still change behavior.
        SystemConfig closed = cfg.get();
        closed.th_emb = 0.0;
        RunResult run = run_stream(events, validate_config(closed));
        for (const auto& oc : run.outcomes) {
            if (oc.distance.has_value()) hi = std::max(hi, *oc.distance);
        }
        if (hi == 0.0) hi = std::max(cfg->th_emb, 1.0);
    }

    std::vector<double> grid(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        grid[static_cast<std::size_t>(i)] =
            hi * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    }

    std::unordered_map<int, MetricsReport> measured;
    auto ftr_ok = [&](int i) {
        auto it = measured.find(i);
        if (it == measured.end()) {
            SystemConfig point = cfg.get();
            point.th_emb = grid[static_cast<std::size_t>(i)];
            it = measured.emplace(i, run_and_score(events, point)).first;
        }
        const auto& ftr = it->second.ftr;
        return !ftr.has_value() || *ftr <= target_ftr;
    };

    int lo = 0;
    int top = grid_points - 1;
    if (ftr_ok(top)) {
        lo = top;
    } else if (!ftr_ok(0)) {
        throw DataError("operating_point: no grid threshold achieves FTR <= " +
                        std::to_string(target_ftr));
    } else {
        // Invariant: grid[lo] satisfies the target, grid[top] does not.
        while (top - lo > 1) {
            int mid = lo + (top - lo) / 2;
            if (ftr_ok(mid)) {
                lo = mid;
            } else {
                top = mid;
            }
        }
    }
    OperatingPoint result;
    result.th_emb = grid[static_cast<std::size_t>(lo)];
    result.metrics = measured.at(lo);
    result.grid = std::move(grid);
    return result;
}

}  // namespace osmt
