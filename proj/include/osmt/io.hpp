#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "osmt/config.hpp"
#include "osmt/eval.hpp"
#include "osmt/orchestrator.hpp"
#include "osmt/sim.hpp"
#include "osmt/types.hpp"

namespace osmt::io {

// Line-delimited JSON, one record per line, first line a header carrying the
// format tag, version and embedding dimension so mismatches fail fast.
// Doubles are serialized round-trip exact; identical values give identical
// bytes.

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kEventsFormat = "osmt-events";
inline constexpr const char* kOutcomesFormat = "osmt-outcomes";

std::string event_to_line(const DetectionEvent& ev);
DetectionEvent event_from_line(const std::string& line);  // throws DataError

std::string outcome_to_line(const AssignmentOutcome& oc);
AssignmentOutcome outcome_from_line(const std::string& line);

std::string events_header(int d);
std::string outcomes_header(const SystemConfig& cfg);

struct EventsFile {
    int d = 0;
    std::vector<DetectionEvent> events;
};

// Parse errors cite the 1-based line number.
EventsFile read_events(std::istream& in);
void write_events(std::ostream& out, int d, const std::vector<DetectionEvent>& events);

struct OutcomesFile {
    SystemConfig config;
    std::vector<AssignmentOutcome> outcomes;
};

OutcomesFile read_outcomes(std::istream& in);
void write_outcomes(std::ostream& out, const SystemConfig& cfg,
                    const std::vector<AssignmentOutcome>& outcomes);

// Single-document JSON codecs (configs, scenario, report).
std::string system_config_to_json(const SystemConfig& cfg);
SystemConfig system_config_from_json(const std::string& text);

std::string scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const std::string& text);

std::string report_to_json(const MetricsReport& r);
std::string report_to_table(const MetricsReport& r);

std::string sweep_to_json(const std::vector<SweepRow>& rows);
std::string sweep_to_table(const std::vector<SweepRow>& rows);

}  // namespace osmt::io
