// osmt: streaming open-set re-identification engine.
//
// Subcommands: simulate (synthetic labeled streams), run (stream through the
// orchestrator), eval (TTR/FTR report), sweep (th_score study), snapshot
// (inspect a gallery snapshot). Events and outcomes are line-delimited JSON
// with a header line; "-" means stdin/stdout.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "osmt/errors.hpp"
#include "osmt/eval.hpp"
#include "osmt/io.hpp"
#include "osmt/orchestrator.hpp"
#include "osmt/sim.hpp"

namespace {

using namespace osmt;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Input/output streams honoring the "-" convention.
class InStream {
public:
    explicit InStream(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_.good()) throw DataError("cannot open " + path);
        }
    }
    std::istream& get() { return file_.is_open() ? file_ : std::cin; }

private:
    std::ifstream file_;
};

class OutStream {
public:
    explicit OutStream(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_.good()) throw ConfigError("cannot write " + path);
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }
    bool is_stdout() const { return !file_.is_open(); }

private:
    std::ofstream file_;
};

std::uint64_t fnv1a(std::uint64_t hash, const std::string& bytes) {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

struct RunFlags {
    std::string config_path;
    std::string input = "-";
    std::string out = "-";
    std::string snapshot_out;
    std::string manifest_out;
    double th_score = 0.0;
    double th_emb = 0.0;
    std::int64_t ttl_ms = 0;
    int k = 0;
    std::uint64_t seed = 0;
    bool has_th_score = false;
    bool has_th_emb = false;
    bool has_ttl = false;
    bool has_k = false;
    bool has_seed = false;
};

SystemConfig resolve_config(const RunFlags& flags, int events_d) {
    SystemConfig cfg;
    bool from_file = !flags.config_path.empty();
    if (from_file) cfg = io::system_config_from_json(slurp(flags.config_path));
    if (flags.has_th_score) cfg.th_score = flags.th_score;
    if (flags.has_th_emb) cfg.th_emb = flags.th_emb;
    if (flags.has_ttl) cfg.ttl_ms = flags.ttl_ms;
    if (flags.has_k) cfg.buffer_capacity = flags.k;
    if (flags.has_seed) cfg.seed = flags.seed;
    if (!from_file) {
        cfg.d = events_d;  // no config file: adopt the stream's dimension
    } else if (cfg.d != events_d) {
        throw DataError("config d=" + std::to_string(cfg.d) + " but events carry d=" +
                        std::to_string(events_d));
    }
    return cfg;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, std::optional<int> identities,
                 std::optional<int> cameras, std::optional<std::int64_t> duration) {
    ScenarioConfig scenario;
    if (!scenario_path.empty()) scenario = io::scenario_from_json(slurp(scenario_path));
    if (seed) scenario.seed = *seed;
    if (identities) scenario.num_identities = *identities;
    if (cameras) scenario.num_cameras = *cameras;
    if (duration) scenario.duration_ms = *duration;

    SimOutput sim = generate(scenario);
    OutStream out(out_path);
    io::write_events(out.get(), scenario.d, sim.events);
    out.get().flush();
    std::ostream& info = out.is_stdout() ? std::cerr : std::cout;
    info << "events=" << sim.events.size() << " identities=" << scenario.num_identities
         << " cameras=" << scenario.num_cameras << " d=" << scenario.d << "\n";
    return 0;
}

int cmd_run(const RunFlags& flags) {
    InStream in(flags.input);
    std::istream& input = in.get();

    std::string line;
    if (!std::getline(input, line)) throw DataError("line 1: missing header");
    std::uint64_t input_hash = fnv1a(14695981039346656037ULL, line);
    int events_d = 0;
    try {
        nlohmann::json h = nlohmann::json::parse(line);
        if (h.at("format").get<std::string>() != io::kEventsFormat)
            throw DataError("line 1: not an events file");
        if (h.at("version").get<int>() != io::kFormatVersion)
            throw DataError("line 1: unsupported version");
        events_d = h.at("d").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("line 1: ") + e.what());
    }

    SystemConfig cfg = resolve_config(flags, events_d);
    ValidatedConfig validated = validate_config(cfg);
    Orchestrator orch(validated);

    OutStream out(flags.out);
    out.get() << io::outcomes_header(cfg) << '\n';

    std::map<std::string, std::uint64_t> last_frame;
    std::size_t line_no = 1;
    std::size_t count = 0;
    auto start = std::chrono::steady_clock::now();
    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty()) continue;
        input_hash = fnv1a(input_hash, line);
        DetectionEvent ev;
        try {
            ev = io::event_from_line(line);
            if (ev.embedding.has_value() &&
                ev.embedding->size() != static_cast<std::size_t>(events_d)) {
                throw DataError("embedding dimension " +
                                std::to_string(ev.embedding->size()) +
                                ", header says d=" + std::to_string(events_d));
            }
            auto [it, created] = last_frame.try_emplace(ev.camera_id, ev.frame_index);
            if (!created) {
                if (ev.frame_index < it->second)
                    throw DataError("frame_index regressed for camera " + ev.camera_id);
                it->second = ev.frame_index;
            }
            AssignmentOutcome oc = orch.process(ev);
            out.get() << io::outcome_to_line(oc) << '\n';
            ++count;
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    out.get().flush();
    auto elapsed = std::chrono::steady_clock::now() - start;
    double wall_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed)
            .count();
    double events_per_sec = wall_ms > 0.0 ? count / (wall_ms / 1000.0) : 0.0;

    std::string snapshot = orch.gallery().snapshot();
    if (!flags.snapshot_out.empty()) {
        OutStream snap(flags.snapshot_out);
        snap.get() << snapshot;
    }
    if (!flags.manifest_out.empty()) {
        nlohmann::json manifest;
        manifest["version"] = io::kFormatVersion;
        manifest["config"] = nlohmann::json::parse(io::system_config_to_json(cfg));
        manifest["input"] = flags.input;
        manifest["input_fnv1a"] = input_hash;
        manifest["outputs"] = {{"outcomes", flags.out},
                               {"snapshot", flags.snapshot_out}};
        manifest["event_count"] = count;
        manifest["gallery_identities"] = orch.gallery().size();
        manifest["timing"] = {{"wall_ms", wall_ms}, {"events_per_sec", events_per_sec}};
        OutStream mf(flags.manifest_out);
        mf.get() << manifest.dump(2) << "\n";
    }
    std::ostream& info = out.is_stdout() ? std::cerr : std::cout;
    char stats[160];
    std::snprintf(stats, sizeof(stats),
                  "events=%zu wall_ms=%.1f events_per_sec=%.0f identities=%zu\n", count,
                  wall_ms, events_per_sec, orch.gallery().size());
    info << stats;
    return 0;
}

int cmd_eval(const std::string& outcomes_path, const std::string& events_path,
             const std::string& out_path, bool as_json) {
    InStream oin(outcomes_path);
    io::OutcomesFile outcomes = io::read_outcomes(oin.get());
    InStream ein(events_path);
    io::EventsFile events = io::read_events(ein.get());

    ValidatedConfig cfg = validate_config(outcomes.config);
    MetricsReport r = report(judge(outcomes.outcomes, events.events, cfg));
    std::string json_text = io::report_to_json(r);
    if (!out_path.empty()) {
        OutStream out(out_path);
        out.get() << json_text;
    }
    if (as_json) {
        std::cout << json_text;
    } else {
        std::cout << io::report_to_table(r);
    }
    return 0;
}

int cmd_sweep(const RunFlags& flags, double th_from, double th_to, double th_step,
              const std::string& threshold_list, bool parallel,
              const std::string& out_path) {
    InStream in(flags.input);
    io::EventsFile events = io::read_events(in.get());
    SystemConfig cfg = resolve_config(flags, events.d);

    std::vector<double> thresholds;
    if (!threshold_list.empty()) {
        std::istringstream ss(threshold_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) thresholds.push_back(std::stod(item));
        }
    } else {
        if (th_step <= 0.0) throw ConfigError("--th-step must be > 0");
        for (double th = th_from; th >= th_to - 1e-12; th -= th_step) {
            thresholds.push_back(th);
        }
    }
    auto rows = sweep_th_score(events.events, validate_config(cfg), thresholds, parallel);
    if (!out_path.empty()) {
        OutStream out(out_path);
        out.get() << io::sweep_to_json(rows);
    }
    std::cout << io::sweep_to_table(rows);
    return 0;
}

int cmd_snapshot(const std::string& in_path, bool as_json) {
    OpenSetGallery g = OpenSetGallery::restore(slurp(in_path));
    std::size_t slots = 0;
    for (const auto& rec : g.identities()) slots += rec.slots.size();
    if (as_json) {
        nlohmann::json j;
        j["identities"] = g.size();
        j["slots"] = slots;
        j["next_global_id"] = g.next_global_id();
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "identities=" << g.size() << " slots=" << slots
                  << " next_global_id=" << g.next_global_id() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming open-set re-identification and tracking engine"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "generate a labeled synthetic stream");
    std::string scenario_path, sim_out = "-";
    std::uint64_t sim_seed = 0;
    int sim_ids = 0, sim_cams = 0;
    std::int64_t sim_duration = 0;
    sim_cmd->add_option("--scenario", scenario_path, "scenario config JSON");
    sim_cmd->add_option("--out", sim_out, "output events file, - for stdout");
    auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "override scenario seed");
    auto* sim_ids_opt = sim_cmd->add_option("--identities", sim_ids, "override num_identities");
    auto* sim_cams_opt = sim_cmd->add_option("--cameras", sim_cams, "override num_cameras");
    auto* sim_dur_opt = sim_cmd->add_option("--duration-ms", sim_duration, "override duration");

    // shared run/sweep flags
    RunFlags run_flags;
    auto add_engine_flags = [&](CLI::App* cmd, RunFlags& f) {
        cmd->add_option("--config", f.config_path, "engine config JSON");
        cmd->add_option("--input", f.input, "events file, - for stdin");
        struct Opts {
            CLI::Option* th_score;
            CLI::Option* th_emb;
            CLI::Option* ttl;
            CLI::Option* k;
            CLI::Option* seed;
        } opts{};
        opts.th_score = cmd->add_option("--th-score", f.th_score, "Re-ID gate threshold");
        opts.th_emb = cmd->add_option("--th-emb", f.th_emb, "gallery rejection distance");
        opts.ttl = cmd->add_option("--ttl-ms", f.ttl_ms, "embedding expiry horizon");
        opts.k = cmd->add_option("--k", f.k, "buffer capacity per identity");
        opts.seed = cmd->add_option("--seed", f.seed, "config seed echo");
        cmd->callback([&f, opts]() {
            f.has_th_score = opts.th_score->count() > 0;
            f.has_th_emb = opts.th_emb->count() > 0;
            f.has_ttl = opts.ttl->count() > 0;
            f.has_k = opts.k->count() > 0;
            f.has_seed = opts.seed->count() > 0;
        });
    };

    auto* run_cmd = app.add_subcommand("run", "stream events through the engine");
    add_engine_flags(run_cmd, run_flags);
    run_cmd->add_option("--out", run_flags.out, "outcomes file, - for stdout");
    run_cmd->add_option("--snapshot-out", run_flags.snapshot_out, "gallery snapshot file");
    run_cmd->add_option("--manifest-out", run_flags.manifest_out, "run manifest file");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score outcomes against ground truth");
    std::string eval_outcomes, eval_events, eval_out;
    bool eval_json = false;
    eval_cmd->add_option("--outcomes", eval_outcomes, "outcomes file")->required();
    eval_cmd->add_option("--events", eval_events, "labeled events file")->required();
    eval_cmd->add_option("--out", eval_out, "write the JSON report here");
    eval_cmd->add_flag("--json", eval_json, "print JSON instead of the table");

    // sweep
    RunFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "replay at several th_score values");
    add_engine_flags(sweep_cmd, sweep_flags);
    double th_from = 0.99, th_to = 0.90, th_step = 0.01;
    std::string threshold_list, sweep_out;
    bool parallel = false;
    sweep_cmd->add_option("--th-from", th_from, "sweep start (inclusive)");
    sweep_cmd->add_option("--th-to", th_to, "sweep end (inclusive)");
    sweep_cmd->add_option("--th-step", th_step, "sweep step");
    sweep_cmd->add_option("--thresholds", threshold_list, "explicit comma-separated list");
    sweep_cmd->add_flag("--parallel", parallel, "run sweep points on worker threads");
    sweep_cmd->add_option("--out", sweep_out, "write the JSON table here");

    // snapshot
    auto* snap_cmd = app.add_subcommand("snapshot", "inspect/validate a gallery snapshot");
    std::string snap_in;
    bool snap_json = false;
    snap_cmd->add_option("--in", snap_in, "snapshot file")->required();
    snap_cmd->add_flag("--json", snap_json, "print JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim_cmd->parsed()) {
            return cmd_simulate(
                scenario_path, sim_out,
                sim_seed_opt->count() ? std::optional<std::uint64_t>(sim_seed) : std::nullopt,
                sim_ids_opt->count() ? std::optional<int>(sim_ids) : std::nullopt,
                sim_cams_opt->count() ? std::optional<int>(sim_cams) : std::nullopt,
                sim_dur_opt->count() ? std::optional<std::int64_t>(sim_duration)
                                     : std::nullopt);
        }
        if (run_cmd->parsed()) return cmd_run(run_flags);
        if (eval_cmd->parsed()) return cmd_eval(eval_outcomes, eval_events, eval_out, eval_json);
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sweep_flags, th_from, th_to, th_step, threshold_list,
                             parallel, sweep_out);
        }
        if (snap_cmd->parsed()) return cmd_snapshot(snap_in, snap_json);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
