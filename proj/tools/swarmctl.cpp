// swarmctl: run, resume and inspect swarm simulations.

#include "swarm/accounting/cost.hpp"
#include "swarm/accounting/report.hpp"
#include "swarm/common/error.hpp"
#include "swarm/control/api.hpp"
#include "swarm/orchestrator/run_state.hpp"
#include "swarm/orchestrator/scenario.hpp"
#include "swarm/orchestrator/simulation.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace swarm;
using Json = nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::not_found, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::backend_failure, "cannot write " + path.string());
    out << text;
}

Json read_json(const std::string& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::exception& e) {
        throw Error(Errc::parse_error, path + ": " + e.what());
    }
}

orchestrator::RunConfig load_config(const std::string& path) {
    if (path.empty() || path == "default") return {};
    return orchestrator::config_from_json(read_json(path));
}

/// Streams every event to `dir/events.jsonl` as it is written.
std::shared_ptr<control::EventLog> file_log(const fs::path& dir, bool append) {
    fs::create_directories(dir);
    auto file = std::make_shared<std::ofstream>(dir / "events.jsonl",
                                                append ? std::ios::binary | std::ios::app : std::ios::binary);
    if (!*file) throw Error(Errc::backend_failure, "cannot write " + (dir / "events.jsonl").string());
    auto log = std::make_shared<control::EventLog>();
    log->add_sink([file](const std::string& line) {
        *file << line;
        file->flush();
    });
    return log;
}

void write_report(const fs::path& dir, const accounting::RunReport& r) {
    fs::create_directories(dir);
    for (const auto& [name, text] : accounting::report_files(r)) write_file(dir / name, text);
}

/// Invariants checked after a run; each violation is one message.
std::vector<std::string> audit(const orchestrator::Simulation& sim) {
    std::vector<std::string> out = orchestrator::done_violations(sim);
    for (const auto& m : sim.merges()) {
        if (!m.main_ok) out.push_back("main does not build after " + m.pr.str());
    }
    const auto report = sim.report();
    if (!accounting::conserved(report)) out.push_back("token ledger does not balance");
    if (sim.finished() && static_cast<std::int64_t>(sim.spawned()) != report.agents) {
        out.push_back("spawns and outcomes differ: " + std::to_string(sim.spawned()) + " vs " +
                      std::to_string(report.agents));
    }
    return out;
}

int finish_run(orchestrator::Simulation& sim, const fs::path& out, std::optional<double> until_hours) {
    sim.run(until_hours ? std::optional<SimTime>(orchestrator::hours(*until_hours)) : std::nullopt);
    const auto report = sim.report();
    write_report(out, report);
    if (!sim.finished()) {
        write_file(out / "checkpoint.json", sim.checkpoint().dump() + "\n");
        std::cout << "checkpoint written to " << (out / "checkpoint.json").string() << "\n";
    }
    std::cout << "phase " << report.phase << ", " << report.merges << " merges, " << report.proved << "/"
              << report.obligations << " targets proved, " << report.agents << " agents finished\n";
    const auto problems = audit(sim);
    for (const auto& p : problems) std::cerr << "invariant violated: " << p << "\n";
    return problems.empty() ? 0 : kExitInvariant;
}

void print_cost(const accounting::CostEstimate& e) {
    std::cout.setf(std::ios::fixed);
    std::cout.precision(2);
    std::cout << "m (tokens per turn)    " << e.append_mean << "\n"
              << "L (final context)      " << e.final_context << "\n"
              << "input without caching  $" << e.input_nocache << "\n"
              << "input with caching     $" << e.input_cache << "\n"
              << "output                 $" << e.output << "\n"
              << "total without caching  $" << e.nocache << "\n"
              << "total with caching     $" << e.cache << "\n";
    std::cout.precision(4);
    std::cout << "savings factor         " << e.factor << "\n";
}

volatile std::sig_atomic_t g_interrupted = 0;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coordinate and inspect simulated agent swarms"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, log_path, target;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> until_hours;
    bool no_sessions = false;

    auto* run = app.add_subcommand("run", "Run a simulation from a config file");
    run->add_option("config", config_path, "Config file (JSON), or 'default'")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--until", until_hours, "Stop after this many simulated hours and write a checkpoint");

    auto* resume = app.add_subcommand("resume", "Continue a run from a checkpoint");
    resume->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required()->check(CLI::ExistingFile);
    resume->add_option("--out", out_dir, "Output directory; events are appended")->capture_default_str();
    resume->add_option("--until", until_hours, "Stop again after this many simulated hours");
    resume->add_flag("--no-sessions", no_sessions, "Finalize interrupted sessions instead of resuming them");

    accounting::SeriesOptions series;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Rebuild tables and series from an event log");
    report->add_option("eventlog", log_path, "Event log (JSON lines)")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Write report.json and CSV tables here");
    report->add_option("--window", series.window, "Agents per rolling window")->capture_default_str();
    report->add_option("--stride", series.stride, "Agents between rolling windows")->capture_default_str();
    report->add_option("--line-bin", series.line_bin, "Bin width of line-count histograms")->capture_default_str();
    report->add_option("--net-bin", series.net_bin, "Bin width of net-change histograms")->capture_default_str();

    accounting::CostParams cp;
    std::string cost_log;
    auto* cost = app.add_subcommand("cost", "Estimate prompt-caching savings");
    cost->add_option("eventlog", cost_log, "Take N, T and token totals from this log");
    cost->add_option("--N", cp.agents, "Number of agents");
    cost->add_option("--T", cp.avg_turns, "Average turns per agent");
    cost->add_option("--Cin", cp.input_tokens, "Total input tokens");
    cost->add_option("--Cout", cp.output_tokens, "Total output tokens");
    cost->add_option("--c-in", cp.prices.c_in, "Input price, micro-dollars per million tokens")->capture_default_str();
    cost->add_option("--c-out", cp.prices.c_out, "Output price, micro-dollars per million tokens")->capture_default_str();
    cost->add_option("--c-hit", cp.prices.c_hit, "Cache read price, micro-dollars per million tokens")
        ->capture_default_str();
    cost->add_option("--c-store", cp.prices.c_store, "Cache write price, micro-dollars per million tokens")
        ->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Check a config and its corpus; print the effective config");
    validate->add_option("config", config_path, "Config file (JSON), or 'default'")->required();

    std::string host = "127.0.0.1";
    int port = 8080;
    double pace = 0;
    auto* serve = app.add_subcommand("serve", "Serve the control API over a log or a live run");
    serve->add_option("source", target, "Event log path, or 'live'")->required();
    serve->add_option("--config", config_path, "Config for a live run");
    serve->add_option("--seed", seed, "Override the config seed");
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--pace", pace, "Simulated ms per wall ms for a live run; 0 runs flat out")
        ->capture_default_str();
    serve->add_option("--out", out_dir, "Where a live run writes its events")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto config = load_config(config_path);
            if (seed) config.seed = *seed;
            auto log = file_log(out_dir, false);
            orchestrator::Simulation sim(config, log);
            return finish_run(sim, out_dir, until_hours);
        }
        if (*resume) {
            const auto checkpoint = read_json(checkpoint_path);
            auto log = file_log(out_dir, true);
            auto sim = orchestrator::Simulation::resume(checkpoint, {!no_sessions}, log);
            return finish_run(*sim, out_dir, until_hours);
        }
        if (*report) {
            const auto events = control::parse_jsonl(read_file(log_path), true);
            const auto r = accounting::report_from_log(events, series);
            std::cout << accounting::render_text(r.by_role) << "\n" << accounting::render_text(r.by_outcome);
            std::cout << "\n" << r.merges << " merges, " << r.proved << "/" << r.obligations << " targets proved\n";
            for (const auto& g : r.series.gaps) {
                std::cout << "gap in log: seq " << g.after_seq << " then " << g.next_seq << "\n";
            }
            if (!report_out.empty()) write_report(report_out, r);
            return accounting::conserved(r) ? 0 : kExitInvariant;
        }
        if (*cost) {
            if (!cost_log.empty()) {
                const auto r = accounting::report_from_log(control::parse_jsonl(read_file(cost_log), true));
                const auto& t = r.by_role.total;
                cp.agents = static_cast<double>(t.count);
                cp.avg_turns = t.count ? static_cast<double>(t.turns) / static_cast<double>(t.count) : 0;
                cp.input_tokens = static_cast<double>(t.tokens_in);
                cp.output_tokens = static_cast<double>(t.tokens_out);
            }
            print_cost(accounting::estimate_cache_cost(cp));
            const auto be = accounting::break_even_turns(cp.prices);
            std::cout << "break-even turns       " << be.num << "/" << be.den << "\n";
            return 0;
        }
        if (*validate) {
            const auto config = load_config(config_path);
            const auto scenario = orchestrator::generate_scenario(config.scenario, config.seed);
            const auto problems = orchestrator::validate_scenario(scenario);
            std::size_t excluded = 0;
            for (const auto& t : scenario.targets) excluded += (t.cited || t.exercise) ? 1 : 0;
            Json out{{"config", orchestrator::to_json(config)},
                     {"corpus", Json{{"chapters", scenario.chapters.size()},
                                     {"targets", scenario.targets.size()},
                                     {"excluded", excluded},
                                     {"duplicates", scenario.aliases.size()}}},
                     {"problems", problems}};
            std::cout << out.dump(2) << "\n";
            return problems.empty() ? 0 : kExitUsage;
        }
        if (*serve) {
            std::shared_ptr<control::ApiService> api;
            std::shared_ptr<control::LiveRun> live;
            if (target == "live") {
                auto config = load_config(config_path);
                if (seed) config.seed = *seed;
                live = std::make_shared<control::LiveRun>(
                    std::make_unique<orchestrator::Simulation>(config, file_log(out_dir, false)));
                api = std::make_shared<control::ApiService>(live);
            } else {
                api = std::make_shared<control::ApiService>(control::parse_jsonl(read_file(target)));
            }
            control::HttpServer server(api);
            if (live) live->start(pace);
            std::signal(SIGINT, [](int) { g_interrupted = 1; });
            const int bound = server.start(host, port);
            std::cout << "serving on http://" << host << ":" << bound << "/api/state\n" << std::flush;
            while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
            if (live) {
                live->stop();
                live->join();
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
