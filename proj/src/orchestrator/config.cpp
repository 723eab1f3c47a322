#include "swarm/orchestrator/config.hpp"

#include "swarm/common/error.hpp"

namespace swarm::agents {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PolicySettings, misbehavior_rate, missed_task_rate, triage_batch, report_blockers)

}  // namespace swarm::agents

namespace swarm::orchestrator {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScenarioParams, chapters, def_targets_per_chapter, thm_targets_per_chapter,
                                   helpers_per_chapter, defs_per_chapter, exercise_targets, cited_targets,
                                   cited_helpers_per_chapter, duplicates, max_imports, max_deps)

int RunConfig::turn_cap(agents::Role role) const {
    auto it = max_turns.find(std::string(agents::role_name(role)));
    return it == max_turns.end() ? agents::default_max_turns(role) : it->second;
}

namespace {

void reject_unknown(const Json& given, const Json& defaults, const std::string& where) {
    for (auto it = given.begin(); it != given.end(); ++it) {
        if (!defaults.contains(it.key())) throw Error(Errc::invalid_argument, "unknown config key '" + where + it.key() + "'");
        const auto& d = defaults.at(it.key());
        if (it.value().is_object() && d.is_object() && it.key() != "max_turns") {
            reject_unknown(it.value(), d, where + it.key() + ".");
        }
    }
}

}  // namespace

Json to_json(const RunConfig& c) {
    Json review{{"pr_line_cap", c.policy.review.pr_line_cap},
                {"file_line_cap", c.policy.review.file_line_cap},
                {"noise", c.policy.review.noise},
                {"mode", agents::review_mode_name(c.policy.review.mode)}};
    Json policy = c.policy;
    policy["review"] = review;
    return Json{{"seed", c.seed},
                {"scenario", c.scenario},
                {"concurrency", c.concurrency},
                {"worktree_cap", c.worktree_cap},
                {"worktree_latency_min", c.worktree_latency_min},
                {"worktree_latency_max", c.worktree_latency_max},
                {"worktree_timeout", c.worktree_timeout},
                {"tick", c.tick},
                {"resume_jitter", c.resume_jitter},
                {"think_mean", c.think_mean},
                {"think_cap", c.think_cap},
                {"call_latency", c.call_latency},
                {"build_latency", c.build_latency},
                {"dag_mode", c.dag_mode},
                {"batch_size", c.batch_size},
                {"max_revisions", c.max_revisions},
                {"conflict_retries", c.conflict_retries},
                {"budget_sigma", c.budget_sigma},
                {"revision_fraction", c.revision_fraction},
                {"max_turns", c.max_turns},
                {"policy", policy},
                {"triage_ratio", c.triage_ratio},
                {"scan_ratio", c.scan_ratio},
                {"progress_ratio", c.progress_ratio},
                {"backoff_base", c.backoff_base},
                {"backoff_cap", c.backoff_cap},
                {"max_task_failures", c.max_task_failures},
                {"max_sim_time", c.max_sim_time}};
}

RunConfig config_from_json(const Json& given) {
    if (!given.is_object()) throw Error(Errc::invalid_argument, "config must be a JSON object");
    const auto defaults = to_json(RunConfig{});
    reject_unknown(given, defaults, "");
    auto j = defaults;
    j.merge_patch(given);
    try {
        RunConfig c;
        c.seed = j.at("seed").get<std::uint64_t>();
        c.scenario = j.at("scenario").get<ScenarioParams>();
        c.concurrency = j.at("concurrency").get<std::size_t>();
        c.worktree_cap = j.at("worktree_cap").get<std::size_t>();
        c.worktree_latency_min = j.at("worktree_latency_min").get<SimTime>();
        c.worktree_latency_max = j.at("worktree_latency_max").get<SimTime>();
        c.worktree_timeout = j.at("worktree_timeout").get<SimTime>();
        c.tick = j.at("tick").get<SimTime>();
        c.resume_jitter = j.at("resume_jitter").get<SimTime>();
        c.think_mean = j.at("think_mean").get<SimTime>();
        c.think_cap = j.at("think_cap").get<SimTime>();
        c.call_latency = j.at("call_latency").get<SimTime>();
        c.build_latency = j.at("build_latency").get<SimTime>();
        c.dag_mode = j.at("dag_mode").get<bool>();
        c.batch_size = j.at("batch_size").get<std::size_t>();
        c.max_revisions = j.at("max_revisions").get<int>();
        c.conflict_retries = j.at("conflict_retries").get<int>();
        c.budget_sigma = j.at("budget_sigma").get<double>();
        c.revision_fraction = j.at("revision_fraction").get<double>();
        c.max_turns = j.at("max_turns").get<std::map<std::string, int>>();
        for (const auto& [role, cap] : c.max_turns) {
            if (!agents::parse_role(role)) throw Error(Errc::invalid_argument, "unknown role '" + role + "' in max_turns");
            if (cap <= 0) throw Error(Errc::invalid_argument, "max_turns must be positive");
        }
        const auto& p = j.at("policy");
        c.policy = p.get<agents::PolicySettings>();
        const auto& r = p.at("review");
        c.policy.review.pr_line_cap = r.at("pr_line_cap").get<std::size_t>();
        c.policy.review.file_line_cap = r.at("file_line_cap").get<std::size_t>();
        c.policy.review.noise = r.at("noise").get<double>();
        auto mode = agents::parse_review_mode(r.at("mode").get<std::string>());
        if (!mode) throw Error(Errc::invalid_argument, "unknown review mode");
        c.policy.review.mode = *mode;
        c.triage_ratio = j.at("triage_ratio").get<double>();
        c.scan_ratio = j.at("scan_ratio").get<double>();
        c.progress_ratio = j.at("progress_ratio").get<double>();
        c.backoff_base = j.at("backoff_base").get<SimTime>();
        c.backoff_cap = j.at("backoff_cap").get<SimTime>();
        c.max_task_failures = j.at("max_task_failures").get<int>();
        c.max_sim_time = j.at("max_sim_time").get<SimTime>();
        if (c.concurrency == 0) throw Error(Errc::invalid_argument, "concurrency must be positive");
        if (c.worktree_cap == 0) throw Error(Errc::invalid_argument, "worktree_cap must be positive");
        if (c.tick <= 0) throw Error(Errc::invalid_argument, "tick must be positive");
        if (c.worktree_latency_max < c.worktree_latency_min) {
            throw Error(Errc::invalid_argument, "worktree latency bounds are reversed");
        }
        if (c.batch_size == 0) c.batch_size = 1;
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("bad config value: ") + e.what());
    }
}

}  // namespace swarm::orchestrator
