#include "swarm/agents/roles.hpp"

#include "swarm/common/error.hpp"

namespace swarm::agents {

std::string_view role_name(Role r) {
    switch (r) {
        case Role::sketcher: return "sketcher";
        case Role::prover: return "prover";
        case Role::maintainer: return "maintainer";
        case Role::math_reviewer: return "math-reviewer";
        case Role::eng_reviewer: return "eng-reviewer";
        case Role::triage: return "triage";
        case Role::scan: return "scan";
        case Role::progress: return "progress";
        case Role::status: return "status";
    }
    return "?";
}

std::string_view role_label(Role r) {
    switch (r) {
        case Role::sketcher: return "Sketcher";
        case Role::prover: return "Prover";
        case Role::maintainer: return "Maintainer";
        case Role::math_reviewer: return "Math Reviewer";
        case Role::eng_reviewer: return "Eng. Reviewer";
        case Role::triage: return "Triage";
        case Role::scan: return "Scan";
        case Role::progress: return "Progress";
        case Role::status: return "Status";
    }
    return "?";
}

std::string_view outcome_name(Outcome o) {
    switch (o) {
        case Outcome::merged: return "merged";
        case Outcome::approved: return "approved";
        case Outcome::max_revisions: return "max-revisions";
        case Outcome::max_iterations: return "max-iterations";
        case Outcome::no_pr: return "no-pr";
        case Outcome::no_pr_blocked: return "no-pr-blocked";
        case Outcome::aborted: return "aborted";
    }
    return "?";
}

std::string_view outcome_label(Outcome o) {
    switch (o) {
        case Outcome::merged: return "Merged";
        case Outcome::approved: return "Approved";
        case Outcome::max_revisions: return "Max Revisions";
        case Outcome::max_iterations: return "Max Iterations";
        case Outcome::no_pr: return "No PR";
        case Outcome::no_pr_blocked: return "No PR (blocked)";
        case Outcome::aborted: return "Aborted";
    }
    return "?";
}

std::optional<Role> parse_role(std::string_view s) {
    for (auto r : kAllRoles) {
        if (role_name(r) == s) return r;
    }
    return std::nullopt;
}

std::optional<Outcome> parse_outcome(std::string_view s) {
    for (auto o : kAllOutcomes) {
        if (outcome_name(o) == s) return o;
    }
    return std::nullopt;
}

bool is_reviewer(Role r) { return r == Role::math_reviewer || r == Role::eng_reviewer; }
bool authors_prs(Role r) { return !is_reviewer(r); }

int default_max_turns(Role r) {
    switch (r) {
        case Role::math_reviewer:
        case Role::eng_reviewer: return 128;
        case Role::sketcher:
        case Role::prover:
        case Role::progress:
        case Role::status: return 256;
        case Role::maintainer:
        case Role::triage:
        case Role::scan: return 512;
    }
    return 256;
}

RoleProfile default_profile(Role r) {
    // Mean turns and thousands of tokens per session, by role.
    switch (r) {
        case Role::sketcher: return {59.8, 71e3, 0.4e3};
        case Role::prover: return {50.0, 2874e3, 22.3e3};
        case Role::maintainer: return {125.9, 6923e3, 42.9e3};
        case Role::math_reviewer: return {21.7, 553e3, 6.3e3};
        case Role::eng_reviewer: return {12.7, 227e3, 3.0e3};
        case Role::triage: return {125.1, 4994e3, 23.8e3};
        case Role::scan: return {235.1, 14317e3, 31.3e3};
        case Role::progress:
        case Role::status: return {46.8, 2853e3, 10.4e3};
    }
    return {};
}

nlohmann::json to_json(const AgentRecord& r) {
    nlohmann::json j{{"agent", r.id.value},
                     {"role", role_name(r.role)},
                     {"task", r.task},
                     {"outcome", outcome_name(r.outcome)},
                     {"turns", r.turns},
                     {"tokens_in", r.tokens_in},
                     {"tokens_out", r.tokens_out},
                     {"revisions", r.revisions},
                     {"code_files", r.files_touched.code},
                     {"coordination_files", r.files_touched.coordination},
                     {"code_net", r.code_net},
                     {"coordination_net", r.coordination_net},
                     {"start", r.start},
                     {"end", r.end}};
    j["pr"] = r.pr ? nlohmann::json(r.pr->value) : nlohmann::json(nullptr);
    return j;
}

AgentRecord record_from_json(const nlohmann::json& j) {
    try {
        AgentRecord r;
        r.id = AgentId{j.at("agent").get<std::uint64_t>()};
        auto role = parse_role(j.at("role").get<std::string>());
        auto outcome = parse_outcome(j.at("outcome").get<std::string>());
        if (!role || !outcome) throw Error(Errc::corrupt_state, "unknown role or outcome in agent record");
        r.role = *role;
        r.outcome = *outcome;
        r.task = j.at("task").get<std::string>();
        r.turns = j.at("turns").get<std::int64_t>();
        r.tokens_in = j.at("tokens_in").get<std::int64_t>();
        r.tokens_out = j.at("tokens_out").get<std::int64_t>();
        r.revisions = j.at("revisions").get<std::int64_t>();
        r.files_touched.code = j.at("code_files").get<std::int64_t>();
        r.files_touched.coordination = j.at("coordination_files").get<std::int64_t>();
        r.code_net = j.at("code_net").get<std::int64_t>();
        r.coordination_net = j.at("coordination_net").get<std::int64_t>();
        r.start = j.at("start").get<SimTime>();
        r.end = j.at("end").get<SimTime>();
        if (!j.at("pr").is_null()) r.pr = PrId{j.at("pr").get<std::uint64_t>()};
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_state, std::string("bad agent record: ") + e.what());
    }
}

Outcome classify_outcome(const OutcomeFacts& f) {
    if (f.merged) return Outcome::merged;
    if (f.approved) return Outcome::approved;
    if (f.revision_cap) return Outcome::max_revisions;
    if (f.turn_cap) return Outcome::max_iterations;
    if (f.aborted) return Outcome::aborted;
    if (f.blocked) return Outcome::no_pr_blocked;
    return Outcome::no_pr;
}

}  // namespace swarm::agents
