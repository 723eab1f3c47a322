#pragma once

#include "swarm/common/types.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace swarm::agents {

enum class Role { sketcher, prover, maintainer, math_reviewer, eng_reviewer, triage, scan, progress, status };
inline constexpr std::array<Role, 9> kAllRoles = {Role::sketcher,      Role::prover,       Role::maintainer,
                                                  Role::math_reviewer, Role::eng_reviewer, Role::triage,
                                                  Role::scan,          Role::progress,     Role::status};

enum class Outcome { merged, approved, max_revisions, max_iterations, no_pr, no_pr_blocked, aborted };
inline constexpr std::array<Outcome, 7> kAllOutcomes = {Outcome::merged,         Outcome::approved,
                                                        Outcome::max_revisions,  Outcome::max_iterations,
                                                        Outcome::no_pr,          Outcome::no_pr_blocked,
                                                        Outcome::aborted};

std::string_view role_name(Role r);
std::string_view outcome_name(Outcome o);
/// Display labels as used in rendered tables ("Math Reviewer", "No PR (blocked)").
std::string_view role_label(Role r);
std::string_view outcome_label(Outcome o);
std::optional<Role> parse_role(std::string_view s);
std::optional<Outcome> parse_outcome(std::string_view s);

bool authors_prs(Role r);
bool is_reviewer(Role r);

/// Default turn cap per role.
int default_max_turns(Role r);

/// Per-role calibration used by the token synthesiser: mean turns per session,
/// mean input and output tokens per session.
struct RoleProfile {
    double avg_turns = 0;
    double avg_in = 0;
    double avg_out = 0;
};
RoleProfile default_profile(Role r);

struct FileCounts {
    std::int64_t code = 0;
    std::int64_t coordination = 0;
};

struct AgentRecord {
    AgentId id;
    Role role = Role::prover;
    std::string task;
    Outcome outcome = Outcome::aborted;
    std::int64_t turns = 0;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    std::optional<PrId> pr;
    std::int64_t revisions = 0;
    FileCounts files_touched;
    std::int64_t code_net = 0;
    std::int64_t coordination_net = 0;
    SimTime start = 0;
    SimTime end = 0;
};

nlohmann::json to_json(const AgentRecord& r);
/// Throws Error(corrupt_state) on a malformed record.
AgentRecord record_from_json(const nlohmann::json& j);

/// Facts about how a session ended, reduced to one outcome. Earlier fields win.
struct OutcomeFacts {
    bool merged = false;
    bool approved = false;  // PR approved but never merged
    bool revision_cap = false;
    bool turn_cap = false;
    bool aborted = false;
    bool blocked = false;
};
Outcome classify_outcome(const OutcomeFacts& f);

}  // namespace swarm::agents
