#include "swarm/common/error.hpp"

namespace swarm {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::duplicate_branch: return "duplicate-branch";
        case Errc::unknown_branch: return "unknown-branch";
        case Errc::unknown_commit: return "unknown-commit";
        case Errc::rate_limited: return "rate-limited";
        case Errc::nothing_to_commit: return "nothing-to-commit";
        case Errc::not_owner: return "not-owner";
        case Errc::dirty_worktree: return "dirty-worktree";
        case Errc::parse_error: return "parse-error";
        case Errc::unknown_issue: return "unknown-issue";
        case Errc::already_resolved: return "already-resolved";
        case Errc::unknown_tool: return "unknown-tool";
        case Errc::disallowed_command: return "disallowed-command";
        case Errc::write_access: return "write-access";
        case Errc::path_escape: return "path-escape";
        case Errc::not_found: return "not-found";
        case Errc::timeout: return "timeout";
        case Errc::empty_diff: return "empty-diff";
        case Errc::unknown_pr: return "unknown-pr";
        case Errc::corrupt_state: return "corrupt-state";
        case Errc::not_live: return "not-live";
        case Errc::unimplemented: return "unimplemented";
        case Errc::backend_failure: return "backend-failure";
        case Errc::wrong_phase: return "wrong-phase";
    }
    return "unknown";
}

}  // namespace swarm
