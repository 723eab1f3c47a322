#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swarm {

enum class Errc {
    invalid_argument,
    duplicate_branch,
    unknown_branch,
    unknown_commit,
    rate_limited,
    nothing_to_commit,
    not_owner,
    dirty_worktree,
    parse_error,
    unknown_issue,
    already_resolved,
    unknown_tool,
    disallowed_command,
    write_access,
    path_escape,
    not_found,
    timeout,
    empty_diff,
    unknown_pr,
    corrupt_state,
    not_live,
    unimplemented,
    backend_failure,
    wrong_phase,
};

std::string_view errc_name(Errc code) noexcept;

/// Error carrying a typed code. Errc::rate_limited and Errc::timeout are retriable.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }
    bool retriable() const noexcept { return code_ == Errc::rate_limited || code_ == Errc::timeout; }

private:
    Errc code_;
};

}  // namespace swarm
