#pragma once

#include "swarm/toolhost/toolhost.hpp"

namespace swarm::toolhost::detail {

/// The caller's view of `call.branch`: worktree state if one exists, else the branch head.
vcs::Tree view_tree(const CallContext& ctx);

ResolvedPath resolve(const CallContext& ctx, std::string_view raw);
std::string display(const CallContext& ctx, const ResolvedPath& p);

/// Throws Error(not_found).
std::string read_text(const CallContext& ctx, const vcs::Tree& view, const ResolvedPath& p);
/// Throws Error(write_access) for reference paths.
void write_text(CallContext& ctx, const ResolvedPath& p, std::optional<std::string> content);

/// Files at or below `dir`, as display paths, sorted.
std::vector<std::string> files_under(const CallContext& ctx, const vcs::Tree& view, const ResolvedPath& dir);

std::string arg_string(const CallContext& ctx, const char* name, std::string fallback = {});
std::int64_t arg_int(const CallContext& ctx, const char* name, std::int64_t fallback);
bool arg_bool(const CallContext& ctx, const char* name, bool fallback);
std::vector<std::string> arg_list(const CallContext& ctx, const char* name);

}  // namespace swarm::toolhost::detail
