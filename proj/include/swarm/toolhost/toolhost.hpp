#pragma once

#include "swarm/checker/check.hpp"
#include "swarm/common/error.hpp"
#include "swarm/common/types.hpp"
#include "swarm/issues/issue.hpp"
#include "swarm/toolhost/truncate.hpp"
#include "swarm/vcs/repository.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace swarm::toolhost {

using Json = nlohmann::json;

enum class Family { file, check, git, shell, issue };
std::string_view family_name(Family f);

struct ToolCall {
    std::string tool;
    Json args = Json::object();
    AgentId caller;
    std::string branch;
};

struct ToolResult {
    bool ok = true;
    std::string output;
    bool truncated = false;
    std::size_t bytes_before_truncation = 0;
    std::optional<Errc> error;
    SimTime duration = 0;
};

struct ToolHostConfig {
    std::size_t output_limit = kDefaultOutputLimit;
    SimTime call_timeout = seconds(60);
    SimTime build_timeout = seconds(600);
    SimTime call_latency = seconds(2);
    SimTime build_latency = seconds(30);
    std::string reference_root = "/ref/";
    std::set<std::string> shell_allowlist = default_allowlist();

    static std::set<std::string> default_allowlist();
};

/// One command name per line; '#' starts a comment.
std::set<std::string> parse_allowlist(std::string_view text);

/// Everything a tool handler may touch during one call.
struct ToolEnv {
    vcs::VersionControl& repo;
    const checker::Checker& checker;
    const vcs::Tree& reference;
    issues::IdSource& ids;
    const issues::TrackerConfig& tracker;
    std::optional<PrId> pr;  // the caller's PR, used when ticking issues
    SimTime now = 0;
};

/// Outcome of a handler before truncation.
struct HandlerOutput {
    std::string text;
    SimTime duration = 0;
    bool build = false;  // ran a build, so the build timeout applies
};

/// Per-call state handed to a handler.
struct CallContext {
    const ToolCall& call;
    ToolEnv& env;
    const ToolHostConfig& config;
};

enum class ArgType { string, integer, boolean, string_list };

struct ArgSpec {
    std::string name;
    ArgType type = ArgType::string;
    bool required = true;
};

struct ToolSpec {
    std::string name;
    Family family = Family::file;
    std::string summary;
    std::vector<ArgSpec> args;
    bool writes = false;   // requires the caller to own the worktree
    bool build = false;    // uses the build timeout
    std::function<HandlerOutput(CallContext&)> handler;
};

/// A path resolved against the caller's worktree or the reference corpus.
struct ResolvedPath {
    std::string path;  // normalised, without leading '/', relative to its root ("" is the root)
    bool reference = false;
};

/// Normalises `raw`. Relative paths and "." resolve inside the worktree;
/// absolute paths must sit under `reference_root`. Throws Error(path_escape).
ResolvedPath resolve_path(std::string_view raw, std::string_view reference_root);

/// Unified-diff rendering.
std::string render_diff(const vcs::Diff& diff);

class ToolHost {
public:
    explicit ToolHost(ToolHostConfig config = {});

    void register_tool(ToolSpec spec);
    bool has_tool(const std::string& name) const { return tools_.count(name) > 0; }
    std::vector<std::string> tool_names() const;
    const ToolSpec& spec(const std::string& name) const;
    const ToolHostConfig& config() const { return config_; }
    void set_allowlist(std::set<std::string> allow) { config_.shell_allowlist = std::move(allow); }

    /// Never throws for tool-level failures: they come back as ok=false with a typed error.
    ToolResult dispatch(const ToolCall& call, ToolEnv& env) const;

private:
    ToolHostConfig config_;
    std::map<std::string, ToolSpec> tools_;
};

void register_file_tools(ToolHost& host);
void register_check_tools(ToolHost& host);
void register_git_tools(ToolHost& host);
void register_shell_tools(ToolHost& host);
void register_issue_tools(ToolHost& host);

/// Runs one shell pipeline with the built-in command set.
HandlerOutput run_shell(CallContext& ctx, std::string_view command);

}  // namespace swarm::toolhost
