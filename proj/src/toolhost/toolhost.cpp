#include "swarm/toolhost/toolhost.hpp"

#include "helpers.hpp"

#include <sstream>

namespace swarm::toolhost {

std::string_view family_name(Family f) {
    switch (f) {
        case Family::file: return "file";
        case Family::check: return "check";
        case Family::git: return "git";
        case Family::shell: return "shell";
        case Family::issue: return "issue";
    }
    return "?";
}

std::set<std::string> ToolHostConfig::default_allowlist() {
    return {"cat",  "head", "tail",     "wc",      "grep", "sort", "uniq",  "cut",  "ls",
            "tree", "echo", "basename", "dirname", "date", "sleep", "diff", "lake", "build"};
}

std::set<std::string> parse_allowlist(std::string_view text) {
    std::set<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream words(line);
        std::string w;
        while (words >> w) out.insert(w);
    }
    return out;
}

ResolvedPath resolve_path(std::string_view raw, std::string_view reference_root) {
    ResolvedPath out;
    std::string_view rest = raw;
    if (rest.starts_with('/')) {
        auto root = reference_root;
        while (root.ends_with('/')) root.remove_suffix(1);
        if (rest == root) {
            rest = {};
        } else if (rest.starts_with(std::string(root) + "/")) {
            rest.remove_prefix(root.size() + 1);
        } else {
            throw Error(Errc::path_escape, "absolute path '" + std::string(raw) + "' is outside the sandbox");
        }
        out.reference = true;
    }
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        auto slash = rest.find('/', pos);
        if (slash == std::string_view::npos) slash = rest.size();
        auto part = rest.substr(pos, slash - pos);
        pos = slash + 1;
        if (part.empty() || part == ".") {
            if (slash == rest.size()) break;
            continue;
        }
        if (part == "..") {
            if (parts.empty()) throw Error(Errc::path_escape, "path '" + std::string(raw) + "' escapes its root");
            parts.pop_back();
        } else {
            parts.emplace_back(part);
        }
        if (slash == rest.size()) break;
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.path += '/';
        out.path += parts[i];
    }
    return out;
}

std::string render_diff(const vcs::Diff& diff) {
    std::string out;
    for (const auto& f : diff.files) {
        out += "--- " + (f.old_exists ? "a/" + f.path : std::string("/dev/null")) + "\n";
        out += "+++ " + (f.new_exists ? "b/" + f.path : std::string("/dev/null")) + "\n";
        for (const auto& h : f.hunks) {
            out += "@@ -" + std::to_string(h.old_start + 1) + "," + std::to_string(h.old_lines.size()) + " +" +
                   std::to_string(h.new_start + 1) + "," + std::to_string(h.new_lines.size()) + " @@\n";
            for (const auto& l : h.old_lines) out += "-" + l + (l.ends_with('\n') ? "" : "\n");
            for (const auto& l : h.new_lines) out += "+" + l + (l.ends_with('\n') ? "" : "\n");
        }
    }
    return out;
}

ToolHost::ToolHost(ToolHostConfig config) : config_(std::move(config)) {
    register_file_tools(*this);
    register_check_tools(*this);
    register_git_tools(*this);
    register_shell_tools(*this);
    register_issue_tools(*this);
}

void ToolHost::register_tool(ToolSpec spec) {
    auto name = spec.name;
    tools_[name] = std::move(spec);
}

std::vector<std::string> ToolHost::tool_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : tools_) out.push_back(name);
    return out;
}

const ToolSpec& ToolHost::spec(const std::string& name) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw Error(Errc::unknown_tool, "unknown tool '" + name + "'");
    return it->second;
}

namespace {

bool type_matches(const Json& v, ArgType t) {
    switch (t) {
        case ArgType::string: return v.is_string();
        case ArgType::integer: return v.is_number_integer();
        case ArgType::boolean: return v.is_boolean();
        case ArgType::string_list:
            if (!v.is_array()) return false;
            for (const auto& e : v) {
                if (!e.is_string()) return false;
            }
            return true;
    }
    return false;
}

ToolResult failure(Errc code, const std::string& message, SimTime duration) {
    ToolResult r;
    r.ok = false;
    r.error = code;
    r.output = "error (" + std::string(errc_name(code)) + "): " + message + "\n";
    r.bytes_before_truncation = r.output.size();
    r.duration = duration;
    return r;
}

}  // namespace

ToolResult ToolHost::dispatch(const ToolCall& call, ToolEnv& env) const {
    auto it = tools_.find(call.tool);
    ToolResult result;
    if (it == tools_.end()) {
        result = failure(Errc::unknown_tool, "unknown tool '" + call.tool + "'", config_.call_latency);
    } else {
        const auto& spec = it->second;
        try {
            if (!call.args.is_object()) throw Error(Errc::invalid_argument, "arguments must be an object");
            for (const auto& a : spec.args) {
                auto v = call.args.find(a.name);
                if (v == call.args.end() || v->is_null()) {
                    if (a.required) throw Error(Errc::invalid_argument, "missing argument '" + a.name + "'");
                } else if (!type_matches(*v, a.type)) {
                    throw Error(Errc::invalid_argument, "argument '" + a.name + "' has the wrong type");
                }
            }
            if (spec.writes) {
                auto wt = env.repo.worktree(call.branch);
                if (!wt || wt->owner != call.caller) {
                    throw Error(Errc::write_access,
                                call.caller.str() + " has no write access to branch '" + call.branch + "'");
                }
            }
            CallContext ctx{call, env, config_};
            auto out = spec.handler(ctx);
            if (out.duration == 0) out.duration = config_.call_latency;
            const auto timeout = spec.build || out.build ? config_.build_timeout : config_.call_timeout;
            if (out.duration > timeout) {
                result = failure(Errc::timeout, "'" + call.tool + "' exceeded its time limit", timeout);
            } else {
                result.output = std::move(out.text);
                result.duration = out.duration;
                result.bytes_before_truncation = result.output.size();
            }
        } catch (const Error& e) {
            auto code = e.code() == Errc::not_owner ? Errc::write_access : e.code();
            result = failure(code, e.what(), config_.call_latency);
        } catch (const nlohmann::json::exception& e) {
            result = failure(Errc::invalid_argument, e.what(), config_.call_latency);
        } catch (const std::exception& e) {
            result = failure(Errc::backend_failure, e.what(), config_.call_latency);
        }
    }
    auto cut = truncate_output(result.output, config_.output_limit);
    result.output = std::move(cut.text);
    result.truncated = cut.truncated;
    result.bytes_before_truncation = cut.bytes_before;
    return result;
}

namespace detail {

vcs::Tree view_tree(const CallContext& ctx) {
    const auto& branch = ctx.call.branch;
    if (ctx.env.repo.worktree(branch)) return ctx.env.repo.worktree_tree(branch);
    if (ctx.env.repo.has_branch(branch)) return ctx.env.repo.branch_tree(branch);
    return ctx.env.repo.main().tree();
}

ResolvedPath resolve(const CallContext& ctx, std::string_view raw) {
    return resolve_path(raw, ctx.config.reference_root);
}

std::string display(const CallContext& ctx, const ResolvedPath& p) {
    if (!p.reference) return p.path.empty() ? "." : p.path;
    auto root = ctx.config.reference_root;
    if (!root.ends_with('/')) root += '/';
    return root + p.path;
}

std::string read_text(const CallContext& ctx, const vcs::Tree& view, const ResolvedPath& p) {
    const auto& tree = p.reference ? ctx.env.reference : view;
    auto it = tree.find(p.path);
    if (it == tree.end()) throw Error(Errc::not_found, "no such file '" + display(ctx, p) + "'");
    return it->second;
}

void write_text(CallContext& ctx, const ResolvedPath& p, std::optional<std::string> content) {
    if (p.reference) throw Error(Errc::write_access, "the reference corpus is read-only");
    if (p.path.empty()) throw Error(Errc::invalid_argument, "cannot write to the worktree root");
    ctx.env.repo.write_file(ctx.call.branch, ctx.call.caller, p.path, std::move(content));
}

std::vector<std::string> files_under(const CallContext& ctx, const vcs::Tree& view, const ResolvedPath& dir) {
    const auto& tree = dir.reference ? ctx.env.reference : view;
    std::vector<std::string> out;
    if (tree.count(dir.path)) {
        out.push_back(display(ctx, dir));
        return out;
    }
    const auto prefix = dir.path.empty() ? std::string() : dir.path + "/";
    for (auto it = tree.lower_bound(prefix); it != tree.end() && it->first.starts_with(prefix); ++it) {
        out.push_back(display(ctx, ResolvedPath{it->first, dir.reference}));
    }
    return out;
}

std::string arg_string(const CallContext& ctx, const char* name, std::string fallback) {
    auto it = ctx.call.args.find(name);
    if (it == ctx.call.args.end() || it->is_null()) return fallback;
    return it->get<std::string>();
}

std::int64_t arg_int(const CallContext& ctx, const char* name, std::int64_t fallback) {
    auto it = ctx.call.args.find(name);
    if (it == ctx.call.args.end() || it->is_null()) return fallback;
    return it->get<std::int64_t>();
}

bool arg_bool(const CallContext& ctx, const char* name, bool fallback) {
    auto it = ctx.call.args.find(name);
    if (it == ctx.call.args.end() || it->is_null()) return fallback;
    return it->get<bool>();
}

std::vector<std::string> arg_list(const CallContext& ctx, const char* name) {
    auto it = ctx.call.args.find(name);
    if (it == ctx.call.args.end() || it->is_null()) return {};
    return it->get<std::vector<std::string>>();
}

}  // namespace detail
}  // namespace swarm::toolhost
