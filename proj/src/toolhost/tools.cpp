#include "helpers.hpp"

#include <algorithm>

namespace swarm::toolhost {

using namespace detail;

namespace {

using Lines = std::vector<std::string>;

// Clamped 1-based inclusive range -> [lo, hi) indices.
std::pair<std::size_t, std::size_t> clamp_range(std::int64_t start, std::int64_t end, std::size_t n) {
    if (start < 1) start = 1;
    if (end < start - 1) throw Error(Errc::invalid_argument, "range end precedes start");
    const auto lo = std::min<std::size_t>(static_cast<std::size_t>(start - 1), n);
    const auto hi = std::min<std::size_t>(static_cast<std::size_t>(end), n);
    return {lo, std::max(lo, hi)};
}

std::string ensure_newline(std::string s) {
    if (!s.empty() && s.back() != '\n') s += '\n';
    return s;
}

std::string format_report(const checker::CheckReport& r) {
    std::string out = r.ok ? "ok" : "failed";
    out += ": " + std::to_string(r.decl_count) + " declarations, " + std::to_string(r.sorry_count) + " sorry\n";
    for (const auto& e : r.errors) {
        out += e.path + ":" + std::to_string(e.line) + ": error: " + e.message + "\n";
    }
    return out;
}

HandlerOutput text(std::string s) { return HandlerOutput{std::move(s), 0}; }

}  // namespace

void register_file_tools(ToolHost& host) {
    host.register_tool({"list_files", Family::file, "list files below a directory",
                        {{"path", ArgType::string, false}}, false, false, [](CallContext& ctx) {
                            const auto view = view_tree(ctx);
                            std::string out;
                            for (const auto& p : files_under(ctx, view, resolve(ctx, arg_string(ctx, "path", ".")))) {
                                out += p + "\n";
                            }
                            return text(out);
                        }});

    host.register_tool({"read_file", Family::file, "read a line range (1-based, inclusive) of a file",
                        {{"path", ArgType::string}, {"start", ArgType::integer, false}, {"end", ArgType::integer, false}},
                        false, false, [](CallContext& ctx) {
                            const auto view = view_tree(ctx);
                            const auto lines =
                                vcs::split_lines(read_text(ctx, view, resolve(ctx, arg_string(ctx, "path"))));
                            auto [lo, hi] = clamp_range(arg_int(ctx, "start", 1),
                                                        arg_int(ctx, "end", static_cast<std::int64_t>(lines.size())),
                                                        lines.size());
                            std::string out;
                            for (auto i = lo; i < hi; ++i) out += lines[i];
                            return text(out);
                        }});

    host.register_tool({"write_file", Family::file, "create or overwrite a file",
                        {{"path", ArgType::string}, {"content", ArgType::string}}, true, false, [](CallContext& ctx) {
                            const auto p = resolve(ctx, arg_string(ctx, "path"));
                            auto content = arg_string(ctx, "content");
                            const auto n = content.size();
                            write_text(ctx, p, std::move(content));
                            return text("wrote " + std::to_string(n) + " bytes to " + display(ctx, p) + "\n");
                        }});

    host.register_tool({"delete_file", Family::file, "delete a file", {{"path", ArgType::string}}, true, false,
                        [](CallContext& ctx) {
                            const auto p = resolve(ctx, arg_string(ctx, "path"));
                            read_text(ctx, view_tree(ctx), p);
                            write_text(ctx, p, std::nullopt);
                            return text("deleted " + display(ctx, p) + "\n");
                        }});

    host.register_tool({"edit_replace", Family::file, "replace one exact occurrence of a string",
                        {{"path", ArgType::string}, {"old", ArgType::string}, {"new", ArgType::string}}, true, false,
                        [](CallContext& ctx) {
                            const auto p = resolve(ctx, arg_string(ctx, "path"));
                            auto content = read_text(ctx, view_tree(ctx), p);
                            const auto old = arg_string(ctx, "old");
                            if (old.empty()) throw Error(Errc::invalid_argument, "'old' must be non-empty");
                            const auto at = content.find(old);
                            if (at == std::string::npos) throw Error(Errc::not_found, "text not found");
                            if (content.find(old, at + 1) != std::string::npos) {
                                throw Error(Errc::invalid_argument, "text occurs more than once");
                            }
                            content.replace(at, old.size(), arg_string(ctx, "new"));
                            write_text(ctx, p, std::move(content));
                            return text("edited " + display(ctx, p) + "\n");
                        }});

    host.register_tool({"edit_range", Family::file, "replace lines start..end (inclusive) with new content",
                        {{"path", ArgType::string},
                         {"start", ArgType::integer},
                         {"end", ArgType::integer},
                         {"content", ArgType::string}},
                        true, false, [](CallContext& ctx) {
                            const auto p = resolve(ctx, arg_string(ctx, "path"));
                            auto lines = vcs::split_lines(read_text(ctx, view_tree(ctx), p));
                            auto [lo, hi] = clamp_range(arg_int(ctx, "start", 1), arg_int(ctx, "end", 0), lines.size());
                            auto repl = vcs::split_lines(ensure_newline(arg_string(ctx, "content")));
                            if (lo > 0 && !lines[lo - 1].ends_with('\n')) lines[lo - 1] += '\n';
                            lines.erase(lines.begin() + lo, lines.begin() + hi);
                            lines.insert(lines.begin() + lo, repl.begin(), repl.end());
                            write_text(ctx, p, vcs::join_lines(lines));
                            return text("replaced lines " + std::to_string(lo + 1) + "-" + std::to_string(hi) + " of " +
                                        display(ctx, p) + "\n");
                        }});

    auto move_range = [](bool cut) {
        return [cut](CallContext& ctx) {
            const auto view = view_tree(ctx);
            const auto src = resolve(ctx, arg_string(ctx, "path"));
            const auto dst = resolve(ctx, arg_string(ctx, "dest"));
            auto src_lines = vcs::split_lines(read_text(ctx, view, src));
            auto [lo, hi] = clamp_range(arg_int(ctx, "start", 1), arg_int(ctx, "end", 0), src_lines.size());
            Lines chunk(src_lines.begin() + lo, src_lines.begin() + hi);
            if (!chunk.empty() && !chunk.back().ends_with('\n')) chunk.back() += '\n';
            if (cut) {
                src_lines.erase(src_lines.begin() + lo, src_lines.begin() + hi);
                write_text(ctx, src, vcs::join_lines(src_lines));
            }
            Lines dst_lines;
            if (dst.path == src.path && dst.reference == src.reference) {
                dst_lines = src_lines;
            } else if (auto it = view.find(dst.path); !dst.reference && it != view.end()) {
                dst_lines = vcs::split_lines(it->second);
            } else if (dst.reference) {
                throw Error(Errc::write_access, "the reference corpus is read-only");
            }
            auto at = arg_int(ctx, "at", static_cast<std::int64_t>(dst_lines.size()) + 1);
            at = std::clamp<std::int64_t>(at, 1, static_cast<std::int64_t>(dst_lines.size()) + 1);
            if (at > 1 && !dst_lines[at - 2].ends_with('\n')) dst_lines[at - 2] += '\n';
            dst_lines.insert(dst_lines.begin() + (at - 1), chunk.begin(), chunk.end());
            write_text(ctx, dst, vcs::join_lines(dst_lines));
            return text(std::string(cut ? "moved " : "copied ") + std::to_string(chunk.size()) + " lines to " +
                        display(ctx, dst) + "\n");
        };
    };
    const std::vector<ArgSpec> range_args{{"path", ArgType::string},
                                          {"start", ArgType::integer},
                                          {"end", ArgType::integer},
                                          {"dest", ArgType::string},
                                          {"at", ArgType::integer, false}};
    host.register_tool({"copy_range", Family::file, "copy a line range into another location", range_args, true, false,
                        move_range(false)});
    host.register_tool({"cut_range", Family::file, "move a line range into another location", range_args, true, false,
                        move_range(true)});
}

void register_check_tools(ToolHost& host) {
    host.register_tool({"check_snippet", Family::check, "check a snippet against the worktree",
                        {{"code", ArgType::string}}, false, false, [](CallContext& ctx) {
                            return text(format_report(ctx.env.checker.snippet(view_tree(ctx), arg_string(ctx, "code"))));
                        }});

    host.register_tool({"build", Family::check, "build the whole worktree", {}, false, true, [](CallContext& ctx) {
                            auto out = format_report(ctx.env.checker.build(view_tree(ctx)));
                            return HandlerOutput{out, ctx.config.build_latency, true};
                        }});

    host.register_tool({"ref_grep", Family::check, "plain-text search over the reference corpus",
                        {{"pattern", ArgType::string}}, false, false, [](CallContext& ctx) {
                            const auto pattern = arg_string(ctx, "pattern");
                            if (pattern.empty()) throw Error(Errc::invalid_argument, "empty pattern");
                            std::string out;
                            for (const auto& [path, content] : ctx.env.reference) {
                                std::size_t line_no = 0;
                                for (const auto& line : vcs::split_lines(content)) {
                                    ++line_no;
                                    if (line.find(pattern) == std::string::npos) continue;
                                    out += display(ctx, ResolvedPath{path, true}) + ":" + std::to_string(line_no) + ":" +
                                           ensure_newline(line);
                                    if (out.size() > 4 * ctx.config.output_limit) return text(out);
                                }
                            }
                            return text(out);
                        }});

    host.register_tool({"ref_search", Family::check, "find reference declarations by name",
                        {{"name", ArgType::string}}, false, false, [](CallContext& ctx) {
                            const auto needle = arg_string(ctx, "name");
                            std::string out;
                            for (const auto& [path, content] : ctx.env.reference) {
                                if (!checker::is_toy_path(path)) continue;
                                for (const auto& d : checker::parse_toy_file(path, content).decls) {
                                    if (d.name.find(needle) == std::string::npos) continue;
                                    out += display(ctx, ResolvedPath{path, true}) + ":" + std::to_string(d.line) + ": " +
                                           checker::format_decl(d) + "\n";
                                }
                            }
                            return text(out);
                        }});
}

void register_git_tools(ToolHost& host) {
    host.register_tool({"git_status", Family::git, "list changed files in the worktree", {}, false, false,
                        [](CallContext& ctx) {
                            auto wt = ctx.env.repo.worktree(ctx.call.branch);
                            if (!wt) throw Error(Errc::not_found, "no worktree for '" + ctx.call.branch + "'");
                            const auto head = ctx.env.repo.branch_tree(ctx.call.branch);
                            std::string out = "on branch " + ctx.call.branch + "\n";
                            for (const auto& [path, content] : wt->dirty_files) {
                                const char* tag = !content ? "D" : head.count(path) ? "M" : "A";
                                out += std::string(tag) + " " + path + "\n";
                            }
                            if (wt->dirty_files.empty()) out += "nothing to commit, working tree clean\n";
                            return text(out);
                        }});

    host.register_tool({"git_add", Family::git, "stage paths", {{"paths", ArgType::string_list}}, true, false,
                        [](CallContext& ctx) {
                            const auto wt = ctx.env.repo.worktree(ctx.call.branch);
                            std::size_t n = 0;
                            for (const auto& raw : arg_list(ctx, "paths")) {
                                const auto p = resolve(ctx, raw);
                                if (p.reference) throw Error(Errc::write_access, "the reference corpus is read-only");
                                if (!wt->dirty_files.count(p.path)) {
                                    throw Error(Errc::not_found, "no changes to '" + p.path + "'");
                                }
                                ++n;
                            }
                            return text("staged " + std::to_string(n) + " paths\n");
                        }});

    host.register_tool({"git_log", Family::git, "commits on the branch, newest first",
                        {{"limit", ArgType::integer, false}}, false, false, [](CallContext& ctx) {
                            auto log = ctx.env.repo.branch_log(ctx.call.branch);
                            auto limit = static_cast<std::size_t>(std::max<std::int64_t>(0, arg_int(ctx, "limit", 20)));
                            std::string out;
                            for (auto it = log.rbegin(); it != log.rend() && limit > 0; ++it, --limit) {
                                out += it->id.hex.substr(0, 12) + " " + it->author.str() + " " + it->message + "\n";
                            }
                            if (out.empty()) out = "no commits on branch\n";
                            return text(out);
                        }});

    host.register_tool({"git_diff", Family::git, "uncommitted changes, or the branch against its base",
                        {{"committed", ArgType::boolean, false}}, false, false, [](CallContext& ctx) {
                            auto& repo = ctx.env.repo;
                            const auto& b = ctx.call.branch;
                            if (arg_bool(ctx, "committed", false)) {
                                return text(render_diff(repo.diff_stats(repo.branch_base(b), repo.branch_head(b))));
                            }
                            return text(render_diff(vcs::diff_trees(repo.branch_tree(b), view_tree(ctx))));
                        }});

    host.register_tool({"git_commit", Family::git, "commit all changes",
                        {{"message", ArgType::string}, {"branch", ArgType::string, false}}, true, false,
                        [](CallContext& ctx) {
                            const auto target = arg_string(ctx, "branch", ctx.call.branch);
                            auto wt = ctx.env.repo.worktree(target);
                            if (target != ctx.call.branch && (!wt || wt->owner != ctx.call.caller)) {
                                throw Error(Errc::write_access, ctx.call.caller.str() +
                                                                    " has no write access to branch '" + target + "'");
                            }
                            auto id = ctx.env.repo.commit(target, ctx.call.caller, arg_string(ctx, "message"),
                                                          ctx.env.now);
                            return text("committed " + id.hex.substr(0, 12) + "\n");
                        }});

    host.register_tool({"git_rebase", Family::git, "rebase the branch onto main", {}, true, false, [](CallContext& ctx) {
                            auto st = ctx.env.repo.rebase_onto_main(ctx.call.branch);
                            if (st.clean) return text("rebased onto main\n");
                            std::string out = "rebase stopped: conflicts in\n";
                            for (const auto& c : st.conflicts) out += "  " + c.path + "\n";
                            return text(out);
                        }});

    host.register_tool({"git_reset", Family::git, "discard uncommitted changes, or reset the branch to main",
                        {{"to_main", ArgType::boolean, false}}, true, false, [](CallContext& ctx) {
                            if (arg_bool(ctx, "to_main", false)) {
                                ctx.env.repo.reset_branch_to_main(ctx.call.branch, ctx.call.caller);
                                return text("branch reset to main\n");
                            }
                            ctx.env.repo.reset_worktree(ctx.call.branch, ctx.call.caller);
                            return text("worktree reset\n");
                        }});

    host.register_tool({"git_show_conflicts", Family::git, "show what would conflict when merging into main", {}, false,
                        false, [](CallContext& ctx) {
                            auto preview = ctx.env.repo.preview_merge(ctx.call.branch);
                            if (preview.clean) return text("no conflicts with main\n");
                            std::string out;
                            for (const auto& c : preview.conflicts) {
                                out += "conflict in " + c.path + "\n";
                                for (const auto& h : c.ours) {
                                    out += "  main changed lines " + std::to_string(h.old_start + 1) + "-" +
                                           std::to_string(h.old_end()) + "\n";
                                }
                                for (const auto& h : c.theirs) {
                                    out += "  branch changed lines " + std::to_string(h.old_start + 1) + "-" +
                                           std::to_string(h.old_end()) + "\n";
                                }
                            }
                            return text(out);
                        }});

    host.register_tool({"git_checkout_file", Family::git, "restore a file to the branch head",
                        {{"path", ArgType::string}}, true, false, [](CallContext& ctx) {
                            const auto p = resolve(ctx, arg_string(ctx, "path"));
                            if (p.reference) throw Error(Errc::write_access, "the reference corpus is read-only");
                            const auto head = ctx.env.repo.branch_tree(ctx.call.branch);
                            auto it = head.find(p.path);
                            write_text(ctx, p, it == head.end() ? std::nullopt : std::optional(it->second));
                            return text("restored " + p.path + "\n");
                        }});
}

void register_shell_tools(ToolHost& host) {
    host.register_tool({"shell", Family::shell, "run an allowlisted command pipeline", {{"command", ArgType::string}},
                        false, false, [](CallContext& ctx) { return run_shell(ctx, arg_string(ctx, "command")); }});
}

void register_issue_tools(ToolHost& host) {
    host.register_tool({"create_issue", Family::issue, "file a new issue on this branch",
                        {{"title", ArgType::string},
                         {"body", ArgType::string, false},
                         {"kind", ArgType::string},
                         {"subject", ArgType::string, false}},
                        true, false, [](CallContext& ctx) {
                            auto kind = issues::parse_kind(arg_string(ctx, "kind"));
                            if (!kind) throw Error(Errc::invalid_argument, "unknown issue kind");
                            auto [issue, write] = issues::create_issue(
                                view_tree(ctx), ctx.env.ids, ctx.call.caller,
                                {arg_string(ctx, "title"), arg_string(ctx, "body"), *kind, arg_string(ctx, "subject")},
                                ctx.env.tracker);
                            ctx.env.repo.write_file(ctx.call.branch, ctx.call.caller, write.path, write.content);
                            return text("created issue " + issue.id + "\n");
                        }});

    host.register_tool({"list_issues", Family::issue, "summaries of issues",
                        {{"status", ArgType::string, false}, {"kind", ArgType::string, false}}, false, false,
                        [](CallContext& ctx) {
                            std::optional<issues::IssueStatus> status;
                            std::optional<issues::IssueKind> kind;
                            if (auto s = arg_string(ctx, "status"); !s.empty() && s != "all") {
                                status = issues::parse_status(s);
                                if (!status) throw Error(Errc::invalid_argument, "unknown status");
                            }
                            if (auto k = arg_string(ctx, "kind"); !k.empty()) {
                                kind = issues::parse_kind(k);
                                if (!kind) throw Error(Errc::invalid_argument, "unknown kind");
                            }
                            const auto set = issues::load_issues(view_tree(ctx), ctx.env.tracker);
                            auto out = issues::summarize(set.filter(status, kind));
                            if (out.empty()) out = "no matching issues\n";
                            return text(out);
                        }});

    host.register_tool({"resolve_issue", Family::issue, "tick an issue as resolved by this PR",
                        {{"id", ArgType::string}}, true, false, [](CallContext& ctx) {
                            if (!ctx.env.pr) throw Error(Errc::invalid_argument, "session has no pull request");
                            auto [issue, write] =
                                issues::mark_resolved(view_tree(ctx), arg_string(ctx, "id"), *ctx.env.pr, ctx.env.tracker);
                            ctx.env.repo.write_file(ctx.call.branch, ctx.call.caller, write.path, write.content);
                            return text("resolved " + issue.id + " by " + ctx.env.pr->str() + "\n");
                        }});
}

}  // namespace swarm::toolhost
