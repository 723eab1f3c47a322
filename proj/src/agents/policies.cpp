#include "swarm/agents/policy.hpp"

#include "swarm/common/error.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace swarm::agents {

using checker::Analysis;
using issues::IssueKind;

std::string TaskRef::label() const {
    if (id.empty()) return kind;
    return kind + ":" + id;
}

Json to_json(const TaskRef& t) { return Json{{"kind", t.kind}, {"id", t.id}, {"subject", t.subject}}; }

TaskRef task_from_json(const Json& j) {
    return TaskRef{j.at("kind").get<std::string>(), j.at("id").get<std::string>(), j.at("subject").get<std::string>()};
}

std::string_view terminal_name(TerminalKind k) {
    switch (k) {
        case TerminalKind::submit: return "submit";
        case TerminalKind::no_pr: return "no-pr";
        case TerminalKind::blocked: return "blocked";
        case TerminalKind::verdict: return "verdict";
    }
    return "?";
}

Json to_json(const Terminal& t) {
    return Json{{"kind", terminal_name(t.kind)}, {"reason", t.reason},         {"refs", t.refs},
                {"cite_created", t.cite_created}, {"verdict", verdict_name(t.verdict)}, {"findings", t.findings}};
}

Terminal terminal_from_json(const Json& j) {
    Terminal t;
    const auto kind = j.at("kind").get<std::string>();
    for (auto k : {TerminalKind::submit, TerminalKind::no_pr, TerminalKind::blocked, TerminalKind::verdict}) {
        if (terminal_name(k) == kind) t.kind = k;
    }
    t.reason = j.at("reason").get<std::string>();
    t.refs = j.at("refs").get<std::vector<std::string>>();
    t.cite_created = j.at("cite_created").get<bool>();
    t.verdict = parse_verdict(j.at("verdict").get<std::string>()).value_or(Verdict::approve);
    t.findings = j.at("findings").get<std::vector<std::string>>();
    return t;
}

Plan LlmPolicy::plan(const PlanContext&) { throw Error(Errc::unimplemented, "no model endpoint at " + endpoint_); }
Plan LlmPolicy::revise(const PlanContext&, const std::vector<std::string>&) {
    throw Error(Errc::unimplemented, "no model endpoint at " + endpoint_);
}

namespace {

Step call(std::string tool, Json args = Json::object()) { return Step{std::move(tool), std::move(args)}; }

Plan stop(TerminalKind kind, std::string reason, std::vector<Step> steps = {}) {
    Plan p;
    p.steps = std::move(steps);
    p.terminal.kind = kind;
    p.terminal.reason = std::move(reason);
    return p;
}

vcs::Tree view_of(const PlanContext& ctx) {
    if (ctx.repo.worktree(ctx.branch)) return ctx.repo.worktree_tree(ctx.branch);
    return ctx.repo.branch_tree(ctx.branch);
}

std::string line_at(const vcs::Tree& tree, const std::string& path, std::size_t line) {
    auto it = tree.find(path);
    if (it == tree.end()) return {};
    auto lines = vcs::split_lines(it->second);
    if (line == 0 || line > lines.size()) return {};
    auto text = lines[line - 1];
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

/// Step that flips one declaration's body to `proof.`.
std::optional<Step> proof_edit(const vcs::Tree& view, const Analysis& a, const std::string& name) {
    auto it = a.decls.find(name);
    if (it == a.decls.end()) return std::nullopt;
    const auto old_line = line_at(view, it->second.path, it->second.decl.line);
    if (old_line.empty()) return std::nullopt;
    auto decl = it->second.decl;
    decl.body = checker::Body::proved;
    return call("edit_replace", {{"path", it->second.path}, {"old", old_line}, {"new", checker::format_decl(decl)}});
}

bool is_only_nits(const std::vector<std::string>& feedback) {
    return !feedback.empty() && std::all_of(feedback.begin(), feedback.end(),
                                            [](const std::string& f) { return f.starts_with("nit:"); });
}

/// Issue ids that point at the unfinished work `name` waits on, plus the subjects that have none.
struct BlockerRefs {
    std::vector<std::string> refs;
    std::vector<std::string> uncovered;
};

BlockerRefs blocker_refs(const Analysis& a, const issues::IssueSet& issues, const std::string& name) {
    BlockerRefs out;
    auto roots = a.root_blockers(name);
    roots.erase(name);
    if (roots.empty()) {
        if (const auto* d = a.find(name)) {
            for (const auto& dep : d->deps) {
                const auto* dd = a.find(dep);
                if (!dd || !dd->complete()) roots.insert(dep);
            }
        }
    }
    std::set<std::string> seen;
    for (const auto& r : roots) {
        auto open = issues.open_about(r);
        if (open.empty()) {
            out.uncovered.push_back(r);
            continue;
        }
        for (const auto* issue : open) {
            if (seen.insert(issue->id).second) out.refs.push_back(issue->id);
        }
    }
    return out;
}

Json new_issue(std::string title, IssueKind kind, std::string subject, std::string body = {}) {
    return Json{{"title", std::move(title)},
                {"kind", std::string(issues::kind_name(kind))},
                {"subject", std::move(subject)},
                {"body", std::move(body)}};
}

/// Shared shape of authoring roles: revisions either resubmit untouched
/// (nits only) or start again from a fresh copy of main.
class AuthorPolicy : public Policy {
public:
    explicit AuthorPolicy(TaskRef task) : task_(std::move(task)) {}

    Plan plan(const PlanContext& ctx) override {
        if (replan_pending_) {
            replan_pending_ = false;
            clean_ = true;
        }
        return plan_task(ctx, view_of(ctx));
    }

    Json save() const override { return Json{{"clean", clean_}, {"replan_pending", replan_pending_}}; }
    void load(const Json& j) override {
        clean_ = j.value("clean", false);
        replan_pending_ = j.value("replan_pending", false);
    }

    Plan revise(const PlanContext&, const std::vector<std::string>& feedback) override {
        if (is_only_nits(feedback)) {
            Plan p;
            p.steps.push_back(call("git_diff", {{"committed", true}}));
            p.terminal.kind = TerminalKind::submit;
            p.terminal.reason = "addressed review comments";
            return p;
        }
        replan_pending_ = true;
        Plan p;
        p.steps.push_back(call("git_reset", {{"to_main", true}}));
        p.replan = true;
        return p;
    }

protected:
    virtual Plan plan_task(const PlanContext& ctx, const vcs::Tree& view) = 0;

    TaskRef task_;
    bool clean_ = false;
    bool replan_pending_ = false;
};

class SketcherPolicy final : public AuthorPolicy {
public:
    using AuthorPolicy::AuthorPolicy;

protected:
    Plan plan_task(const PlanContext& ctx, const vcs::Tree& view) override {
        const auto* ch = ctx.scenario.chapter(task_.id);
        if (!ch) return stop(TerminalKind::no_pr, "unknown chapter " + task_.id);
        if (ctx.main.files.count(ch->path)) return stop(TerminalKind::no_pr, ch->id + " is already on main");

        std::vector<Step> steps{call("read_file", {{"path", "/ref/" + ch->source_path}})};
        std::vector<std::string> missing;
        for (const auto& imp : ch->imports) {
            if (!ctx.main.files.count(ctx.scenario.toy_path(imp))) missing.push_back(imp);
        }
        if (!missing.empty()) {
            for (const auto& m : missing) {
                steps.push_back(call("list_files", {{"path", "chapters"}}));
                steps.push_back(call("create_issue", new_issue(ch->id + " needs " + m + " on main", IssueKind::blocker,
                                                               "", "sketch " + m + " first")));
            }
            auto p = stop(TerminalKind::blocked, "imports not on main", std::move(steps));
            p.terminal.cite_created = true;
            return p;
        }

        steps.push_back(call("read_file", {{"path", kTargetListPath}}));
        steps.push_back(call("write_file", {{"path", ch->path}, {"content", render_sketch(ctx.scenario, *ch, ctx.main)}}));
        const auto open = issues::load_issues(view);
        for (const auto& d : ch->decls) {
            if (d.kind != checker::DeclKind::thm || d.cited || d.exercise) continue;
            if (!open.open_about(d.name).empty()) continue;
            if (ctx.rng.bernoulli(ctx.settings.missed_task_rate)) continue;
            steps.push_back(call("create_issue", new_issue("prove " + d.name, IssueKind::proving_task, d.name)));
        }
        steps.push_back(call("build"));
        steps.push_back(call("git_commit", {{"message", "sketch " + ch->id}}));
        return stop(TerminalKind::submit, "sketch " + ch->id, std::move(steps));
    }
};

/// Proves `subject` if it can be closed now, ticking `ticks` along the way.
Plan prove_or_block(const vcs::Tree& view, const std::string& subject,
                    const std::vector<std::string>& ticks, std::vector<Step> steps, bool misbehave_ok,
                    const std::function<bool()>& roll) {
    const auto a = checker::analyze(view);
    const auto* decl = a.find(subject);
    if (!decl) return stop(TerminalKind::no_pr, subject + " is not stated", std::move(steps));
    if (decl->assumed()) return stop(TerminalKind::no_pr, subject + " is assumed", std::move(steps));
    const auto path = a.decls.at(subject).path;
    steps.push_back(call("read_file", {{"path", path}}));

    if (a.proved(subject)) {
        for (const auto& id : ticks) steps.push_back(call("resolve_issue", {{"id", id}}));
        if (ticks.empty()) return stop(TerminalKind::no_pr, subject + " already proved", std::move(steps));
        steps.push_back(call("git_commit", {{"message", "close issues about proved " + subject}}));
        return stop(TerminalKind::submit, "stale task", std::move(steps));
    }

    if (!a.solvable(subject)) {
        const auto set = issues::load_issues(view);
        auto br = blocker_refs(a, set, subject);
        steps.push_back(call("shell", {{"command", "grep -n sorry " + path}}));
        for (const auto& u : br.uncovered) {
            steps.push_back(
                call("create_issue", new_issue(subject + " is blocked on " + u, IssueKind::blocker, u, "needed by " + subject)));
        }
        auto p = stop(TerminalKind::blocked, subject + " has unproved dependencies", std::move(steps));
        p.terminal.refs = std::move(br.refs);
        p.terminal.cite_created = !br.uncovered.empty();
        return p;
    }

    auto edit = proof_edit(view, a, subject);
    if (!edit) return stop(TerminalKind::no_pr, "could not locate " + subject, std::move(steps));
    steps.push_back(call("check_snippet", {{"code", "thm probe_" + subject + " needs " + subject + ". sorry."}}));
    if (misbehave_ok && roll()) {
        // Placeholder: a sorry'd auxiliary lemma that is not in the source.
        auto content = view.at(path);
        if (!content.ends_with('\n')) content += '\n';
        content += "\nthm aux_" + subject + " needs . sorry.\n";
        steps.push_back(call("write_file", {{"path", path}, {"content", content}}));
    }
    steps.push_back(*edit);
    if (misbehave_ok && roll()) {
        // Rabbit hole: claims a proof of a cited result instead of leaving it assumed.
        for (const auto& [name, located] : a.decls) {
            if (name == subject || !located.decl.cited || !located.decl.sorry()) continue;
            if (located.decl.kind != checker::DeclKind::thm) continue;
            if (auto e = proof_edit(view, a, name)) steps.push_back(*e);
            break;
        }
    }

    steps.push_back(call("build"));
    for (const auto& id : ticks) steps.push_back(call("resolve_issue", {{"id", id}}));
    if (misbehave_ok && roll()) {
        // Bad tick: closes an unrelated open task.
        const auto set = issues::load_issues(view);
        for (const auto* other : set.filter(issues::IssueStatus::open, IssueKind::proving_task)) {
            if (other->subject == subject || a.proved(other->subject)) continue;
            if (std::find(ticks.begin(), ticks.end(), other->id) != ticks.end()) continue;
            steps.push_back(call("resolve_issue", {{"id", other->id}}));
            break;
        }
    }
    steps.push_back(call("git_commit", {{"message", "prove " + subject}}));
    return stop(TerminalKind::submit, "prove " + subject, std::move(steps));
}

class ProverPolicy final : public AuthorPolicy {
public:
    using AuthorPolicy::AuthorPolicy;

protected:
    Plan plan_task(const PlanContext& ctx, const vcs::Tree& view) override {
        auto it = ctx.main_issues.by_id.find(task_.id);
        if (it == ctx.main_issues.by_id.end() || !it->second.open()) {
            return stop(TerminalKind::no_pr, "task " + task_.id + " is closed");
        }
        std::vector<Step> steps{call("list_issues", {{"status", "open"}, {"kind", "proving-task"}})};
        return prove_or_block(view, it->second.subject, {task_.id}, std::move(steps), !clean_,
                              [&] { return ctx.rng.bernoulli(ctx.settings.misbehavior_rate); });
    }
};

class MaintainerPolicy final : public AuthorPolicy {
public:
    using AuthorPolicy::AuthorPolicy;

protected:
    Plan plan_task(const PlanContext& ctx, const vcs::Tree& view) override {
        auto it = ctx.main_issues.by_id.find(task_.id);
        if (it == ctx.main_issues.by_id.end() || !it->second.open()) {
            return stop(TerminalKind::no_pr, "issue " + task_.id + " is closed");
        }
        const auto& issue = it->second;
        std::vector<Step> steps{call("list_issues", {{"status", "open"}})};
        switch (issue.kind) {
            case IssueKind::proving_task:
            case IssueKind::blocker: {
                if (issue.subject.empty()) return close_only(issue, std::move(steps));
                std::vector<std::string> ticks{issue.id};
                for (const auto* other : ctx.main_issues.open_about(issue.subject)) {
                    if (other->id != issue.id) ticks.push_back(other->id);
                }
                return prove_or_block(view, issue.subject, ticks, std::move(steps), false, [] { return false; });
            }
            case IssueKind::global:
            case IssueKind::refactor: return merge_duplicate(view, issue, std::move(steps));
            case IssueKind::report: return close_only(issue, std::move(steps));
        }
        return stop(TerminalKind::no_pr, "unhandled issue");
    }

private:
    Plan close_only(const issues::Issue& issue, std::vector<Step> steps) {
        steps.push_back(call("read_file", {{"path", issues::TrackerConfig{}.path_for(issue.id)}}));
        steps.push_back(call("resolve_issue", {{"id", issue.id}}));
        steps.push_back(call("git_commit", {{"message", "close " + issue.id}}));
        return stop(TerminalKind::submit, "close " + issue.id, std::move(steps));
    }

    /// Replaces every use of the duplicate with its canonical twin and drops the duplicate.
    Plan merge_duplicate(const vcs::Tree& view, const issues::Issue& issue,
                         std::vector<Step> steps) {
        const auto a = checker::analyze(view);
        const auto& dup = issue.subject;
        std::string canon;
        for (const auto& line : vcs::split_lines(issue.body)) {
            if (line.starts_with("canonical: ")) {
                canon = line.substr(11);
                while (!canon.empty() && (canon.back() == '\n' || canon.back() == ' ')) canon.pop_back();
            }
        }
        if (dup.empty() || !a.find(dup)) return close_only(issue, std::move(steps));
        if (canon.empty() || !a.find(canon)) return stop(TerminalKind::no_pr, "no canonical twin for " + dup, std::move(steps));

        const auto dup_path = a.decls.at(dup).path;
        const auto canon_path = a.decls.at(canon).path;
        for (const auto& [path, file] : a.files) {
            bool touched = path == dup_path;
            for (const auto& d : file.decls) {
                if (std::find(d.deps.begin(), d.deps.end(), dup) != d.deps.end()) touched = true;
            }
            if (!touched) continue;
            steps.push_back(call("read_file", {{"path", path}}));
            std::vector<std::string> out;
            const auto lines = vcs::split_lines(view.at(path));
            std::set<std::size_t> drop;
            std::map<std::size_t, std::string> rewrite;
            for (const auto& d : file.decls) {
                if (d.name == dup) {
                    drop.insert(d.line);
                    if (d.line >= 2 && line_at(view, path, d.line - 1).empty()) drop.insert(d.line - 1);
                    continue;
                }
                if (std::find(d.deps.begin(), d.deps.end(), dup) == d.deps.end()) continue;
                auto nd = d;
                for (auto& dep : nd.deps) {
                    if (dep == dup) dep = canon;
                }
                rewrite[d.line] = checker::format_decl(nd) + "\n";
            }
            const bool needs_import = path != canon_path && !a.transitive_imports(path).count(canon_path) &&
                                      path == dup_path;
            std::size_t last_import = 0;
            for (std::size_t i = 0; i < lines.size(); ++i) {
                if (lines[i].starts_with("import ")) last_import = i + 1;
            }
            for (std::size_t i = 0; i < lines.size(); ++i) {
                const auto no = i + 1;
                if (drop.count(no)) continue;
                if (auto r = rewrite.find(no); r != rewrite.end()) {
                    out.push_back(r->second);
                } else {
                    out.push_back(lines[i]);
                }
                if (needs_import && no == std::max<std::size_t>(last_import, 1)) {
                    if (!out.back().ends_with('\n')) out.back() += '\n';
                    out.push_back("import " + canon_path + "\n");
                }
            }
            steps.push_back(call("write_file", {{"path", path}, {"content", vcs::join_lines(out)}}));
        }
        steps.push_back(call("build"));
        steps.push_back(call("resolve_issue", {{"id", issue.id}}));
        steps.push_back(call("git_commit", {{"message", "merge " + dup + " into " + canon}}));
        return stop(TerminalKind::submit, "merge duplicate " + dup, std::move(steps));
    }
};

class TriagePolicy final : public AuthorPolicy {
public:
    using AuthorPolicy::AuthorPolicy;

protected:
    Plan plan_task(const PlanContext& ctx, const vcs::Tree&) override {
        std::vector<Step> steps{call("list_issues", {{"status", "open"}})};
        auto stale = issues::triage(ctx.main, ctx.main_issues);
        if (stale.empty()) return stop(TerminalKind::no_pr, "no stale issues", std::move(steps));
        if (stale.size() > ctx.settings.triage_batch) stale.resize(ctx.settings.triage_batch);
        for (const auto& id : stale) {
            steps.push_back(call("read_file", {{"path", issues::TrackerConfig{}.path_for(id)}}));
            steps.push_back(call("resolve_issue", {{"id", id}}));
        }
        steps.push_back(call("git_commit", {{"message", "triage " + std::to_string(stale.size()) + " stale issues"}}));
        return stop(TerminalKind::submit, "triage", std::move(steps));
    }
};

class ScanPolicy final : public AuthorPolicy {
public:
    using AuthorPolicy::AuthorPolicy;

protected:
    Plan plan_task(const PlanContext& ctx, const vcs::Tree&) override {
        std::vector<Step> steps{call("shell", {{"command", "grep -rn def chapters | sort"}})};
        // Same stem, same dependencies: the later one is a duplicate of the earliest.
        std::map<std::pair<std::string, std::vector<std::string>>, std::vector<std::string>> groups;
        for (const auto& [path, file] : ctx.main.files) {
            for (const auto& d : file.decls) {
                if (d.kind != checker::DeclKind::def) continue;
                groups[{name_stem(d.name), d.deps}].push_back(d.name);
            }
        }
        std::size_t filed = 0;
        for (const auto& [key, names] : groups) {
            if (names.size() < 2) continue;
            for (std::size_t i = 1; i < names.size(); ++i) {
                bool covered = false;
                for (const auto* issue : ctx.main_issues.open_about(names[i])) {
                    if (issue->kind == IssueKind::global || issue->kind == IssueKind::refactor) covered = true;
                }
                if (covered) continue;
                steps.push_back(call("ref_search", {{"name", key.first}}));
                steps.push_back(call("create_issue", new_issue("merge duplicate " + names[i] + " into " + names[0],
                                                               IssueKind::global, names[i], "canonical: " + names[0] + "\n")));
                ++filed;
            }
        }
        if (filed == 0) return stop(TerminalKind::no_pr, "no duplicates", std::move(steps));
        steps.push_back(call("git_commit", {{"message", "file " + std::to_string(filed) + " duplicate issues"}}));
        return stop(TerminalKind::submit, "scan", std::move(steps));
    }
};

/// Root blockers of unfinished targets that nobody holds an issue for.
std::vector<std::string> uncovered_blockers(const PlanContext& ctx, std::size_t limit) {
    std::set<std::string> roots;
    for (const auto& t : ctx.scenario.targets) {
        if (t.excluded() || !ctx.main.find(t.name) || ctx.main.proved(t.name)) continue;
        for (const auto& r : ctx.main.root_blockers(t.name)) roots.insert(r);
    }
    std::vector<std::string> out;
    for (const auto& r : roots) {
        if (!ctx.main_issues.open_about(r).empty()) continue;
        out.push_back(r);
        if (out.size() >= limit) break;
    }
    return out;
}

class ProgressPolicy final : public AuthorPolicy {
public:
    using AuthorPolicy::AuthorPolicy;

protected:
    Plan plan_task(const PlanContext& ctx, const vcs::Tree&) override {
        std::vector<Step> steps{call("read_file", {{"path", kTargetListPath}}),
                                call("list_issues", {{"status", "open"}})};
        const auto roots = uncovered_blockers(ctx, ctx.settings.report_blockers);
        if (roots.empty()) return stop(TerminalKind::no_pr, "every blocker has an issue", std::move(steps));
        for (const auto& r : roots) {
            steps.push_back(call("create_issue", new_issue("unblock " + r, IssueKind::blocker, r, "root blocker")));
        }
        steps.push_back(call("git_commit", {{"message", "file " + std::to_string(roots.size()) + " blocker issues"}}));
        return stop(TerminalKind::submit, "progress", std::move(steps));
    }
};

class StatusPolicy final : public AuthorPolicy {
public:
    using AuthorPolicy::AuthorPolicy;

protected:
    Plan plan_task(const PlanContext& ctx, const vcs::Tree&) override {
        std::vector<Step> steps{call("read_file", {{"path", kTargetListPath}}), call("build")};
        const auto summary = checker::summarize(checker::target_status(ctx.main, ctx.scenario.targets));
        std::string body = "targets: " + std::to_string(summary.total) + "\nobligations: " +
                           std::to_string(summary.obligations) + "\nproved: " + std::to_string(summary.proved) +
                           "\nstated: " + std::to_string(summary.stated) + "\nmissing: " +
                           std::to_string(summary.missing) + "\n";
        steps.push_back(call("create_issue", new_issue("status report", IssueKind::report, "", body)));
        for (const auto& r : uncovered_blockers(ctx, ctx.settings.report_blockers)) {
            steps.push_back(call("create_issue", new_issue("unblock " + r, IssueKind::blocker, r, "from status report")));
        }
        steps.push_back(call("git_commit", {{"message", "status report"}}));
        return stop(TerminalKind::submit, "status report", std::move(steps));
    }
};

class ReviewerPolicy final : public Policy {
public:
    ReviewerPolicy(Role role, TaskRef task) : role_(role), task_(std::move(task)) {}

    Plan plan(const PlanContext& ctx) override {
        if (!ctx.review) throw Error(Errc::invalid_argument, "reviewer without a review snapshot");
        const auto& rv = *ctx.review;
        Plan p;
        p.steps.push_back(call("git_diff", {{"committed", true}}));
        const auto diff = vcs::diff_trees(rv.base, rv.head);
        std::size_t reads = 0;
        for (const auto& f : diff.files) {
            if (!f.new_exists || reads >= 3) continue;
            p.steps.push_back(call("read_file", {{"path", f.path}}));
            ++reads;
        }
        if (role_ == Role::math_reviewer) p.steps.push_back(call("build"));
        p.terminal.kind = TerminalKind::verdict;

        const ReviewInput in{rv.base, rv.head, rv.ticked, ctx.scenario};
        const auto& rules = ctx.settings.review;
        ReviewResult r;
        switch (rules.mode) {
            case ReviewMode::always_request_changes:
                r.verdict = Verdict::request_changes;
                r.findings.push_back("policy:changes requested");
                break;
            case ReviewMode::always_approve: break;
            case ReviewMode::normal:
                r = role_ == Role::math_reviewer ? math_review(in) : eng_review(in, rules);
                if (r.verdict == Verdict::approve && ctx.rng.bernoulli(rules.noise)) {
                    r.verdict = Verdict::request_changes;
                    r.findings.push_back("nit:style");
                }
                break;
        }
        p.terminal.verdict = r.verdict;
        p.terminal.findings = std::move(r.findings);
        p.terminal.reason = std::string(verdict_name(r.verdict));
        return p;
    }

    Plan revise(const PlanContext&, const std::vector<std::string>&) override {
        throw Error(Errc::invalid_argument, "reviewers are not revised");
    }

private:
    Role role_;
    TaskRef task_;
};

}  // namespace

std::unique_ptr<Policy> make_scripted_policy(Role role, const TaskRef& task) {
    switch (role) {
        case Role::sketcher: return std::make_unique<SketcherPolicy>(task);
        case Role::prover: return std::make_unique<ProverPolicy>(task);
        case Role::maintainer: return std::make_unique<MaintainerPolicy>(task);
        case Role::math_reviewer:
        case Role::eng_reviewer: return std::make_unique<ReviewerPolicy>(role, task);
        case Role::triage: return std::make_unique<TriagePolicy>(task);
        case Role::scan: return std::make_unique<ScanPolicy>(task);
        case Role::progress: return std::make_unique<ProgressPolicy>(task);
        case Role::status: return std::make_unique<StatusPolicy>(task);
    }
    throw Error(Errc::invalid_argument, "unknown role");
}

}  // namespace swarm::agents
