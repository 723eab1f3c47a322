#include "swarm/agents/review.hpp"

#include "swarm/checker/check.hpp"
#include "swarm/common/error.hpp"
#include "swarm/issues/issue.hpp"

#include <regex>

namespace swarm::agents {

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::approve: return "approve";
        case Verdict::request_changes: return "request-changes";
        case Verdict::reject: return "reject";
    }
    return "?";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
    for (auto v : {Verdict::approve, Verdict::request_changes, Verdict::reject}) {
        if (verdict_name(v) == s) return v;
    }
    return std::nullopt;
}

std::string_view review_mode_name(ReviewMode m) {
    switch (m) {
        case ReviewMode::normal: return "normal";
        case ReviewMode::always_request_changes: return "always-request-changes";
        case ReviewMode::always_approve: return "always-approve";
    }
    return "?";
}

std::optional<ReviewMode> parse_review_mode(std::string_view s) {
    for (auto m : {ReviewMode::normal, ReviewMode::always_request_changes, ReviewMode::always_approve}) {
        if (review_mode_name(m) == s) return m;
    }
    return std::nullopt;
}

namespace {

struct Verdicts {
    ReviewResult result;
    void reject(std::string f) {
        result.verdict = Verdict::reject;
        result.findings.push_back(std::move(f));
    }
    void request(std::string f) {
        if (result.verdict == Verdict::approve) result.verdict = Verdict::request_changes;
        result.findings.push_back(std::move(f));
    }
};

bool same_decl(const checker::ToyDecl& a, const checker::ToyDecl& b) {
    return a.kind == b.kind && a.name == b.name && a.deps == b.deps && a.body == b.body && a.cited == b.cited &&
           a.exercise == b.exercise;
}

}  // namespace

ReviewResult math_review(const ReviewInput& in) {
    Verdicts v;
    const auto base = checker::analyze(in.base);
    const auto head = checker::analyze(in.head);
    const auto& sc = in.scenario;

    if (!head.report.ok) v.request("build:" + std::to_string(head.report.errors.size()) + " errors");

    // Nothing that was done may be undone; merged-away duplicates are the one allowed removal.
    for (const auto& [name, located] : base.decls) {
        const auto* now = head.find(name);
        if (!now) {
            const auto canon = sc.canonical(name);
            if (canon != name && head.find(canon)) continue;
            v.reject("regression:" + name + " removed");
        } else if (located.decl.body == checker::Body::proved && now->sorry()) {
            v.reject("regression:" + name + " reopened");
        }
    }

    for (const auto& [name, located] : head.decls) {
        const auto& decl = located.decl;
        const auto* before = base.find(name);
        if (before && same_decl(*before, decl)) continue;
        const auto* spec = sc.find(name);
        if (spec && spec->cited && decl.body == checker::Body::proved && decl.kind == checker::DeclKind::thm) {
            v.reject("cited:" + name + " is a cited result and must stay assumed");
            continue;
        }
        if (!spec) {
            v.request((decl.sorry() ? "placeholder:" : "fidelity:") + name + " is not in the source");
            continue;
        }
        bool faithful = spec->kind == decl.kind && spec->cited == decl.cited && spec->exercise == decl.exercise &&
                        spec->deps.size() == decl.deps.size();
        for (std::size_t i = 0; faithful && i < decl.deps.size(); ++i) {
            faithful = sc.canonical(spec->deps[i]) == sc.canonical(decl.deps[i]);
        }
        if (!faithful) v.request("fidelity:" + name + " differs from the source statement");
    }

    const auto issues_before = issues::load_issues(in.base);
    const auto issues_after = issues::load_issues(in.head);
    for (const auto& id : in.ticked) {
        auto it = issues_after.by_id.find(id);
        if (it == issues_after.by_id.end()) {
            v.request("tick:" + id + " missing");
            continue;
        }
        const auto& issue = it->second;
        switch (issue.kind) {
            case issues::IssueKind::proving_task:
            case issues::IssueKind::blocker:
                if (!head.proved(issue.subject)) v.request("tick:" + id + " subject " + issue.subject + " not proved");
                break;
            case issues::IssueKind::global:
            case issues::IssueKind::refactor:
                if (!issue.subject.empty() && head.find(issue.subject)) {
                    v.request("tick:" + id + " " + issue.subject + " still present");
                }
                break;
            case issues::IssueKind::report: break;
        }
    }
    return v.result;
}

ReviewResult eng_review(const ReviewInput& in, const ReviewRules& rules) {
    Verdicts v;
    static const std::regex kName("[a-z][a-z0-9_]*");
    const auto diff = vcs::diff_trees(in.base, in.head);
    std::int64_t code_lines = 0;
    for (const auto& f : diff.files) {
        if (vcs::classify_path(f.path) == vcs::PathClass::code) {
            code_lines += f.added() + f.removed();
            auto it = in.head.find(f.path);
            if (it != in.head.end() && vcs::split_lines(it->second).size() > rules.file_line_cap) {
                v.request("file-size:" + f.path);
            }
            if (it != in.head.end()) {
                for (const auto& d : checker::parse_toy_file(f.path, it->second).decls) {
                    if (!std::regex_match(d.name, kName)) v.request("naming:" + d.name);
                }
            }
        } else if (issues::TrackerConfig{}.owns(f.path) && f.new_exists) {
            try {
                issues::parse_issue(in.head.at(f.path));
            } catch (const Error&) {
                v.request("header:" + f.path);
            }
        }
    }
    if (code_lines > static_cast<std::int64_t>(rules.pr_line_cap)) {
        v.request("size:" + std::to_string(code_lines) + " changed code lines");
    }
    return v.result;
}

}  // namespace swarm::agents
