#include "swarm/pipeline/pipeline.hpp"

#include "swarm/common/error.hpp"
#include "swarm/issues/issue.hpp"

#include <functional>

namespace swarm::pipeline {

namespace {

constexpr PrState kStates[] = {PrState::in_review, PrState::returned,     PrState::queued,
                               PrState::merged,    PrState::suppressed,   PrState::failed_merge,
                               PrState::abandoned, PrState::max_revisions};

std::string first_error(const checker::CheckReport& r) {
    if (r.errors.empty()) return "build failed";
    const auto& e = r.errors.front();
    return e.path + ":" + std::to_string(e.line) + ": " + e.message;
}

}  // namespace

std::string_view state_name(PrState s) {
    switch (s) {
        case PrState::in_review: return "in-review";
        case PrState::returned: return "returned";
        case PrState::queued: return "queued";
        case PrState::merged: return "merged";
        case PrState::suppressed: return "suppressed";
        case PrState::failed_merge: return "failed-merge";
        case PrState::abandoned: return "abandoned";
        case PrState::max_revisions: return "max-revisions";
    }
    return "?";
}

std::optional<PrState> parse_state(std::string_view s) {
    for (auto st : kStates) {
        if (state_name(st) == s) return st;
    }
    return std::nullopt;
}

bool terminal_state(PrState s) {
    return s == PrState::merged || s == PrState::suppressed || s == PrState::failed_merge ||
           s == PrState::abandoned || s == PrState::max_revisions;
}

std::string_view decision_name(DecisionKind k) {
    switch (k) {
        case DecisionKind::queued: return "queued";
        case DecisionKind::returned: return "returned";
        case DecisionKind::suppressed: return "suppressed";
        case DecisionKind::max_revisions: return "max-revisions";
    }
    return "?";
}

std::string_view queue_outcome_name(QueueOutcome k) {
    switch (k) {
        case QueueOutcome::merged: return "merged";
        case QueueOutcome::conflict: return "conflict";
        case QueueOutcome::build_failed: return "build-failed";
        case QueueOutcome::failed_merge: return "failed-merge";
        case QueueOutcome::max_revisions: return "max-revisions";
    }
    return "?";
}

std::vector<std::string> ticked_issues(const vcs::Tree& base, const vcs::Tree& head) {
    const auto before = issues::load_issues(base);
    const auto after = issues::load_issues(head);
    std::vector<std::string> out;
    for (const auto& [id, issue] : after.by_id) {
        if (issue.open()) continue;
        auto it = before.by_id.find(id);
        if (it != before.by_id.end() && it->second.open()) out.push_back(id);
    }
    return out;
}

Pipeline::Pipeline(vcs::VersionControl& repo, const checker::Checker& checker, PipelineConfig config)
    : repo_(repo), checker_(checker), config_(config) {
    if (config_.batch_size == 0) config_.batch_size = 1;
}

PullRequest& Pipeline::at(PrId id) {
    auto it = prs_.find(id);
    if (it == prs_.end()) throw Error(Errc::unknown_pr, "unknown pull request " + id.str());
    return it->second;
}

const PullRequest& Pipeline::get(PrId id) const {
    auto it = prs_.find(id);
    if (it == prs_.end()) throw Error(Errc::unknown_pr, "unknown pull request " + id.str());
    return it->second;
}

PullRequest& Pipeline::submit(PrId id, AgentId author, agents::Role role, const std::string& branch,
                              const std::string& task, SimTime now) {
    const auto base = repo_.branch_base(branch);
    const auto head = repo_.branch_head(branch);
    const auto base_tree = repo_.snapshot(base).files;
    const auto head_tree = repo_.snapshot(head).files;
    if (base == head || vcs::diff_trees(*base_tree, *head_tree).empty()) {
        throw Error(Errc::empty_diff, "branch '" + branch + "' has no changes against main");
    }
    auto it = prs_.find(id);
    if (it != prs_.end() && it->second.state != PrState::returned) {
        throw Error(Errc::invalid_argument, id.str() + " is " + std::string(state_name(it->second.state)));
    }
    auto& pr = prs_[id];
    if (it == prs_.end()) {
        pr.id = id;
        pr.author = author;
        pr.author_role = role;
        pr.branch = branch;
        pr.task = task;
    }
    pr.state = PrState::in_review;
    pr.round += 1;
    pr.base = base;
    pr.head = head;
    pr.ticked = ticked_issues(*base_tree, *head_tree);
    pr.reviews.clear();
    pr.submitted = now;
    return pr;
}

agents::ReviewView Pipeline::review_view(PrId id) const {
    const auto& pr = get(id);
    return agents::ReviewView{pr.id, pr.branch, repo_.snapshot(pr.base).tree(), repo_.snapshot(pr.head).tree(),
                              pr.ticked};
}

void Pipeline::record_review(PrId id, Review review) {
    auto& pr = at(id);
    if (pr.state != PrState::in_review) throw Error(Errc::invalid_argument, id.str() + " is not in review");
    pr.reviews.push_back(std::move(review));
}

bool Pipeline::reviews_complete(PrId id) const {
    const auto& pr = get(id);
    bool math = false, eng = false;
    for (const auto& r : pr.reviews) {
        if (r.verdict == agents::Verdict::reject) return true;
        (r.role == agents::Role::math_reviewer ? math : eng) = true;
    }
    return math && eng;
}

Decision Pipeline::decide(PrId id, SimTime now) {
    auto& pr = at(id);
    if (pr.state != PrState::in_review) throw Error(Errc::invalid_argument, id.str() + " is not in review");
    Decision d;
    bool changes = false;
    for (const auto& r : pr.reviews) {
        if (r.verdict == agents::Verdict::reject) {
            pr.state = PrState::suppressed;
            pr.closed = now;
            d.kind = DecisionKind::suppressed;
            d.feedback = r.findings;
            return d;
        }
        if (r.verdict == agents::Verdict::request_changes) changes = true;
        for (const auto& f : r.findings) d.feedback.push_back(f);
    }
    if (!changes) {
        pr.approved = true;
        auto preview = repo_.preview_merge(pr.branch);
        if (!preview.clean) {
            changes = true;
            for (const auto& c : preview.conflicts) d.feedback.push_back("conflict:" + c.path);
        } else if (auto report = checker_.build(preview.tree); !report.ok) {
            changes = true;
            d.feedback.push_back("build:" + first_error(report));
        }
    }
    if (!changes) {
        pr.state = PrState::queued;
        pr.feedback.clear();
        queue_.push_back(id);
        d.kind = DecisionKind::queued;
        return d;
    }
    pr.revision_count += 1;
    pr.feedback = d.feedback;
    if (pr.revision_count >= config_.max_revisions) {
        pr.state = PrState::max_revisions;
        pr.closed = now;
        d.kind = DecisionKind::max_revisions;
    } else {
        pr.state = PrState::returned;
        d.kind = DecisionKind::returned;
    }
    return d;
}

void Pipeline::abandon(PrId id, SimTime now) {
    auto& pr = at(id);
    if (terminal_state(pr.state)) return;
    if (pr.state == PrState::queued) {
        std::erase(queue_, id);
    }
    pr.state = PrState::abandoned;
    pr.closed = now;
}

QueueEvent Pipeline::send_back(PullRequest& pr, QueueOutcome why, std::vector<std::string> feedback, SimTime now) {
    QueueEvent ev{pr.id, why, std::nullopt, feedback};
    pr.revision_count += 1;
    pr.feedback = std::move(feedback);
    if (why == QueueOutcome::conflict) pr.attempt += 1;
    if (why == QueueOutcome::conflict && pr.attempt > config_.conflict_retries) {
        pr.state = PrState::failed_merge;
        pr.closed = now;
        ev.outcome = QueueOutcome::failed_merge;
    } else if (pr.revision_count >= config_.max_revisions) {
        pr.state = PrState::max_revisions;
        pr.closed = now;
        ev.outcome = QueueOutcome::max_revisions;
    } else {
        pr.state = PrState::returned;
    }
    return ev;
}

QueueEvent Pipeline::merge_one(PullRequest& pr, SimTime now) {
    vcs::MergeStatus st;
    try {
        st = repo_.rebase_onto_main(pr.branch);
    } catch (const Error& e) {
        return send_back(pr, QueueOutcome::conflict, {std::string("conflict:") + e.what()}, now);
    }
    if (!st.clean) {
        std::vector<std::string> fb;
        for (const auto& c : st.conflicts) fb.push_back("conflict:" + c.path);
        return send_back(pr, QueueOutcome::conflict, std::move(fb), now);
    }
    if (auto report = checker_.build(repo_.branch_tree(pr.branch)); !report.ok) {
        return send_back(pr, QueueOutcome::build_failed, {"build:" + first_error(report)}, now);
    }
    auto out = repo_.merge_to_main(pr.branch, kMergeQueue, now);
    if (!out.merged) {
        std::vector<std::string> fb;
        for (const auto& c : out.conflicts) fb.push_back("conflict:" + c.path);
        return send_back(pr, QueueOutcome::conflict, std::move(fb), now);
    }
    pr.state = PrState::merged;
    pr.closed = now;
    pr.feedback.clear();
    return QueueEvent{pr.id, QueueOutcome::merged, std::move(out.advance), {}};
}

QueueStep Pipeline::queue_step(SimTime now) {
    if (queue_.empty()) return {};
    if (config_.batch_size > 1) return batch_step(now);
    const auto id = queue_.front();
    queue_.pop_front();
    QueueStep step;
    step.builds = 1;
    step.events.push_back(merge_one(at(id), now));
    return step;
}

QueueStep Pipeline::batch_step(SimTime now) {
    QueueStep step;
    std::vector<PullRequest*> batch;
    while (!queue_.empty() && batch.size() < config_.batch_size) {
        batch.push_back(&at(queue_.front()));
        queue_.pop_front();
    }
    const auto main_tree = repo_.main().tree();
    auto base_of = [&](const PullRequest& pr) { return repo_.snapshot(repo_.branch_base(pr.branch)).tree(); };
    auto compose = [&](const std::vector<PullRequest*>& prs) -> std::optional<vcs::Tree> {
        vcs::Tree t = main_tree;
        for (auto* pr : prs) {
            auto m = vcs::merge_trees(base_of(*pr), t, repo_.branch_tree(pr->branch));
            if (!m.clean) return std::nullopt;
            t = std::move(m.tree);
        }
        return t;
    };

    std::map<PrId, QueueEvent> events;
    std::vector<PullRequest*> staged;
    for (auto* pr : batch) {
        auto trial = staged;
        trial.push_back(pr);
        if (compose(trial)) {
            staged = std::move(trial);
        } else {
            events.emplace(pr->id, send_back(*pr, QueueOutcome::conflict, {"conflict:staging"}, now));
        }
    }

    std::vector<PullRequest*> accepted;
    std::vector<PullRequest*> culprits;
    auto passes = [&](const std::vector<PullRequest*>& prs) {
        step.builds += 1;
        auto all = accepted;
        all.insert(all.end(), prs.begin(), prs.end());
        auto t = compose(all);
        return t && checker_.build(*t).ok;
    };
    // Bisection: a set that is known to fail is split without being rebuilt.
    std::function<void(const std::vector<PullRequest*>&, bool)> bisect = [&](const std::vector<PullRequest*>& set,
                                                                             bool known_fail) {
        if (set.empty()) return;
        if (!known_fail && passes(set)) {
            accepted.insert(accepted.end(), set.begin(), set.end());
            return;
        }
        if (set.size() == 1) {
            culprits.push_back(set.front());
            return;
        }
        const auto mid = set.size() / 2;
        std::vector<PullRequest*> left(set.begin(), set.begin() + static_cast<std::ptrdiff_t>(mid));
        std::vector<PullRequest*> right(set.begin() + static_cast<std::ptrdiff_t>(mid), set.end());
        const auto before = accepted.size();
        bisect(left, false);
        bisect(right, accepted.size() - before == left.size());
    };
    bisect(staged, false);

    for (auto* pr : accepted) events.emplace(pr->id, merge_one(*pr, now));
    for (auto* pr : culprits) {
        events.emplace(pr->id, send_back(*pr, QueueOutcome::build_failed, {"build:fails in batch"}, now));
    }
    for (auto* pr : batch) step.events.push_back(std::move(events.at(pr->id)));
    return step;
}

Json Pipeline::save() const {
    Json prs = Json::array();
    for (const auto& [id, pr] : prs_) {
        Json reviews = Json::array();
        for (const auto& r : pr.reviews) {
            reviews.push_back(Json{{"reviewer", r.reviewer.value},
                                   {"role", agents::role_name(r.role)},
                                   {"verdict", agents::verdict_name(r.verdict)},
                                   {"findings", r.findings}});
        }
        prs.push_back(Json{{"id", id.value},
                           {"author", pr.author.value},
                           {"author_role", agents::role_name(pr.author_role)},
                           {"branch", pr.branch},
                           {"task", pr.task},
                           {"state", state_name(pr.state)},
                           {"revision_count", pr.revision_count},
                           {"attempt", pr.attempt},
                           {"round", pr.round},
                           {"approved", pr.approved},
                           {"base", pr.base.hex},
                           {"head", pr.head.hex},
                           {"ticked", pr.ticked},
                           {"reviews", reviews},
                           {"feedback", pr.feedback},
                           {"submitted", pr.submitted},
                           {"closed", pr.closed}});
    }
    Json queue = Json::array();
    for (auto id : queue_) queue.push_back(id.value);
    return Json{{"prs", prs}, {"queue", queue}, {"batch_size", config_.batch_size}};
}

void Pipeline::load(const Json& j) {
    prs_.clear();
    queue_.clear();
    for (const auto& p : j.at("prs")) {
        PullRequest pr;
        pr.id = PrId{p.at("id").get<std::uint64_t>()};
        pr.author = AgentId{p.at("author").get<std::uint64_t>()};
        pr.author_role = agents::parse_role(p.at("author_role").get<std::string>()).value();
        pr.branch = p.at("branch").get<std::string>();
        pr.task = p.at("task").get<std::string>();
        pr.state = parse_state(p.at("state").get<std::string>()).value();
        pr.revision_count = p.at("revision_count").get<int>();
        pr.attempt = p.at("attempt").get<int>();
        pr.round = p.at("round").get<int>();
        pr.approved = p.at("approved").get<bool>();
        pr.base = vcs::CommitId{p.at("base").get<std::string>()};
        pr.head = vcs::CommitId{p.at("head").get<std::string>()};
        pr.ticked = p.at("ticked").get<std::vector<std::string>>();
        for (const auto& r : p.at("reviews")) {
            pr.reviews.push_back(Review{AgentId{r.at("reviewer").get<std::uint64_t>()},
                                        agents::parse_role(r.at("role").get<std::string>()).value(),
                                        agents::parse_verdict(r.at("verdict").get<std::string>()).value(),
                                        r.at("findings").get<std::vector<std::string>>()});
        }
        pr.feedback = p.at("feedback").get<std::vector<std::string>>();
        pr.submitted = p.at("submitted").get<SimTime>();
        pr.closed = p.at("closed").get<SimTime>();
        prs_[pr.id] = std::move(pr);
    }
    for (const auto& q : j.at("queue")) queue_.push_back(PrId{q.get<std::uint64_t>()});
    config_.batch_size = j.value("batch_size", config_.batch_size);
}

}  // namespace swarm::pipeline
