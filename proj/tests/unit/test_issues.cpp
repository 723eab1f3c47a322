#include <doctest.h>

#include "swarm/common/error.hpp"
#include "swarm/issues/issue.hpp"
#include "swarm/vcs/repository.hpp"

#include <set>

using namespace swarm;
using namespace swarm::issues;

TEST_CASE("issue files round trip") {
    Issue i;
    i.id = make_uuid(1, AgentId{100}, 0);
    i.title = "prove t1\nplease";
    i.kind = IssueKind::proving_task;
    i.created_by = AgentId{100};
    i.subject = "t1";
    i.body = "details\n\n---\nmore\n";
    auto parsed = parse_issue(format_issue(i));
    CHECK(parsed.title == "prove t1 please");
    parsed.title = i.title;
    CHECK(parsed == i);

    i.status = IssueStatus::resolved;
    i.resolved_by = PrId{7};
    CHECK(parse_issue(format_issue(i)).resolved_by == PrId{7});

    CHECK_THROWS_AS(parse_issue("no header"), Error);
    CHECK_THROWS_AS(parse_issue("---\nid: x\n---\n"), Error);
    auto bad = format_issue(i);
    bad.replace(bad.find("resolved_by: pr-7"), 17, "resolved_by: ");
    CHECK_THROWS_AS(parse_issue(bad), Error);
}

TEST_CASE("uuids have version 4 shape and are distinct") {
    std::set<std::string> seen;
    for (std::uint64_t a = 0; a < 50; ++a) {
        for (std::uint64_t c = 0; c < 40; ++c) {
            auto id = make_uuid(42, AgentId{a}, c);
            CHECK(id.size() == 36);
            CHECK(id[14] == '4');
            CHECK(std::string("89ab").find(id[19]) != std::string::npos);
            seen.insert(id);
        }
    }
    CHECK(seen.size() == 2000);
    CHECK(make_uuid(42, AgentId{3}, 5) == make_uuid(42, AgentId{3}, 5));
}

TEST_CASE("create, list and resolve") {
    IdSource ids(9);
    vcs::Tree tree;
    CHECK(load_issues(tree).by_id.empty());

    auto [a, wa] = create_issue(tree, ids, AgentId{100}, {"blocked on d1", "need d1", IssueKind::blocker, "d1"});
    auto [b, wb] = create_issue(tree, ids, AgentId{100}, {"x", "", IssueKind::global, ""});
    CHECK(a.id != b.id);
    CHECK(wa.path == "issues/" + a.id + ".md");
    tree[wa.path] = wa.content;
    tree[wb.path] = wb.content;
    for (int k = 0; k < 3; ++k) {
        auto [c, wc] = create_issue(tree, ids, AgentId{101}, {"p", "", IssueKind::proving_task, "t"});
        tree[wc.path] = wc.content;
    }
    auto set = load_issues(tree);
    CHECK(set.errors.empty());
    CHECK(set.by_id.size() == 5);

    auto [r, wr] = mark_resolved(tree, a.id, PrId{12});
    tree[wr.path] = wr.content;
    auto [r2, wr2] = mark_resolved(tree, b.id, PrId{12});
    tree[wr2.path] = wr2.content;
    set = load_issues(tree);
    CHECK(set.filter(IssueStatus::open, std::nullopt).size() == 3);
    CHECK(set.filter(IssueStatus::resolved, std::nullopt).size() == 2);
    CHECK(set.filter(std::nullopt, IssueKind::proving_task).size() == 3);
    CHECK(set.open_about("t").size() == 3);

    try {
        mark_resolved(tree, a.id, PrId{13});
        FAIL("expected already_resolved");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::already_resolved);
    }
    try {
        mark_resolved(tree, "00000000-0000-4000-8000-000000000000", PrId{13});
        FAIL("expected unknown_issue");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_issue);
    }

    CHECK(coherence_violations(set, {PrId{12}}).empty());
    CHECK(coherence_violations(set, {}).size() == 2);
    CHECK(summarize(set.filter(IssueStatus::resolved, std::nullopt)).find("[resolved]") != std::string::npos);
}

TEST_CASE("malformed tracker files are reported, not fatal") {
    vcs::Tree tree{{"issues/junk.md", "hello"}, {"issues/sub/deep.md", "ignored"}, {"notes.md", "x"}};
    auto set = load_issues(tree);
    CHECK(set.by_id.empty());
    CHECK(set.errors.size() == 1);
}

TEST_CASE("triage flags issues whose subject is proved on main") {
    vcs::Tree tree{{"a.toy", "def d1 needs .\nthm t1 needs d1. proof.\nthm t2 needs d1. sorry.\n"}};
    IdSource ids(1);
    auto add = [&](IssueKind k, const std::string& subject) {
        auto [i, w] = create_issue(tree, ids, AgentId{100}, {"t", "", k, subject});
        tree[w.path] = w.content;
        return i.id;
    };
    const auto stale = add(IssueKind::proving_task, "t1");
    add(IssueKind::proving_task, "t2");
    add(IssueKind::blocker, "missing_helper");
    const auto stale_blocker = add(IssueKind::blocker, "d1");
    add(IssueKind::global, "t1");
    auto flagged = triage(checker::analyze(tree), load_issues(tree));
    std::sort(flagged.begin(), flagged.end());
    std::vector<std::string> expected{stale, stale_blocker};
    std::sort(expected.begin(), expected.end());
    CHECK(flagged == expected);
}

TEST_CASE("uuid uniqueness across 1000 concurrent creators merged to main") {
    vcs::InMemoryRepo repo(vcs::Tree{{"README.md", "x\n"}});
    IdSource ids(2024);
    std::vector<std::string> branches;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const AgentId who{kFirstAgentId + k};
        const auto branch = who.str() + "/issue";
        repo.create_worktree(branch, who);
        const auto snapshot = repo.worktree_tree(branch);
        auto [issue, w] = create_issue(snapshot, ids, who, {"t", "", IssueKind::report, ""});
        repo.write_file(branch, who, w.path, w.content);
        repo.commit(branch, who, "issue", 0);
        branches.push_back(branch);
    }
    for (const auto& b : branches) REQUIRE(repo.merge_to_main(b, kMergeQueue, 1).merged);
    auto set = load_issues(repo.main().tree());
    CHECK(set.errors.empty());
    CHECK(set.by_id.size() == 1000);
}
