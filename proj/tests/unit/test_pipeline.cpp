#include <doctest.h>

#include "support/pipeline_bench.hpp"
#include "swarm/common/error.hpp"
#include "swarm/common/rng.hpp"
#include "swarm/pipeline/pipeline.hpp"

#include <cmath>
#include <set>

using namespace swarm;
using namespace swarm::pipeline;
using agents::Role;
using agents::Verdict;
using testing::Bench;

TEST_CASE("decide waits for both reviews unless one rejects") {
    Bench b;
    auto a = b.open();
    b.p.record_review(a, Review{AgentId{1}, Role::math_reviewer, Verdict::approve, {}});
    CHECK_FALSE(b.p.reviews_complete(a));
    b.p.record_review(a, Review{AgentId{2}, Role::eng_reviewer, Verdict::approve, {}});
    CHECK(b.p.reviews_complete(a));
    CHECK(b.p.decide(a, 2).kind == DecisionKind::queued);
    CHECK(b.p.get(a).approved);

    auto r = b.open();
    b.p.record_review(r, Review{AgentId{1}, Role::math_reviewer, Verdict::reject, {"fidelity:wrong statement"}});
    CHECK(b.p.reviews_complete(r));
    const auto d = b.p.decide(r, 2);
    CHECK(d.kind == DecisionKind::suppressed);
    CHECK(d.feedback == std::vector<std::string>{"fidelity:wrong statement"});
    CHECK(b.p.get(r).state == PrState::suppressed);
    CHECK_THROWS_AS(b.p.record_review(r, Review{}), Error);
}

TEST_CASE("change requests return the PR and count as revisions") {
    Bench b;
    auto a = b.open();
    b.review(a, Verdict::approve, Verdict::request_changes, {"size:too long"});
    const auto d = b.p.decide(a, 2);
    CHECK(d.kind == DecisionKind::returned);
    CHECK(b.p.get(a).revision_count == 1);
    CHECK(b.p.get(a).state == PrState::returned);
    CHECK_FALSE(b.p.get(a).approved);
}

TEST_CASE("approved PR that breaks the build is returned before queueing") {
    Bench b;
    auto a = b.open(true);
    const auto d = b.approve(a);
    CHECK(d.kind == DecisionKind::returned);
    REQUIRE_FALSE(d.feedback.empty());
    CHECK(d.feedback.front().rfind("build:", 0) == 0);
    CHECK(b.p.queue_empty());
}

TEST_CASE("revision cap is reached at exactly the tenth change request") {
    Bench b;
    auto a = b.open();
    const AgentId author = b.p.get(a).author;
    const auto branch = b.p.get(a).branch;
    int returned = 0;
    for (int round = 1;; ++round) {
        b.review(a, Verdict::request_changes, Verdict::approve, {"nit:style"});
        const auto d = b.p.decide(a, round);
        if (d.kind == DecisionKind::max_revisions) {
            CHECK(round == 10);
            break;
        }
        REQUIRE(d.kind == DecisionKind::returned);
        ++returned;
        b.repo.write_file(branch, author, "chapters/extra.toy", "def extra" + std::to_string(round) + " needs .\n");
        b.repo.commit(branch, author, "revise", round);
        b.p.submit(a, author, Role::prover, branch, "task", round);
        REQUIRE(round < 20);
    }
    CHECK(returned == 9);
    CHECK(b.p.get(a).revision_count == 10);
    CHECK(b.p.get(a).state == PrState::max_revisions);
}

TEST_CASE("empty branches are refused") {
    Bench b;
    b.repo.create_worktree("agent-9/empty", AgentId{9});
    CHECK_THROWS_AS(b.p.submit(PrId{50}, AgentId{9}, Role::prover, "agent-9/empty", "t", 0), Error);
}

TEST_CASE("FIFO queue builds once per PR and merges in order") {
    Bench b;
    std::vector<PrId> ids;
    for (int i = 0; i < 64; ++i) {
        ids.push_back(b.open());
        REQUIRE(b.approve(ids.back()).kind == DecisionKind::queued);
    }
    std::vector<QueueEvent> events;
    CHECK(b.drain(&events) == 64);
    REQUIRE(events.size() == 64);
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(events[i].pr == ids[i]);
        CHECK(events[i].outcome == QueueOutcome::merged);
    }
    CHECK(checker::check(b.repo.main().tree()).ok);
}

TEST_CASE("batches of compatible PRs need one staging build each") {
    Bench b(PipelineConfig{10, 3, 8});
    for (int i = 0; i < 64; ++i) REQUIRE(b.approve(b.open()).kind == DecisionKind::queued);
    std::vector<QueueEvent> events;
    const auto builds = b.drain(&events);
    CHECK(builds <= 8);
    CHECK(builds == 8);
    for (const auto& e : events) CHECK(e.outcome == QueueOutcome::merged);
    CHECK(b.repo.main().tree().size() == 65);
}

TEST_CASE("bisection isolates one breaker per batch within 2 log2(8) + 1 builds") {
    const std::size_t bound = 2 * static_cast<std::size_t>(std::log2(8.0)) + 1;
    for (std::size_t pos = 0; pos < 8; ++pos) {
        Bench b(PipelineConfig{10, 3, 8});
        std::vector<PrId> ids;
        for (std::size_t i = 0; i < 8; ++i) ids.push_back(b.open(i == pos));
        // The breaker's dependency exists on main while it is reviewed and is removed
        // before the batch is staged.
        b.repo.create_worktree("op/seed", kOperator);
        const auto name = "missing_p" + std::to_string(ids[pos].value);
        b.repo.write_file("op/seed", kOperator, "chapters/zz_seed.toy", "def " + name + " needs .\n");
        b.repo.commit("op/seed", kOperator, "seed", 1);
        REQUIRE(b.repo.merge_to_main("op/seed", kMergeQueue, 1).merged);
        for (auto id : ids) REQUIRE(b.approve(id).kind == DecisionKind::queued);
        b.repo.create_worktree("op/unseed", kOperator);
        b.repo.write_file("op/unseed", kOperator, "chapters/zz_seed.toy", std::nullopt);
        b.repo.commit("op/unseed", kOperator, "unseed", 2);
        REQUIRE(b.repo.merge_to_main("op/unseed", kMergeQueue, 2).merged);

        const auto st = b.p.queue_step(3);
        CAPTURE(pos);
        CHECK(st.builds <= bound);
        REQUIRE(st.events.size() == 8);
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(st.events[i].pr == ids[i]);
            CHECK(st.events[i].outcome == (i == pos ? QueueOutcome::build_failed : QueueOutcome::merged));
        }
        CHECK(b.p.get(ids[pos]).state == PrState::returned);
        CHECK(checker::check(b.repo.main().tree()).ok);
    }
}

TEST_CASE("a PR that conflicts in the queue goes back to its author") {
    Bench b(PipelineConfig{10, 3, 1});
    auto first = b.open(false, "chapters/shared.toy");
    auto second = b.open(false, "chapters/shared.toy");
    REQUIRE(b.approve(first).kind == DecisionKind::queued);
    REQUIRE(b.approve(second).kind == DecisionKind::queued);
    b.p.queue_step(3);
    CHECK(b.p.get(first).state == PrState::merged);
    auto st = b.p.queue_step(4);
    REQUIRE(st.events.size() == 1);
    CHECK(st.events[0].outcome == QueueOutcome::conflict);
    CHECK(b.p.get(second).attempt == 1);
    CHECK(b.p.get(second).revision_count == 1);
}
