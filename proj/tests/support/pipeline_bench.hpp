#pragma once

// A pipeline over an in-memory repo whose PRs each add one small chapter file.

#include "swarm/checker/check.hpp"
#include "swarm/pipeline/pipeline.hpp"
#include "swarm/vcs/repository.hpp"

#include <string>
#include <vector>

namespace swarm::testing {

struct Bench {
    vcs::InMemoryRepo repo{vcs::Tree{{"chapters/base.toy", "def base needs .\n"}}};
    checker::ToyChecker checker;
    pipeline::Pipeline p;
    std::uint64_t next = 1;

    explicit Bench(pipeline::PipelineConfig cfg = {}) : p(repo, checker, cfg) {}

    // One PR adding its own chapter file. A breaker uses a name nothing defines.
    PrId open(bool breaker = false, const std::string& path = "") {
        const PrId id{next++};
        const AgentId author{100 + id.value};
        const auto branch = author.str() + "/work";
        repo.create_worktree(branch, author);
        const auto file = path.empty() ? "chapters/p" + std::to_string(id.value) + ".toy" : path;
        const auto name = "p" + std::to_string(id.value);
        const auto body = breaker ? "import chapters/zz_seed.toy\nthm " + name + " needs missing_" + name + ". proof.\n"
                                  : "import chapters/base.toy\ndef " + name + " needs base.\n";
        repo.write_file(branch, author, file, body);
        repo.commit(branch, author, "add " + name, 1);
        p.submit(id, author, agents::Role::prover, branch, "task-" + name, 1);
        return id;
    }

    void review(PrId id, agents::Verdict math, agents::Verdict eng, std::vector<std::string> findings = {}) {
        p.record_review(id, pipeline::Review{AgentId{1000}, agents::Role::math_reviewer, math, findings});
        if (math != agents::Verdict::reject) {
            p.record_review(id, pipeline::Review{AgentId{1001}, agents::Role::eng_reviewer, eng, findings});
        }
    }

    pipeline::Decision approve(PrId id) {
        review(id, agents::Verdict::approve, agents::Verdict::approve);
        return p.decide(id, 2);
    }

    // Drains the queue; returns the staging builds spent.
    std::size_t drain(std::vector<pipeline::QueueEvent>* events = nullptr) {
        std::size_t builds = 0;
        while (!p.queue_empty()) {
            auto st = p.queue_step(3);
            builds += st.builds;
            if (events) events->insert(events->end(), st.events.begin(), st.events.end());
        }
        return builds;
    }

    // Writes `file` on main through an operator branch; nullopt deletes it.
    void operator_write(const std::string& file, std::optional<std::string> content, SimTime t) {
        const std::string branch = "op/write";
        repo.create_worktree(branch, kOperator);
        repo.write_file(branch, kOperator, file, std::move(content));
        repo.commit(branch, kOperator, "operator edit", t);
        repo.merge_to_main(branch, kMergeQueue, t);
        repo.delete_branch(branch);
    }
};

}  // namespace swarm::testing
