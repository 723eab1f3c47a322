#include <doctest.h>

#include "swarm/agents/policy.hpp"
#include "swarm/agents/review.hpp"
#include "swarm/agents/roles.hpp"
#include "swarm/agents/session.hpp"
#include "swarm/common/error.hpp"
#include "swarm/common/rng.hpp"
#include "swarm/orchestrator/scenario.hpp"

#include <cmath>

using namespace swarm;
using namespace swarm::agents;

namespace {

// Flips the body of one decl in a solution tree.
vcs::Tree with_body(vcs::Tree tree, const Scenario& sc, const std::string& name, const char* from, const char* to) {
    const auto* ch = sc.chapter_of(name);
    REQUIRE(ch != nullptr);
    auto& text = tree[ch->path];
    const auto at = text.find(" " + name + " ");
    REQUIRE(at != std::string::npos);
    const auto end = text.find('\n', at);
    const auto pos = text.find(from, at);
    REQUIRE(pos < end);
    text.replace(pos, std::string(from).size(), to);
    return tree;
}

const DeclSpec* first_thm(const Scenario& sc, bool cited) {
    for (const auto& ch : sc.chapters)
        for (const auto& d : ch.decls)
            if (d.kind == checker::DeclKind::thm && d.cited == cited && !d.exercise) return &d;
    return nullptr;
}

orchestrator::ScenarioParams small() {
    orchestrator::ScenarioParams p;
    p.chapters = 3;
    p.cited_targets = 2;
    p.exercise_targets = 1;
    return p;
}

}  // namespace

TEST_CASE("names and labels round trip") {
    for (auto r : kAllRoles) CHECK(parse_role(role_name(r)) == r);
    for (auto o : kAllOutcomes) CHECK(parse_outcome(outcome_name(o)) == o);
    CHECK(role_label(Role::eng_reviewer) == "Eng. Reviewer");
    CHECK(outcome_label(Outcome::no_pr_blocked) == "No PR (blocked)");
    CHECK(outcome_label(Outcome::max_iterations) == "Max Iterations");
    CHECK_FALSE(parse_role("manager"));
}

TEST_CASE("outcome classification follows the fixed priority over all fact combinations") {
    const std::array<Outcome, 6> order = {Outcome::merged,         Outcome::approved, Outcome::max_revisions,
                                          Outcome::max_iterations, Outcome::aborted,  Outcome::no_pr_blocked};
    for (int bits = 0; bits < 64; ++bits) {
        OutcomeFacts f;
        f.merged = bits & 1;
        f.approved = bits & 2;
        f.revision_cap = bits & 4;
        f.turn_cap = bits & 8;
        f.aborted = bits & 16;
        f.blocked = bits & 32;
        Outcome expect = Outcome::no_pr;
        for (int i = 0; i < 6; ++i) {
            if (bits & (1 << i)) {
                expect = order[static_cast<std::size_t>(i)];
                break;
            }
        }
        CHECK(classify_outcome(f) == expect);
    }
}

TEST_CASE("turn caps by role") {
    CHECK(default_max_turns(Role::math_reviewer) == 128);
    CHECK(default_max_turns(Role::eng_reviewer) == 128);
    CHECK(default_max_turns(Role::prover) == 256);
    CHECK(default_max_turns(Role::maintainer) == 512);
}

TEST_CASE("role profiles carry the per-role averages of the token table") {
    struct Row {
        Role role;
        double turns, in_k, out_k;
    };
    const Row rows[] = {{Role::sketcher, 59.8, 71, 0.4},        {Role::prover, 50.0, 2874, 22.3},
                        {Role::maintainer, 125.9, 6923, 42.9},  {Role::math_reviewer, 21.7, 553, 6.3},
                        {Role::eng_reviewer, 12.7, 227, 3.0},   {Role::triage, 125.1, 4994, 23.8},
                        {Role::scan, 235.1, 14317, 31.3},       {Role::progress, 46.8, 2853, 10.4}};
    for (const auto& r : rows) {
        const auto p = default_profile(r.role);
        CHECK(p.avg_turns == doctest::Approx(r.turns));
        CHECK(p.avg_in == doctest::Approx(r.in_k * 1e3));
        CHECK(p.avg_out == doctest::Approx(r.out_k * 1e3));
    }
}

TEST_CASE("token model reproduces the profile for a session of average length") {
    for (auto role : kAllRoles) {
        const auto p = default_profile(role);
        const auto m = TokenModel::for_profile(p);
        // Oracle: turn i resends the i appends made so far.
        const auto T = static_cast<int>(std::lround(p.avg_turns * 10));
        double in = 0;
        for (int i = 1; i <= T; ++i) in += i * m.append_mean;
        const double t = T / 10.0;
        const double expect = p.avg_in * (t * 10 * (t * 10 + 1)) / (p.avg_turns * (p.avg_turns + 1.0));
        CHECK(in == doctest::Approx(expect).epsilon(1e-9));
        CHECK(m.out_mean * p.avg_turns == doctest::Approx(p.avg_out));
    }
    CHECK(TokenModel::for_profile(RoleProfile{}).append_mean == 0);
}

TEST_CASE("lognormal draws have the requested mean") {
    Rng rng(11);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += rng.lognormal_with_mean(50.0, 0.6);
    CHECK(sum / n == doctest::Approx(50.0).epsilon(0.01));
}

TEST_CASE("agent records round trip through JSON") {
    AgentRecord r;
    r.id = AgentId{123};
    r.role = Role::maintainer;
    r.task = "issue:abc";
    r.outcome = Outcome::max_revisions;
    r.turns = 140;
    r.tokens_in = 7'000'000;
    r.tokens_out = 40'000;
    r.pr = PrId{9};
    r.revisions = 10;
    r.files_touched = {2, 1};
    r.code_net = -30;
    r.coordination_net = 12;
    r.start = 5;
    r.end = 99;
    const auto back = record_from_json(to_json(r));
    CHECK(to_json(back) == to_json(r));
    auto bad = to_json(r);
    bad["role"] = "manager";
    CHECK_THROWS_AS(record_from_json(bad), Error);
    bad.erase("role");
    CHECK_THROWS_AS(record_from_json(bad), Error);
}

TEST_CASE("model-backed policy is a stub") {
    LlmPolicy p("http://localhost:0");
    Scenario sc;
    const auto result = [&]() -> Errc {
        try {
            checker::Analysis a;
            issues::IssueSet is;
            vcs::InMemoryRepo repo;
            std::string branch = "b";
            PolicySettings settings;
            Rng rng(1);
            PlanContext ctx{repo, sc, a, is, branch, AgentId{100}, std::nullopt, nullptr, settings, rng};
            p.plan(ctx);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::invalid_argument;
    }();
    CHECK(result == Errc::unimplemented);
}

TEST_CASE("math review accepts a faithful proof and rejects regressions") {
    const auto sc = orchestrator::generate_scenario(small(), 5);
    const auto solved = orchestrator::solution_tree(sc);
    const auto* thm = first_thm(sc, false);
    REQUIRE(thm != nullptr);
    const auto before = with_body(solved, sc, thm->name, "proof.", "sorry.");
    const std::vector<std::string> none;

    auto ok = math_review(ReviewInput{before, solved, none, sc});
    CHECK(ok.verdict == Verdict::approve);

    auto back = math_review(ReviewInput{solved, before, none, sc});
    CHECK(back.verdict == Verdict::reject);
    REQUIRE_FALSE(back.findings.empty());
    CHECK(back.findings.front().rfind("regression:", 0) == 0);
}

TEST_CASE("math review rejects a proof of a cited result") {
    const auto sc = orchestrator::generate_scenario(small(), 5);
    const auto solved = orchestrator::solution_tree(sc);
    const auto* cited = first_thm(sc, true);
    REQUIRE(cited != nullptr);
    const auto proved = with_body(solved, sc, cited->name, "sorry.", "proof.");
    const std::vector<std::string> none;
    auto r = math_review(ReviewInput{solved, proved, none, sc});
    CHECK(r.verdict == Verdict::reject);
    bool found = false;
    for (const auto& f : r.findings) found = found || f.rfind("cited:", 0) == 0;
    CHECK(found);
}

TEST_CASE("eng review enforces the size limits") {
    const auto sc = orchestrator::generate_scenario(small(), 5);
    const auto base = orchestrator::solution_tree(sc);
    ReviewRules rules;
    rules.noise = 0;
    const std::vector<std::string> none;

    auto grown = [&](int lines) {
        auto t = base;
        std::string text;
        for (int i = 0; i < lines; ++i) text += "def x_filler" + std::to_string(i) + " needs .\n";
        t["chapters/zz_filler.toy"] = text;
        return t;
    };
    CHECK(eng_review(ReviewInput{base, grown(400), none, sc}, rules).verdict == Verdict::approve);
    const auto big = eng_review(ReviewInput{base, grown(401), none, sc}, rules);
    CHECK(big.verdict == Verdict::request_changes);
    bool size = false;
    for (const auto& f : big.findings) size = size || f.rfind("size:", 0) == 0;
    CHECK(size);
}
