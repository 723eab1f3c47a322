#include <doctest.h>

#include "swarm/common/rng.hpp"
#include "swarm/toolhost/toolhost.hpp"

using namespace swarm;
using namespace swarm::toolhost;

namespace {

// Independent UTF-8 validity check.
bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : (c >> 3) == 30 ? 4 : 0;
        if (len == 0 || i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += len;
    }
    return true;
}

struct Fixture {
    vcs::InMemoryRepo repo{vcs::Tree{{"ch01.toy", "def d1 needs .\nthm t1 needs d1. sorry.\n"},
                                     {"notes.md", "alpha\nbeta\ngamma\nbeta\n"}}};
    checker::ToyChecker checker;
    vcs::Tree reference{{"lib/basic.toy", "def nat_add needs .\nthm add_comm needs nat_add. proof.\n"},
                        {"lib/readme.md", "reference corpus\n"}};
    issues::IdSource ids{5};
    issues::TrackerConfig tracker;
    ToolHost host;
    ToolEnv env{repo, checker, reference, ids, tracker, PrId{3}, 0};
    AgentId me{100};
    AgentId other{101};

    Fixture() {
        repo.create_worktree("me/w", me);
        repo.create_worktree("other/w", other);
    }

    ToolResult call(const std::string& tool, Json args = Json::object(), const std::string& branch = "me/w") {
        return host.dispatch(ToolCall{tool, std::move(args), me, branch}, env);
    }
};

}  // namespace

TEST_CASE("truncate_output examples") {
    auto small = truncate_output("0123456789", 100);
    CHECK_FALSE(small.truncated);
    CHECK(small.text == "0123456789");

    std::string big;
    while (big.size() < 1024 * 1024) big += "some line of output text\n";
    auto cut = truncate_output(big, kDefaultOutputLimit);
    CHECK(cut.truncated);
    CHECK(cut.text.size() <= kDefaultOutputLimit);
    CHECK(cut.bytes_before == big.size());
    CHECK(cut.text.ends_with(truncation_marker(kDefaultOutputLimit, big.size())));
    const auto kept = cut.text.substr(0, cut.text.size() - truncation_marker(kDefaultOutputLimit, big.size()).size());
    CHECK(kept.ends_with('\n'));
    CHECK(big.starts_with(kept));
}

TEST_CASE("truncate_output fuzz: bound, flag and character boundaries") {
    static const char* kPieces[] = {"a", "bc", "\n", "é", "€", "𝔽", "ß\n", "     "};
    Rng rng(17);
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text;
        const auto pieces = rng.below(400);
        for (std::uint64_t k = 0; k < pieces; ++k) text += kPieces[rng.below(std::size(kPieces))];
        if (rng.bernoulli(0.3)) {
            std::string flat;
            for (char c : text) {
                if (c != '\n') flat += c;
            }
            text = flat;
        }
        const std::size_t limit = 1 + rng.below(300);
        auto r = truncate_output(text, limit);
        REQUIRE(r.text.size() <= limit);
        REQUIRE(r.truncated == (text.size() > limit));
        CHECK(r.bytes_before == text.size());
        if (!r.truncated) {
            CHECK(r.text == text);
            continue;
        }
        const auto marker = truncation_marker(limit, text.size());
        if (marker.size() >= limit) continue;
        REQUIRE(r.text.ends_with(marker));
        auto kept = r.text.substr(0, r.text.size() - marker.size());
        if (!kept.empty() && !text.starts_with(kept)) {
            // A separator newline may have been added after a mid-line cut.
            REQUIRE(kept.back() == '\n');
            kept.pop_back();
        }
        CHECK(text.starts_with(kept));
        CHECK(valid_utf8(kept));
    }
}

TEST_CASE("resolve_path containment") {
    CHECK(resolve_path("a/./b/../c.toy", "/ref/").path == "a/c.toy");
    CHECK(resolve_path("/ref/lib/x.toy", "/ref/").reference);
    CHECK(resolve_path("/ref/lib/x.toy", "/ref/").path == "lib/x.toy");
    CHECK_THROWS_AS(resolve_path("../x", "/ref/"), Error);
    CHECK_THROWS_AS(resolve_path("a/../../x", "/ref/"), Error);
    CHECK_THROWS_AS(resolve_path("/etc/passwd", "/ref/"), Error);
    CHECK_THROWS_AS(resolve_path("/reference/x", "/ref/"), Error);
}

TEST_CASE("file tools") {
    Fixture f;
    std::string fifteen;
    for (int i = 1; i <= 15; ++i) fifteen += "L" + std::to_string(i) + "\n";
    REQUIRE(f.call("write_file", {{"path", "big.md"}, {"content", fifteen}}).ok);
    auto r = f.call("read_file", {{"path", "big.md"}, {"start", 10}, {"end", 20}});
    CHECK(r.ok);
    CHECK_FALSE(r.truncated);
    CHECK(r.output == "L10\nL11\nL12\nL13\nL14\nL15\n");

    CHECK(f.call("edit_replace", {{"path", "ch01.toy"}, {"old", "sorry."}, {"new", "proof."}}).ok);
    CHECK(f.repo.worktree_tree("me/w").at("ch01.toy") == "def d1 needs .\nthm t1 needs d1. proof.\n");
    CHECK(f.call("edit_replace", {{"path", "notes.md"}, {"old", "beta"}, {"new", "x"}}).error == Errc::invalid_argument);
    CHECK(f.call("edit_replace", {{"path", "notes.md"}, {"old", "zeta"}, {"new", "x"}}).error == Errc::not_found);

    CHECK(f.call("edit_range", {{"path", "notes.md"}, {"start", 2}, {"end", 3}, {"content", "B\nC\nD"}}).ok);
    CHECK(f.repo.worktree_tree("me/w").at("notes.md") == "alpha\nB\nC\nD\nbeta\n");
    CHECK(f.call("edit_range", {{"path", "notes.md"}, {"start", 1}, {"end", 0}, {"content", "top"}}).ok);
    CHECK(f.repo.worktree_tree("me/w").at("notes.md") == "top\nalpha\nB\nC\nD\nbeta\n");

    CHECK(f.call("copy_range", {{"path", "notes.md"}, {"start", 1}, {"end", 2}, {"dest", "copy.md"}}).ok);
    CHECK(f.repo.worktree_tree("me/w").at("copy.md") == "top\nalpha\n");
    CHECK(f.call("cut_range", {{"path", "notes.md"}, {"start", 3}, {"end", 5}, {"dest", "notes.md"}, {"at", 1}}).ok);
    CHECK(f.repo.worktree_tree("me/w").at("notes.md") == "B\nC\nD\ntop\nalpha\nbeta\n");

    auto listing = f.call("list_files");
    CHECK(listing.output.find("ch01.toy\n") != std::string::npos);
    CHECK(f.call("list_files", {{"path", "/ref/lib"}}).output == "/ref/lib/basic.toy\n/ref/lib/readme.md\n");
    CHECK(f.call("read_file", {{"path", "/ref/lib/readme.md"}}).output == "reference corpus\n");
    CHECK(f.call("write_file", {{"path", "/ref/lib/x"}, {"content", "x"}}).error == Errc::write_access);
    CHECK(f.call("read_file", {{"path", "../../etc/passwd"}}).error == Errc::path_escape);
    CHECK(f.call("read_file", {{"path", "/etc/passwd"}}).error == Errc::path_escape);
    CHECK(f.call("read_file", {{"path", 3}}).error == Errc::invalid_argument);
    CHECK(f.call("read_file").error == Errc::invalid_argument);
    CHECK(f.call("no_such_tool").error == Errc::unknown_tool);
    CHECK(f.call("delete_file", {{"path", "copy.md"}}).ok);
    CHECK_FALSE(f.repo.worktree_tree("me/w").count("copy.md"));
}

TEST_CASE("writes are restricted to the caller's branch") {
    Fixture f;
    CHECK(f.call("write_file", {{"path", "a.md"}, {"content", "x"}}, "other/w").error == Errc::write_access);
    REQUIRE(f.call("write_file", {{"path", "a.md"}, {"content", "x"}}).ok);
    CHECK(f.call("git_commit", {{"message", "m"}, {"branch", "other/w"}}).error == Errc::write_access);
    CHECK(f.call("git_commit", {{"message", "m"}}).ok);
    // Reads of another branch are allowed (reviewers read PR snapshots).
    CHECK(f.call("read_file", {{"path", "notes.md"}}, "other/w").ok);
}

TEST_CASE("git tools") {
    Fixture f;
    CHECK(f.call("git_status").output.find("clean") != std::string::npos);
    f.call("write_file", {{"path", "new.md"}, {"content", "n\n"}});
    f.call("edit_replace", {{"path", "notes.md"}, {"old", "alpha"}, {"new", "ALPHA"}});
    auto st = f.call("git_status").output;
    CHECK(st.find("A new.md") != std::string::npos);
    CHECK(st.find("M notes.md") != std::string::npos);
    CHECK(f.call("git_add", {{"paths", {"new.md"}}}).ok);
    CHECK(f.call("git_add", {{"paths", {"ch01.toy"}}}).error == Errc::not_found);
    CHECK(f.call("git_diff").output.find("+ALPHA") != std::string::npos);
    CHECK(f.call("git_checkout_file", {{"path", "notes.md"}}).ok);
    CHECK(f.call("git_diff").output.find("ALPHA") == std::string::npos);
    REQUIRE(f.call("git_commit", {{"message", "add note"}}).ok);
    CHECK(f.call("git_log").output.find("add note") != std::string::npos);
    CHECK(f.call("git_diff", {{"committed", true}}).output.find("+n") != std::string::npos);
    CHECK(f.call("git_commit", {{"message", "again"}}).error == Errc::nothing_to_commit);
    CHECK(f.call("git_show_conflicts").output == "no conflicts with main\n");
    CHECK(f.call("git_rebase").output == "rebased onto main\n");
    f.call("write_file", {{"path", "junk.md"}, {"content", "j"}});
    CHECK(f.call("git_reset").ok);
    CHECK(f.call("git_status").output.find("clean") != std::string::npos);
    CHECK(f.call("git_reset", {{"to_main", true}}).ok);
    CHECK(f.repo.branch_log("me/w").empty());
}

TEST_CASE("check tools") {
    Fixture f;
    auto snip = f.call("check_snippet", {{"code", "thm probe needs t1. proof.\n"}});
    CHECK(snip.output.rfind("ok", 0) == 0);
    CHECK(f.call("check_snippet", {{"code", "thm probe needs nope. proof.\n"}}).output.rfind("failed", 0) == 0);
    auto build = f.call("build");
    CHECK(build.ok);
    CHECK(build.duration == f.host.config().build_latency);
    CHECK(build.output.find("2 declarations, 1 sorry") != std::string::npos);
    CHECK(f.call("ref_grep", {{"pattern", "nat_add"}}).output ==
          "/ref/lib/basic.toy:1:def nat_add needs .\n/ref/lib/basic.toy:2:thm add_comm needs nat_add. proof.\n");
    CHECK(f.call("ref_search", {{"name", "comm"}}).output ==
          "/ref/lib/basic.toy:2: thm add_comm needs nat_add. proof.\n");
}

TEST_CASE("reference grep returning megabytes is truncated") {
    Fixture f;
    std::string blob;
    while (blob.size() < 5 * 1024 * 1024) blob += "match this line of the synthetic corpus\n";
    f.reference["lib/huge.md"] = blob;
    auto r = f.call("ref_grep", {{"pattern", "match"}});
    CHECK(r.ok);
    CHECK(r.truncated);
    CHECK(r.output.size() <= kDefaultOutputLimit);
    CHECK(r.bytes_before_truncation > kDefaultOutputLimit);
}

TEST_CASE("shell allowlist, pipes and containment") {
    Fixture f;
    auto sh = [&](const std::string& cmd) { return f.call("shell", {{"command", cmd}}); };
    CHECK(sh("rm -rf /").error == Errc::disallowed_command);
    CHECK(sh("cat notes.md > out.md").error == Errc::disallowed_command);
    CHECK(sh("cat < notes.md").error == Errc::disallowed_command);
    CHECK(sh("cat notes.md; ls").error == Errc::disallowed_command);
    CHECK(sh("cat notes.md && ls").error == Errc::disallowed_command);
    CHECK(sh("echo `ls`").error == Errc::disallowed_command);
    CHECK(sh("echo $(ls)").error == Errc::disallowed_command);
    CHECK(sh("cat ../secret").error == Errc::path_escape);
    CHECK(sh("cat /etc/passwd").error == Errc::path_escape);

    CHECK(sh("cat notes.md | sort | uniq -c").output == "1 alpha\n2 beta\n1 gamma\n");
    CHECK(sh("grep -n beta notes.md").output == "2:beta\n4:beta\n");
    CHECK(sh("grep -c beta notes.md").output == "2\n");
    CHECK(sh("grep -v beta notes.md | wc -l").output == "2\n");
    CHECK(sh("head -n 2 notes.md").output == "alpha\nbeta\n");
    CHECK(sh("tail -1 notes.md").output == "beta\n");
    CHECK(sh("sort -r notes.md | head -n 1").output == "gamma\n");
    CHECK(sh("echo 'a,b,c' | cut -d , -f 2,3").output == "b,c\n");
    CHECK(sh("ls").output == "ch01.toy\nnotes.md\n");
    CHECK(sh("ls /ref").output == "lib/\n");
    CHECK(sh("tree /ref").output == "lib/basic.toy\nlib/readme.md\n");
    CHECK(sh("grep -r nat_add /ref").output.find("/ref/lib/basic.toy:def nat_add") != std::string::npos);
    CHECK(sh("basename a/b/c.toy").output == "c.toy\n");
    CHECK(sh("dirname a/b/c.toy").output == "a/b\n");
    CHECK(sh("wc -l notes.md").output == "4 notes.md\n");
    CHECK(sh("diff notes.md ch01.toy").output.find("+def d1") != std::string::npos);
    auto build = sh("lake build");
    CHECK(build.ok);
    CHECK(build.output.rfind("build succeeded", 0) == 0);
    CHECK(sh("lake env").error == Errc::disallowed_command);

    f.host.set_allowlist(parse_allowlist("cat # only cat\n"));
    CHECK(sh("ls").error == Errc::disallowed_command);
    CHECK(sh("cat notes.md").ok);
}

TEST_CASE("timeouts") {
    Fixture f;
    auto r = f.call("shell", {{"command", "sleep 100"}});
    CHECK(r.error == Errc::timeout);
    CHECK(r.duration == seconds(60));
    CHECK(f.call("shell", {{"command", "sleep 30"}}).duration == seconds(30));

    ToolHostConfig slow;
    slow.build_latency = seconds(900);
    Fixture g;
    ToolHost host(slow);
    auto b = host.dispatch(ToolCall{"build", Json::object(), g.me, "me/w"}, g.env);
    CHECK(b.error == Errc::timeout);
    CHECK(b.duration == seconds(600));
}

TEST_CASE("issue tools") {
    Fixture f;
    auto created = f.call("create_issue", {{"title", "blocked on d9"}, {"kind", "blocker"}, {"subject", "d9"}});
    REQUIRE(created.ok);
    const auto id = created.output.substr(std::string("created issue ").size(), 36);
    CHECK(f.call("list_issues", {{"status", "open"}}).output.find(id) != std::string::npos);
    CHECK(f.call("list_issues", {{"kind", "global"}}).output == "no matching issues\n");
    CHECK(f.call("create_issue", {{"title", "x"}, {"kind", "nonsense"}}).error == Errc::invalid_argument);
    CHECK(f.call("resolve_issue", {{"id", id}}).ok);
    CHECK(f.call("resolve_issue", {{"id", id}}).error == Errc::already_resolved);
    CHECK(f.call("resolve_issue", {{"id", "00000000-0000-4000-8000-000000000000"}}).error == Errc::unknown_issue);
}

TEST_CASE("listing ten thousand issues is truncated") {
    Fixture f;
    vcs::Tree tree;
    issues::IdSource ids(8);
    for (int i = 0; i < 10000; ++i) {
        auto [issue, w] = issues::create_issue(tree, ids, AgentId{100}, {"task " + std::to_string(i), "", issues::IssueKind::proving_task, "t"});
        f.repo.write_file("me/w", f.me, w.path, w.content);
    }
    auto r = f.call("list_issues");
    CHECK(r.truncated);
    CHECK(r.output.size() <= kDefaultOutputLimit);
    CHECK(r.output.find("[output truncated") != std::string::npos);
}

TEST_CASE("path audit: random file calls never leave the caller's worktree") {
    Fixture f;
    const auto main_before = f.repo.main().tree();
    const auto other_before = f.repo.worktree_tree("other/w");
    const auto ref_before = f.reference;
    Rng rng(23);
    static const char* kParts[] = {"a", "b", "..", ".", "/ref", "/etc", "", "lib", "x.md"};
    for (int i = 0; i < 2000; ++i) {
        std::string path;
        const auto n = 1 + rng.below(4);
        for (std::uint64_t k = 0; k < n; ++k) path += std::string(k ? "/" : "") + kParts[rng.below(std::size(kParts))];
        const auto tool = rng.bernoulli(0.5) ? "write_file" : "read_file";
        auto r = f.call(tool, {{"path", path}, {"content", "v\n"}});
        if (!r.ok) {
            CHECK(r.error.has_value());
            continue;
        }
        if (std::string(tool) == "write_file") {
            ResolvedPath p = resolve_path(path, "/ref/");
            CHECK_FALSE(p.reference);
            CHECK(f.repo.worktree_tree("me/w").at(p.path) == "v\n");
        }
    }
    CHECK(f.repo.main().tree() == main_before);
    CHECK(f.repo.worktree_tree("other/w") == other_before);
    CHECK(f.reference == ref_before);
}
