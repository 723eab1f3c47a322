#include "swarm/vcs/git_adapter.hpp"

#include "swarm/common/error.hpp"

namespace swarm::vcs {

CommandResult unavailable_runner(const std::vector<std::string>& argv, SimTime) {
    throw Error(Errc::unimplemented, "external git toolchain not available (argv[0]=" +
                                         (argv.empty() ? std::string("?") : argv.front()) + ")");
}

GitCliAdapter::GitCliAdapter(Options options, CommandRunner runner)
    : options_(std::move(options)), runner_(std::move(runner)) {}

std::string GitCliAdapter::worktree_path(const std::string& branch) const {
    std::string flat = branch;
    for (auto& c : flat) {
        if (c == '/') c = '_';
    }
    return (options_.worktree_root / flat).string();
}

CommandResult GitCliAdapter::run(const std::vector<std::string>& argv) const {
    auto result = runner_(argv, options_.timeout);
    if (result.exit_code != 0) {
        throw Error(Errc::backend_failure, "git exited with " + std::to_string(result.exit_code) + ": " + result.output);
    }
    return result;
}

std::vector<std::string> GitCliAdapter::create_worktree_argv(const std::string& branch) const {
    return {"git", "-C", options_.repo_root.string(), "worktree", "add", "-b", branch, worktree_path(branch), "main"};
}

std::vector<std::string> GitCliAdapter::commit_argv(const std::string& branch, AgentId author,
                                                    const std::string& message) const {
    return {"git", "-C", worktree_path(branch), "commit", "--all", "--author", author.str() + " <" + author.str() + "@swarm>",
            "-m", message};
}

std::vector<std::string> GitCliAdapter::rebase_argv(const std::string& branch) const {
    return {"git", "-C", worktree_path(branch), "rebase", "main"};
}

std::vector<std::string> GitCliAdapter::merge_argv(const std::string& branch) const {
    return {"git", "-C", options_.repo_root.string(), "merge", "--ff-only", branch};
}

std::vector<std::string> GitCliAdapter::diff_argv(const CommitId& from, const CommitId& to) const {
    return {"git", "-C", options_.repo_root.string(), "diff", "--numstat", from.hex, to.hex};
}

namespace {
[[noreturn]] void not_mapped(const char* op) {
    throw Error(Errc::unimplemented, std::string("git adapter: ") + op + " is not mapped");
}
}  // namespace

Worktree GitCliAdapter::create_worktree(const std::string& branch, AgentId owner) {
    run(create_worktree_argv(branch));
    return Worktree{branch, owner, CommitId{}, {}};
}

CommitId GitCliAdapter::commit(const std::string& branch, AgentId caller, const std::string& message, SimTime) {
    auto out = run(commit_argv(branch, caller, message));
    return CommitId{out.output};
}

MergeStatus GitCliAdapter::rebase_onto_main(const std::string& branch) {
    run(rebase_argv(branch));
    return MergeStatus{};
}

MergeOutcome GitCliAdapter::merge_to_main(const std::string& branch, AgentId caller, SimTime) {
    if (caller != kMergeQueue) throw Error(Errc::write_access, caller.str() + " may not write to main");
    run(merge_argv(branch));
    return MergeOutcome{true, std::nullopt, {}};
}

Diff GitCliAdapter::diff_stats(const CommitId& from, const CommitId& to) const {
    run(diff_argv(from, to));
    not_mapped("numstat parsing");
}

Worktree GitCliAdapter::attach_worktree(const std::string&, AgentId) { not_mapped("attach_worktree"); }
void GitCliAdapter::remove_worktree(const std::string&) { not_mapped("remove_worktree"); }
void GitCliAdapter::delete_branch(const std::string&) { not_mapped("delete_branch"); }
bool GitCliAdapter::has_branch(const std::string&) const { not_mapped("has_branch"); }
std::optional<Worktree> GitCliAdapter::worktree(const std::string&) const { not_mapped("worktree"); }
void GitCliAdapter::write_file(const std::string&, AgentId, const std::string&, std::optional<std::string>) {
    not_mapped("write_file");
}
void GitCliAdapter::reset_worktree(const std::string&, AgentId) { not_mapped("reset_worktree"); }
void GitCliAdapter::reset_branch_to_main(const std::string&, AgentId) { not_mapped("reset_branch_to_main"); }
Tree GitCliAdapter::worktree_tree(const std::string&) const { not_mapped("worktree_tree"); }
Tree GitCliAdapter::branch_tree(const std::string&) const { not_mapped("branch_tree"); }
MergeResult GitCliAdapter::preview_merge(const std::string&) const { not_mapped("preview_merge"); }
RepoState GitCliAdapter::main() const { not_mapped("main"); }
RepoState GitCliAdapter::snapshot(const CommitId&) const { not_mapped("snapshot"); }
CommitId GitCliAdapter::branch_head(const std::string&) const { not_mapped("branch_head"); }
CommitId GitCliAdapter::branch_base(const std::string&) const { not_mapped("branch_base"); }
std::vector<Commit> GitCliAdapter::branch_log(const std::string&) const { not_mapped("branch_log"); }

}  // namespace swarm::vcs
