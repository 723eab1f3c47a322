#pragma once

#include "swarm/vcs/repository.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace swarm::vcs {

struct CommandResult {
    int exit_code = 0;
    std::string output;
};

/// Runs one argv vector with a timeout. The adapter never builds shell strings.
using CommandRunner = std::function<CommandResult(const std::vector<std::string>& argv, SimTime timeout)>;

/// Default runner: external toolchains are not wired up, every call fails with Errc::unimplemented.
CommandResult unavailable_runner(const std::vector<std::string>& argv, SimTime timeout);

/// Adapter contract for an external git toolchain. Operations are mapped to git
/// subprocess invocations; only the argv mapping is implemented here.
class GitCliAdapter final : public VersionControl {
public:
    struct Options {
        std::filesystem::path repo_root;
        std::filesystem::path worktree_root;
        SimTime timeout = seconds(120);
    };

    explicit GitCliAdapter(Options options, CommandRunner runner = unavailable_runner);

    std::vector<std::string> create_worktree_argv(const std::string& branch) const;
    std::vector<std::string> commit_argv(const std::string& branch, AgentId author, const std::string& message) const;
    std::vector<std::string> rebase_argv(const std::string& branch) const;
    std::vector<std::string> merge_argv(const std::string& branch) const;
    std::vector<std::string> diff_argv(const CommitId& from, const CommitId& to) const;

    Worktree create_worktree(const std::string& branch, AgentId owner) override;
    Worktree attach_worktree(const std::string& branch, AgentId owner) override;
    void remove_worktree(const std::string& branch) override;
    void delete_branch(const std::string& branch) override;
    bool has_branch(const std::string& branch) const override;
    std::optional<Worktree> worktree(const std::string& branch) const override;
    void write_file(const std::string& branch, AgentId caller, const std::string& path,
                    std::optional<std::string> content) override;
    void reset_worktree(const std::string& branch, AgentId caller) override;
    void reset_branch_to_main(const std::string& branch, AgentId caller) override;
    Tree worktree_tree(const std::string& branch) const override;
    Tree branch_tree(const std::string& branch) const override;
    CommitId commit(const std::string& branch, AgentId caller, const std::string& message, SimTime time) override;
    MergeStatus rebase_onto_main(const std::string& branch) override;
    MergeResult preview_merge(const std::string& branch) const override;
    MergeOutcome merge_to_main(const std::string& branch, AgentId caller, SimTime time) override;
    Diff diff_stats(const CommitId& from, const CommitId& to) const override;
    RepoState main() const override;
    RepoState snapshot(const CommitId& id) const override;
    CommitId branch_head(const std::string& branch) const override;
    CommitId branch_base(const std::string& branch) const override;
    std::vector<Commit> branch_log(const std::string& branch) const override;

private:
    CommandResult run(const std::vector<std::string>& argv) const;
    std::string worktree_path(const std::string& branch) const;

    Options options_;
    CommandRunner runner_;
};

}  // namespace swarm::vcs
