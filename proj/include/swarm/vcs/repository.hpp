#pragma once

#include "swarm/common/types.hpp"
#include "swarm/vcs/diff.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace swarm::vcs {

inline constexpr const char* kMainBranch = "main";

struct CommitId {
    std::string hex;

    auto operator<=>(const CommitId&) const = default;
    bool empty() const { return hex.empty(); }
};

struct Commit {
    CommitId id;
    std::optional<CommitId> parent;
    std::shared_ptr<const Tree> tree;
    std::string message;
    AgentId author;
    SimTime time = 0;
};

/// Immutable view of one commit plus the first-parent history leading to it.
struct RepoState {
    std::shared_ptr<const Tree> files;
    CommitId head;
    std::vector<CommitId> history;

    const Tree& tree() const { return *files; }
};

struct Worktree {
    std::string branch;
    AgentId owner;
    CommitId base;
    std::map<std::string, std::optional<std::string>> dirty_files;  // nullopt marks a deletion
};

struct MergeStatus {
    bool clean = true;
    std::vector<MergeConflict> conflicts;
};

/// Emitted whenever main advances.
struct MainAdvance {
    std::string branch;
    CommitId before;
    CommitId after;
    AgentId author;
    Diff diff;
    SimTime time = 0;
};

struct MergeOutcome {
    bool merged = false;
    std::optional<MainAdvance> advance;
    std::vector<MergeConflict> conflicts;  // set when merged == false
};

/// Content hash of (parent, tree, message, author), truncated to 40 hex digits.
CommitId make_commit_id(const std::optional<CommitId>& parent, const Tree& tree, const std::string& message,
                        AgentId author);
std::string tree_hash(const Tree& tree);

/// Version-control backend contract shared by the in-memory store and the git adapter.
class VersionControl {
public:
    virtual ~VersionControl() = default;

    virtual Worktree create_worktree(const std::string& branch, AgentId owner) = 0;
    /// Re-creates a worktree for an existing branch (after a restart).
    virtual Worktree attach_worktree(const std::string& branch, AgentId owner) = 0;
    virtual void remove_worktree(const std::string& branch) = 0;
    virtual void delete_branch(const std::string& branch) = 0;
    virtual bool has_branch(const std::string& branch) const = 0;
    virtual std::optional<Worktree> worktree(const std::string& branch) const = 0;

    virtual void write_file(const std::string& branch, AgentId caller, const std::string& path,
                            std::optional<std::string> content) = 0;
    virtual void reset_worktree(const std::string& branch, AgentId caller) = 0;
    /// Hard-resets the branch to main's head, dropping its commits and dirty files.
    virtual void reset_branch_to_main(const std::string& branch, AgentId caller) = 0;
    /// Worktree view: the branch head tree with dirty files applied.
    virtual Tree worktree_tree(const std::string& branch) const = 0;
    virtual Tree branch_tree(const std::string& branch) const = 0;

    virtual CommitId commit(const std::string& branch, AgentId caller, const std::string& message, SimTime time) = 0;
    virtual MergeStatus rebase_onto_main(const std::string& branch) = 0;
    /// Three-way merge of the branch onto main without touching either.
    virtual MergeResult preview_merge(const std::string& branch) const = 0;
    virtual MergeOutcome merge_to_main(const std::string& branch, AgentId caller, SimTime time) = 0;
    virtual Diff diff_stats(const CommitId& from, const CommitId& to) const = 0;

    virtual RepoState main() const = 0;
    virtual RepoState snapshot(const CommitId& id) const = 0;
    virtual CommitId branch_head(const std::string& branch) const = 0;
    virtual CommitId branch_base(const std::string& branch) const = 0;
    virtual std::vector<Commit> branch_log(const std::string& branch) const = 0;
};

/// Deterministic in-memory backend. All public operations take an internal lock,
/// so each one is atomic with respect to the others.
class InMemoryRepo final : public VersionControl {
public:
    explicit InMemoryRepo(Tree initial = {}, SimTime time = 0);

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

    const Commit& commit_object(const CommitId& id) const;
    CommitId initial_commit() const;
    std::vector<std::string> branches() const;
    std::vector<Worktree> worktrees() const;

    /// Applies a main-advance observer; called with the lock released.
    void on_main_advance(std::function<void(const MainAdvance&)> observer);

    /// Serialisation support for checkpoints: every commit reachable from a branch.
    struct BranchRecord {
        std::string name;
        AgentId owner;
        CommitId base;
        std::vector<CommitId> commits;
    };
    struct Image {
        std::vector<Commit> commits;  // parents precede children
        std::vector<BranchRecord> branches;
        std::vector<CommitId> main_history;
    };
    Image image() const;
    static std::unique_ptr<InMemoryRepo> from_image(const Image& image);

private:
    struct Branch {
        AgentId owner;
        CommitId base;
        std::vector<CommitId> commits;  // in order, atop base
        CommitId head() const { return commits.empty() ? base : commits.back(); }
    };

    struct Empty {};
    explicit InMemoryRepo(Empty) {}

    const Branch& branch_locked(const std::string& name) const;
    Branch& branch_locked(const std::string& name);
    const Commit& commit_locked(const CommitId& id) const;
    CommitId add_commit_locked(const std::optional<CommitId>& parent, std::shared_ptr<const Tree> tree,
                               const std::string& message, AgentId author, SimTime time);
    Tree worktree_tree_locked(const std::string& branch) const;
    MergeStatus rebase_locked(const std::string& branch);
    std::vector<CommitId> history_locked(const CommitId& head) const;

    mutable std::shared_mutex mutex_;
    std::map<CommitId, Commit> commits_;
    std::map<std::string, Branch> branches_;
    std::map<std::string, Worktree> worktrees_;
    std::vector<CommitId> main_history_;
    CommitId root_;
    std::vector<std::function<void(const MainAdvance&)>> observers_;
};

}  // namespace swarm::vcs
