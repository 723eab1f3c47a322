#include "swarm/vcs/repository.hpp"

#include "swarm/common/error.hpp"
#include "swarm/common/hash.hpp"

#include <algorithm>
#include <mutex>
#include <set>

namespace swarm::vcs {

std::string tree_hash(const Tree& tree) {
    std::string manifest;
    for (const auto& [path, content] : tree) {
        manifest += path;
        manifest.push_back('\0');
        manifest += sha256_hex(content);
        manifest.push_back('\n');
    }
    return sha256_hex(manifest);
}

CommitId make_commit_id(const std::optional<CommitId>& parent, const Tree& tree, const std::string& message,
                        AgentId author) {
    std::string payload = "parent " + (parent ? parent->hex : std::string("none")) + "\n";
    payload += "tree " + tree_hash(tree) + "\n";
    payload += "author " + author.str() + "\n\n";
    payload += message;
    return CommitId{sha256_hex(payload).substr(0, 40)};
}

InMemoryRepo::InMemoryRepo(Tree initial, SimTime time) {
    root_ = add_commit_locked(std::nullopt, std::make_shared<const Tree>(std::move(initial)), "initial", kMergeQueue,
                              time);
    branches_[kMainBranch] = Branch{kMergeQueue, root_, {}};
    main_history_.push_back(root_);
}

CommitId InMemoryRepo::add_commit_locked(const std::optional<CommitId>& parent, std::shared_ptr<const Tree> tree,
                                         const std::string& message, AgentId author, SimTime time) {
    auto id = make_commit_id(parent, *tree, message, author);
    commits_.try_emplace(id, Commit{id, parent, std::move(tree), message, author, time});
    return id;
}

const InMemoryRepo::Branch& InMemoryRepo::branch_locked(const std::string& name) const {
    auto it = branches_.find(name);
    if (it == branches_.end()) throw Error(Errc::unknown_branch, "unknown branch '" + name + "'");
    return it->second;
}

InMemoryRepo::Branch& InMemoryRepo::branch_locked(const std::string& name) {
    auto it = branches_.find(name);
    if (it == branches_.end()) throw Error(Errc::unknown_branch, "unknown branch '" + name + "'");
    return it->second;
}

const Commit& InMemoryRepo::commit_locked(const CommitId& id) const {
    auto it = commits_.find(id);
    if (it == commits_.end()) throw Error(Errc::unknown_commit, "unknown commit '" + id.hex + "'");
    return it->second;
}

Worktree InMemoryRepo::create_worktree(const std::string& branch, AgentId owner) {
    std::unique_lock lock(mutex_);
    if (branch.empty() || branch == kMainBranch) {
        throw Error(Errc::invalid_argument, "invalid branch name '" + branch + "'");
    }
    if (worktrees_.count(branch) || branches_.count(branch)) {
        throw Error(Errc::duplicate_branch, "branch '" + branch + "' already exists");
    }
    const auto head = branch_locked(kMainBranch).head();
    branches_[branch] = Branch{owner, head, {}};
    Worktree wt{branch, owner, head, {}};
    worktrees_[branch] = wt;
    return wt;
}

Worktree InMemoryRepo::attach_worktree(const std::string& branch, AgentId owner) {
    std::unique_lock lock(mutex_);
    auto& b = branch_locked(branch);
    if (branch == kMainBranch) throw Error(Errc::write_access, "main has no worktree");
    if (worktrees_.count(branch)) throw Error(Errc::duplicate_branch, "worktree for '" + branch + "' is live");
    if (b.owner != owner) throw Error(Errc::not_owner, "branch '" + branch + "' is owned by " + b.owner.str());
    Worktree wt{branch, owner, b.base, {}};
    worktrees_[branch] = wt;
    return wt;
}

void InMemoryRepo::remove_worktree(const std::string& branch) {
    std::unique_lock lock(mutex_);
    worktrees_.erase(branch);
}

void InMemoryRepo::delete_branch(const std::string& branch) {
    std::unique_lock lock(mutex_);
    if (branch == kMainBranch) throw Error(Errc::write_access, "main cannot be deleted");
    worktrees_.erase(branch);
    branches_.erase(branch);
}

bool InMemoryRepo::has_branch(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    return branches_.count(branch) != 0;
}

std::optional<Worktree> InMemoryRepo::worktree(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    auto it = worktrees_.find(branch);
    if (it == worktrees_.end()) return std::nullopt;
    return it->second;
}

void InMemoryRepo::write_file(const std::string& branch, AgentId caller, const std::string& path,
                              std::optional<std::string> content) {
    std::unique_lock lock(mutex_);
    auto it = worktrees_.find(branch);
    if (it == worktrees_.end()) throw Error(Errc::unknown_branch, "no worktree for '" + branch + "'");
    if (it->second.owner != caller) {
        throw Error(Errc::not_owner, caller.str() + " does not own worktree '" + branch + "'");
    }
    const auto& head_tree = *commit_locked(branch_locked(branch).head()).tree;
    auto committed = head_tree.find(path);
    const bool same_as_head = content ? (committed != head_tree.end() && committed->second == *content)
                                      : committed == head_tree.end();
    if (same_as_head) {
        it->second.dirty_files.erase(path);
    } else {
        it->second.dirty_files[path] = std::move(content);
    }
}

void InMemoryRepo::reset_worktree(const std::string& branch, AgentId caller) {
    std::unique_lock lock(mutex_);
    auto it = worktrees_.find(branch);
    if (it == worktrees_.end()) throw Error(Errc::unknown_branch, "no worktree for '" + branch + "'");
    if (it->second.owner != caller) throw Error(Errc::not_owner, caller.str() + " does not own '" + branch + "'");
    it->second.dirty_files.clear();
}

void InMemoryRepo::reset_branch_to_main(const std::string& branch, AgentId caller) {
    std::unique_lock lock(mutex_);
    auto& b = branch_locked(branch);
    if (branch == kMainBranch) throw Error(Errc::write_access, "cannot reset main");
    if (b.owner != caller) throw Error(Errc::not_owner, caller.str() + " does not own '" + branch + "'");
    b.base = branch_locked(kMainBranch).head();
    b.commits.clear();
    if (auto it = worktrees_.find(branch); it != worktrees_.end()) {
        it->second.dirty_files.clear();
        it->second.base = b.base;
    }
}

Tree InMemoryRepo::worktree_tree_locked(const std::string& branch) const {
    Tree tree = *commit_locked(branch_locked(branch).head()).tree;
    if (auto it = worktrees_.find(branch); it != worktrees_.end()) {
        for (const auto& [path, content] : it->second.dirty_files) {
            if (content) {
                tree[path] = *content;
            } else {
                tree.erase(path);
            }
        }
    }
    return tree;
}

Tree InMemoryRepo::worktree_tree(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    return worktree_tree_locked(branch);
}

Tree InMemoryRepo::branch_tree(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    return *commit_locked(branch_locked(branch).head()).tree;
}

CommitId InMemoryRepo::commit(const std::string& branch, AgentId caller, const std::string& message, SimTime time) {
    std::unique_lock lock(mutex_);
    auto it = worktrees_.find(branch);
    if (it == worktrees_.end()) throw Error(Errc::unknown_branch, "no worktree for '" + branch + "'");
    if (it->second.owner != caller) {
        throw Error(Errc::not_owner, caller.str() + " cannot commit to '" + branch + "'");
    }
    if (it->second.dirty_files.empty()) throw Error(Errc::nothing_to_commit, "nothing to commit on '" + branch + "'");
    auto tree = std::make_shared<const Tree>(worktree_tree_locked(branch));
    auto& b = branch_locked(branch);
    const auto id = add_commit_locked(b.head(), std::move(tree), message, caller, time);
    b.commits.push_back(id);
    it->second.dirty_files.clear();
    return id;
}

MergeStatus InMemoryRepo::rebase_locked(const std::string& branch) {
    if (branch == kMainBranch) throw Error(Errc::invalid_argument, "cannot rebase main onto itself");
    auto& b = branch_locked(branch);
    if (auto it = worktrees_.find(branch); it != worktrees_.end() && !it->second.dirty_files.empty()) {
        throw Error(Errc::dirty_worktree, "worktree '" + branch + "' has uncommitted changes");
    }
    const auto main_head = branch_locked(kMainBranch).head();
    if (b.base == main_head) return MergeStatus{};

    // Replay each branch commit atop the new head; any conflict aborts the whole rebase.
    std::vector<std::pair<std::shared_ptr<const Tree>, const Commit*>> replayed;
    auto current = commit_locked(main_head).tree;
    for (const auto& cid : b.commits) {
        const auto& c = commit_locked(cid);
        const auto& parent_tree = *commit_locked(*c.parent).tree;
        auto merged = merge_trees(parent_tree, *current, *c.tree);
        if (!merged.clean) return MergeStatus{false, std::move(merged.conflicts)};
        current = std::make_shared<const Tree>(std::move(merged.tree));
        replayed.emplace_back(current, &c);
    }
    std::vector<CommitId> rewritten;
    CommitId parent = main_head;
    for (auto& [tree, original] : replayed) {
        parent = add_commit_locked(parent, tree, original->message, original->author, original->time);
        rewritten.push_back(parent);
    }
    b.base = main_head;
    b.commits = std::move(rewritten);
    if (auto it = worktrees_.find(branch); it != worktrees_.end()) it->second.base = main_head;
    return MergeStatus{};
}

MergeStatus InMemoryRepo::rebase_onto_main(const std::string& branch) {
    std::unique_lock lock(mutex_);
    return rebase_locked(branch);
}

MergeResult InMemoryRepo::preview_merge(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    const auto& b = branch_locked(branch);
    const auto& base = *commit_locked(b.base).tree;
    const auto& ours = *commit_locked(branch_locked(kMainBranch).head()).tree;
    const auto& theirs = *commit_locked(b.head()).tree;
    return merge_trees(base, ours, theirs);
}

MergeOutcome InMemoryRepo::merge_to_main(const std::string& branch, AgentId caller, SimTime time) {
    MainAdvance advance;
    std::vector<std::function<void(const MainAdvance&)>> observers;
    {
        std::unique_lock lock(mutex_);
        if (caller != kMergeQueue) throw Error(Errc::write_access, caller.str() + " may not write to main");
        auto status = rebase_locked(branch);
        if (!status.clean) return MergeOutcome{false, std::nullopt, std::move(status.conflicts)};
        auto& b = branch_locked(branch);
        auto& main_branch = branch_locked(kMainBranch);
        const auto before = main_branch.head();
        const auto& before_tree = *commit_locked(before).tree;
        auto tip_tree = commit_locked(b.head()).tree;
        auto diff = diff_trees(before_tree, *tip_tree);
        if (diff.empty()) throw Error(Errc::empty_diff, "branch '" + branch + "' has no changes against main");
        const auto after = add_commit_locked(before, tip_tree, "Merge " + branch, b.owner, time);
        main_branch.commits.push_back(after);
        main_history_.push_back(after);
        b.base = after;
        b.commits.clear();
        if (auto it = worktrees_.find(branch); it != worktrees_.end()) it->second.base = after;
        advance = MainAdvance{branch, before, after, b.owner, std::move(diff), time};
        observers = observers_;
    }
    for (const auto& obs : observers) obs(advance);
    return MergeOutcome{true, std::move(advance), {}};
}

Diff InMemoryRepo::diff_stats(const CommitId& from, const CommitId& to) const {
    std::shared_lock lock(mutex_);
    return diff_trees(*commit_locked(from).tree, *commit_locked(to).tree);
}

std::vector<CommitId> InMemoryRepo::history_locked(const CommitId& head) const {
    std::vector<CommitId> chain;
    std::optional<CommitId> cursor = head;
    while (cursor) {
        const auto& c = commit_locked(*cursor);
        chain.push_back(c.id);
        cursor = c.parent;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

RepoState InMemoryRepo::main() const {
    std::shared_lock lock(mutex_);
    const auto head = branch_locked(kMainBranch).head();
    return RepoState{commit_locked(head).tree, head, main_history_};
}

RepoState InMemoryRepo::snapshot(const CommitId& id) const {
    std::shared_lock lock(mutex_);
    return RepoState{commit_locked(id).tree, id, history_locked(id)};
}

CommitId InMemoryRepo::branch_head(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    return branch_locked(branch).head();
}

CommitId InMemoryRepo::branch_base(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    return branch_locked(branch).base;
}

std::vector<Commit> InMemoryRepo::branch_log(const std::string& branch) const {
    std::shared_lock lock(mutex_);
    std::vector<Commit> out;
    for (const auto& id : branch_locked(branch).commits) out.push_back(commit_locked(id));
    return out;
}

const Commit& InMemoryRepo::commit_object(const CommitId& id) const {
    std::shared_lock lock(mutex_);
    return commit_locked(id);
}

CommitId InMemoryRepo::initial_commit() const { return root_; }

std::vector<std::string> InMemoryRepo::branches() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [name, _] : branches_) out.push_back(name);
    return out;
}

std::vector<Worktree> InMemoryRepo::worktrees() const {
    std::shared_lock lock(mutex_);
    std::vector<Worktree> out;
    for (const auto& [_, wt] : worktrees_) out.push_back(wt);
    return out;
}

void InMemoryRepo::on_main_advance(std::function<void(const MainAdvance&)> observer) {
    std::unique_lock lock(mutex_);
    observers_.push_back(std::move(observer));
}

InMemoryRepo::Image InMemoryRepo::image() const {
    std::shared_lock lock(mutex_);
    Image img;
    std::set<CommitId> emitted;
    auto emit_chain = [&](const CommitId& head) {
        std::vector<CommitId> pending;
        std::optional<CommitId> cursor = head;
        while (cursor && !emitted.count(*cursor)) {
            pending.push_back(*cursor);
            cursor = commit_locked(*cursor).parent;
        }
        for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
            emitted.insert(*it);
            img.commits.push_back(commit_locked(*it));
        }
    };
    for (const auto& [name, b] : branches_) {
        emit_chain(b.head());
        img.branches.push_back(BranchRecord{name, b.owner, b.base, b.commits});
    }
    img.main_history = main_history_;
    return img;
}

std::unique_ptr<InMemoryRepo> InMemoryRepo::from_image(const Image& image) {
    std::unique_ptr<InMemoryRepo> repo(new InMemoryRepo(Empty{}));
    for (const auto& c : image.commits) {
        if (c.parent && !repo->commits_.count(*c.parent)) {
            throw Error(Errc::corrupt_state, "commit " + c.id.hex + " precedes its parent");
        }
        const auto expected = make_commit_id(c.parent, *c.tree, c.message, c.author);
        if (expected != c.id) throw Error(Errc::corrupt_state, "commit " + c.id.hex + " fails its content hash");
        repo->commits_[c.id] = c;
        if (!c.parent && repo->root_.empty()) repo->root_ = c.id;
    }
    for (const auto& b : image.branches) {
        repo->commit_locked(b.base);
        for (const auto& id : b.commits) repo->commit_locked(id);
        repo->branches_[b.name] = Branch{b.owner, b.base, b.commits};
    }
    if (!repo->branches_.count(kMainBranch)) throw Error(Errc::corrupt_state, "image has no main branch");
    repo->main_history_ = image.main_history;
    if (!repo->main_history_.empty()) repo->root_ = repo->main_history_.front();
    return repo;
}

}  // namespace swarm::vcs
