#pragma once

#include "swarm/checker/toy.hpp"
#include "swarm/vcs/diff.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace swarm::checker {

struct CheckReport {
    bool ok = true;
    std::vector<Diagnostic> errors;
    std::size_t decl_count = 0;
    std::size_t sorry_count = 0;
    std::set<std::string> decl_names;

    bool operator==(const CheckReport&) const = default;
};

struct LocatedDecl {
    std::string path;
    ToyDecl decl;
};

/// Parsed view of every `.toy` file in a tree. Building an Analysis never
/// throws; problems land in `report.errors`.
struct Analysis {
    CheckReport report;
    std::map<std::string, ToyFile> files;
    std::map<std::string, LocatedDecl> decls;  // first definition wins on duplicates

    const ToyDecl* find(std::string_view name) const;
    bool proved(std::string_view name) const;
    /// True if `name` is a sorry that can be closed now: every dependency is complete.
    bool solvable(std::string_view name) const;
    /// Sorry decls reachable from `name` (inclusive) through deps.
    std::set<std::string> open_closure(std::string_view name) const;
    /// Solvable sorries that `name` transitively waits on; `{name}` if it is itself solvable.
    std::set<std::string> root_blockers(std::string_view name) const;
    /// Imported `.toy` files, recursively, excluding `path` itself.
    std::set<std::string> transitive_imports(const std::string& path) const;
};

Analysis analyze(const vcs::Tree& tree);
CheckReport check(const vcs::Tree& tree);

/// Checks `snippet` as if it were a new file importing every file of `tree`.
CheckReport check_snippet(const vcs::Tree& tree, std::string_view snippet);

// --- targets ---

struct TargetSpec {
    std::string name;
    std::string chapter;
    std::string kind;
    bool cited = false;
    bool exercise = false;

    bool excluded() const { return cited || exercise; }
    bool operator==(const TargetSpec&) const = default;
};

enum class TargetStatus { missing, stated, proved, excluded };
std::string_view target_status_name(TargetStatus s);

/// One record per line: `name,chapter,kind,markers`, markers separated by '|'.
/// Lines starting with '#' and blank lines are skipped. Throws Error(parse_error).
std::vector<TargetSpec> parse_target_list(std::string_view text);
std::string format_target_list(const std::vector<TargetSpec>& targets);

std::map<std::string, TargetStatus> target_status(const Analysis& analysis, const std::vector<TargetSpec>& targets);

struct TargetSummary {
    std::size_t total = 0;
    std::size_t excluded = 0;
    std::size_t obligations = 0;
    std::size_t proved = 0;
    std::size_t stated = 0;
    std::size_t missing = 0;

    bool complete() const { return proved == obligations; }
};
TargetSummary summarize(const std::map<std::string, TargetStatus>& statuses);

// --- pluggable backends ---

class Checker {
public:
    virtual ~Checker() = default;
    virtual std::string name() const = 0;
    virtual CheckReport build(const vcs::Tree& tree) const = 0;
    virtual CheckReport snippet(const vcs::Tree& tree, std::string_view text) const = 0;
};

class ToyChecker final : public Checker {
public:
    std::string name() const override { return "toy"; }
    CheckReport build(const vcs::Tree& tree) const override { return check(tree); }
    CheckReport snippet(const vcs::Tree& tree, std::string_view text) const override {
        return check_snippet(tree, text);
    }
};

/// Stand-in for an external proof-assistant build. Every call throws Errc::unimplemented.
class LeanAdapter final : public Checker {
public:
    std::string name() const override { return "lean"; }
    CheckReport build(const vcs::Tree& tree) const override;
    CheckReport snippet(const vcs::Tree& tree, std::string_view text) const override;
};

}  // namespace swarm::checker
