#pragma once

#include "swarm/checker/check.hpp"
#include "swarm/vcs/diff.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace swarm::agents {

/// Ground truth for one declaration of the source text.
struct DeclSpec {
    std::string name;
    checker::DeclKind kind = checker::DeclKind::thm;
    std::vector<std::string> deps;
    bool cited = false;
    bool exercise = false;
    bool target = false;
    std::string duplicate_of;  // set on injected near-duplicate defs
};

struct ChapterSpec {
    std::string id;           // "ch03"
    std::string path;         // "chapters/ch03.toy"
    std::string source_path;  // reference path of the prose, "chapters/ch03.md"
    std::vector<std::string> imports;  // chapter ids
    std::vector<DeclSpec> decls;       // dependency order
};

/// A formalisation project: the hidden solution map plus the files the run starts from.
struct Scenario {
    std::vector<ChapterSpec> chapters;
    std::vector<checker::TargetSpec> targets;
    vcs::Tree initial;    // main at the start of the run
    vcs::Tree reference;  // read-only corpus, paths relative to the reference root
    std::map<std::string, std::string> aliases;  // duplicate name -> canonical name

    const DeclSpec* find(std::string_view name) const;
    const ChapterSpec* chapter(std::string_view id) const;
    const ChapterSpec* chapter_of(std::string_view decl) const;
    std::string canonical(std::string_view name) const;
    std::string toy_path(std::string_view chapter_id) const;
};

inline constexpr const char* kTargetListPath = "targets.csv";

/// Toy source for a chapter as a careful sketcher writes it: defs complete,
/// theorems as `sorry`, markers kept, names that were merged away on `main`
/// replaced by their canonical form.
std::string render_sketch(const Scenario& scenario, const ChapterSpec& chapter, const checker::Analysis& main);

/// Prose form of a chapter, stored in the reference corpus.
std::string render_source(const ChapterSpec& chapter);

/// Name with its chapter prefix stripped: "d03_group" -> "group".
std::string name_stem(std::string_view name);

}  // namespace swarm::agents
