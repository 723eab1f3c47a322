#include "swarm/agents/scenario.hpp"

#include <algorithm>

namespace swarm::agents {

const DeclSpec* Scenario::find(std::string_view name) const {
    for (const auto& ch : chapters) {
        for (const auto& d : ch.decls) {
            if (d.name == name) return &d;
        }
    }
    return nullptr;
}

const ChapterSpec* Scenario::chapter(std::string_view id) const {
    for (const auto& ch : chapters) {
        if (ch.id == id) return &ch;
    }
    return nullptr;
}

const ChapterSpec* Scenario::chapter_of(std::string_view decl) const {
    for (const auto& ch : chapters) {
        for (const auto& d : ch.decls) {
            if (d.name == decl) return &ch;
        }
    }
    return nullptr;
}

std::string Scenario::canonical(std::string_view name) const {
    auto it = aliases.find(std::string(name));
    return it == aliases.end() ? std::string(name) : it->second;
}

std::string Scenario::toy_path(std::string_view chapter_id) const { return "chapters/" + std::string(chapter_id) + ".toy"; }

std::string name_stem(std::string_view name) {
    std::size_t i = 0;
    while (i < name.size() && name[i] >= 'a' && name[i] <= 'z') ++i;
    const auto letters = i;
    while (i < name.size() && name[i] >= '0' && name[i] <= '9') ++i;
    if (letters == 0 || i == letters || i >= name.size() || name[i] != '_') return std::string(name);
    return std::string(name.substr(i + 1));
}

std::string render_sketch(const Scenario& scenario, const ChapterSpec& chapter, const checker::Analysis& main) {
    std::string out = "-- " + chapter.id + "\n";
    for (const auto& imp : chapter.imports) out += "import " + scenario.toy_path(imp) + "\n";
    for (const auto& d : chapter.decls) {
        checker::ToyDecl decl;
        decl.kind = d.kind;
        decl.name = d.name;
        for (const auto& dep : d.deps) {
            const auto canon = scenario.canonical(dep);
            const bool local = std::any_of(chapter.decls.begin(), chapter.decls.end(),
                                           [&](const DeclSpec& x) { return x.name == dep; });
            const bool merged_away = canon != dep && !local && !main.find(dep) && main.find(canon);
            decl.deps.push_back(merged_away ? canon : dep);
        }
        decl.body = d.kind == checker::DeclKind::thm ? checker::Body::sorry : checker::Body::proved;
        decl.cited = d.cited;
        decl.exercise = d.exercise;
        out += "\n" + checker::format_decl(decl) + "\n";
    }
    return out;
}

std::string render_source(const ChapterSpec& chapter) {
    std::string out = "# " + chapter.id + "\n\n";
    if (!chapter.imports.empty()) {
        out += "Builds on:";
        for (const auto& imp : chapter.imports) out += " " + imp;
        out += "\n\n";
    }
    for (const auto& d : chapter.decls) {
        out += d.kind == checker::DeclKind::def ? "Definition " : "Theorem ";
        out += d.name;
        if (!d.deps.empty()) {
            out += " uses";
            for (std::size_t i = 0; i < d.deps.size(); ++i) out += (i ? ", " : " ") + d.deps[i];
        }
        out += ".";
        if (d.cited) out += " (cited)";
        if (d.exercise) out += " (exercise)";
        out += "\n";
    }
    return out;
}

}  // namespace swarm::agents
