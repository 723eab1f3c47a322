#include "swarm/orchestrator/scenario.hpp"

#include "swarm/common/error.hpp"
#include "swarm/common/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace swarm::orchestrator {

using agents::ChapterSpec;
using agents::DeclSpec;
using checker::DeclKind;

namespace {

const char* const kWords[] = {"group",  "ring",   "field",  "module", "ideal",  "lattice", "order",  "graph",
                              "tree",   "path",   "cycle",  "cover",  "sheaf",  "scheme", "space",  "metric",
                              "norm",   "basis",  "span",   "kernel", "image",  "quot",   "limit",  "colim",
                              "functor", "monad", "category", "fiber", "bundle", "chain", "cochain", "homology",
                              "measure", "integral", "series", "filter", "net", "topology", "compact", "dense"};
constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

std::string two_digits(int n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", n);
    return buf;
}

std::string stem_for(std::size_t i) {
    std::string s = kWords[i % kWordCount];
    if (i >= kWordCount) s += std::to_string(i / kWordCount);
    return s;
}

template <typename T>
std::vector<T> sample(Rng& rng, std::vector<T> pool, std::size_t n) {
    std::vector<T> out;
    while (!pool.empty() && out.size() < n) {
        const auto i = rng.below(pool.size());
        out.push_back(pool[i]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return out;
}

}  // namespace

agents::Scenario generate_scenario(const ScenarioParams& p, std::uint64_t seed) {
    if (p.chapters <= 0) throw Error(Errc::invalid_argument, "a scenario needs at least one chapter");
    Rng rng = Rng::derive(seed, "scenario");
    agents::Scenario sc;
    std::size_t stem_counter = 0;

    for (int k = 1; k <= p.chapters; ++k) {
        ChapterSpec ch;
        ch.id = "ch" + two_digits(k);
        ch.path = sc.toy_path(ch.id);
        ch.source_path = "chapters/" + ch.id + ".md";
        std::set<std::string> imports;
        if (k > 1 && rng.bernoulli(0.6)) imports.insert(sc.chapters[static_cast<std::size_t>(k - 2)].id);
        while (k > 1 && static_cast<int>(imports.size()) < p.max_imports && rng.bernoulli(0.4)) {
            imports.insert(sc.chapters[rng.below(static_cast<std::uint64_t>(k - 1))].id);
        }
        ch.imports.assign(imports.begin(), imports.end());

        // Everything reachable through imports is usable here.
        std::set<std::string> reach;
        std::vector<std::string> frontier = ch.imports;
        while (!frontier.empty()) {
            auto id = frontier.back();
            frontier.pop_back();
            if (!reach.insert(id).second) continue;
            for (const auto& i : sc.chapter(id)->imports) frontier.push_back(i);
        }
        std::vector<std::string> visible_defs, visible_thms;
        for (const auto& c : sc.chapters) {
            if (!reach.count(c.id)) continue;
            for (const auto& d : c.decls) (d.kind == DeclKind::def ? visible_defs : visible_thms).push_back(d.name);
        }

        const int defs = p.defs_per_chapter + p.def_targets_per_chapter;
        std::vector<std::string> local_defs;
        for (int i = 0; i < defs; ++i) {
            DeclSpec d;
            d.kind = DeclKind::def;
            d.name = "d" + two_digits(k) + "_" + stem_for(stem_counter++);
            if (i > 0) {
                auto pool = visible_defs;
                pool.insert(pool.end(), local_defs.begin(), local_defs.end());
                d.deps = sample(rng, pool, rng.below(3));
            }
            d.target = i > 0 && i >= defs - p.def_targets_per_chapter;
            local_defs.push_back(d.name);
            ch.decls.push_back(d);
        }

        std::vector<bool> order;  // true: target, false: helper
        for (int i = 0; i < p.helpers_per_chapter; ++i) order.push_back(false);
        for (int i = 0; i < p.thm_targets_per_chapter; ++i) order.push_back(true);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        if (!order.empty() && order.front()) {
            auto it = std::find(order.begin(), order.end(), false);
            if (it != order.end()) std::iter_swap(order.begin(), it);
        }

        std::vector<std::string> local_thms;
        int helper_no = 0, target_no = 0, cited_left = p.cited_helpers_per_chapter;
        for (bool is_target : order) {
            DeclSpec d;
            d.kind = DeclKind::thm;
            d.target = is_target;
            d.name = (is_target ? "t" : "l") + two_digits(k) + "_" + std::to_string(is_target ? ++target_no : ++helper_no);
            if (!is_target && cited_left > 0) {
                d.cited = true;
                --cited_left;
            }
            const auto want = 1 + rng.below(static_cast<std::uint64_t>(std::max(1, p.max_deps)));
            std::set<std::string> deps;
            for (std::uint64_t n = 0; n < want * 3 && deps.size() < want; ++n) {
                const double r = rng.uniform();
                if (r < 0.6 && !local_thms.empty()) {
                    deps.insert(local_thms[rng.below(local_thms.size())]);
                } else if (r < 0.8 && !visible_thms.empty()) {
                    deps.insert(visible_thms[rng.below(visible_thms.size())]);
                } else {
                    auto pool = local_defs;
                    pool.insert(pool.end(), visible_defs.begin(), visible_defs.end());
                    deps.insert(pool[rng.below(pool.size())]);
                }
            }
            d.deps.assign(deps.begin(), deps.end());
            local_thms.push_back(d.name);
            ch.decls.push_back(d);
        }
        sc.chapters.push_back(std::move(ch));
    }

    // Near-duplicates: a later chapter restates an earlier dependency-free def under its own prefix.
    std::set<std::string> used_canon;
    for (int n = 0, guard = 0; n < p.duplicates && guard < 100 && p.chapters >= 2; ++guard) {
        const auto j = 1 + rng.below(static_cast<std::uint64_t>(p.chapters - 1));
        const auto i = rng.below(j);
        const auto& canon = sc.chapters[i].decls.front();
        if (canon.kind != DeclKind::def || !canon.deps.empty() || used_canon.count(canon.name)) continue;
        auto& later = sc.chapters[j];
        DeclSpec dup;
        dup.kind = DeclKind::def;
        dup.name = "d" + later.id.substr(2) + "_" + agents::name_stem(canon.name);
        dup.duplicate_of = canon.name;
        if (sc.find(dup.name)) continue;
        used_canon.insert(canon.name);
        std::size_t ndefs = 0;
        while (ndefs < later.decls.size() && later.decls[ndefs].kind == DeclKind::def) ++ndefs;
        later.decls.insert(later.decls.begin() + static_cast<std::ptrdiff_t>(ndefs), dup);
        std::vector<std::size_t> users;
        for (std::size_t x = ndefs + 1; x < later.decls.size(); ++x) users.push_back(x);
        for (auto x : sample(rng, users, 2)) later.decls[x].deps.push_back(dup.name);
        sc.aliases[dup.name] = canon.name;
        ++n;
    }

    // Excluded targets.
    std::vector<DeclSpec*> thm_targets;
    for (auto& ch : sc.chapters) {
        for (auto& d : ch.decls) {
            if (d.target && d.kind == DeclKind::thm) thm_targets.push_back(&d);
        }
    }
    for (int n = 0; n < p.exercise_targets && !thm_targets.empty(); ++n) {
        const auto i = rng.below(thm_targets.size());
        thm_targets[i]->exercise = true;
        thm_targets.erase(thm_targets.begin() + static_cast<std::ptrdiff_t>(i));
    }
    for (int n = 0; n < p.cited_targets && !thm_targets.empty(); ++n) {
        const auto i = rng.below(thm_targets.size());
        thm_targets[i]->cited = true;
        thm_targets.erase(thm_targets.begin() + static_cast<std::ptrdiff_t>(i));
    }

    for (const auto& ch : sc.chapters) {
        std::string lib = "-- reference statements for " + ch.id + "\n";
        for (const auto& d : ch.decls) {
            if (d.target) {
                sc.targets.push_back(checker::TargetSpec{d.name, ch.id, d.kind == DeclKind::def ? "def" : "thm", d.cited,
                                                         d.exercise});
            }
            checker::ToyDecl decl;
            decl.kind = d.kind;
            decl.name = d.name;
            decl.deps = d.deps;
            decl.body = d.kind == DeclKind::thm ? checker::Body::sorry : checker::Body::proved;
            decl.cited = d.cited;
            decl.exercise = d.exercise;
            lib += checker::format_decl(decl) + "\n";
        }
        sc.reference[ch.source_path] = agents::render_source(ch);
        sc.reference["lib/" + ch.id + ".toy"] = lib;
    }
    sc.initial[agents::kTargetListPath] = checker::format_target_list(sc.targets);
    sc.initial["README.md"] = "# formalisation\n\nChapters live under chapters/, issues under issues/.\n";
    return sc;
}

vcs::Tree solution_tree(const agents::Scenario& sc) {
    vcs::Tree tree = sc.initial;
    for (const auto& ch : sc.chapters) {
        std::string out = "-- " + ch.id + "\n";
        for (const auto& imp : ch.imports) out += "import " + sc.toy_path(imp) + "\n";
        for (const auto& d : ch.decls) {
            checker::ToyDecl decl;
            decl.kind = d.kind;
            decl.name = d.name;
            decl.deps = d.deps;
            const bool excluded = d.cited || d.exercise;
            decl.body = d.kind == DeclKind::thm && excluded ? checker::Body::sorry : checker::Body::proved;
            decl.cited = d.cited;
            decl.exercise = d.exercise;
            out += "\n" + checker::format_decl(decl) + "\n";
        }
        tree[ch.path] = out;
    }
    return tree;
}

std::vector<std::string> validate_scenario(const agents::Scenario& sc) {
    std::vector<std::string> out;
    try {
        const auto listed = checker::parse_target_list(sc.initial.at(agents::kTargetListPath));
        if (listed.size() != sc.targets.size()) out.push_back("target list does not match the scenario targets");
    } catch (const std::exception& e) {
        out.push_back(std::string("target list: ") + e.what());
    }
    std::map<std::string, std::size_t> chapter_index;
    std::map<std::string, std::string> decl_chapter;
    for (std::size_t i = 0; i < sc.chapters.size(); ++i) {
        const auto& ch = sc.chapters[i];
        for (const auto& imp : ch.imports) {
            auto it = chapter_index.find(imp);
            if (it == chapter_index.end()) out.push_back(ch.id + " imports " + imp + ", which does not come before it");
        }
        std::set<std::string> visible;
        std::vector<std::string> frontier = ch.imports;
        std::set<std::string> seen;
        while (!frontier.empty()) {
            const auto c = frontier.back();
            frontier.pop_back();
            if (!seen.insert(c).second) continue;
            if (const auto* spec = sc.chapter(c)) {
                for (const auto& d : spec->decls) visible.insert(d.name);
                for (const auto& imp : spec->imports) frontier.push_back(imp);
            }
        }
        for (const auto& d : ch.decls) {
            if (decl_chapter.count(d.name)) out.push_back(d.name + " is declared twice");
            for (const auto& dep : d.deps) {
                if (!visible.count(dep)) out.push_back(d.name + " uses " + dep + ", which is not in scope");
            }
            visible.insert(d.name);
            decl_chapter[d.name] = ch.id;
        }
        chapter_index[ch.id] = i;
    }
    const auto initial = checker::analyze(sc.initial);
    for (const auto& e : initial.report.errors) out.push_back("initial main: " + e.path + ": " + e.message);
    const auto solved = checker::analyze(solution_tree(sc));
    for (const auto& e : solved.report.errors) out.push_back("solution: " + e.path + ": " + e.message);
    for (const auto& [name, st] : checker::target_status(solved, sc.targets)) {
        if (st != checker::TargetStatus::proved && st != checker::TargetStatus::excluded) {
            out.push_back("solution leaves " + name + " " + std::string(checker::target_status_name(st)));
        }
    }
    return out;
}

}  // namespace swarm::orchestrator
