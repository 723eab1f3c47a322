#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace swarm::checker {

enum class DeclKind { def, thm };
enum class Body { proved, sorry };

/// One declaration of the toy proof language. A def without a body is complete.
struct ToyDecl {
    DeclKind kind = DeclKind::thm;
    std::string name;
    std::vector<std::string> deps;
    Body body = Body::proved;
    bool cited = false;
    bool exercise = false;
    std::size_t line = 0;  // 1-based

    bool sorry() const { return body == Body::sorry; }
    /// Cited and exercise decls are taken as given: they are never obligations.
    bool assumed() const { return cited || exercise; }
    bool complete() const { return body == Body::proved || assumed(); }
    bool operator==(const ToyDecl&) const = default;
};

struct Diagnostic {
    std::string path;
    std::size_t line = 0;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

struct ToyFile {
    std::string path;
    std::vector<std::string> imports;
    std::vector<ToyDecl> decls;
    std::vector<Diagnostic> errors;
};

bool is_identifier(std::string_view s);
bool is_toy_path(std::string_view path);

/// Grammar, one item per line:
///   import PATH
///   def NAME needs A,B.            (optionally followed by `proof.` or `sorry.`)
///   thm NAME needs A,B. proof.     or `sorry.`
/// Any decl may end with `[cited]` and/or `[exercise]`. Blank lines and lines
/// starting with `--` are ignored. Imports must precede all decls.
ToyFile parse_toy_file(std::string_view path, std::string_view content);

/// Renders a decl back to its one-line source form (no trailing newline).
std::string format_decl(const ToyDecl& decl);

}  // namespace swarm::checker
