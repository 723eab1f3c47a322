#include "swarm/checker/toy.hpp"

#include <cctype>

namespace swarm::checker {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool done() {
        skip_space();
        return pos_ >= text_.size();
    }
    bool literal(std::string_view word) {
        skip_space();
        if (text_.substr(pos_, word.size()) != word) return false;
        pos_ += word.size();
        return true;
    }
    bool keyword(std::string_view word) {
        skip_space();
        if (text_.substr(pos_, word.size()) != word) return false;
        const auto end = pos_ + word.size();
        if (end < text_.size() && ident_char(text_[end])) return false;
        pos_ = end;
        return true;
    }
    std::string identifier() {
        skip_space();
        if (pos_ >= text_.size() || !ident_start(text_[pos_])) return {};
        const auto start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }
    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

// Returns an error message, or empty on success.
std::string parse_decl(std::string_view line, ToyDecl& decl) {
    Cursor c(line);
    if (c.keyword("def")) {
        decl.kind = DeclKind::def;
    } else if (c.keyword("thm")) {
        decl.kind = DeclKind::thm;
    } else {
        return "expected 'def', 'thm' or 'import'";
    }
    decl.name = c.identifier();
    if (decl.name.empty()) return "expected a declaration name";
    if (!c.keyword("needs")) return "expected 'needs' after '" + decl.name + "'";
    if (c.peek() != '.') {
        for (;;) {
            auto dep = c.identifier();
            if (dep.empty()) return "expected a dependency name";
            decl.deps.push_back(std::move(dep));
            if (!c.literal(",")) break;
        }
    }
    if (!c.literal(".")) return "expected '.' after the dependency list";

    bool has_body = false;
    if (c.keyword("proof")) {
        decl.body = Body::proved;
        has_body = true;
    } else if (c.keyword("sorry")) {
        decl.body = Body::sorry;
        has_body = true;
    }
    if (has_body && !c.literal(".")) return "expected '.' after the body";
    if (!has_body && decl.kind == DeclKind::thm) return "theorem '" + decl.name + "' has no body";

    while (c.literal("[")) {
        if (c.keyword("cited")) {
            decl.cited = true;
        } else if (c.keyword("exercise")) {
            decl.exercise = true;
        } else {
            return "unknown marker";
        }
        if (!c.literal("]")) return "expected ']'";
    }
    if (!c.done()) return "unexpected trailing text";
    return {};
}

}  // namespace

bool is_identifier(std::string_view s) {
    if (s.empty() || !ident_start(s.front())) return false;
    for (char ch : s) {
        if (!ident_char(ch)) return false;
    }
    return true;
}

bool is_toy_path(std::string_view path) { return path.size() > 4 && path.ends_with(".toy"); }

ToyFile parse_toy_file(std::string_view path, std::string_view content) {
    ToyFile file;
    file.path = std::string(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        const auto raw = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.starts_with("--")) {
            if (nl == content.size()) break;
            continue;
        }
        Cursor c(line);
        if (c.keyword("import")) {
            auto target = trim(line.substr(6));
            if (!file.decls.empty()) {
                file.errors.push_back({file.path, line_no, "import after a declaration"});
            } else if (target.empty() || target.find(' ') != std::string_view::npos) {
                file.errors.push_back({file.path, line_no, "malformed import"});
            } else {
                file.imports.emplace_back(target);
            }
        } else {
            ToyDecl decl;
            decl.line = line_no;
            auto err = parse_decl(line, decl);
            if (err.empty()) {
                file.decls.push_back(std::move(decl));
            } else {
                file.errors.push_back({file.path, line_no, err});
            }
        }
        if (nl == content.size()) break;
    }
    return file;
}

std::string format_decl(const ToyDecl& decl) {
    std::string out = decl.kind == DeclKind::def ? "def " : "thm ";
    out += decl.name;
    out += " needs ";
    for (std::size_t i = 0; i < decl.deps.size(); ++i) {
        if (i) out += ",";
        out += decl.deps[i];
    }
    out += ".";
    if (decl.body == Body::sorry) {
        out += " sorry.";
    } else if (decl.kind == DeclKind::thm) {
        out += " proof.";
    }
    if (decl.cited) out += " [cited]";
    if (decl.exercise) out += " [exercise]";
    return out;
}

}  // namespace swarm::checker
