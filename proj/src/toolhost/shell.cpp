#include "helpers.hpp"

#include <algorithm>
#include <charconv>
#include <regex>

namespace swarm::toolhost {

using namespace detail;

namespace {

using Args = std::vector<std::string>;
using Lines = std::vector<std::string>;

struct Stage {
    Args words;
};

std::vector<Stage> parse_pipeline(std::string_view command) {
    if (command.find('`') != std::string_view::npos || command.find("$(") != std::string_view::npos) {
        throw Error(Errc::disallowed_command, "command substitution is not allowed");
    }
    std::vector<Stage> stages(1);
    std::string word;
    bool in_word = false;
    char quote = 0;
    auto flush = [&] {
        if (in_word) stages.back().words.push_back(std::move(word));
        word.clear();
        in_word = false;
    };
    for (std::size_t i = 0; i < command.size(); ++i) {
        const char c = command[i];
        if (quote) {
            if (c == quote) {
                quote = 0;
            } else if (c == '\\' && quote == '"' && i + 1 < command.size()) {
                word += command[++i];
            } else {
                word += c;
            }
            continue;
        }
        switch (c) {
            case '\'':
            case '"':
                quote = c;
                in_word = true;
                break;
            case ' ':
            case '\t': flush(); break;
            case '|':
                flush();
                if (stages.back().words.empty()) throw Error(Errc::disallowed_command, "empty pipeline stage");
                stages.emplace_back();
                break;
            case '>':
            case '<': throw Error(Errc::disallowed_command, "redirection is not allowed");
            case ';':
            case '&':
            case '\n': throw Error(Errc::disallowed_command, "command chaining is not allowed");
            case '\\':
                if (i + 1 < command.size()) word += command[++i];
                in_word = true;
                break;
            default:
                word += c;
                in_word = true;
        }
    }
    if (quote) throw Error(Errc::invalid_argument, "unterminated quote");
    flush();
    if (stages.back().words.empty()) throw Error(Errc::disallowed_command, "empty pipeline stage");
    return stages;
}

std::int64_t to_int(const std::string& s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw Error(Errc::invalid_argument, "not a number: '" + s + "'");
    return v;
}

std::string ensure_nl(std::string s) {
    if (!s.empty() && s.back() != '\n') s += '\n';
    return s;
}

/// Flags from a fixed set, allowing bundles such as -nv; stops at the first operand.
struct Flags {
    std::set<char> on;
    std::map<char, std::string> values;
    Args operands;
};

Flags parse_flags(const Args& args, std::string_view boolean, std::string_view valued) {
    Flags f;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--") {
            f.operands.insert(f.operands.end(), args.begin() + static_cast<std::ptrdiff_t>(i) + 1, args.end());
            break;
        }
        if (a.size() < 2 || a[0] != '-' || !f.operands.empty()) {
            f.operands.push_back(a);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(a[1])) && valued.find('n') != std::string_view::npos) {
            f.values['n'] = a.substr(1);
            continue;
        }
        for (std::size_t k = 1; k < a.size(); ++k) {
            const char c = a[k];
            if (valued.find(c) != std::string_view::npos) {
                std::string v = a.substr(k + 1);
                if (v.empty()) {
                    if (i + 1 >= args.size()) throw Error(Errc::invalid_argument, "option -" + std::string(1, c) + " needs a value");
                    v = args[++i];
                }
                f.values[c] = v;
                break;
            }
            if (boolean.find(c) == std::string_view::npos) {
                throw Error(Errc::invalid_argument, args[0] + ": unknown option -" + std::string(1, c));
            }
            f.on.insert(c);
        }
    }
    return f;
}

class Shell {
public:
    explicit Shell(CallContext& ctx) : ctx_(ctx), view_(view_tree(ctx)) {}

    HandlerOutput run(std::string_view command) {
        const auto stages = parse_pipeline(command);
        for (const auto& s : stages) {
            if (!ctx_.config.shell_allowlist.count(s.words[0])) {
                throw Error(Errc::disallowed_command, "command '" + s.words[0] + "' is not on the allowlist");
            }
        }
        std::string data;
        for (const auto& s : stages) data = stage(s.words, data);
        return HandlerOutput{data, duration_, build_};
    }

private:
    std::string file(const std::string& raw) { return read_text(ctx_, view_, resolve(ctx_, raw)); }

    std::string input(const Args& operands, const std::string& in) {
        if (operands.empty()) return in;
        std::string out;
        for (const auto& o : operands) out += file(o);
        return out;
    }

    std::string stage(const Args& a, const std::string& in) {
        const auto& cmd = a[0];
        if (cmd == "cat") return input(parse_flags(a, "", "").operands, in);
        if (cmd == "echo") {
            std::string out;
            for (std::size_t i = 1; i < a.size(); ++i) out += (i > 1 ? " " : "") + a[i];
            return out + "\n";
        }
        if (cmd == "head" || cmd == "tail") {
            auto f = parse_flags(a, "", "n");
            const auto n = f.values.count('n') ? to_int(f.values['n']) : 10;
            auto lines = vcs::split_lines(input(f.operands, in));
            const auto keep = std::min<std::size_t>(lines.size(), static_cast<std::size_t>(std::max<std::int64_t>(0, n)));
            Lines out = cmd == "head" ? Lines(lines.begin(), lines.begin() + keep) : Lines(lines.end() - keep, lines.end());
            return vcs::join_lines(out);
        }
        if (cmd == "wc") return wc(a, in);
        if (cmd == "grep") return grep(a, in);
        if (cmd == "sort") {
            auto f = parse_flags(a, "rnu", "");
            auto lines = vcs::split_lines(ensure_nl(input(f.operands, in)));
            if (f.on.count('n')) {
                std::stable_sort(lines.begin(), lines.end(), [](const std::string& x, const std::string& y) {
                    return std::atof(x.c_str()) < std::atof(y.c_str());
                });
            } else {
                std::stable_sort(lines.begin(), lines.end());
            }
            if (f.on.count('r')) std::reverse(lines.begin(), lines.end());
            if (f.on.count('u')) lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
            return vcs::join_lines(lines);
        }
        if (cmd == "uniq") {
            auto f = parse_flags(a, "c", "");
            auto lines = vcs::split_lines(ensure_nl(input(f.operands, in)));
            std::string out;
            for (std::size_t i = 0; i < lines.size();) {
                std::size_t j = i;
                while (j < lines.size() && lines[j] == lines[i]) ++j;
                if (f.on.count('c')) out += std::to_string(j - i) + " ";
                out += lines[i];
                i = j;
            }
            return out;
        }
        if (cmd == "cut") return cut(a, in);
        if (cmd == "ls" || cmd == "tree") return listing(a, cmd == "tree");
        if (cmd == "basename" || cmd == "dirname") {
            if (a.size() != 2) throw Error(Errc::invalid_argument, cmd + " takes one operand");
            auto p = a[1];
            while (p.size() > 1 && p.back() == '/') p.pop_back();
            const auto slash = p.rfind('/');
            if (cmd == "basename") return (slash == std::string::npos ? p : p.substr(slash + 1)) + "\n";
            if (slash == std::string::npos) return ".\n";
            return (slash == 0 ? std::string("/") : p.substr(0, slash)) + "\n";
        }
        if (cmd == "date") {
            const auto s = ctx_.env.now / 1000;
            char buf[64];
            std::snprintf(buf, sizeof buf, "sim+%lldd %02lld:%02lld:%02lld\n", static_cast<long long>(s / 86400),
                          static_cast<long long>(s / 3600 % 24), static_cast<long long>(s / 60 % 60),
                          static_cast<long long>(s % 60));
            return buf;
        }
        if (cmd == "sleep") {
            if (a.size() != 2) throw Error(Errc::invalid_argument, "sleep takes one operand");
            duration_ += seconds(static_cast<double>(to_int(a[1])));
            return {};
        }
        if (cmd == "diff") {
            if (a.size() != 3) throw Error(Errc::invalid_argument, "diff takes two files");
            vcs::Tree x{{a[1], file(a[1])}};
            vcs::Tree y{{a[1], file(a[2])}};
            return render_diff(vcs::diff_trees(x, y));
        }
        if (cmd == "lake" || cmd == "build") {
            if (cmd == "lake" && (a.size() < 2 || a[1] != "build")) {
                throw Error(Errc::disallowed_command, "only 'lake build' is available");
            }
            const auto report = ctx_.env.checker.build(view_);
            duration_ += ctx_.config.build_latency;
            build_ = true;
            std::string out = report.ok ? "build succeeded" : "build failed";
            out += " (" + std::to_string(report.decl_count) + " declarations, " + std::to_string(report.sorry_count) +
                   " sorry)\n";
            for (const auto& e : report.errors) out += e.path + ":" + std::to_string(e.line) + ": " + e.message + "\n";
            return out;
        }
        throw Error(Errc::disallowed_command, "command '" + cmd + "' is not available");
    }

    std::string wc(const Args& a, const std::string& in) {
        auto f = parse_flags(a, "lwc", "");
        const bool all = f.on.empty();
        auto count = [&](const std::string& text, const std::string& label) {
            std::int64_t lines = std::count(text.begin(), text.end(), '\n');
            std::int64_t words = 0;
            bool in_word = false;
            for (char c : text) {
                const bool space = std::isspace(static_cast<unsigned char>(c));
                if (!space && !in_word) ++words;
                in_word = !space;
            }
            std::string out;
            auto add = [&](std::int64_t v) { out += (out.empty() ? "" : " ") + std::to_string(v); };
            if (all || f.on.count('l')) add(lines);
            if (all || f.on.count('w')) add(words);
            if (all || f.on.count('c')) add(static_cast<std::int64_t>(text.size()));
            return out + (label.empty() ? "" : " " + label) + "\n";
        };
        if (f.operands.empty()) return count(in, "");
        std::string out;
        for (const auto& o : f.operands) out += count(file(o), o);
        return out;
    }

    std::string grep(const Args& a, const std::string& in) {
        auto f = parse_flags(a, "nivclrFEH", "e");
        std::string pattern;
        if (f.values.count('e')) {
            pattern = f.values['e'];
        } else {
            if (f.operands.empty()) throw Error(Errc::invalid_argument, "grep: missing pattern");
            pattern = f.operands.front();
            f.operands.erase(f.operands.begin());
        }
        const bool icase = f.on.count('i');
        std::function<bool(const std::string&)> match;
        if (f.on.count('F')) {
            auto needle = pattern;
            if (icase) std::transform(needle.begin(), needle.end(), needle.begin(), ::tolower);
            match = [needle, icase](const std::string& line) {
                if (!icase) return line.find(needle) != std::string::npos;
                std::string low = line;
                std::transform(low.begin(), low.end(), low.begin(), ::tolower);
                return low.find(needle) != std::string::npos;
            };
        } else {
            auto flags = f.on.count('E') ? std::regex::extended : std::regex::basic;
            if (icase) flags |= std::regex::icase;
            std::shared_ptr<std::regex> re;
            try {
                re = std::make_shared<std::regex>(pattern, flags);
            } catch (const std::regex_error&) {
                throw Error(Errc::invalid_argument, "grep: bad pattern");
            }
            match = [re](const std::string& line) { return std::regex_search(line, *re); };
        }
        const bool invert = f.on.count('v');

        std::vector<std::pair<std::string, std::string>> sources;  // label, content
        if (f.operands.empty()) {
            sources.emplace_back("", in);
        } else {
            for (const auto& o : f.operands) {
                auto p = resolve(ctx_, o);
                const auto& tree = p.reference ? ctx_.env.reference : view_;
                if (tree.count(p.path)) {
                    sources.emplace_back(o, tree.at(p.path));
                } else if (f.on.count('r')) {
                    for (const auto& path : files_under(ctx_, view_, p)) sources.emplace_back(path, file(path));
                } else {
                    throw Error(Errc::not_found, "grep: no such file '" + o + "'");
                }
            }
        }
        const bool label = sources.size() > 1 || f.on.count('r') || f.on.count('H');
        std::string out;
        for (const auto& [name, content] : sources) {
            std::int64_t hits = 0;
            std::int64_t line_no = 0;
            for (auto line : vcs::split_lines(content)) {
                ++line_no;
                if (!line.empty() && line.back() == '\n') line.pop_back();
                if (match(line) == invert) continue;
                ++hits;
                if (f.on.count('c') || f.on.count('l')) continue;
                if (label && !name.empty()) out += name + ":";
                if (f.on.count('n')) out += std::to_string(line_no) + ":";
                out += line + "\n";
                if (out.size() > 4 * ctx_.config.output_limit) return out;
            }
            if (f.on.count('l') && hits > 0) out += name + "\n";
            if (f.on.count('c')) out += (label && !name.empty() ? name + ":" : "") + std::to_string(hits) + "\n";
        }
        return out;
    }

    std::string cut(const Args& a, const std::string& in) {
        auto f = parse_flags(a, "", "df");
        const char delim = f.values.count('d') && !f.values['d'].empty() ? f.values['d'][0] : '\t';
        if (!f.values.count('f')) throw Error(Errc::invalid_argument, "cut: -f is required");
        std::set<std::int64_t> fields;
        std::size_t start = 0;
        const auto& spec = f.values['f'];
        while (start <= spec.size()) {
            auto comma = spec.find(',', start);
            if (comma == std::string::npos) comma = spec.size();
            fields.insert(to_int(spec.substr(start, comma - start)));
            start = comma + 1;
        }
        std::string out;
        for (auto line : vcs::split_lines(ensure_nl(input(f.operands, in)))) {
            line.pop_back();
            std::vector<std::string> parts;
            std::size_t s = 0;
            for (;;) {
                auto d = line.find(delim, s);
                parts.push_back(line.substr(s, d == std::string::npos ? std::string::npos : d - s));
                if (d == std::string::npos) break;
                s = d + 1;
            }
            std::string row;
            bool first = true;
            for (auto k : fields) {
                if (k < 1 || k > static_cast<std::int64_t>(parts.size())) continue;
                if (!first) row += delim;
                row += parts[k - 1];
                first = false;
            }
            out += row + "\n";
        }
        return out;
    }

    std::string listing(const Args& a, bool recursive) {
        auto f = parse_flags(a, "laR", "");
        const auto dir = resolve(ctx_, f.operands.empty() ? "." : f.operands.front());
        const auto files = files_under(ctx_, view_, dir);
        if (files.empty()) throw Error(Errc::not_found, "no such file or directory");
        const auto base = display(ctx_, dir);
        const auto prefix = base == "." ? std::string() : base.ends_with('/') ? base : base + "/";
        std::set<std::string> entries;
        for (const auto& p : files) {
            if (p == base) {
                entries.insert(p);
                continue;
            }
            auto rel = p.substr(prefix.size());
            if (recursive || f.on.count('R')) {
                entries.insert(rel);
            } else {
                auto slash = rel.find('/');
                entries.insert(slash == std::string::npos ? rel : rel.substr(0, slash + 1));
            }
        }
        std::string out;
        for (const auto& e : entries) out += e + "\n";
        return out;
    }

    CallContext& ctx_;
    vcs::Tree view_;
    SimTime duration_ = 0;
    bool build_ = false;
};

}  // namespace

HandlerOutput run_shell(CallContext& ctx, std::string_view command) { return Shell(ctx).run(command); }

}  // namespace swarm::toolhost
