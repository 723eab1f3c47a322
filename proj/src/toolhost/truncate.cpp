#include "swarm/toolhost/truncate.hpp"

namespace swarm::toolhost {

std::string truncation_marker(std::size_t limit, std::size_t original) {
    return "[output truncated to " + std::to_string(limit) + " of " + std::to_string(original) + " bytes]\n";
}

std::size_t utf8_floor(std::string_view text, std::size_t cut) {
    if (cut >= text.size()) return text.size();
    // Step back over continuation bytes so text[cut] starts a character.
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    return cut;
}

Truncated truncate_output(std::string_view text, std::size_t limit) {
    Truncated out;
    out.bytes_before = text.size();
    if (text.size() <= limit) {
        out.text = std::string(text);
        return out;
    }
    out.truncated = true;
    const auto marker = truncation_marker(limit, text.size());
    if (marker.size() >= limit) {
        out.text = marker.substr(0, limit);
        return out;
    }
    const auto budget = limit - marker.size();
    std::size_t keep = 0;
    const auto nl = text.substr(0, budget).rfind('\n');
    if (nl != std::string_view::npos) {
        keep = nl + 1;
    } else {
        keep = utf8_floor(text, budget);
    }
    out.text.reserve(keep + marker.size() + 1);
    out.text.append(text.substr(0, keep));
    if (keep > 0 && out.text.back() != '\n' && out.text.size() + 1 + marker.size() <= limit) out.text += '\n';
    out.text += marker;
    return out;
}

}  // namespace swarm::toolhost
