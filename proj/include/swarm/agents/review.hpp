#pragma once

#include "swarm/agents/scenario.hpp"
#include "swarm/vcs/diff.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swarm::agents {

enum class Verdict { approve, request_changes, reject };
std::string_view verdict_name(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

enum class ReviewMode { normal, always_request_changes, always_approve };
std::string_view review_mode_name(ReviewMode m);
std::optional<ReviewMode> parse_review_mode(std::string_view s);

struct ReviewRules {
    std::size_t pr_line_cap = 400;     // changed code lines per PR
    std::size_t file_line_cap = 2000;  // lines per code file
    double noise = 0.05;               // chance of a spurious change request
    ReviewMode mode = ReviewMode::normal;
};

/// What a reviewer sees: the PR's base and head trees and the issues it ticks.
struct ReviewInput {
    const vcs::Tree& base;
    const vcs::Tree& head;
    const std::vector<std::string>& ticked;
    const Scenario& scenario;
};

struct ReviewResult {
    Verdict verdict = Verdict::approve;
    std::vector<std::string> findings;  // "<code>:<detail>"
};

/// Tick coherence, statement fidelity, regressions and proofs of cited results.
ReviewResult math_review(const ReviewInput& in);
/// Size limits, naming, issue headers.
ReviewResult eng_review(const ReviewInput& in, const ReviewRules& rules);

}  // namespace swarm::agents
