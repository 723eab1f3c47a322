#pragma once

#include "swarm/agents/scenario.hpp"
#include "swarm/orchestrator/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace swarm::orchestrator {

/// Builds a random but reproducible formalisation project: chapters with defs,
/// helper lemmas and targets in dependency order, some cited and exercise targets,
/// and a few near-duplicate defs planted in later chapters.
agents::Scenario generate_scenario(const ScenarioParams& params, std::uint64_t seed);

/// Main with every chapter written out and every non-excluded theorem proved.
vcs::Tree solution_tree(const agents::Scenario& scenario);

/// Problems that would make the scenario unsolvable or inconsistent: a target list that
/// does not round-trip, deps that are not visible where they are used, imports that do
/// not point backwards, an initial main that does not build, or a solution that leaves a
/// target unproved. Empty when the scenario is sound.
std::vector<std::string> validate_scenario(const agents::Scenario& scenario);

}  // namespace swarm::orchestrator
