#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace metaphor {

struct ConceptScore {
  std::string concept_name;
  double value = 0.0;

  friend bool operator==(const ConceptScore&, const ConceptScore&) = default;
};

// One value per registry concept, in registry order.
using ConceptScores = std::vector<ConceptScore>;

// Throws ArgumentError when the concept is missing.
double value_of(const ConceptScores& scores, std::string_view concept_name);

}  // namespace metaphor
