#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace metaphor {

struct CodebookEntry {
  std::string_view key;      // concept name or "domain-agnostic"
  std::string_view heading;  // as printed, e.g. "Animal"
  std::string_view text;     // heading, instructions and bullet list
};

// Instructions shared by every concept.
std::string_view codebook_preamble();
// One entry per concept plus the domain-agnostic condition.
const std::vector<CodebookEntry>& codebook_entries();
// Preamble followed by the section for one concept; ArgumentError if unknown.
std::string codebook_excerpt(std::string_view concept_name);
// The whole codebook as plain text (identical to data/codebook.txt).
std::string full_codebook();

}  // namespace metaphor
