#include "metaphor/prompts.hpp"

#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

constexpr std::string_view kSimpleTemplate = R"PROMPT(For each metaphorical word in the tweet below, select the most relevant concept from the following list:
[water, commodity, physical pressure, war, animal, vermin, parasite]
Respond with a JSON object where keys are metaphors and values are relevant concepts.
If a metaphor is not related to any concept above, set its value to "none".
If there are no metaphors, output an empty JSON object.

Tweet: [TWEET TEXT])PROMPT";

constexpr std::string_view kDescriptiveTemplate = R"PROMPT(Analyze the tweet below to identify metaphors used to describe immigrants or immigration. In this context, metaphors are words and phrases that are used non-literally and create associations between immigration and other concepts. For each identified metaphor, select the most relevant concept from the following list:

Concepts (explanations in parentheses):
Parasite (organisms that feed off a host species at the host’s expense, such as leeches, ticks, fleas, and mosquitoes)
Vermin (small animals that spread diseases or destroy crops, livestock, or property, such as rats, mice, and cockroaches)
Animal (living creatures, such as beasts, cows, dogs, sheep, and birds)
Water (or liquid motion more broadly)
Physical Pressure (destructive physical force, such as heavy burdens, crushing forces, and bursting containers)
Commodity (economic resources or objects that are traded, exchanged, bought, or sold)
War (or fights and battles more broadly)
Provide your analysis as a JSON object where keys are the metaphors and values are their most relevant concepts. Only include the concept name (e.g. commodity, animal, parasite). Do not include the concept explanation in your response. If a metaphor is not related to any of the listed concepts, set its value to “none”. If no metaphors are found, return an empty JSON object.

Tweet: [TWEET TEXT])PROMPT";

}  // namespace

std::string_view to_string(PromptVariant v) {
  return v == PromptVariant::simple ? "simple" : "descriptive";
}

PromptVariant parse_prompt_variant(std::string_view name) {
  const auto n = to_lower_ascii(trim(name));
  if (n == "simple") return PromptVariant::simple;
  if (n == "descriptive") return PromptVariant::descriptive;
  throw ArgumentError("unknown prompt variant '" + std::string(name) + "' (expected simple or descriptive)");
}

std::string_view prompt_template(PromptVariant v) {
  return v == PromptVariant::simple ? kSimpleTemplate : kDescriptiveTemplate;
}

std::string build_prompt(PromptVariant v, std::string_view tweet_text) {
  if (trim(tweet_text).empty()) throw ArgumentError("cannot build a prompt for empty text");
  std::string prompt(prompt_template(v));
  const auto pos = prompt.rfind(kTweetSlot);
  prompt.replace(pos, kTweetSlot.size(), tweet_text);
  return prompt;
}

}  // namespace metaphor
