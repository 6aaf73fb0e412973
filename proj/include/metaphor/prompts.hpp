#pragma once

#include <array>
#include <string>
#include <string_view>

namespace metaphor {

enum class PromptVariant { simple, descriptive };

inline constexpr std::array<PromptVariant, 2> kPromptVariants = {PromptVariant::simple,
                                                                 PromptVariant::descriptive};

std::string_view to_string(PromptVariant v);
PromptVariant parse_prompt_variant(std::string_view name);

// Placeholder in the templates that build_prompt replaces with the post text.
inline constexpr std::string_view kTweetSlot = "[TWEET TEXT]";

// The zero-shot extraction template with the slot still in place. The text is
// byte-identical to data/prompts/<variant>.txt.
std::string_view prompt_template(PromptVariant v);

// Throws ArgumentError on empty (all-whitespace) text.
std::string build_prompt(PromptVariant v, std::string_view tweet_text);

}  // namespace metaphor
