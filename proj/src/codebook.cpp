#include "metaphor/codebook.hpp"

#include "metaphor/errors.hpp"
#include "metaphor/registry.hpp"

namespace metaphor {
namespace {

// Rendered from the annotation codebook: markup removed, the repeated
// Commodity section kept once.
constexpr std::string_view kPreamble = R"CB(For each tweet and given concept, label whether or not the tweet evokes metaphors related to the given concept. Focus on the author's language, not their stance towards immigration.

To determine if specific words or phrases are metaphorical, consider whether the most basic meaning is related to the listed source domain concept. Basic meanings tend to be more concrete (easier to understand, imagine, or sense) and precise (rather than vague). If you’re not sure about a word’s basic meaning, use the first definition in the dictionary as a proxy. A word should be considered metaphorical if it’s relevant to the listed concept (e.g. animal); it need not exclusively apply to that concept.)CB";

const std::vector<CodebookEntry> kEntries = {
    {"animal", "Animal", R"CB(Animal: Immigrants are sometimes talked about as though they are animals such as beasts, cattle, sheep, and dogs. Label whether or not each tweet makes an association between immigration/immigrants and animals. Label "YES" if:
- The author uses any words or phrases that are usually used to describe animals. Common examples: attack, flock, hunt, trap, cage, breed
- Even if you cannot pinpoint specific words that evoke the concept of animals, if the author's language reminds you of how people talk about animals)CB"},
    {"vermin", "Vermin", R"CB(Vermin: Vermin are small animals that spread diseases and destroy crops, livestock, or property, such as rats, mice, and cockroaches. Vermin are often found in large groups. Label whether or not each tweet makes an association between immigration/immigrants and vermin. Label "YES" if:
- The author uses any words or phrases that are usually used to describe vermin. Common examples: infesting, swarming, dirty, diseased, overrun, plagued, virus
- Even if you cannot pinpoint specific words that evoke the concept of vermin, if the author's language reminds you of how people talk about vermin)CB"},
    {"parasite", "Parasite", R"CB(Parasite: Parasites are organisms that feed off a host species at the host’s expense, such as leeches, ticks, fleas, and mosquitoes. Label whether or not each tweet makes an association between immigration/immigrants and parasites. Label “YES” if:
- The author uses any words or phrases that are usually used to describe parasites. Common examples: leeching, freeloading, sponging, mooching, bleed dry
- Even if you cannot pinpoint specific words that evoke the concept of parasites, if the author's language reminds you of how people talk about parasites)CB"},
    {"water", "Water", R"CB(Water: Immigrants are sometimes talked about using language commonly reserved for water (or liquid motion more broadly). For example, people may talk about immigrants pouring, flooding, or streaming across borders, or refer to waves, tides, and influxes of immigration. Label whether or not each tweet makes an association between immigration/immigrants and water. Label “YES” if:
- The author uses any words or phrases that are usually used to describe water. Common examples: pouring, flooding, flowing, drain, spillover, surge, wave
- Even if you cannot pinpoint specific words that evoke the concept of water, if the author's language reminds you of how people talk about water)CB"},
    {"commodity", "Commodity", R"CB(Commodity: Commodities are economic resources or objects that are traded, exchanged, bought, and sold. Label whether or not each tweet makes an association between immigration/immigrants. Label "YES" if:
- The author uses any words or phrases that are usually used to describe commodities. Common examples: sources of labor, undergoing processing, imports, exports, tools, being received or taken in, distribution
- Even if you cannot pinpoint specific words that evoke the concept of commodities, if the author's language reminds you of how people talk about commodities)CB"},
    {"pressure", "Pressure", R"CB(Pressure: Immigration is sometimes talked about as a physical pressure placed upon a host country, especially as heavy burdens, crushing forces, or bursting containers. Label whether or not each tweet makes an association between immigration/immigrants and physical pressure. Label “YES” if:
- The author uses any words or phrases that are usually used to describe physical pressure. Common examples: host country crumbling, bursting, being crushed, stretched thin, or strained, immigrants as burdens.
- Even if you cannot pinpoint specific words that evoke the concept of pressure, does the author’s language remind you of how people talk about physical pressure?)CB"},
    {"war", "War", R"CB(War: People sometimes talk about immigration in terms of war, where immigrants are viewed as an invading army that the host country fights against. Label whether or not each tweet makes an association between immigration/immigrants and war. Label “YES” if:
- The author uses any words or phrases that are usually used to describe war. Common examples: invasion, soldiers, battle, shields, fighting
- Even if you cannot pinpoint specific words that evoke the concept of war, if the author's language reminds you of how people talk about war)CB"},
    {"domain-agnostic", "Domain-Agnostic", R"CB(Domain-Agnostic: Label whether or not each tweet uses metaphorical (non-literal) language to talk about immigration/immigrants. Metaphorical language involves talking about immigration/immigrants in terms of an otherwise unrelated concept. For example, waves of immigration is metaphorical because the word waves is associated with water.)CB"},
};

}  // namespace

std::string_view codebook_preamble() { return kPreamble; }

const std::vector<CodebookEntry>& codebook_entries() { return kEntries; }

std::string codebook_excerpt(std::string_view concept_name) {
  const auto key = canonical_concept_name(concept_name);
  for (const auto& e : kEntries) {
    if (e.key == key) return std::string(kPreamble) + "\n\n" + std::string(e.text);
  }
  throw ArgumentError("no codebook section for '" + std::string(concept_name) + "'");
}

std::string full_codebook() {
  std::string out(kPreamble);
  for (const auto& e : kEntries) {
    out += "\n\n";
    out += e.text;
  }
  return out + "\n";
}

}  // namespace metaphor
