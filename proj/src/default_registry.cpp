#include "metaphor/registry.hpp"

namespace metaphor {

const ConceptRegistry& default_registry() {
  static const ConceptRegistry registry(
      {
          {"animal",
           "living creatures, such as beasts, cows, dogs, sheep, and birds",
           {"They attack them.", "They bait them.", "They breed them.", "They are brutish.",
            "They butcher them.", "They capture them.", "They catch them.", "They chase them down.",
            "They ensnare them.", "They ferret them out.", "They flock in.", "They hunt them down.",
            "They lay a trap for them.", "They lure them in.", "They round them up.", "They slaughter them.",
            "They slither in.", "They trap them.", "They wiggle in."}},
          {"vermin",
           "small animals that spread diseases or destroy crops, livestock, or property, such as rats, mice, "
           "and cockroaches",
           {"They are cockroaches.", "They crawl in.", "They are dirty.", "They are diseases.", "They fester.",
            "They are impure.", "They infect it.", "They infest it.", "There is an infestation of them.",
            "They overrun it.", "They are a plague.", "They are poisonous.", "They are rats.", "They sneak in.",
            "There is a swarm of them.", "They are a virus."}},
          {"parasite",
           "organisms that feed off a host species at the host’s expense, such as leeches, ticks, fleas, and "
           "mosquitoes",
           {"They bleed it dry.", "They are bloodthirsty.", "They are a cancer.", "They leech off them.",
            "They are parasites.", "They scrounge around.", "They are scroungers.", "They are spongers."}},
          {"pressure",
           "destructive physical force, such as heavy burdens, crushing forces, and bursting containers",
           {"It bears the brunt of them.", "It buckles under them.", "They are a burden.",
            "They cause it to burst.", "They bust it.", "They crumble it.", "They fill it up.",
            "They are a load on it.", "They put pressure on it.", "They seal it up.", "They are a strain on it.",
            "They stretch it thin."}},
          {"water",
           "or liquid motion more broadly",
           {"They absorb them.", "There is a deluge of them.", "They drain it.", "They engulf it.",
            "They flood in.", "They flow in.", "There is an inflow of them.", "There is an influx of them.",
            "They inundate it.", "There is an outflow of them.", "There is an overflow of them.", "They pour in.",
            "They spill in.", "There is a spillover of them.", "There is a storm of them.", "They stream in.",
            "There is a surge of them.", "They swamp it.", "There is a swell of them.",
            "There is a tide of them.", "They trickle in.", "There is a wave of them."}},
          {"commodity",
           "economic resources or objects that are traded, exchanged, bought, or sold",
           {"They are distributed between them.", "They are the engine of it.", "They exchange them.",
            "They export them.", "They import them.", "They are instruments.", "They are instrumental to it.",
            "They are packed in.", "They are processed.", "They are redistributed between them.",
            "They accept a share of them.", "They take them in.", "They are tools.", "They trade them in."}},
          {"war",
           "or fights and battles more broadly",
           {"They are an army.", "They battle them.", "They bludgeon them.", "They capture them.",
            "They are caught in the crosshairs", "They fight them.", "They are invaders.",
            "There is an invasion of them.", "There are regiments of them.", "They shield them.",
            "They are soldiers.", "They are warriors."}},
      },
      {{"physical pressure", "pressure"}});
  return registry;
}

}  // namespace metaphor
