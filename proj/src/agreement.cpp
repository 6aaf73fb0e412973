#include <array>
#include <map>

#include "metaphor/annotation.hpp"
#include "metaphor/errors.hpp"

namespace metaphor {

double krippendorff_alpha(const std::vector<AnnotationRecord>& records) {
  // Values per unit (document, concept).
  std::map<std::pair<std::string, std::string>, std::array<std::size_t, 3>> units;
  for (const auto& r : records) units[{r.doc_id, r.concept_name}][static_cast<std::size_t>(r.label)] += 1;

  // Coincidence matrix o[c][k]: each ordered pair of values within a unit with
  // m values contributes 1 / (m - 1).
  double o[3][3] = {};
  bool pairable = false;
  for (const auto& [unit, n] : units) {
    const std::size_t m = n[0] + n[1] + n[2];
    if (m < 2) continue;
    pairable = true;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        const double pairs = c == k ? static_cast<double>(n[c]) * static_cast<double>(n[c] - (n[c] > 0 ? 1 : 0))
                                    : static_cast<double>(n[c]) * static_cast<double>(n[k]);
        o[c][k] += pairs * w;
      }
    }
  }
  if (!pairable) throw UndefinedMetric("Krippendorff's alpha needs at least one unit with two or more records");

  double nc[3] = {};
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < 3; ++k) nc[c] += o[c][k];
    total += nc[c];
  }
  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < 3; ++k) {
      if (c == k) continue;
      observed += o[c][k];
      expected += nc[c] * nc[k];
    }
  }
  if (expected == 0.0) throw UndefinedMetric("Krippendorff's alpha is undefined when only one label value occurs");
  return 1.0 - (total - 1.0) * observed / expected;
}

}  // namespace metaphor
