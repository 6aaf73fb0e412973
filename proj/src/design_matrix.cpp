#include <algorithm>
#include <cmath>
#include <set>

#include "metaphor/analysis.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

constexpr std::string_view kFramePrefix = "frame:";

bool is_count(std::string_view f) {
  return f == "chars" || f == "followers" || f == "following" || f == "statuses" || f == "favorites" ||
         f == "retweets";
}

bool is_document_field(std::string_view f) {
  static const std::set<std::string, std::less<>> fields{
      "ideology", "strength", "hashtag", "mention",   "url",        "quote",     "reply",
      "verified", "chars",    "followers", "following", "statuses", "year_month", "favorites",
      "retweets"};
  return fields.count(f) != 0;
}

bool is_frame(std::string_view f) { return f.starts_with(kFramePrefix) && f.size() > kFramePrefix.size(); }

bool known_field(const std::string& f, const std::vector<std::string>& concepts) {
  return is_document_field(f) || is_frame(f) || f == kOverall ||
         std::find(concepts.begin(), concepts.end(), f) != concepts.end();
}

std::string label_for(const std::string& field, Transform t) {
  std::string base = field;
  if (field == "quote") base = "quote status";
  if (field == "year_month") base = "year:month";
  if (t == Transform::ln1p || t == Transform::log) base = "log " + base;
  return base;
}

bool needs_ideal_point(const DesignSpec& spec) {
  auto uses = [&](const std::string& f) {
    return f == kIdeology || f == kStrength || spec.transform_of(f) == Transform::group_centered_z;
  };
  if (uses(spec.outcome)) return true;
  return std::any_of(spec.fixed_effects.begin(), spec.fixed_effects.end(), uses);
}

// Raw value of a field for one document; nullopt plus a reason when absent.
std::optional<double> raw_value(const Document& d, const std::string& f, const ScoreTable& scores,
                                const std::vector<std::string>& concepts, ScoreField sf, std::string& reason) {
  auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  if (f == kIdeology) return flag(*d.ideal_point > 0);
  if (f == kStrength) return std::abs(*d.ideal_point);
  if (f == "hashtag") return flag(d.has_hashtag);
  if (f == "mention") return flag(d.has_mention);
  if (f == "url") return flag(d.has_url);
  if (f == "quote") return flag(d.is_quote);
  if (f == "reply") return flag(d.is_reply);
  if (f == "verified") return flag(d.verified);
  if (f == "chars") return static_cast<double>(utf8_length(d.text));
  if (f == "followers") return static_cast<double>(d.follower_count);
  if (f == "following") return static_cast<double>(d.following_count);
  if (f == "statuses") return static_cast<double>(d.status_count);
  if (f == "favorites") return static_cast<double>(d.favorite_count);
  if (f == "retweets") return static_cast<double>(d.retweet_count);
  if (f == "year_month") return static_cast<double>(year_month_of(d.created_at).linear_index());
  if (is_frame(f)) {
    if (!d.frames) {
      reason = "frames missing";
      return std::nullopt;
    }
    return flag(d.frames->count(f.substr(kFramePrefix.size())) != 0);
  }
  if (f == kOverall) {
    double sum = 0.0;
    for (const auto& c : concepts) {
      const auto* row = scores.find(d.id, c);
      if (row == nullptr) {
        reason = "score missing";
        return std::nullopt;
      }
      sum += field_value(*row, sf);
    }
    return sum;
  }
  const auto* row = scores.find(d.id, f);
  if (row == nullptr) {
    reason = "score missing";
    return std::nullopt;
  }
  return field_value(*row, sf);
}

void standardize(std::vector<double>& v, const std::string& field) {
  const double n = static_cast<double>(v.size());
  if (v.size() < 2) throw ModelError("cannot z-score '" + field + "' with fewer than 2 rows");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  if (!(sd > 0.0)) throw ModelError("cannot z-score '" + field + "': it is constant over the analysis rows");
  for (double& x : v) x = (x - mean) / sd;
}

void apply_transform(std::vector<double>& v, Transform t, const std::string& field, const std::vector<double>& group) {
  switch (t) {
    case Transform::none:
      return;
    case Transform::ln1p:
      for (double& x : v) {
        if (!(x > -1.0)) throw ModelError("ln(1+x) of '" + field + "' is undefined for " + format_double(x));
        x = std::log1p(x);
      }
      return;
    case Transform::log:
      for (double& x : v) {
        if (!(x > 0.0)) throw ModelError("log of '" + field + "' is undefined for " + format_double(x));
        x = std::log(x);
      }
      return;
    case Transform::z:
      standardize(v, field);
      return;
    case Transform::group_centered_z: {
      double sum[2] = {0.0, 0.0};
      double count[2] = {0.0, 0.0};
      for (std::size_t i = 0; i < v.size(); ++i) {
        const int g = group[i] > 0.5 ? 1 : 0;
        sum[g] += v[i];
        count[g] += 1.0;
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        const int g = group[i] > 0.5 ? 1 : 0;
        v[i] -= sum[g] / count[g];
      }
      standardize(v, field);
      return;
    }
  }
}

}  // namespace

Transform parse_transform(std::string_view name) {
  if (name == "none") return Transform::none;
  if (name == "ln1p") return Transform::ln1p;
  if (name == "z") return Transform::z;
  if (name == "group_centered_z") return Transform::group_centered_z;
  if (name == "log") return Transform::log;
  throw ArgumentError("unknown transform '" + std::string(name) + "' (expected none, ln1p, z, group_centered_z, log)");
}

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::none:
      return "none";
    case Transform::ln1p:
      return "ln1p";
    case Transform::z:
      return "z";
    case Transform::group_centered_z:
      return "group_centered_z";
    case Transform::log:
      return "log";
  }
  return "none";
}

const std::vector<std::string>& control_fields() {
  static const std::vector<std::string> fields{"hashtag", "mention",   "url",       "quote",    "reply",     "verified",
                                               "chars",   "followers", "following", "statuses", "year_month"};
  return fields;
}

Transform default_transform(std::string_view field) {
  if (field == kStrength) return Transform::group_centered_z;
  if (is_count(field)) return Transform::ln1p;
  return Transform::none;
}

Transform DesignSpec::transform_of(const std::string& field) const {
  auto it = transforms.find(field);
  return it != transforms.end() ? it->second : default_transform(field);
}

void DesignSpec::validate(const std::vector<std::string>& concepts) const {
  if (!known_field(outcome, concepts)) throw ArgumentError("unknown outcome field '" + outcome + "'");
  std::set<std::string> seen;
  for (const auto& f : fixed_effects) {
    if (!known_field(f, concepts)) throw ArgumentError("unknown field '" + f + "'");
    if (f == outcome) throw ArgumentError("field '" + f + "' is both outcome and regressor");
    if (!seen.insert(f).second) throw ArgumentError("field '" + f + "' listed twice");
  }
  for (const auto& [a, b] : interactions) {
    for (const auto& m : {a, b}) {
      if (seen.count(m) == 0) {
        throw ArgumentError("interaction " + a + ":" + b + " uses '" + m + "', which is not a fixed effect");
      }
    }
    if (a == b) throw ArgumentError("interaction of '" + a + "' with itself");
  }
  for (const auto& [f, t] : transforms) {
    if (f != outcome && seen.count(f) == 0) throw ArgumentError("transform target '" + f + "' is not in the design");
    if (f == kIdeology && t != Transform::none) throw ArgumentError("ideology is binary and takes no transform");
  }
}

nlohmann::ordered_json DesignSpec::to_json() const {
  nlohmann::ordered_json j;
  j["outcome"] = outcome;
  j["fixed_effects"] = fixed_effects;
  j["interactions"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : interactions) j["interactions"].push_back({a, b});
  j["transforms"] = nlohmann::ordered_json::object();
  for (const auto& [f, t] : transforms) j["transforms"][f] = std::string(to_string(t));
  j["score_field"] = std::string(to_string(score_field));
  return j;
}

DesignSpec DesignSpec::from_json(const nlohmann::json& j) {
  DesignSpec s;
  s.outcome = j.at("outcome").get<std::string>();
  s.fixed_effects = j.at("fixed_effects").get<std::vector<std::string>>();
  if (j.contains("interactions")) {
    for (const auto& p : j.at("interactions")) {
      if (!p.is_array() || p.size() != 2) throw FormatError("an interaction is a pair of field names");
      s.interactions.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
  }
  if (j.contains("transforms")) {
    for (const auto& [f, t] : j.at("transforms").items()) s.transforms[f] = parse_transform(t.get<std::string>());
  }
  if (j.contains("score_field")) s.score_field = parse_score_field(j.at("score_field").get<std::string>());
  return s;
}

DesignSpec ideology_spec(const std::string& outcome, const std::vector<std::string>& frames) {
  DesignSpec s;
  s.outcome = outcome;
  s.fixed_effects = {std::string(kIdeology), std::string(kStrength)};
  for (const auto& c : control_fields()) s.fixed_effects.push_back(c);
  for (const auto& f : frames) s.fixed_effects.push_back(std::string(kFramePrefix) + f);
  s.interactions = {{std::string(kIdeology), std::string(kStrength)}};
  return s;
}

DesignSpec engagement_spec(const std::string& outcome, const std::vector<std::string>& concepts,
                           const std::vector<std::string>& frames) {
  DesignSpec s;
  s.outcome = outcome;
  s.fixed_effects = {std::string(kIdeology), std::string(kStrength)};
  s.interactions = {{std::string(kIdeology), std::string(kStrength)}};
  for (const auto& c : concepts) {
    s.fixed_effects.push_back(c);
    s.transforms[c] = Transform::z;
  }
  for (const auto& c : concepts) s.interactions.emplace_back(c, std::string(kIdeology));
  for (const auto& c : control_fields()) s.fixed_effects.push_back(c);
  for (const auto& f : frames) s.fixed_effects.push_back(std::string(kFramePrefix) + f);
  return s;
}

std::vector<std::string> frame_names(const Corpus& corpus) {
  std::set<std::string> names;
  for (const auto& d : corpus.documents()) {
    if (d.frames) names.insert(d.frames->begin(), d.frames->end());
  }
  return {names.begin(), names.end()};
}

std::optional<std::size_t> DesignMatrix::index_of(std::string_view column) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == column) return j;
  }
  return std::nullopt;
}

std::size_t DesignMatrix::require(std::string_view column) const {
  auto j = index_of(column);
  if (!j) throw ArgumentError("design has no column '" + std::string(column) + "'");
  return *j;
}

Eigen::VectorXd DesignMatrix::counterfactual_row(std::size_t i, std::size_t column, double value) const {
  Eigen::VectorXd r = X.row(static_cast<Eigen::Index>(i)).transpose();
  r(static_cast<Eigen::Index>(column)) = value;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (factors[j].size() < 2) continue;
    double p = 1.0;
    for (auto f : factors[j]) p *= r(static_cast<Eigen::Index>(f));
    r(static_cast<Eigen::Index>(j)) = p;
  }
  return r;
}

DesignMatrix DesignMatrix::from_columns(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<std::string> columns) {
  if (static_cast<std::size_t>(X.cols()) != columns.size()) throw ArgumentError("column names do not match X");
  if (X.rows() != y.size()) throw ArgumentError("X and y have different row counts");
  DesignMatrix d;
  d.X = std::move(X);
  d.y = std::move(y);
  d.columns = std::move(columns);
  d.factors.resize(d.columns.size());
  for (std::size_t j = 0; j < d.columns.size(); ++j) {
    const auto& name = d.columns[j];
    if (name == kInterceptLabel) continue;
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
      auto a = d.index_of(name.substr(0, colon));
      auto b = d.index_of(name.substr(colon + 1));
      if (a && b) {
        d.factors[j] = {*a, *b};
        continue;
      }
    }
    d.factors[j] = {j};
  }
  for (std::size_t i = 0; i < d.rows(); ++i) d.doc_ids.push_back(std::to_string(i));
  return d;
}

DesignMatrix build_design_matrix(const Corpus& corpus, const ScoreTable& scores, const DesignSpec& spec) {
  const auto concepts = scores.concepts();
  spec.validate(concepts);
  const bool need_ip = needs_ideal_point(spec);

  std::vector<std::string> fields{spec.outcome};
  fields.insert(fields.end(), spec.fixed_effects.begin(), spec.fixed_effects.end());

  DesignMatrix d;
  d.outcome = spec.outcome;
  std::vector<std::vector<double>> values(fields.size());
  std::vector<double> group;
  for (const auto& doc : corpus.documents()) {
    std::string reason;
    if (need_ip && !doc.ideal_point) reason = "ideal_point missing";
    if (need_ip && doc.ideal_point && *doc.ideal_point == 0.0) reason = "ideal_point zero";
    std::vector<double> row;
    for (std::size_t k = 0; k < fields.size() && reason.empty(); ++k) {
      auto v = raw_value(doc, fields[k], scores, concepts, spec.score_field, reason);
      if (v) row.push_back(*v);
    }
    if (!reason.empty()) {
      ++d.dropped;
      ++d.drop_reasons[reason];
      continue;
    }
    for (std::size_t k = 0; k < fields.size(); ++k) values[k].push_back(row[k]);
    group.push_back(need_ip && *doc.ideal_point > 0 ? 1.0 : 0.0);
    d.doc_ids.push_back(doc.id);
  }
  if (d.doc_ids.empty()) {
    std::string why;
    for (const auto& [r, n] : d.drop_reasons) why += (why.empty() ? "" : ", ") + r + ": " + std::to_string(n);
    throw ModelError("no rows left for outcome '" + spec.outcome + "' after dropping (" + why + ")");
  }
  for (std::size_t k = 0; k < fields.size(); ++k) apply_transform(values[k], spec.transform_of(fields[k]), fields[k], group);

  const auto n = static_cast<Eigen::Index>(d.doc_ids.size());
  const std::size_t p = 1 + spec.fixed_effects.size() + spec.interactions.size();
  d.X.resize(n, static_cast<Eigen::Index>(p));
  d.y = Eigen::Map<const Eigen::VectorXd>(values[0].data(), n);
  d.columns.emplace_back(kInterceptLabel);
  d.factors.emplace_back();
  d.X.col(0).setOnes();
  std::map<std::string, std::size_t> column_of_field;
  for (std::size_t k = 1; k < fields.size(); ++k) {
    const auto j = d.columns.size();
    column_of_field[fields[k]] = j;
    d.columns.push_back(label_for(fields[k], spec.transform_of(fields[k])));
    d.factors.push_back({j});
    d.X.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(values[k].data(), n);
  }
  for (const auto& [a, b] : spec.interactions) {
    const auto ja = column_of_field.at(a);
    const auto jb = column_of_field.at(b);
    const auto j = d.columns.size();
    d.columns.push_back(d.columns[ja] + ":" + d.columns[jb]);
    d.factors.push_back({ja, jb});
    d.X.col(static_cast<Eigen::Index>(j)) =
        d.X.col(static_cast<Eigen::Index>(ja)).cwiseProduct(d.X.col(static_cast<Eigen::Index>(jb)));
  }

  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      if (d.columns[a] == d.columns[b]) throw ModelError("design lists column '" + d.columns[a] + "' twice");
      if (d.X.col(static_cast<Eigen::Index>(a)) == d.X.col(static_cast<Eigen::Index>(b))) {
        throw ModelError("columns '" + d.columns[a] + "' and '" + d.columns[b] + "' are identical (collinear)");
      }
    }
  }
  return d;
}

}  // namespace metaphor
