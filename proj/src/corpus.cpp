#include "metaphor/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "metaphor/csv.hpp"
#include "metaphor/errors.hpp"
#include "metaphor/text.hpp"

namespace metaphor {
namespace {

using nlohmann::json;

std::string id_from_json(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  throw ArgumentError("id must be a string or integer");
}

std::int64_t count_from_json(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return 0;
  if (it->is_number_integer() || it->is_number_unsigned()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double d = it->get<double>();
    if (d != static_cast<double>(static_cast<std::int64_t>(d))) {
      throw ArgumentError(std::string(key) + " is not an integer");
    }
    return static_cast<std::int64_t>(d);
  }
  if (it->is_string()) {
    const auto s = std::string(trim(it->get<std::string>()));
    if (s.empty()) return 0;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ArgumentError(std::string(key) + " is not an integer: '" + s + "'");
    return v;
  }
  throw ArgumentError(std::string(key) + " must be an integer");
}

bool flag_from_json(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return false;
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_number()) return it->get<double>() != 0.0;
  if (it->is_string()) {
    const auto s = to_lower_ascii(trim(it->get<std::string>()));
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no" || s.empty()) return false;
  }
  throw ArgumentError(std::string(key) + " is not a boolean");
}

// CSV cells arrive as strings; map them onto the JSON shape so both formats
// share one validation path.
json csv_record_to_json(const csv::Header& header, const std::vector<std::string>& fields) {
  json j = json::object();
  for (std::size_t i = 0; i < header.names().size(); ++i) {
    const auto& name = header.names()[i];
    const std::string value = i < fields.size() ? fields[i] : std::string();
    if (name == "ideal_point") {
      if (trim(value).empty()) {
        j[name] = nullptr;
      } else {
        j[name] = parse_double(value);
      }
    } else if (name == "frames") {
      if (trim(value).empty()) {
        j[name] = nullptr;
      } else {
        json arr = json::array();
        for (const auto& f : split(value, ';')) {
          auto t = trim(f);
          if (!t.empty()) arr.push_back(std::string(t));
        }
        j[name] = arr;
      }
    } else {
      j[name] = value;
    }
  }
  return j;
}

}  // namespace

DocumentFormat parse_document_format(std::string_view name) {
  const auto n = to_lower_ascii(trim(name));
  if (n == "jsonl" || n == "ndjson") return DocumentFormat::jsonl;
  if (n == "csv") return DocumentFormat::csv;
  throw ArgumentError("unknown document format '" + std::string(name) + "' (expected jsonl or csv)");
}

DocumentFormat document_format_for(const std::filesystem::path& path) {
  return to_lower_ascii(path.extension().string()) == ".csv" ? DocumentFormat::csv : DocumentFormat::jsonl;
}

void validate(const Document& doc) {
  if (doc.id.empty()) throw ArgumentError("empty id");
  if (trim(doc.text).empty()) throw ArgumentError("empty text");
  for (auto [name, v] : {std::pair{"follower_count", doc.follower_count},
                         std::pair{"following_count", doc.following_count},
                         std::pair{"status_count", doc.status_count},
                         std::pair{"favorite_count", doc.favorite_count},
                         std::pair{"retweet_count", doc.retweet_count}}) {
    if (v < 0) throw ArgumentError(std::string(name) + " is negative");
  }
  if (doc.ideal_point && !std::isfinite(*doc.ideal_point)) throw ArgumentError("ideal_point is not finite");
}

Document document_from_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("record is not an object");
  Document doc;
  auto id = j.find("id");
  if (id == j.end() || id->is_null()) throw ArgumentError("missing id");
  doc.id = id_from_json(*id);
  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) throw ArgumentError("missing text");
  doc.text = text->get<std::string>();

  if (auto ip = j.find("ideal_point"); ip != j.end() && !ip->is_null()) {
    if (ip->is_number()) {
      doc.ideal_point = ip->get<double>();
    } else if (ip->is_string()) {
      if (!trim(ip->get<std::string>()).empty()) doc.ideal_point = parse_double(ip->get<std::string>());
    } else {
      throw ArgumentError("ideal_point must be a number");
    }
  }
  doc.verified = flag_from_json(j, "verified");
  doc.follower_count = count_from_json(j, "follower_count");
  doc.following_count = count_from_json(j, "following_count");
  doc.status_count = count_from_json(j, "status_count");
  doc.favorite_count = count_from_json(j, "favorite_count");
  doc.retweet_count = count_from_json(j, "retweet_count");

  auto created = j.find("created_at");
  if (created == j.end() || !created->is_string()) throw ArgumentError("missing created_at");
  auto ts = parse_timestamp(created->get<std::string>());
  if (!ts) throw ArgumentError("malformed created_at '" + created->get<std::string>() + "'");
  doc.created_at = *ts;

  doc.has_hashtag = flag_from_json(j, "has_hashtag");
  doc.has_mention = flag_from_json(j, "has_mention");
  doc.has_url = flag_from_json(j, "has_url");
  doc.is_quote = flag_from_json(j, "is_quote");
  doc.is_reply = flag_from_json(j, "is_reply");

  if (auto fr = j.find("frames"); fr != j.end() && !fr->is_null()) {
    if (!fr->is_array()) throw ArgumentError("frames must be a list");
    std::set<std::string> frames;
    for (const auto& f : *fr) {
      if (!f.is_string()) throw ArgumentError("frame names must be strings");
      frames.insert(to_lower_ascii(trim(f.get<std::string>())));
    }
    doc.frames = std::move(frames);
  }
  validate(doc);
  return doc;
}

json document_to_json(const Document& doc) {
  json j = json::object();
  j["id"] = doc.id;
  j["text"] = doc.text;
  j["ideal_point"] = doc.ideal_point ? json(*doc.ideal_point) : json(nullptr);
  j["verified"] = doc.verified;
  j["follower_count"] = doc.follower_count;
  j["following_count"] = doc.following_count;
  j["status_count"] = doc.status_count;
  j["favorite_count"] = doc.favorite_count;
  j["retweet_count"] = doc.retweet_count;
  j["created_at"] = format_timestamp(doc.created_at);
  j["has_hashtag"] = doc.has_hashtag;
  j["has_mention"] = doc.has_mention;
  j["has_url"] = doc.has_url;
  j["is_quote"] = doc.is_quote;
  j["is_reply"] = doc.is_reply;
  if (doc.frames) {
    j["frames"] = json(std::vector<std::string>(doc.frames->begin(), doc.frames->end()));
  } else {
    j["frames"] = nullptr;
  }
  return j;
}

LoadResult parse_documents_jsonl(std::string_view content) {
  LoadResult result;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    const auto line = trim(content.substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      if (end == content.size()) break;
      continue;
    }
    try {
      auto doc = document_from_json(json::parse(line));
      if (!seen.insert(doc.id).second) throw ArgumentError("duplicate id '" + doc.id + "'");
      result.documents.push_back(std::move(doc));
    } catch (const json::exception& e) {
      result.rejections.push_back({line_no, std::string("malformed JSON: ") + e.what()});
    } catch (const std::invalid_argument& e) {
      result.rejections.push_back({line_no, e.what()});
    }
    if (end == content.size()) break;
  }
  return result;
}

LoadResult parse_documents_csv(std::string_view content) {
  LoadResult result;
  std::istringstream in{std::string(content)};
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) return result;
  csv::Header header(fields);
  std::set<std::string> seen;
  while (true) {
    bool more = false;
    try {
      more = reader.next(fields);
    } catch (const FormatError& e) {
      result.rejections.push_back({reader.record_line(), e.what()});
      break;
    }
    if (!more) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    try {
      if (fields.size() != header.names().size()) {
        throw ArgumentError("expected " + std::to_string(header.names().size()) + " fields, got " +
                            std::to_string(fields.size()));
      }
      auto doc = document_from_json(csv_record_to_json(header, fields));
      if (!seen.insert(doc.id).second) throw ArgumentError("duplicate id '" + doc.id + "'");
      result.documents.push_back(std::move(doc));
    } catch (const std::invalid_argument& e) {
      result.rejections.push_back({reader.record_line(), e.what()});
    }
  }
  return result;
}

LoadResult load_documents(const std::filesystem::path& path, DocumentFormat format) {
  const auto content = read_file(path);
  return format == DocumentFormat::csv ? parse_documents_csv(content) : parse_documents_jsonl(content);
}

void save_documents_jsonl(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += document_to_json(d).dump();
    out += '\n';
  }
  write_file(path, out);
}

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (!index_.emplace(docs_[i].id, i).second) throw ArgumentError("duplicate document id '" + docs_[i].id + "'");
  }
}

const Document* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &docs_[it->second];
}

}  // namespace metaphor
