#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "metaphor/timestamp.hpp"

namespace metaphor {

/// One social-media post plus its author and engagement metadata.
///
/// Optional fields are explicit absences: a post without an ideology estimate
/// has `ideal_point == nullopt`, never a sentinel value. `frames` is absent when
/// the export carries no frame predictions at all and an empty set when frame
/// predictions exist but none fired.
struct Document {
  std::string id;
  std::string text;
  std::optional<double> ideal_point;
  bool verified = false;
  std::int64_t follower_count = 0;
  std::int64_t following_count = 0;
  std::int64_t status_count = 0;
  std::int64_t favorite_count = 0;
  std::int64_t retweet_count = 0;
  TimePoint created_at{};
  bool has_hashtag = false;
  bool has_mention = false;
  bool has_url = false;
  bool is_quote = false;
  bool is_reply = false;
  std::optional<std::set<std::string>> frames;
};

enum class DocumentFormat { jsonl, csv };

DocumentFormat parse_document_format(std::string_view name);
// Picks the format from the file extension (.csv, otherwise jsonl).
DocumentFormat document_format_for(const std::filesystem::path& path);

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<Document> documents;
  std::vector<Rejection> rejections;
};

// Row-level problems are collected into `rejections`; only an unreadable file
// throws (IoError).
LoadResult load_documents(const std::filesystem::path& path, DocumentFormat format);
LoadResult parse_documents_jsonl(std::string_view content);
LoadResult parse_documents_csv(std::string_view content);

// Throws ArgumentError describing the first violated invariant.
Document document_from_json(const nlohmann::json& j);
nlohmann::json document_to_json(const Document& doc);
void validate(const Document& doc);

void save_documents_jsonl(const std::filesystem::path& path, const std::vector<Document>& docs);

// Immutable id -> document index over a loaded corpus.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  const std::vector<Document>& documents() const { return docs_; }
  const Document* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return docs_.size(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace metaphor
