#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>
#include <unistd.h>

#include "metaphor/corpus.hpp"
#include "metaphor/timestamp.hpp"

namespace testing {

inline const std::filesystem::path kDataDir{METAPHOR_DATA_DIR};

using Script = std::map<std::string, std::vector<std::string>>;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("metaphor-test-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline metaphor::TimePoint at(const char* ts) { return *metaphor::parse_timestamp(ts); }

inline metaphor::Document make_doc(std::string id, std::string text, std::optional<double> ideal_point = 1.0) {
  metaphor::Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.ideal_point = ideal_point;
  d.created_at = at("2018-05-03T12:00:00Z");
  return d;
}

}  // namespace testing
