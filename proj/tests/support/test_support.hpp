#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "colm/backend.hpp"
#include "colm/corpus.hpp"

namespace colm::testing {

// Path inside the source tree.
std::filesystem::path source_path(const std::string& relative);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Backend driven by a callback; records every request it sees.
class FakeBackend : public backend::CompletionBackend {
 public:
  using Handler = std::function<backend::CompletionResponse(const backend::CompletionRequest&)>;

  explicit FakeBackend(Handler handler) : handler_(std::move(handler)) {}

  backend::CompletionResponse complete(const backend::CompletionRequest& request) const override;

  std::vector<backend::CompletionRequest> requests() const;

 private:
  Handler handler_;
  mutable std::mutex mu_;
  mutable std::vector<backend::CompletionRequest> requests_;
};

// A response whose first-token alternatives are {" yes": ln p, " no": ln(1-p)}.
backend::CompletionResponse yes_no_response(double p_yes);

// A sentence of exactly n whitespace-separated words and no punctuation.
std::string words(std::size_t n, const std::string& stem = "word");

std::vector<corpus::DeerRecord> fixture_deer();
std::vector<corpus::DeerletRecord> fixture_deerlet();

}  // namespace colm::testing
