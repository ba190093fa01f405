#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "colm/corpus.hpp"
#include "colm/pipeline.hpp"

namespace httplib {
class Server;
}

namespace colm::harness {

struct AnnotationConfig {
  std::filesystem::path deer_path;
  std::filesystem::path candidates_path;  // generated rules (JSONL)
  std::filesystem::path output_path;      // labeled DEERLET records (JSONL)
  std::filesystem::path static_dir;       // optional UI bundle
  corpus::DeerletSplit split = corpus::DeerletSplit::kTrain;
};

struct AnnotationItem {
  std::string rule_id;
  std::string deer_id;
  std::vector<std::string> facts;
  std::string rule_text;
};

// Outcome of submitting one set of labels.
struct LabelResult {
  int status = 200;   // 200 on success, 404 unknown rule, 422 invalid labels
  std::string field;  // offending field for 422
  std::string message;
  bool replaced = false;
};

// Label queue over a generated-rules file. Labels are written to the
// output file as DEERLET records: new labels are appended and fsynced, a
// repeated rule_id rewrites the file atomically with the new labels.
// Existing output is reloaded on construction, so progress survives
// restarts.
class AnnotationStore {
 public:
  explicit AnnotationStore(const AnnotationConfig& config);

  // Unlabeled items in candidate order.
  std::vector<AnnotationItem> pending() const;
  std::size_t labeled_count() const;
  std::size_t total() const;

  // Body: {"rule_id", "label_consistent", "label_reality", "label_general",
  // "label_nontrivial"}.
  LabelResult submit_json(const std::string& body);
  LabelResult submit(const std::string& rule_id, const metrics::HumanLabels& labels);

  // Exact bytes of the output file (empty when nothing was written).
  std::string export_jsonl() const;

 private:
  void append_line(const std::string& line);
  void rewrite_all();

  AnnotationConfig config_;
  std::vector<AnnotationItem> items_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, corpus::DeerletRecord> labeled_;
  std::vector<std::string> order_;  // labeled rule ids in file order
  mutable std::mutex mu_;
};

// The annotation rubric as JSON: one entry per aspect with its scale and
// the meaning of each score.
std::string guidelines_json();

// HTTP front end: GET /api/items, POST /api/labels, GET /api/export,
// GET /api/guidelines, and the UI bundle under "/".
class AnnotationServer {
 public:
  explicit AnnotationServer(const AnnotationConfig& config);
  ~AnnotationServer();

  // Binds and blocks until stop(). Returns false when binding fails.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port and returns it (or -1).
  int bind_any(const std::string& host);
  // Serves on a socket bound by bind_any; blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  AnnotationStore& store() { return store_; }

 private:
  void install_routes();

  AnnotationStore store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace colm::harness
