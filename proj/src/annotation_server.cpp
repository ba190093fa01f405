#include "colm/annotation_server.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "colm/harness.hpp"

namespace colm::harness {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Writes `data` to fd and flushes it to stable storage.
void write_all_sync(int fd, const std::string& data, const std::filesystem::path& path) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw HarnessError("write " + path.string() + ": " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) throw HarnessError("fsync " + path.string() + ": " + std::strerror(errno));
}

class Fd {
 public:
  Fd(const std::filesystem::path& path, int flags) : fd_(::open(path.c_str(), flags, 0644)) {
    if (fd_ < 0) throw HarnessError("open " + path.string() + ": " + std::strerror(errno));
  }
  ~Fd() { ::close(fd_); }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

std::string progress_json(std::size_t labeled, std::size_t total) {
  ordered_json j;
  j["labeled"] = labeled;
  j["total"] = total;
  return j.dump();
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

std::string error_json(const std::string& message, const std::string& field = {}) {
  ordered_json j;
  j["error"] = message;
  if (!field.empty()) j["field"] = field;
  return j.dump();
}

}  // namespace

AnnotationStore::AnnotationStore(const AnnotationConfig& config) : config_(config) {
  std::map<std::string, const corpus::DeerRecord*> deer;
  const auto records = corpus::load_deer(config_.deer_path);
  for (const auto& r : records) deer[r.id] = &r;

  for (const auto& rule : pipeline::load_generated_rules(config_.candidates_path)) {
    if (rule.prefiltered || index_.count(rule.rule_id)) continue;
    auto it = deer.find(rule.deer_id);
    if (it == deer.end()) {
      throw HarnessError("candidate " + rule.rule_id + " cites unknown record " + rule.deer_id);
    }
    const auto facts = corpus::make_fact_variant(*it->second, rule.variant,
                                                 fact_variant_seed(rule.deer_id, rule.seed));
    index_[rule.rule_id] = items_.size();
    items_.push_back({rule.rule_id, rule.deer_id, facts.texts, rule.text});
  }

  if (std::filesystem::exists(config_.output_path)) {
    for (auto& r : corpus::load_deerlet(config_.output_path)) {
      if (!labeled_.count(r.id)) order_.push_back(r.id);
      labeled_[r.id] = std::move(r);
    }
  }
}

std::vector<AnnotationItem> AnnotationStore::pending() const {
  std::lock_guard lock(mu_);
  std::vector<AnnotationItem> out;
  for (const auto& item : items_) {
    if (!labeled_.count(item.rule_id)) out.push_back(item);
  }
  return out;
}

std::size_t AnnotationStore::labeled_count() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& item : items_) n += labeled_.count(item.rule_id);
  return n;
}

std::size_t AnnotationStore::total() const { return items_.size(); }

LabelResult AnnotationStore::submit_json(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    return {400, "", "body is not valid JSON", false};
  }
  if (!j.is_object()) return {400, "", "body must be a JSON object", false};
  if (!j.contains("rule_id") || !j["rule_id"].is_string()) {
    return {422, "rule_id", "rule_id must be a string", false};
  }
  metrics::HumanLabels labels;
  const std::pair<const char*, int*> fields[] = {{"label_consistent", &labels.consistent},
                                                 {"label_reality", &labels.reality},
                                                 {"label_general", &labels.general},
                                                 {"label_nontrivial", &labels.nontrivial}};
  for (const auto& [name, slot] : fields) {
    if (!j.contains(name) || !j[name].is_number_integer()) {
      return {422, name, std::string(name) + " must be an integer", false};
    }
    const auto v = j[name].get<long long>();
    if (v < -1000 || v > 1000) return {422, name, std::string(name) + " is out of range", false};
    *slot = static_cast<int>(v);
  }
  return submit(j["rule_id"].get<std::string>(), labels);
}

LabelResult AnnotationStore::submit(const std::string& rule_id,
                                    const metrics::HumanLabels& labels) {
  if (auto field = labels.invalid_field(); !field.empty()) {
    return {422, field, field + " is out of range", false};
  }
  std::lock_guard lock(mu_);
  auto it = index_.find(rule_id);
  if (it == index_.end()) return {404, "rule_id", "unknown rule_id " + rule_id, false};
  const AnnotationItem& item = items_[it->second];

  corpus::DeerletRecord record;
  record.id = item.rule_id;
  record.deer_id = item.deer_id;
  record.facts = item.facts;
  record.rule_text = item.rule_text;
  record.labels = labels;
  record.split = config_.split;

  const bool replaced = labeled_.count(rule_id) > 0;
  labeled_[rule_id] = record;
  if (replaced) {
    std::cerr << "annotation: replacing labels for " << rule_id << "\n";
    rewrite_all();
  } else {
    order_.push_back(rule_id);
    append_line(corpus::to_json_line(record) + "\n");
  }
  return {200, "", replaced ? "replaced" : "appended", replaced};
}

void AnnotationStore::append_line(const std::string& line) {
  Fd fd(config_.output_path, O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC);
  write_all_sync(fd.get(), line, config_.output_path);
}

void AnnotationStore::rewrite_all() {
  std::string content;
  for (const auto& id : order_) content += corpus::to_json_line(labeled_.at(id)) + "\n";
  auto tmp = config_.output_path;
  tmp += ".tmp";
  {
    Fd fd(tmp, O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC);
    write_all_sync(fd.get(), content, tmp);
  }
  std::filesystem::rename(tmp, config_.output_path);
}

std::string AnnotationStore::export_jsonl() const {
  std::lock_guard lock(mu_);
  std::ifstream in(config_.output_path, std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string guidelines_json() {
  struct Aspect {
    const char* key;
    const char* question;
    std::vector<std::pair<int, const char*>> scores;
  };
  const Aspect aspects[] = {
      {"consistent",
       "Is the rule deductively consistent with the facts?",
       {{2, "Fully relevant to the facts and in agreement with them."},
        {1, "Adds information absent from the facts, but that information agrees with the facts "
            "and with a small amount of related commonsense knowledge."},
        {0, "Contradicts the facts, has nothing to do with them, or adds information that is "
            "plainly wrong."}}},
      {"reality",
       "Does the rule reflect reality?",
       {{2, "Holds in reality without exception."},
        {1, "Holds in reality most of the time."},
        {0, "Wrong, or right only now and then."}}},
      {"general",
       "Is the rule more general than the facts?",
       {{2, "Generalizes beyond the facts, or clearly attempts to."},
        {1, "A more general rule is hard to find even for a person, or the rule reuses a part of "
            "the facts that is already general."},
        {0, "A person could easily generalize further but the rule does not, or the rule is "
            "unrelated to the facts."}}},
      {"nontrivial",
       "Is the rule non-trivial?",
       {{1, "A complete rule whose conclusion says something its condition does not."},
        {0, "An incomplete sentence, or a conclusion that merely restates the condition."}}},
  };
  ordered_json j = ordered_json::array();
  for (const auto& a : aspects) {
    ordered_json aj;
    aj["key"] = a.key;
    aj["field"] = std::string("label_") + a.key;
    aj["question"] = a.question;
    aj["scale"] = a.scores.size() == 3 ? "3-point (true / partially true / false)"
                                       : "2-point (true / false)";
    ordered_json scores = ordered_json::array();
    for (const auto& [value, meaning] : a.scores) {
      ordered_json s;
      s["value"] = value;
      s["meaning"] = meaning;
      scores.push_back(s);
    }
    aj["scores"] = scores;
    j.push_back(aj);
  }
  ordered_json out;
  out["aspects"] = j;
  return out.dump();
}

AnnotationServer::AnnotationServer(const AnnotationConfig& config)
    : store_(config), server_(std::make_unique<httplib::Server>()) {
  install_routes();
  if (!config.static_dir.empty() && !server_->set_mount_point("/", config.static_dir.string())) {
    throw HarnessError("static directory not found: " + config.static_dir.string());
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::install_routes() {
  server_->Get("/api/items", [this](const httplib::Request&, httplib::Response& res) {
    ordered_json j;
    j["items"] = ordered_json::array();
    for (const auto& item : store_.pending()) {
      ordered_json ij;
      ij["rule_id"] = item.rule_id;
      ij["deer_id"] = item.deer_id;
      ij["facts"] = item.facts;
      ij["rule_text"] = item.rule_text;
      j["items"].push_back(ij);
    }
    j["progress"] = ordered_json::parse(progress_json(store_.labeled_count(), store_.total()));
    send_json(res, 200, j.dump());
  });

  server_->Post("/api/labels", [this](const httplib::Request& req, httplib::Response& res) {
    LabelResult r;
    try {
      r = store_.submit_json(req.body);
    } catch (const std::exception& e) {
      send_json(res, 500, error_json(e.what()));
      return;
    }
    if (r.status != 200) {
      send_json(res, r.status, error_json(r.message, r.field));
      return;
    }
    ordered_json j;
    j["status"] = r.message;
    j["progress"] = ordered_json::parse(progress_json(store_.labeled_count(), store_.total()));
    send_json(res, 200, j.dump());
  });

  server_->Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_header("Content-Disposition", "attachment; filename=\"deerlet.jsonl\"");
    res.set_content(store_.export_jsonl(), "application/x-ndjson");
  });

  server_->Get("/api/guidelines", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, guidelines_json());
  });
}

bool AnnotationServer::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

int AnnotationServer::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

bool AnnotationServer::listen_after_bind() { return server_->listen_after_bind(); }

void AnnotationServer::stop() {
  if (server_) server_->stop();
}

void AnnotationServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace colm::harness
