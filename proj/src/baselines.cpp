#include "colm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "colm/random.hpp"
#include "colm/text.hpp"
#include "colm/tokenize.hpp"

namespace colm::baselines {
namespace {

std::string strip_terminal(std::string s) {
  while (!s.empty()) {
    const char c = s.back();
    if (c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':' || c == ' ') {
      s.pop_back();
    } else {
      break;
    }
  }
  return text::trim(s);
}

std::map<std::string, double> weights(std::string_view text, const TfidfModel& model) {
  const auto terms = tfidf_terms(text);
  std::map<std::string, double> w;
  if (terms.empty()) return w;
  for (const auto& t : terms) w[t] += 1.0;
  const double length = static_cast<double>(terms.size());
  for (auto& [t, v] : w) v = v / length * model.idf_of(t);
  return w;
}

}  // namespace

std::vector<std::string> rf_pool(const corpus::FactInput& facts) {
  std::vector<std::string> pool;
  std::set<std::string> seen;
  const auto add = [&](std::string fragment) {
    fragment = strip_terminal(text::collapse_whitespace(fragment));
    if (fragment.empty() || !seen.insert(fragment).second) return;
    pool.push_back(std::move(fragment));
  };
  for (const auto& fact : facts.texts) {
    for (const auto& sentence : text::split_sentences(fact)) {
      add(sentence);
      for (const auto& clause : text::split_clauses(sentence)) add(clause);
    }
  }
  return pool;
}

std::string rf_generate(const corpus::FactInput& facts, const templates::RuleTemplate& tmpl,
                        std::uint64_t seed) {
  std::vector<std::string> pool = rf_pool(facts);
  if (pool.empty()) throw BaselineError("R+F: the facts yield no fragments");
  const auto slots = static_cast<std::size_t>(tmpl.slot_count);
  StableRng rng(seed);
  std::vector<std::string> chosen;
  if (pool.size() >= slots) {
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < slots; ++i) {
      const std::size_t j = i + rng.index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      chosen.push_back(pool[i]);
    }
  } else {
    for (std::size_t i = 0; i < slots; ++i) chosen.push_back(pool[rng.index(pool.size())]);
  }
  return templates::fill(tmpl, chosen);
}

double TfidfModel::unseen_idf() const {
  return std::log(1.0 + static_cast<double>(document_count)) + 1.0;
}

double TfidfModel::idf_of(const std::string& token) const {
  auto it = idf.find(token);
  return it == idf.end() ? unseen_idf() : it->second;
}

std::vector<std::string> tfidf_terms(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : metrics::tokenize(text)) {
    if (metrics::is_word_token(t)) out.push_back(std::move(t));
  }
  return out;
}

TfidfModel tfidf_fit(std::span<const std::string> corpus) {
  if (corpus.empty()) throw BaselineError("TF-IDF needs a non-empty corpus");
  TfidfModel model;
  model.document_count = corpus.size();
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    const auto terms = tfidf_terms(doc);
    for (const auto& t : std::set<std::string>(terms.begin(), terms.end())) ++df[t];
  }
  const double n = static_cast<double>(corpus.size());
  for (const auto& [t, count] : df) {
    model.vocabulary.emplace(t, model.vocabulary.size());
    model.idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
  }
  return model;
}

double tfidf_score(std::string_view fact_text, std::string_view rule_text,
                   const TfidfModel& model) {
  const auto a = weights(fact_text, model);
  const auto b = weights(rule_text, model);
  if (a.empty() || b.empty()) return 0.0;
  if (a == b) return 1.0;  // avoid rounding just below one
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, v] : a) {
    na += v * v;
    auto it = b.find(t);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [t, v] : b) nb += v * v;
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(cos, 0.0, 1.0);
}

std::vector<std::string> tfidf_training_corpus(std::span<const corpus::DeerletRecord> records) {
  std::vector<std::string> docs;
  for (const auto& r : records) {
    docs.insert(docs.end(), r.facts.begin(), r.facts.end());
    docs.push_back(r.rule_text);
  }
  return docs;
}

std::vector<bool> majority_classify(std::size_t n) { return std::vector<bool>(n, true); }

}  // namespace colm::baselines
