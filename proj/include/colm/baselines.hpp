#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "colm/corpus.hpp"
#include "colm/error.hpp"
#include "colm/templates.hpp"

namespace colm::baselines {

class BaselineError : public Error {
 public:
  using Error::Error;
};

// Fragments R+F may place in a slot: every sentence of every fact and every
// comma clause of those sentences, with terminal punctuation removed.
// Duplicates are dropped; first occurrence order is kept.
std::vector<std::string> rf_pool(const corpus::FactInput& facts);

// Fills the template with fragments drawn uniformly from rf_pool, without
// replacement when the pool is large enough and with replacement otherwise.
// Throws BaselineError when the pool is empty.
std::string rf_generate(const corpus::FactInput& facts, const templates::RuleTemplate& tmpl,
                        std::uint64_t seed);

struct TfidfModel {
  std::map<std::string, std::size_t> vocabulary;
  std::map<std::string, double> idf;
  std::size_t document_count = 0;

  // Weight for a token never seen during fitting: ln(1 + N) + 1.
  double unseen_idf() const;
  double idf_of(const std::string& token) const;
};

// Terms are metrics::tokenize output without punctuation tokens.
std::vector<std::string> tfidf_terms(std::string_view text);

// idf(t) = ln((1 + N) / (1 + df(t))) + 1. Throws on an empty corpus.
TfidfModel tfidf_fit(std::span<const std::string> corpus);

// tf(t) = count / length, weighted by idf. Cosine of the two vectors; zero
// when either text has no terms.
double tfidf_score(std::string_view fact_text, std::string_view rule_text,
                   const TfidfModel& model);

// One document per fact and one per rule text, over the given records.
std::vector<std::string> tfidf_training_corpus(std::span<const corpus::DeerletRecord> records);

// Always predicts "yes".
std::vector<bool> majority_classify(std::size_t n);

}  // namespace colm::baselines
