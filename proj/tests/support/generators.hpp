#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "legoabsa/core.hpp"

namespace legoabsa::testkit {

// Pre-tokenized review vocabulary; "," and "." are tokens as in the corpus.
inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v = {
      "kamar",  "nya",     "bersih", "kotor", "pelayanan", "ramah",   "lift",   "tanpa",
      "ada",    "sarapan", "enak",   "wifi",  "kencang",   "lambat",  "kolam",  "renang",
      "air",    "panas",   "dingin", "ac",    "tidak",     "sangat",  "hotel",  "lokasi",
      "dekat",  "pantai",  ",",      ".",     "-",         "(",       ")",      "Pizza",
      "Waiter", "cemberut", "terus", "areanya", "parkir",  "sempit",  "meja",   "teko"};
  return v;
}

inline const std::vector<std::string>& categories() {
  static const std::vector<std::string> v = {"ROOM#CLEANLINESS", "SERVICE#GENERAL", "FOOD#QUALITY",
                                             "FACILITY#WIFI", "LOCATION"};
  return v;
}

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  std::vector<std::string> tokens(std::size_t min_len, std::size_t max_len) {
    std::size_t n = min_len + below(max_len - min_len + 1);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(vocabulary()[below(vocabulary().size())]);
    return out;
  }

  static std::string join(const std::vector<std::string>& toks, std::size_t b, std::size_t e) {
    std::string s;
    for (std::size_t i = b; i < e; ++i) {
      if (i > b) s += " ";
      s += toks[i];
    }
    return s;
  }

  std::string span_of(const std::vector<std::string>& toks) {
    std::size_t len = 1 + below(std::min<std::size_t>(3, toks.size()));
    std::size_t start = below(toks.size() - len + 1);
    return join(toks, start, start + len);
  }

  SentimentTuple tuple_for(const TaskSignature& sig, const std::vector<std::string>& toks) {
    SentimentTuple t;
    for (auto k : sig.kinds()) {
      switch (k) {
        case ElementKind::aspect:
          t.aspect = chance(0.15) ? std::string(kNullAspect) : span_of(toks);
          break;
        case ElementKind::opinion: t.opinion = span_of(toks); break;
        case ElementKind::category: t.category = categories()[below(categories().size())]; break;
        case ElementKind::polarity: t.polarity = static_cast<Polarity>(below(3)); break;
      }
    }
    return t;
  }

  std::vector<SentimentTuple> tuples_for(const TaskSignature& sig, const std::vector<std::string>& toks,
                                         std::size_t max_count) {
    std::vector<SentimentTuple> out;
    std::size_t n = below(max_count + 1);
    for (std::size_t i = 0; i < n; ++i) out.push_back(tuple_for(sig, toks));
    return out;
  }

  const TaskSignature& signature() { return task_registry()[below(task_registry().size())]; }

  // Bytes biased towards the structural characters of the three answer grammars.
  std::string fuzz_bytes(std::size_t max_len) {
    static const std::string structural = "(),;<>_ -0123456789extraidnoePOSNULpositive\t\n";
    std::size_t n = below(max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (chance(0.7)) {
        s += structural[below(structural.size())];
      } else {
        s += static_cast<char>(below(256));
      }
    }
    return s;
  }

  // Splices random edits into a well-formed answer.
  std::string mutate(std::string s) {
    std::size_t edits = 1 + below(4);
    for (std::size_t i = 0; i < edits; ++i) {
      std::size_t pos = s.empty() ? 0 : below(s.size() + 1);
      switch (below(3)) {
        case 0: s.insert(pos, fuzz_bytes(6)); break;
        case 1:
          if (!s.empty()) s.erase(std::min(pos, s.size() - 1), 1 + below(5));
          break;
        default:
          if (!s.empty()) s[std::min(pos, s.size() - 1)] = static_cast<char>(below(256));
      }
    }
    return s;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace legoabsa::testkit
