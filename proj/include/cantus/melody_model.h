#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cantus/note.h"

namespace cantus {

// Autoregressive melody model over NoteTokens: an order-n Markov chain with
// additive smoothing, back-off to shorter contexts, and an explicit
// unknown-token bucket so scoring never returns -inf. A trained model is
// immutable and safe for concurrent scoring and generation.
class MelodyModel {
 public:
  MelodyModel() = default;

  // Counts every context of length 0..order-1 at every position. Throws on an
  // empty corpus, order < 1, or alpha <= 0.
  static MelodyModel train(const std::vector<std::vector<NoteToken>>& corpus,
                           int order = 3, double alpha = 0.01);

  bool trained() const { return !vocab_.empty(); }
  int order() const { return order_; }
  double alpha() const { return alpha_; }
  size_t vocabularySize() const { return vocab_.size(); }
  const std::set<NoteToken>& vocabulary() const { return vocab_; }

  // P(next | context), smoothed over the vocabulary plus one unknown bucket.
  // Context longer than order-1 is truncated; unseen contexts back off to the
  // longest suffix with observations (at worst the empty context).
  double prob(const std::vector<NoteToken>& context, const NoteToken& next) const;
  double unknownProb(const std::vector<NoteToken>& context) const;

  // Sum of log P(token_i | preceding tokens); deterministic.
  double score(const std::vector<NoteToken>& tokens) const;

  // exp(-mean per-token log probability) over the held-out corpus.
  double perplexity(const std::vector<std::vector<NoteToken>>& heldout) const;

  // Samples from the renormalized top-k next-token distribution until the
  // accumulated rest+duration time fills exactly two bars; the final note
  // (and, if needed, its leading rest) is clipped at the boundary.
  std::vector<NoteToken> generateContinuation(const std::vector<NoteToken>& context,
                                              const TimeBase& tb, int top_k,
                                              uint64_t seed) const;

  // Line-oriented text dump; load(save(m)) reproduces identical scores.
  void save(const std::string& path) const;
  static MelodyModel load(const std::string& path);

  bool operator==(const MelodyModel&) const = default;

 private:
  struct Table {
    std::map<NoteToken, uint64_t> next;
    uint64_t total = 0;
    bool operator==(const Table&) const = default;
  };

  const Table* backoffTable(const std::vector<NoteToken>& context) const;
  void requireTrained(const char* op) const;

  int order_ = 3;
  double alpha_ = 0.01;
  std::map<std::vector<NoteToken>, Table> counts_;
  std::set<NoteToken> vocab_;
};

}  // namespace cantus
