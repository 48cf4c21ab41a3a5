#include "cantus/melody_model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cantus {

namespace {

// Portable uniform double in [0, 1) from a raw 64-bit draw.
double uniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string tokenText(const NoteToken& t) {
  return std::to_string(t.pitch) + ":" + std::to_string(t.duration_class) + ":" +
         std::to_string(t.rest_class);
}

NoteToken parseToken(const std::string& text) {
  NoteToken t;
  if (std::sscanf(text.c_str(), "%d:%d:%d", &t.pitch, &t.duration_class,
                  &t.rest_class) != 3) {
    throw std::runtime_error("melody model: bad token '" + text + "'");
  }
  return t;
}

}  // namespace

MelodyModel MelodyModel::train(const std::vector<std::vector<NoteToken>>& corpus,
                               int order, double alpha) {
  if (corpus.empty()) throw std::invalid_argument("MelodyModel::train: empty corpus");
  if (order < 1) throw std::invalid_argument("MelodyModel::train: order must be >= 1");
  if (alpha <= 0) throw std::invalid_argument("MelodyModel::train: alpha must be > 0");

  MelodyModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  for (const auto& seq : corpus) {
    for (size_t i = 0; i < seq.size(); ++i) {
      m.vocab_.insert(seq[i]);
      const int max_len = std::min<int>(order - 1, static_cast<int>(i));
      for (int len = 0; len <= max_len; ++len) {
        std::vector<NoteToken> ctx(seq.begin() + (i - len), seq.begin() + i);
        Table& table = m.counts_[ctx];
        ++table.next[seq[i]];
        ++table.total;
      }
    }
  }
  if (m.vocab_.empty()) {
    throw std::invalid_argument("MelodyModel::train: corpus has no tokens");
  }
  return m;
}

void MelodyModel::requireTrained(const char* op) const {
  if (!trained()) throw std::logic_error(std::string(op) + ": model is untrained");
}

const MelodyModel::Table* MelodyModel::backoffTable(
    const std::vector<NoteToken>& context) const {
  const size_t max_len =
      std::min(context.size(), static_cast<size_t>(order_ - 1));
  for (size_t len = max_len;; --len) {
    std::vector<NoteToken> ctx(context.end() - len, context.end());
    auto it = counts_.find(ctx);
    if (it != counts_.end()) return &it->second;
    if (len == 0) break;
  }
  return nullptr;  // unreachable on a trained model: the empty context exists
}

double MelodyModel::prob(const std::vector<NoteToken>& context,
                         const NoteToken& next) const {
  requireTrained("MelodyModel::prob");
  const Table* table = backoffTable(context);
  uint64_t count = 0;
  if (vocab_.count(next) > 0) {
    auto it = table->next.find(next);
    if (it != table->next.end()) count = it->second;
  }
  const double buckets = static_cast<double>(vocab_.size()) + 1.0;
  return (static_cast<double>(count) + alpha_) /
         (static_cast<double>(table->total) + alpha_ * buckets);
}

double MelodyModel::unknownProb(const std::vector<NoteToken>& context) const {
  requireTrained("MelodyModel::unknownProb");
  const Table* table = backoffTable(context);
  const double buckets = static_cast<double>(vocab_.size()) + 1.0;
  return alpha_ / (static_cast<double>(table->total) + alpha_ * buckets);
}

double MelodyModel::score(const std::vector<NoteToken>& tokens) const {
  requireTrained("MelodyModel::score");
  if (tokens.empty()) throw std::invalid_argument("MelodyModel::score: empty sequence");
  double total = 0.0;
  std::vector<NoteToken> context;
  context.reserve(tokens.size());
  for (const NoteToken& t : tokens) {
    total += std::log(prob(context, t));
    context.push_back(t);
  }
  return total;
}

double MelodyModel::perplexity(const std::vector<std::vector<NoteToken>>& heldout) const {
  requireTrained("MelodyModel::perplexity");
  double log_sum = 0.0;
  size_t token_count = 0;
  for (const auto& seq : heldout) {
    if (seq.empty()) continue;
    log_sum += score(seq);
    token_count += seq.size();
  }
  if (token_count == 0) {
    throw std::invalid_argument("MelodyModel::perplexity: empty held-out corpus");
  }
  return std::exp(-log_sum / static_cast<double>(token_count));
}

std::vector<NoteToken> MelodyModel::generateContinuation(
    const std::vector<NoteToken>& context, const TimeBase& tb, int top_k,
    uint64_t seed) const {
  requireTrained("MelodyModel::generateContinuation");
  if (context.empty()) {
    throw std::invalid_argument("generateContinuation: empty context");
  }
  if (top_k < 1) throw std::invalid_argument("generateContinuation: top_k must be >= 1");

  std::mt19937_64 rng(seed);
  const int target = 2 * tb.barTicks();
  const int sixteenth = tb.sixteenthTicks();

  std::vector<NoteToken> window = context;
  std::vector<NoteToken> out;
  std::vector<std::pair<double, NoteToken>> ranked;
  ranked.reserve(vocab_.size());

  int filled = 0;
  while (filled < target) {
    ranked.clear();
    for (const NoteToken& t : vocab_) {
      ranked.emplace_back(prob(window, t), t);
    }
    const size_t k = std::min(static_cast<size_t>(top_k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + k, ranked.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    double mass = 0.0;
    for (size_t i = 0; i < k; ++i) mass += ranked[i].first;
    const double u = uniformUnit(rng) * mass;
    double cum = 0.0;
    NoteToken chosen = ranked[k - 1].second;
    for (size_t i = 0; i < k; ++i) {
      cum += ranked[i].first;
      if (u < cum) {
        chosen = ranked[i].second;
        break;
      }
    }

    int rest = restClassTicks(chosen.rest_class, tb);
    int duration = durationClassTicks(chosen.duration_class, tb);
    const int remaining = target - filled;
    if (rest >= remaining) rest = std::max(0, remaining - sixteenth);
    if (rest + duration > remaining) duration = remaining - rest;

    NoteToken emitted{.pitch = chosen.pitch,
                      .duration_class = duration / sixteenth - 1,
                      .rest_class = rest / sixteenth};
    out.push_back(emitted);
    window.push_back(emitted);
    filled += rest + duration;
  }
  return out;
}

void MelodyModel::save(const std::string& path) const {
  requireTrained("MelodyModel::save");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("MelodyModel::save: cannot open " + path);

  size_t lines = 0;
  for (const auto& [ctx, table] : counts_) lines += table.next.size();

  char alpha_text[64];
  std::snprintf(alpha_text, sizeof alpha_text, "%a", alpha_);

  out << "cantus-lm 1\n";
  out << "order " << order_ << "\n";
  out << "alpha " << alpha_text << "\n";
  out << "ngrams " << lines << "\n";
  for (const auto& [ctx, table] : counts_) {
    for (const auto& [next, count] : table.next) {
      out << ctx.size();
      for (const NoteToken& t : ctx) out << ' ' << tokenText(t);
      out << ' ' << tokenText(next) << ' ' << count << '\n';
    }
  }
  if (!out) throw std::runtime_error("MelodyModel::save: write failed for " + path);
}

MelodyModel MelodyModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("MelodyModel::load: cannot open " + path);

  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "cantus-lm") {
    throw std::runtime_error("MelodyModel::load: not a model file: " + path);
  }
  if (version != 1) {
    throw std::runtime_error("MelodyModel::load: unsupported version " +
                             std::to_string(version));
  }

  MelodyModel m;
  std::string key;
  if (!(in >> key >> m.order_) || key != "order") {
    throw std::runtime_error("MelodyModel::load: missing order header");
  }
  std::string alpha_text;
  if (!(in >> key >> alpha_text) || key != "alpha") {
    throw std::runtime_error("MelodyModel::load: missing alpha header");
  }
  m.alpha_ = std::strtod(alpha_text.c_str(), nullptr);
  size_t lines = 0;
  if (!(in >> key >> lines) || key != "ngrams") {
    throw std::runtime_error("MelodyModel::load: missing ngrams header");
  }

  for (size_t i = 0; i < lines; ++i) {
    size_t ctx_len = 0;
    if (!(in >> ctx_len)) {
      throw std::runtime_error("MelodyModel::load: truncated at ngram " +
                               std::to_string(i));
    }
    std::vector<NoteToken> ctx;
    ctx.reserve(ctx_len);
    std::string text;
    for (size_t j = 0; j < ctx_len; ++j) {
      if (!(in >> text)) throw std::runtime_error("MelodyModel::load: truncated context");
      ctx.push_back(parseToken(text));
    }
    uint64_t count = 0;
    if (!(in >> text >> count)) {
      throw std::runtime_error("MelodyModel::load: truncated at ngram " +
                               std::to_string(i));
    }
    const NoteToken next = parseToken(text);
    Table& table = m.counts_[ctx];
    table.next[next] += count;
    table.total += count;
    if (ctx.empty()) m.vocab_.insert(next);
  }
  if (!m.trained()) throw std::runtime_error("MelodyModel::load: empty model");
  return m;
}

}  // namespace cantus
