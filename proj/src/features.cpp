#include "cantus/features.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cantus {

std::string modeName(Mode mode) { return mode == Mode::kMajor ? "major" : "minor"; }

Mode parseMode(const std::string& text) {
  if (text == "major") return Mode::kMajor;
  if (text == "minor") return Mode::kMinor;
  throw std::invalid_argument("parseMode: expected 'major' or 'minor', got '" + text + "'");
}

std::string ChordSymbol::name() const {
  static const char* kNames[12] = {"C",  "C#", "D",  "D#", "E",  "F",
                                   "F#", "G",  "G#", "A",  "A#", "B"};
  std::string text = kNames[((root % 12) + 12) % 12];
  if (quality == Mode::kMinor) text += "m";
  return text;
}

std::array<int, 3> ChordSymbol::chordTones() const {
  const int third = quality == Mode::kMajor ? 4 : 3;
  return {root % 12, (root + third) % 12, (root + 7) % 12};
}

ChordSymbol parseChord(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parseChord: empty chord");
  std::string body = text;
  Mode quality = Mode::kMajor;
  if (body.size() > 1 && body.back() == 'm') {
    quality = Mode::kMinor;
    body.pop_back();
  }
  // Reuse the pitch-name parser by appending a dummy octave.
  const int midi = pitchNameToMidi(body + "0");
  return ChordSymbol{midi % 12, quality};
}

const std::vector<ChordSymbol>& chordVocabulary() {
  static const std::vector<ChordSymbol> kVocab = {
      {0, Mode::kMajor},  // C
      {2, Mode::kMinor},  // Dm
      {4, Mode::kMinor},  // Em
      {5, Mode::kMajor},  // F
      {7, Mode::kMajor},  // G
      {9, Mode::kMinor},  // Am
  };
  return kVocab;
}

bool inChordVocabulary(const ChordSymbol& chord) {
  const auto& vocab = chordVocabulary();
  return std::find(vocab.begin(), vocab.end(), chord) != vocab.end();
}

ChordSymbol tonicChord(Mode mode) {
  return mode == Mode::kMajor ? ChordSymbol{0, Mode::kMajor} : ChordSymbol{9, Mode::kMinor};
}

std::string structureName(StructureLabel label) {
  return label == StructureLabel::kChorus ? "chorus" : "verse";
}

namespace {

// Krumhansl-Kessler probe-tone key profiles.
constexpr double kMajorProfile[12] = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                      2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr double kMinorProfile[12] = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                      2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

double correlation(const double (&x)[12], const double* profile, int root) {
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < 12; ++i) {
    mx += x[i];
    my += profile[i];
  }
  mx /= 12.0;
  my /= 12.0;
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double a = x[i] - mx;
    const double b = profile[((i - root) % 12 + 12) % 12] - my;
    num += a * b;
    dx += a * a;
    dy += b * b;
  }
  if (dx <= 0.0 || dy <= 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

// Smallest-magnitude transposition moving pitch class `from` onto `to`,
// in the range [-6, 5].
int minimalShift(int from, int to) {
  return ((to - from + 6) % 12 + 12) % 12 - 6;
}

}  // namespace

TonalityResult inferTonality(const std::vector<Note>& notes) {
  if (notes.empty()) throw std::invalid_argument("inferTonality: empty melody");

  double histogram[12] = {};
  for (const Note& n : notes) {
    histogram[((n.pitch % 12) + 12) % 12] += static_cast<double>(n.duration);
  }

  double best = -2.0;
  Mode best_mode = Mode::kMajor;
  int best_root = 0;
  for (int root = 0; root < 12; ++root) {
    const double r = correlation(histogram, kMajorProfile, root);
    if (r > best) {
      best = r;
      best_mode = Mode::kMajor;
      best_root = root;
    }
  }
  for (int root = 0; root < 12; ++root) {
    const double r = correlation(histogram, kMinorProfile, root);
    if (r > best) {
      best = r;
      best_mode = Mode::kMinor;
      best_root = root;
    }
  }

  const int target = best_mode == Mode::kMajor ? 0 : 9;
  return TonalityResult{Tonality{best_mode, best_root},
                        minimalShift(best_root, target)};
}

std::vector<Note> transposeNotes(std::vector<Note> notes, int semitones) {
  for (Note& n : notes) n.pitch += semitones;
  int low = 127, high = 0;
  for (const Note& n : notes) {
    low = std::min(low, n.pitch);
    high = std::max(high, n.pitch);
  }
  while (low < 0) {
    for (Note& n : notes) n.pitch += 12;
    low += 12;
    high += 12;
  }
  while (high > 127) {
    for (Note& n : notes) n.pitch -= 12;
    high -= 12;
  }
  return notes;
}

namespace {

double emissionScore(const std::vector<Note>& bar, const ChordSymbol& chord) {
  if (bar.empty()) return 0.0;
  const auto tones = chord.chordTones();
  double total = 0.0, on_chord = 0.0;
  for (const Note& n : bar) {
    total += static_cast<double>(n.duration);
    const int pc = ((n.pitch % 12) + 12) % 12;
    if (pc == tones[0] || pc == tones[1] || pc == tones[2]) {
      on_chord += static_cast<double>(n.duration);
    }
  }
  return total > 0.0 ? on_chord / total : 0.0;
}

// Deterministic preference rank for score ties: keep the previous chord
// (first bar: the tonic), then vocabulary order.
int prefRank(int prev_state, int state, int tonic_state) {
  const int anchor = prev_state < 0 ? tonic_state : prev_state;
  return state == anchor ? 0 : 1 + state;
}

}  // namespace

std::vector<ChordSymbol> inferChords(const std::vector<std::vector<Note>>& bars,
                                     const Tonality& tonality,
                                     double change_penalty) {
  if (bars.empty()) throw std::invalid_argument("inferChords: no bars");

  const auto& vocab = chordVocabulary();
  const int states = static_cast<int>(vocab.size());
  const ChordSymbol tonic = tonicChord(tonality.mode);
  int tonic_state = 0;
  for (int s = 0; s < states; ++s) {
    if (vocab[s] == tonic) tonic_state = s;
  }

  struct Cell {
    double score = 0.0;
    std::vector<int> prefs;  // tie-break key, lexicographically minimized
    int back = -1;
  };
  std::vector<std::vector<Cell>> dp(bars.size(), std::vector<Cell>(states));

  for (int s = 0; s < states; ++s) {
    dp[0][s].score = emissionScore(bars[0], vocab[s]);
    dp[0][s].prefs = {prefRank(-1, s, tonic_state)};
  }

  for (size_t t = 1; t < bars.size(); ++t) {
    for (int s = 0; s < states; ++s) {
      const double emit = emissionScore(bars[t], vocab[s]);
      bool have = false;
      for (int p = 0; p < states; ++p) {
        const double transition = (p == s) ? 0.0 : -change_penalty;
        const double score = dp[t - 1][p].score + transition + emit;
        std::vector<int> prefs = dp[t - 1][p].prefs;
        prefs.push_back(prefRank(p, s, tonic_state));
        Cell& cell = dp[t][s];
        if (!have || score > cell.score ||
            (score == cell.score && prefs < cell.prefs)) {
          cell.score = score;
          cell.prefs = std::move(prefs);
          cell.back = p;
          have = true;
        }
      }
    }
  }

  const auto& last = dp.back();
  int state = 0;
  for (int s = 1; s < states; ++s) {
    if (last[s].score > last[state].score ||
        (last[s].score == last[state].score && last[s].prefs < last[state].prefs)) {
      state = s;
    }
  }

  std::vector<ChordSymbol> path(bars.size());
  for (size_t t = bars.size(); t-- > 0;) {
    path[t] = vocab[state];
    state = dp[t][state].back;
  }
  return path;
}

StructureLabel labelStructure(const std::vector<Note>& notes, int bar_count,
                              const CorpusStats& stats) {
  if (notes.empty()) throw std::invalid_argument("labelStructure: empty fragment");
  if (bar_count < 1) throw std::invalid_argument("labelStructure: bar_count must be >= 1");

  double pitch_sum = 0.0;
  for (const Note& n : notes) pitch_sum += static_cast<double>(n.pitch);
  const double mean_pitch = pitch_sum / static_cast<double>(notes.size());
  const double density = static_cast<double>(notes.size()) / bar_count;

  const bool chorus = mean_pitch > stats.median_mean_pitch &&
                      density > stats.median_note_density;
  return chorus ? StructureLabel::kChorus : StructureLabel::kVerse;
}

bool isMonotonous(const std::vector<Note>& notes, int min_unique) {
  if (notes.size() < 4) return false;
  std::set<int> pitches;
  for (const Note& n : notes) pitches.insert(n.pitch);
  return static_cast<int>(pitches.size()) < min_unique;
}

}  // namespace cantus
