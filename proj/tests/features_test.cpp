// Tests for cantus/features.h -- tonality inference, Viterbi chords, the
// chorus/verse heuristic, and the monotony filter.

#include "cantus/features.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace cantus {
namespace {

constexpr TimeBase kTb{};

Note q(int pitch, int onset = 0, int duration = 480) {
  return Note{.pitch = pitch, .onset = onset, .duration = duration, .velocity = 80};
}

std::vector<Note> quarters(const std::vector<int>& pitches, int start = 0) {
  std::vector<Note> notes;
  int onset = start;
  for (const int p : pitches) {
    notes.push_back(q(p, onset));
    onset += 480;
  }
  return notes;
}

// ---------------------------------------------------------------------------
// Independent tonality oracle: literal histogram-profile correlation.
// ---------------------------------------------------------------------------

struct OracleKey {
  Mode mode;
  int root;
};

OracleKey tonalityOracle(const std::vector<Note>& notes) {
  const double major[12] = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                            2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
  const double minor[12] = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                            2.54, 4.75, 3.98, 2.69, 3.34, 3.17};
  double hist[12] = {};
  for (const Note& n : notes) hist[((n.pitch % 12) + 12) % 12] += n.duration;

  auto pearson = [&hist](const double* profile, int root) {
    double mx = 0, my = 0;
    for (int i = 0; i < 12; ++i) {
      mx += hist[i];
      my += profile[i];
    }
    mx /= 12;
    my /= 12;
    double num = 0, dx = 0, dy = 0;
    for (int i = 0; i < 12; ++i) {
      const double a = hist[i] - mx;
      const double b = profile[((i - root) % 12 + 12) % 12] - my;
      num += a * b;
      dx += a * a;
      dy += b * b;
    }
    return (dx <= 0 || dy <= 0) ? 0.0 : num / std::sqrt(dx * dy);
  };

  OracleKey best{Mode::kMajor, 0};
  double best_r = -2;
  for (int root = 0; root < 12; ++root) {
    if (pearson(major, root) > best_r) {
      best_r = pearson(major, root);
      best = {Mode::kMajor, root};
    }
  }
  for (int root = 0; root < 12; ++root) {
    if (pearson(minor, root) > best_r) {
      best_r = pearson(minor, root);
      best = {Mode::kMinor, root};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// inferTonality
// ---------------------------------------------------------------------------

std::vector<Note> cMajorScaleTonicDoubled() {
  std::vector<Note> notes = quarters({60, 62, 64, 65, 67, 69, 71});
  notes.insert(notes.begin(), q(60, -480));  // doubled tonic weight
  for (Note& n : notes) n.onset += 480;
  return notes;
}

TEST(InferTonalityTest, CanonicalMajorScale) {
  const auto result = inferTonality(cMajorScaleTonicDoubled());
  EXPECT_EQ(result.tonality.mode, Mode::kMajor);
  EXPECT_EQ(result.tonality.key_root, 0);
  EXPECT_EQ(result.transposition, 0);
}

TEST(InferTonalityTest, TransposedScale) {
  auto notes = cMajorScaleTonicDoubled();
  for (Note& n : notes) n.pitch += 2;
  const auto result = inferTonality(notes);
  EXPECT_EQ(result.tonality.mode, Mode::kMajor);
  EXPECT_EQ(result.tonality.key_root, 2);
  EXPECT_EQ(result.transposition, -2);
}

TEST(InferTonalityTest, HarmonicMinorArpeggioMatchesOracle) {
  // A harmonic-minor arpeggio figure: A C E G# around the octave.
  const auto notes = quarters({57, 60, 64, 68, 69, 64, 60, 57});
  const auto result = inferTonality(notes);
  const OracleKey oracle = tonalityOracle(notes);
  EXPECT_EQ(result.tonality.mode, oracle.mode);
  EXPECT_EQ(result.tonality.key_root, oracle.root);
  EXPECT_EQ(result.tonality.mode, Mode::kMinor);
  EXPECT_EQ(result.tonality.key_root, 9);
}

TEST(InferTonalityTest, EmptyInputIsAnError) {
  EXPECT_THROW(inferTonality({}), std::invalid_argument);
}

TEST(InferTonalityTest, TranspositionEquivariance) {
  std::mt19937_64 rng(31);
  const int scale[7] = {0, 2, 4, 5, 7, 9, 11};
  for (int trial = 0; trial < 100; ++trial) {
    // Tonally biased walk so key decisions are far from ties.
    std::vector<int> pitches{60, 60, 64, 67};
    int degree = 0;
    for (int i = 0; i < 12; ++i) {
      degree = (degree + static_cast<int>(rng() % 3)) % 7;
      pitches.push_back(60 + scale[degree]);
    }
    const auto base = quarters(pitches);
    const auto r0 = inferTonality(base);

    const int shift = 1 + static_cast<int>(rng() % 11);
    auto shifted = base;
    for (Note& n : shifted) n.pitch += shift;
    const auto r1 = inferTonality(shifted);

    EXPECT_EQ(r1.tonality.mode, r0.tonality.mode);
    EXPECT_EQ(r1.tonality.key_root, (r0.tonality.key_root + shift) % 12);
    EXPECT_EQ(((r1.transposition - (r0.transposition - shift)) % 12 + 12) % 12, 0);
  }
}

// ---------------------------------------------------------------------------
// inferChords + brute-force oracle with the same tie rules
// ---------------------------------------------------------------------------

double emissionOracle(const std::vector<Note>& bar, const ChordSymbol& chord) {
  if (bar.empty()) return 0.0;
  const auto tones = chord.chordTones();
  double total = 0, on = 0;
  for (const Note& n : bar) {
    total += n.duration;
    const int pc = ((n.pitch % 12) + 12) % 12;
    if (pc == tones[0] || pc == tones[1] || pc == tones[2]) on += n.duration;
  }
  return on / total;
}

std::vector<ChordSymbol> chordsBruteForce(const std::vector<std::vector<Note>>& bars,
                                          const Tonality& tonality, double penalty) {
  const auto& vocab = chordVocabulary();
  const int states = static_cast<int>(vocab.size());
  int tonic_state = 0;
  for (int s = 0; s < states; ++s) {
    if (vocab[s] == tonicChord(tonality.mode)) tonic_state = s;
  }
  auto pref = [&](int prev, int s) {
    const int anchor = prev < 0 ? tonic_state : prev;
    return s == anchor ? 0 : 1 + s;
  };

  std::vector<int> best_path, path(bars.size());
  double best_score = 0;
  std::vector<int> best_prefs;
  bool have = false;

  const size_t n = bars.size();
  std::vector<size_t> counter(n, 0);
  while (true) {
    for (size_t i = 0; i < n; ++i) path[i] = static_cast<int>(counter[i]);
    double score = emissionOracle(bars[0], vocab[path[0]]);
    std::vector<int> prefs{pref(-1, path[0])};
    for (size_t t = 1; t < n; ++t) {
      score = score + (path[t] == path[t - 1] ? 0.0 : -penalty);
      score = score + emissionOracle(bars[t], vocab[path[t]]);
      prefs.push_back(pref(path[t - 1], path[t]));
    }
    if (!have || score > best_score || (score == best_score && prefs < best_prefs)) {
      best_score = score;
      best_prefs = prefs;
      best_path = path;
      have = true;
    }
    size_t digit = 0;
    while (digit < n && ++counter[digit] == static_cast<size_t>(states)) {
      counter[digit] = 0;
      ++digit;
    }
    if (digit == n) break;
  }

  std::vector<ChordSymbol> out;
  for (const int s : best_path) out.push_back(vocab[static_cast<size_t>(s)]);
  return out;
}

TEST(InferChordsTest, PureTriadBar) {
  const auto chords = inferChords({quarters({60, 64, 67})}, Tonality::normalized(Mode::kMajor));
  ASSERT_EQ(chords.size(), 1u);
  EXPECT_EQ(chords[0].name(), "C");
}

TEST(InferChordsTest, MinorTriadSelfTransition) {
  const auto bar = quarters({57, 60, 64});
  const auto chords = inferChords({bar, bar}, Tonality::normalized(Mode::kMinor));
  ASSERT_EQ(chords.size(), 2u);
  EXPECT_EQ(chords[0].name(), "Am");
  EXPECT_EQ(chords[1].name(), "Am");
}

TEST(InferChordsTest, TransitionPenaltyBreaksEmissionTie) {
  // {C,E,G,A} is an emission tie between C and Am; after an Am bar the
  // change penalty keeps Am.
  const std::vector<std::vector<Note>> bars = {quarters({57, 60, 64}),
                                               quarters({60, 64, 67, 69})};
  const auto chords = inferChords(bars, Tonality::normalized(Mode::kMajor));
  ASSERT_EQ(chords.size(), 2u);
  EXPECT_EQ(chords[1].name(), "Am");
  EXPECT_EQ(chords, chordsBruteForce(bars, Tonality::normalized(Mode::kMajor), 0.1));
}

TEST(InferChordsTest, EmptyBarsInheritAndDefaultToTonic) {
  const auto major = Tonality::normalized(Mode::kMajor);
  const auto follow = inferChords({quarters({67, 71, 62}), {}}, major);
  ASSERT_EQ(follow.size(), 2u);
  EXPECT_EQ(follow[0].name(), "G");
  EXPECT_EQ(follow[1].name(), "G");

  const auto all_empty = inferChords({{}, {}}, major);
  EXPECT_EQ(all_empty[0].name(), "C");
  EXPECT_EQ(all_empty[1].name(), "C");

  const auto minor_empty = inferChords({{}}, Tonality::normalized(Mode::kMinor));
  EXPECT_EQ(minor_empty[0].name(), "Am");
}

TEST(InferChordsTest, MatchesBruteForceOnRandomBars) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    const size_t bar_count = 1 + rng() % 6;
    std::vector<std::vector<Note>> bars;
    for (size_t b = 0; b < bar_count; ++b) {
      std::vector<Note> bar;
      const int notes = static_cast<int>(rng() % 5);  // empty bars included
      int onset = static_cast<int>(b) * kTb.barTicks();
      for (int i = 0; i < notes; ++i) {
        bar.push_back(q(55 + static_cast<int>(rng() % 17), onset,
                        120 * (1 + static_cast<int>(rng() % 4))));
        onset += bar.back().duration;
      }
      bars.push_back(std::move(bar));
    }
    const auto tonality = Tonality::normalized(trial % 2 == 0 ? Mode::kMajor : Mode::kMinor);
    const auto fast = inferChords(bars, tonality);
    const auto slow = chordsBruteForce(bars, tonality, 0.1);
    ASSERT_EQ(fast.size(), bars.size());
    EXPECT_EQ(fast, slow) << "trial " << trial;
    for (const ChordSymbol& c : fast) EXPECT_TRUE(inChordVocabulary(c));
  }
}

// ---------------------------------------------------------------------------
// labelStructure
// ---------------------------------------------------------------------------

TEST(LabelStructureTest, AboveBothMediansIsChorus) {
  const CorpusStats stats{60.0, 4.0};
  EXPECT_EQ(labelStructure(quarters({70, 72, 74, 76, 77}), 1, stats),
            StructureLabel::kChorus);
}

TEST(LabelStructureTest, BelowBothMediansIsVerse) {
  const CorpusStats stats{60.0, 4.0};
  EXPECT_EQ(labelStructure(quarters({50, 52, 53}), 1, stats), StructureLabel::kVerse);
}

TEST(LabelStructureTest, AndSemantics) {
  const CorpusStats stats{60.0, 4.0};
  // Above the pitch median, below the density median.
  EXPECT_EQ(labelStructure(quarters({70, 72, 74}), 1, stats), StructureLabel::kVerse);
}

TEST(LabelStructureTest, StricterThresholdsOnlyDemoteToVerse) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> pitches(2 + rng() % 10);
    for (int& p : pitches) p = 40 + static_cast<int>(rng() % 50);
    const auto notes = quarters(pitches);
    const CorpusStats loose{40.0 + static_cast<double>(rng() % 40),
                            1.0 + static_cast<double>(rng() % 8)};
    const CorpusStats strict{loose.median_mean_pitch + 5.0,
                             loose.median_note_density + 2.0};
    if (labelStructure(notes, 1, strict) == StructureLabel::kChorus) {
      EXPECT_EQ(labelStructure(notes, 1, loose), StructureLabel::kChorus);
    }
  }
}

// ---------------------------------------------------------------------------
// isMonotonous
// ---------------------------------------------------------------------------

TEST(IsMonotonousTest, SinglePitchLongFragment) {
  EXPECT_TRUE(isMonotonous(quarters({60, 60, 60, 60, 60, 60, 60, 60})));
}

TEST(IsMonotonousTest, FourUniquePitches) {
  EXPECT_FALSE(isMonotonous(quarters({60, 62, 64, 65, 60, 62, 64, 65})));
}

TEST(IsMonotonousTest, TooShortToJudge) {
  EXPECT_FALSE(isMonotonous(quarters({60, 60})));
}

}  // namespace
}  // namespace cantus
