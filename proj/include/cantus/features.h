#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cantus/note.h"

namespace cantus {

enum class Mode { kMajor, kMinor };

std::string modeName(Mode mode);
Mode parseMode(const std::string& text);

// A triad restricted to the diatonic vocabulary shared by C major and
// A minor: C, Dm, Em, F, G, Am. Text form is the root name plus an "m"
// suffix for minor quality.
struct ChordSymbol {
  int root = 0;  // pitch class 0-11
  Mode quality = Mode::kMajor;

  std::string name() const;
  std::array<int, 3> chordTones() const;  // pitch classes of root, third, fifth
  auto operator<=>(const ChordSymbol&) const = default;
};

ChordSymbol parseChord(const std::string& text);

// The six diatonic triads, in fixed vocabulary order.
const std::vector<ChordSymbol>& chordVocabulary();
bool inChordVocabulary(const ChordSymbol& chord);
ChordSymbol tonicChord(Mode mode);

// Key after normalization: C major (root 0) or A minor (root 9).
struct Tonality {
  Mode mode = Mode::kMajor;
  int key_root = 0;

  static Tonality normalized(Mode mode) {
    return Tonality{mode, mode == Mode::kMajor ? 0 : 9};
  }
  auto operator<=>(const Tonality&) const = default;
};

enum class StructureLabel { kChorus, kVerse };

std::string structureName(StructureLabel label);

struct TonalityResult {
  Tonality tonality;
  int transposition = 0;  // semitones to add to reach C major / A minor
};

// Correlates the duration-weighted pitch-class histogram against the 24
// rotations of the Krumhansl-Kessler key profiles. Ties break toward major,
// then the lowest root. Throws on empty input.
TonalityResult inferTonality(const std::vector<Note>& notes);

// Shifts every pitch by `semitones`, then octave-corrects the whole melody
// if the shift ran outside the MIDI range.
std::vector<Note> transposeNotes(std::vector<Note> notes, int semitones);

// Viterbi over one chord per bar. Emission is the fraction of in-bar note
// duration on chord tones; each chord change costs change_penalty. Score ties
// resolve toward keeping the previous chord (bar 0: toward the tonic), then
// vocabulary order. Empty bars therefore inherit the previous chord.
std::vector<ChordSymbol> inferChords(const std::vector<std::vector<Note>>& bars,
                                     const Tonality& tonality,
                                     double change_penalty = 0.1);

// Population statistics used by the chorus/verse heuristic.
struct CorpusStats {
  double median_mean_pitch = 0.0;
  double median_note_density = 0.0;  // notes per bar
};

// Chorus iff mean pitch and notes-per-bar both exceed the corpus medians.
StructureLabel labelStructure(const std::vector<Note>& notes, int bar_count,
                              const CorpusStats& stats);

// True iff the fragment has >= 4 notes but fewer than min_unique distinct
// pitches. Shorter fragments are never judged monotonous.
bool isMonotonous(const std::vector<Note>& notes, int min_unique = 3);

}  // namespace cantus
