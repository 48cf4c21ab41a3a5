#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cantus/fragment_db.h"
#include "cantus/lyrics.h"
#include "cantus/melody_model.h"

namespace cantus {

// User-designated chord progression, cycled over the song.
struct ChordProgression {
  std::vector<ChordSymbol> chords;

  static ChordProgression parse(const std::string& text);  // "C G Am F"
  std::string text() const;
};

// Composition guidelines and retrieval knobs.
struct GuidelineConfig {
  int first_note_low = 55;   // G3; hard bound on the song's first note
  int first_note_high = 65;  // F4
  int max_leap = 8;          // semitones between fragments, exclusive
  // Scale-degree tendencies within the normalized key: B resolves to C,
  // F resolves to E. Applied as a re-rank bonus, not a hard filter.
  std::map<int, std::set<int>> tendency = {{11, {0}}, {5, {4}}};
  double tendency_bonus = 0.5;
  int top_k = 5;             // sample uniformly from this many top candidates
  double melisma_prob = 0.1; // chance a line gets extra notes
  int max_extra_notes = 2;

  bool operator==(const GuidelineConfig&) const = default;
};

struct ComposeOptions {
  GuidelineConfig guidelines;
  Language language = Language::kEnglish;
  std::optional<Mode> tonality_override;
  int structure_granularity = 2;  // g for lyric structure recognition
  uint64_t seed = 0;
};

// Everything the per-line pipeline threads through the song.
struct CompositionState {
  std::vector<Note> context_notes;        // all placed notes, in time order
  std::vector<NoteToken> context_tokens;  // running tokenization of the above
  std::optional<ChordSymbol> last_chord;
  std::vector<int> rest_samples;          // observed inter-bar endpoint rests, ticks
  std::mt19937_64 rng;
};

// Per-line outcome, kept for the report and post-hoc verification.
struct LineRecord {
  int line = 0;  // 1-based
  std::string text;
  int syllables = 0;
  int struct_index = 0;
  StructureLabel structure = StructureLabel::kVerse;
  int melisma_extras = 0;
  std::vector<int> notes_per_syllable;
  std::vector<int64_t> fragment_ids;
  std::vector<ChordSymbol> chords;
  std::string context_chord;  // chord context entering the line, "" at start
  std::vector<std::string> relaxations;
  int polish_depth = 0;
  bool polish_failed = false;
};

struct Song {
  std::vector<Note> notes;
  std::vector<std::pair<int, int>> line_spans;  // [begin, end) into notes
  std::vector<std::string> syllable_texts;      // per note; empty when unavailable
  Tonality tonality;
  std::vector<int> struct_array;
  std::vector<LineRecord> lines;
  TimeBase tb;
};

// Appendix-style alternation over the cyclic progression, starting at
// last_chord (position 0 without context): the most-varied branch first,
// intermediate chords with '+', the branch's final chord with '*', down to
// the stay-on-current branch. Throws when last_chord is not in progression.
std::string buildChordRegex(const ChordProgression& progression,
                            const std::optional<ChordSymbol>& last_chord);

// Hard guidelines: at song start the first pitch must lie within
// [first_note_low, first_note_high]; afterwards the candidate's first pitch
// must be less than max_leap semitones from the context's last pitch.
std::vector<const Fragment*> filterCandidates(const std::vector<const Fragment*>& candidates,
                                              const CompositionState& state,
                                              const GuidelineConfig& cfg,
                                              bool is_song_start);

// Scores each candidate with the melody model over (context tail ++ candidate
// tokens) plus the tendency bonus, then samples uniformly from the top
// min(top_k, n) using the state's rng. Throws on empty candidates.
const Fragment* rerank(const MelodyModel& model, CompositionState& state,
                       const std::vector<const Fragment*>& candidates,
                       const GuidelineConfig& cfg, const TimeBase& tb);

// Returns the onset for a new fragment: context end plus the running-mean
// rest, quantized to the sixteenth grid and clamped to half a bar. The
// realized rest joins rest_samples. Song start places at onset 0.
int concatenate(CompositionState& state, const TimeBase& tb);

// Full re-creation pipeline: lyric analysis, per-line retrieval with melody
// sharing, concatenation, and polish. Deterministic for a fixed seed.
Song composeSong(const std::string& lyrics_content, const ChordProgression& progression,
                 const FragmentDatabase& db, const MelodyModel& model,
                 const ComposeOptions& options,
                 const SentimentLexicon& lexicon = SentimentLexicon::defaults());

// Line-oriented companion report for a composed song.
std::string renderSongReport(const Song& song, const ChordProgression& progression,
                             uint64_t seed);

}  // namespace cantus
