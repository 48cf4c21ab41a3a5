#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cantus/features.h"

namespace cantus {

enum class Language { kEnglish, kChinese, kNumeric };

std::string languageName(Language language);
Language parseLanguage(const std::string& text);

// Word -> polarity (+1 positive, -1 negative). Unknown words score 0.
struct SentimentLexicon {
  std::map<std::string, int> polarity;

  static SentimentLexicon defaults();
  static SentimentLexicon loadFile(const std::string& path);
};

struct LyricLine {
  std::string text;
  int syllables = 0;
  // 0 composes independently; otherwise the 1-based index of the earlier
  // line whose melody this line shares.
  int struct_index = 0;
  StructureLabel structure = StructureLabel::kVerse;
};

struct LyricSheet {
  std::vector<LyricLine> lines;
  std::vector<int> syllable_counts;  // S, one entry per line
  Tonality tonality;
  Language language = Language::kEnglish;
};

// English counts vowel groups per word (with a hiatus split after 'i' before
// a/o/u and the usual silent terminal 'e' rule, minimum one per word);
// Chinese counts CJK characters; numeric mode parses the line as an integer.
// The optional exceptions map overrides whole-word English counts.
int countSyllables(const std::string& line, Language language,
                   const std::map<std::string, int>& exceptions = {});

// Best-effort per-syllable text chunks for MIDI lyric events. May disagree
// with countSyllables when an exception entry fires; callers should check.
// Numeric mode yields no text.
std::vector<std::string> syllableTexts(const std::string& line, Language language);

// Override wins when present; otherwise the summed word polarity over all
// lines decides: >= 0 gives C major, < 0 gives A minor.
Tonality sentimentTonality(const std::vector<std::string>& lines,
                           const SentimentLexicon& lexicon, Language language,
                           std::optional<Mode> override = std::nullopt);

// A substring of S of length `length` occurring `count` times without
// overlap. Positions are 1-based; occurrence_positions lists every element's
// original position per occurrence (occurrences can span masked gaps).
struct RepeatFind {
  int length = 0;
  int count = 0;
  std::vector<int> positions;
  std::vector<std::vector<int>> occurrence_positions;
};

// Longest repeat (length > g, count > 1) of the unmasked subsequence of S,
// with contiguity evaluated after masked positions are removed. Ties on
// length break toward the earliest first occurrence; the occurrence set is
// the greedy left-to-right maximal one.
std::optional<RepeatFind> findLongestRepeat(const std::vector<int>& S,
                                            const std::vector<bool>& mask, int g);

struct StructureResult {
  std::vector<int> struct_array;   // per line; values are 1-based referents
  std::set<int> chorus_positions;  // 1-based line positions
};

// Iterates findLongestRepeat, pointing every later occurrence element-wise at
// the first occurrence and masking all matched positions. The first repeat
// found is taken as the chorus.
StructureResult recognizeStructure(const std::vector<int>& S, int g = 2);

// Parses UTF-8 lyric text (one lyric per line, blank lines ignored) and runs
// the full lyric feature extraction.
LyricSheet analyzeLyrics(const std::string& content, Language language,
                         const SentimentLexicon& lexicon,
                         std::optional<Mode> tonality_override = std::nullopt,
                         int g = 2,
                         const std::map<std::string, int>& syllable_exceptions = {});

}  // namespace cantus
