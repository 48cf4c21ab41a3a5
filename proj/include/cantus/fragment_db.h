#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cantus/features.h"
#include "cantus/melody_model.h"
#include "cantus/note.h"

namespace cantus {

// A one- or two-bar melody unit plus its four retrieval features. Note onsets
// are rebased so the first note starts at tick 0.
struct Fragment {
  int64_t id = 0;
  std::vector<Note> notes;
  int length = 0;  // note count
  StructureLabel structure = StructureLabel::kVerse;
  std::vector<ChordSymbol> chords;  // one per bar
  Tonality tonality;
  int bar_count = 1;

  bool operator==(const Fragment&) const = default;
};

// "G C" style text for chord-pattern matching.
std::string chordText(const std::vector<ChordSymbol>& chords);

enum class InsertResult { kInserted, kDuplicate, kMonotonous };

// Feature-indexed fragment store. Duplicate fragments (same tokenized notes,
// chords, mode, and structure) and monotonous fragments are rejected on
// insert. Immutable once built; queries are safe to run concurrently.
class FragmentDatabase {
 public:
  explicit FragmentDatabase(const TimeBase& tb = TimeBase{}, int min_unique_pitches = 3);

  InsertResult insert(Fragment fragment);

  // All fragments whose (length, mode, structure) key matches exactly and
  // whose chord text fully matches chord_pattern, in ascending id order.
  // Throws std::invalid_argument on an invalid pattern.
  std::vector<const Fragment*> query(int length, Mode mode, StructureLabel structure,
                                     const std::string& chord_pattern) const;

  const Fragment* find(int64_t id) const;
  size_t size() const { return records_.size(); }
  const std::vector<Fragment>& fragments() const { return records_; }
  const TimeBase& timeBase() const { return tb_; }
  const std::string& chordStringOf(size_t record_pos) const {
    return chord_strings_[record_pos];
  }

  // Largest note count among two-bar fragments (any fragment if none),
  // the longest lyric piece a single retrieval can serve.
  int maxFragmentNotes() const;

  // Newline-delimited text format with a version header; load(save(db)) is
  // an identity on records and query results.
  void save(const std::string& path) const;
  static FragmentDatabase load(const std::string& path);

 private:
  std::string dedupKey(const Fragment& fragment) const;
  void indexRecord(size_t record_pos);

  TimeBase tb_;
  int min_unique_pitches_ = 3;
  int64_t next_id_ = 0;
  std::vector<Fragment> records_;
  std::vector<std::string> chord_strings_;
  std::map<std::tuple<int, Mode, StructureLabel>, std::vector<size_t>> index_;
  std::set<std::string> dedup_;
};

struct BuildConfig {
  int model_top_k = 5;  // decoding width for fragment generation
  uint64_t seed = 0;
  int min_unique_pitches = 3;
};

struct BuildStats {
  size_t windows = 0;
  size_t generations = 0;
  size_t originality_removed = 0;
  size_t surviving_generations = 0;
  size_t pre_dedup_records = 0;
  size_t monotonous_removed = 0;
  size_t duplicates_removed = 0;
  size_t records = 0;
};

// Creation stage: slide a two-bar window (stride two bars) over each seed
// melody, generate the next two bars, drop generations identical to the
// ground truth, store each survivor as two one-bar fragments plus the
// two-bar fragment, and label structure against whole-population medians.
FragmentDatabase buildDatabase(const std::vector<std::vector<Note>>& seed_melodies,
                               const MelodyModel& model, const TimeBase& tb,
                               const BuildConfig& config, BuildStats* stats = nullptr);

}  // namespace cantus
