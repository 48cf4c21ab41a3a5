#include "cantus/fragment_db.h"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace cantus {

std::string chordText(const std::vector<ChordSymbol>& chords) {
  std::string text;
  for (const ChordSymbol& c : chords) {
    if (!text.empty()) text += ' ';
    text += c.name();
  }
  return text;
}

FragmentDatabase::FragmentDatabase(const TimeBase& tb, int min_unique_pitches)
    : tb_(tb), min_unique_pitches_(min_unique_pitches) {}

std::string FragmentDatabase::dedupKey(const Fragment& fragment) const {
  std::ostringstream key;
  for (const NoteToken& t : tokenize(fragment.notes, tb_)) {
    key << t.pitch << ':' << t.duration_class << ':' << t.rest_class << ',';
  }
  key << '|' << chordText(fragment.chords) << '|' << modeName(fragment.tonality.mode)
      << '|' << structureName(fragment.structure);
  return key.str();
}

void FragmentDatabase::indexRecord(size_t record_pos) {
  const Fragment& f = records_[record_pos];
  chord_strings_.push_back(chordText(f.chords));
  index_[{f.length, f.tonality.mode, f.structure}].push_back(record_pos);
}

InsertResult FragmentDatabase::insert(Fragment fragment) {
  if (fragment.notes.empty()) {
    throw std::invalid_argument("FragmentDatabase::insert: empty fragment");
  }
  if (fragment.bar_count < 1 || fragment.bar_count > 2) {
    throw std::invalid_argument("FragmentDatabase::insert: bar_count must be 1 or 2");
  }
  if (static_cast<int>(fragment.chords.size()) != fragment.bar_count) {
    throw std::invalid_argument("FragmentDatabase::insert: one chord per bar required");
  }
  if (isMonotonous(fragment.notes, min_unique_pitches_)) return InsertResult::kMonotonous;

  std::string key = dedupKey(fragment);
  if (dedup_.count(key) > 0) return InsertResult::kDuplicate;

  fragment.id = next_id_++;
  fragment.length = static_cast<int>(fragment.notes.size());
  dedup_.insert(std::move(key));
  records_.push_back(std::move(fragment));
  indexRecord(records_.size() - 1);
  return InsertResult::kInserted;
}

std::vector<const Fragment*> FragmentDatabase::query(int length, Mode mode,
                                                     StructureLabel structure,
                                                     const std::string& chord_pattern) const {
  if (length < 1) throw std::invalid_argument("FragmentDatabase::query: length must be >= 1");

  std::regex pattern;
  try {
    pattern = std::regex(chord_pattern);
  } catch (const std::regex_error& e) {
    throw std::invalid_argument("FragmentDatabase::query: invalid chord pattern '" +
                                chord_pattern + "': " + e.what());
  }

  std::vector<const Fragment*> out;
  auto it = index_.find({length, mode, structure});
  if (it == index_.end()) return out;
  for (const size_t pos : it->second) {
    if (std::regex_match(chord_strings_[pos], pattern)) {
      out.push_back(&records_[pos]);
    }
  }
  return out;
}

const Fragment* FragmentDatabase::find(int64_t id) const {
  for (const Fragment& f : records_) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

int FragmentDatabase::maxFragmentNotes() const {
  int best = 0;
  int best_two_bar = 0;
  for (const Fragment& f : records_) {
    best = std::max(best, f.length);
    if (f.bar_count == 2) best_two_bar = std::max(best_two_bar, f.length);
  }
  return best_two_bar > 0 ? best_two_bar : best;
}

void FragmentDatabase::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("FragmentDatabase::save: cannot open " + path);

  out << "cantus-db 1 " << records_.size() << ' ' << tb_.ticks_per_quarter << ' '
      << tb_.beats_per_bar << ' ' << min_unique_pitches_ << '\n';
  for (const Fragment& f : records_) {
    out << f.id << '\t' << f.bar_count << '\t' << modeName(f.tonality.mode) << '\t'
        << structureName(f.structure) << '\t' << chordText(f.chords) << '\t';
    for (size_t i = 0; i < f.notes.size(); ++i) {
      if (i > 0) out << ',';
      out << f.notes[i].pitch << ':' << f.notes[i].onset << ':' << f.notes[i].duration;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("FragmentDatabase::save: write failed for " + path);
}

namespace {

std::vector<std::string> splitOn(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

[[noreturn]] void corrupt(size_t record, const std::string& why) {
  throw std::runtime_error("FragmentDatabase::load: corrupt record " +
                           std::to_string(record) + ": " + why);
}

}  // namespace

FragmentDatabase FragmentDatabase::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("FragmentDatabase::load: cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("FragmentDatabase::load: empty file " + path);
  }
  std::istringstream head(header);
  std::string magic;
  int version = 0;
  size_t declared = 0;
  TimeBase tb;
  int min_unique = 3;
  if (!(head >> magic >> version >> declared >> tb.ticks_per_quarter >>
        tb.beats_per_bar >> min_unique) ||
      magic != "cantus-db") {
    throw std::runtime_error("FragmentDatabase::load: not a database file: " + path);
  }
  if (version != 1) {
    throw std::runtime_error("FragmentDatabase::load: unsupported version " +
                             std::to_string(version));
  }

  FragmentDatabase db(tb, min_unique);
  std::string line;
  for (size_t record = 0; record < declared; ++record) {
    if (!std::getline(in, line)) corrupt(record, "file truncated");
    const auto fields = splitOn(line, '\t');
    if (fields.size() != 6) corrupt(record, "expected 6 tab-separated fields");

    Fragment f;
    try {
      f.id = std::stoll(fields[0]);
      f.bar_count = std::stoi(fields[1]);
      f.tonality = Tonality::normalized(parseMode(fields[2]));
      f.structure = fields[3] == "chorus" ? StructureLabel::kChorus
                  : fields[3] == "verse"  ? StructureLabel::kVerse
                                          : throw std::invalid_argument("bad structure");
      for (const std::string& name : splitOn(fields[4], ' ')) {
        f.chords.push_back(parseChord(name));
      }
      for (const std::string& triple : splitOn(fields[5], ',')) {
        Note n;
        if (std::sscanf(triple.c_str(), "%d:%d:%d", &n.pitch, &n.onset, &n.duration) != 3) {
          throw std::invalid_argument("bad note triple '" + triple + "'");
        }
        f.notes.push_back(n);
      }
    } catch (const std::exception& e) {
      corrupt(record, e.what());
    }
    if (f.notes.empty()) corrupt(record, "no notes");
    if (f.bar_count < 1 || f.bar_count > 2) corrupt(record, "bad bar count");
    if (static_cast<int>(f.chords.size()) != f.bar_count) corrupt(record, "chord count");
    for (const Note& n : f.notes) {
      if (n.pitch < 0 || n.pitch > 127 || n.onset < 0 || n.duration <= 0) {
        corrupt(record, "note out of range");
      }
    }
    f.length = static_cast<int>(f.notes.size());

    db.dedup_.insert(db.dedupKey(f));
    db.next_id_ = std::max(db.next_id_, f.id + 1);
    db.records_.push_back(std::move(f));
    db.indexRecord(db.records_.size() - 1);
  }
  return db;
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::vector<Note> shiftNotes(const std::vector<Note>& notes, int delta_ticks) {
  std::vector<Note> out = notes;
  for (Note& n : out) n.onset += delta_ticks;
  return out;
}

struct Candidate {
  std::vector<Note> notes;  // first note rebased to tick 0
  int bar_count = 1;
  std::vector<ChordSymbol> chords;
  Tonality tonality;
  double mean_pitch = 0.0;
  double density = 0.0;
};

double medianOf(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

FragmentDatabase buildDatabase(const std::vector<std::vector<Note>>& seed_melodies,
                               const MelodyModel& model, const TimeBase& tb,
                               const BuildConfig& config, BuildStats* stats) {
  if (!model.trained()) {
    throw std::invalid_argument("buildDatabase: model is untrained");
  }
  if (seed_melodies.empty()) {
    throw std::invalid_argument("buildDatabase: empty seed corpus");
  }

  BuildStats local;
  BuildStats& s = stats ? *stats : local;
  s = BuildStats{};

  const int bar_ticks = tb.barTicks();
  std::vector<Candidate> candidates;
  uint64_t window_counter = 0;

  for (const auto& melody : seed_melodies) {
    const auto bars = splitIntoBars(melody, tb);
    for (size_t i = 0; i + 3 < bars.size(); i += 2) {
      ++s.windows;
      std::vector<Note> context = bars[i];
      context.insert(context.end(), bars[i + 1].begin(), bars[i + 1].end());
      std::vector<Note> truth = bars[i + 2];
      truth.insert(truth.end(), bars[i + 3].begin(), bars[i + 3].end());
      if (context.empty() || truth.empty()) continue;

      context = shiftNotes(context, -static_cast<int>(i) * bar_ticks);
      truth = shiftNotes(truth, -static_cast<int>(i + 2) * bar_ticks);

      const uint64_t window_seed = splitmix64(config.seed ^ splitmix64(window_counter));
      ++window_counter;

      const auto generated = model.generateContinuation(tokenize(context, tb), tb,
                                                        config.model_top_k, window_seed);
      ++s.generations;
      if (generated == tokenize(truth, tb)) {
        ++s.originality_removed;
        continue;
      }
      ++s.surviving_generations;

      const auto notes = detokenize(generated, tb);
      const auto gen_bars = splitIntoBars(notes, tb);

      std::vector<std::pair<std::vector<Note>, int>> pieces;
      pieces.emplace_back(gen_bars[0], 1);
      if (gen_bars.size() > 1 && !gen_bars[1].empty()) {
        pieces.emplace_back(shiftNotes(gen_bars[1], -bar_ticks), 1);
      }
      pieces.emplace_back(notes, 2);

      for (auto& [piece_notes, bar_count] : pieces) {
        if (piece_notes.empty()) continue;
        Candidate c;
        c.bar_count = bar_count;
        const TonalityResult key = inferTonality(piece_notes);
        std::vector<Note> normalized = transposeNotes(piece_notes, key.transposition);
        c.tonality = Tonality::normalized(key.tonality.mode);
        auto piece_bars = splitIntoBars(normalized, tb);
        piece_bars.resize(static_cast<size_t>(bar_count));
        c.chords = inferChords(piece_bars, c.tonality);
        double pitch_sum = 0.0;
        for (const Note& n : normalized) pitch_sum += n.pitch;
        c.mean_pitch = pitch_sum / static_cast<double>(normalized.size());
        c.density = static_cast<double>(normalized.size()) / bar_count;
        c.notes = shiftNotes(normalized, -normalized.front().onset);
        candidates.push_back(std::move(c));
        ++s.pre_dedup_records;
      }
    }
  }

  // Structure labels need the whole generated population's medians.
  std::vector<double> pitches, densities;
  pitches.reserve(candidates.size());
  densities.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    pitches.push_back(c.mean_pitch);
    densities.push_back(c.density);
  }
  const CorpusStats corpus_stats{medianOf(std::move(pitches)),
                                 medianOf(std::move(densities))};

  FragmentDatabase db(tb, config.min_unique_pitches);
  for (Candidate& c : candidates) {
    Fragment f;
    f.notes = std::move(c.notes);
    f.length = static_cast<int>(f.notes.size());
    f.structure = labelStructure(f.notes, c.bar_count, corpus_stats);
    f.chords = std::move(c.chords);
    f.tonality = c.tonality;
    f.bar_count = c.bar_count;
    switch (db.insert(std::move(f))) {
      case InsertResult::kInserted: ++s.records; break;
      case InsertResult::kDuplicate: ++s.duplicates_removed; break;
      case InsertResult::kMonotonous: ++s.monotonous_removed; break;
    }
  }
  return db;
}

}  // namespace cantus
