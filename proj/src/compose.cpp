#include "cantus/compose.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace cantus {

ChordProgression ChordProgression::parse(const std::string& text) {
  ChordProgression p;
  std::istringstream in(text);
  std::string name;
  while (in >> name) p.chords.push_back(parseChord(name));
  if (p.chords.empty()) {
    throw std::invalid_argument("ChordProgression::parse: no chords in '" + text + "'");
  }
  return p;
}

std::string ChordProgression::text() const { return chordText(chords); }

std::string buildChordRegex(const ChordProgression& progression,
                            const std::optional<ChordSymbol>& last_chord) {
  if (progression.chords.empty()) {
    throw std::invalid_argument("buildChordRegex: empty progression");
  }
  const auto& chords = progression.chords;
  const int m = static_cast<int>(chords.size());

  int start = 0;
  if (last_chord.has_value()) {
    const auto it = std::find(chords.begin(), chords.end(), *last_chord);
    if (it == chords.end()) {
      throw std::invalid_argument("buildChordRegex: last chord " + last_chord->name() +
                                  " is not in the progression");
    }
    start = static_cast<int>(it - chords.begin());
  }

  std::string pattern;
  for (int extra = m - 1; extra >= 0; --extra) {
    if (!pattern.empty()) pattern += '|';
    const std::string head = chords[start].name();
    pattern += "^" + head + "( " + head + ")*";
    for (int i = 1; i <= extra; ++i) {
      const std::string name = chords[(start + i) % m].name();
      pattern += "( " + name + ")" + (i == extra ? "*" : "+");
    }
    pattern += "$";
  }
  return pattern;
}

std::vector<const Fragment*> filterCandidates(const std::vector<const Fragment*>& candidates,
                                              const CompositionState& state,
                                              const GuidelineConfig& cfg,
                                              bool is_song_start) {
  std::vector<const Fragment*> kept;
  kept.reserve(candidates.size());
  for (const Fragment* f : candidates) {
    if (f->notes.empty()) continue;
    const int first_pitch = f->notes.front().pitch;
    if (is_song_start) {
      if (first_pitch >= cfg.first_note_low && first_pitch <= cfg.first_note_high) {
        kept.push_back(f);
      }
    } else {
      const int last_pitch = state.context_notes.back().pitch;
      if (std::abs(first_pitch - last_pitch) < cfg.max_leap) kept.push_back(f);
    }
  }
  return kept;
}

namespace {

int pitchClass(int pitch) { return ((pitch % 12) + 12) % 12; }

double candidateScore(const MelodyModel& model, const std::vector<NoteToken>& context_tokens,
                      std::optional<int> context_last_pitch, const Fragment& f,
                      const GuidelineConfig& cfg, const TimeBase& tb) {
  const size_t tail_len = std::min(context_tokens.size(),
                                   static_cast<size_t>(model.order() - 1));
  std::vector<NoteToken> seq(context_tokens.end() - tail_len, context_tokens.end());
  const auto cand_tokens = tokenize(f.notes, tb);
  seq.insert(seq.end(), cand_tokens.begin(), cand_tokens.end());
  double score = model.score(seq);

  if (context_last_pitch.has_value() && !f.notes.empty()) {
    const auto it = cfg.tendency.find(pitchClass(*context_last_pitch));
    if (it != cfg.tendency.end() &&
        it->second.count(pitchClass(f.notes.front().pitch)) > 0) {
      score += cfg.tendency_bonus;
    }
  }
  return score;
}

const Fragment* sampleTopK(const std::vector<const Fragment*>& candidates,
                           const std::vector<double>& scores, int top_k,
                           std::mt19937_64& rng) {
  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a]->id < candidates[b]->id;
  });
  const size_t k = std::min(static_cast<size_t>(top_k), order.size());
  return candidates[order[rng() % k]];
}

}  // namespace

const Fragment* rerank(const MelodyModel& model, CompositionState& state,
                       const std::vector<const Fragment*>& candidates,
                       const GuidelineConfig& cfg, const TimeBase& tb) {
  if (candidates.empty()) throw std::invalid_argument("rerank: no candidates");

  std::optional<int> last_pitch;
  if (!state.context_notes.empty()) last_pitch = state.context_notes.back().pitch;

  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const Fragment* f : candidates) {
    scores.push_back(candidateScore(model, state.context_tokens, last_pitch, *f, cfg, tb));
  }
  return sampleTopK(candidates, scores, cfg.top_k, state.rng);
}

int concatenate(CompositionState& state, const TimeBase& tb) {
  if (state.context_notes.empty()) return 0;

  double threshold = 0.0;
  if (!state.rest_samples.empty()) {
    threshold = std::accumulate(state.rest_samples.begin(), state.rest_samples.end(), 0.0) /
                static_cast<double>(state.rest_samples.size());
  }
  const int sixteenth = tb.sixteenthTicks();
  int rest = static_cast<int>(std::llround(threshold / sixteenth)) * sixteenth;
  rest = std::clamp(rest, 0, tb.barTicks() / 2);

  state.rest_samples.push_back(rest);
  return state.context_notes.back().end() + rest;
}

namespace {

void addRelaxation(LineRecord& rec, const std::string& tag) {
  if (std::find(rec.relaxations.begin(), rec.relaxations.end(), tag) ==
      rec.relaxations.end()) {
    rec.relaxations.push_back(tag);
  }
}

class Composer {
 public:
  Composer(const FragmentDatabase& db, const MelodyModel& model,
           const ChordProgression& progression, const ComposeOptions& options,
           LyricSheet sheet)
      : db_(db),
        model_(model),
        progression_(progression),
        cfg_(options.guidelines),
        options_(options),
        sheet_(std::move(sheet)),
        tb_(db.timeBase()) {
    state_.rng.seed(options.seed);
    max_fragment_notes_ = db_.maxFragmentNotes();
  }

  Song run() {
    if (db_.size() == 0) throw std::invalid_argument("composeSong: empty fragment database");
    for (const ChordSymbol& c : progression_.chords) {
      if (!inChordVocabulary(c)) {
        throw std::invalid_argument("composeSong: chord " + c.name() +
                                    " is outside the diatonic vocabulary");
      }
    }

    // The tonic-ending constraint lands on the line that supplies the final
    // melody: the last line itself, or the earlier line it shares from.
    const int last = static_cast<int>(sheet_.lines.size()) - 1;
    tonic_line_ = sheet_.lines[static_cast<size_t>(last)].struct_index > 0
                      ? sheet_.lines[static_cast<size_t>(last)].struct_index - 1
                      : last;

    for (size_t i = 0; i < sheet_.lines.size(); ++i) composeLine(i);
    polish();
    return assemble();
  }

 private:
  bool inProgression(const ChordSymbol& chord) const {
    return std::find(progression_.chords.begin(), progression_.chords.end(), chord) !=
           progression_.chords.end();
  }

  std::string tonicPattern() const {
    const std::string name = tonicChord(sheet_.tonality.mode).name();
    return "^" + name + "( " + name + ")*$";
  }

  double rngUnit() { return static_cast<double>(state_.rng() >> 11) * 0x1.0p-53; }

  // Appends relative notes (first onset 0) at the concatenation point and
  // updates the melody context, tokens, and observed bar-boundary rests.
  void placeNotes(const std::vector<Note>& relative) {
    const int onset = concatenate(state_, tb_);
    const size_t first = state_.context_notes.size();
    int prev_end = first == 0 ? 0 : state_.context_notes.back().end();

    for (const Note& r : relative) {
      Note n = r;
      n.onset += onset;
      state_.context_tokens.push_back(NoteToken{
          .pitch = n.pitch,
          .duration_class = quantizeDurationClass(n.duration, tb_),
          .rest_class = quantizeRestClass(n.onset - prev_end, tb_),
      });
      prev_end = n.end();
      state_.context_notes.push_back(n);
    }

    // Endpoint rests across adjacent bar boundaries inside this placement.
    const int bar = tb_.barTicks();
    for (size_t i = first + 1; i < state_.context_notes.size(); ++i) {
      const Note& a = state_.context_notes[i - 1];
      const Note& b = state_.context_notes[i];
      if (b.onset / bar == (a.end() - 1) / bar + 1) {
        state_.rest_samples.push_back(b.onset - a.end());
      }
    }
  }

  const Fragment* selectFragment(int count, StructureLabel structure, bool song_start,
                                 bool end_tonic, LineRecord& rec) {
    std::optional<ChordSymbol> anchor = state_.last_chord;
    bool restarted = false;
    if (anchor.has_value() && !inProgression(*anchor)) {
      anchor.reset();
      restarted = true;
    }

    struct Rung {
      std::string pattern;
      bool any_structure = false;
      const char* tag = nullptr;
    };
    const std::vector<Rung> rungs = {
        {buildChordRegex(progression_, anchor), false, nullptr},
        {tonicPattern(), false, "tonic-pattern"},
        {tonicPattern(), true, "any-structure"},
    };

    for (const Rung& rung : rungs) {
      std::vector<const Fragment*> candidates =
          db_.query(count, sheet_.tonality.mode, structure, rung.pattern);
      if (rung.any_structure) {
        const StructureLabel other = structure == StructureLabel::kChorus
                                         ? StructureLabel::kVerse
                                         : StructureLabel::kChorus;
        const auto more = db_.query(count, sheet_.tonality.mode, other, rung.pattern);
        candidates.insert(candidates.end(), more.begin(), more.end());
        std::sort(candidates.begin(), candidates.end(),
                  [](const Fragment* a, const Fragment* b) { return a->id < b->id; });
      }
      if (end_tonic) {
        const ChordSymbol tonic = tonicChord(sheet_.tonality.mode);
        std::erase_if(candidates, [&](const Fragment* f) {
          return f->chords.empty() || !(f->chords.back() == tonic);
        });
      }
      candidates = filterCandidates(candidates, state_, cfg_, song_start);
      if (candidates.empty()) continue;

      if (rung.tag != nullptr) addRelaxation(rec, rung.tag);
      if (restarted) addRelaxation(rec, "cycle-restart");
      return rerank(model_, state_, candidates, cfg_, tb_);
    }
    return nullptr;
  }

  void composeSpan(int count, StructureLabel structure, bool end_tonic, LineRecord& rec) {
    if (count > max_fragment_notes_ && max_fragment_notes_ > 0) {
      splitSpan(count, (count + max_fragment_notes_ - 1) / max_fragment_notes_,
                structure, end_tonic, rec);
      return;
    }

    const bool song_start = state_.context_notes.empty();
    const Fragment* chosen = selectFragment(count, structure, song_start, end_tonic, rec);
    if (chosen == nullptr) {
      if (count <= 1) {
        throw std::runtime_error(
            "composeSong: retrieval exhausted for line " + std::to_string(rec.line) +
            " ('" + rec.text + "'), key (length=" + std::to_string(count) + ", " +
            modeName(sheet_.tonality.mode) + ", " + structureName(structure) + ")");
      }
      splitSpan(count, 2, structure, end_tonic, rec);
      return;
    }

    placeNotes(chosen->notes);
    rec.fragment_ids.push_back(chosen->id);
    rec.chords.insert(rec.chords.end(), chosen->chords.begin(), chosen->chords.end());
    state_.last_chord = chosen->chords.back();
  }

  void splitSpan(int count, int pieces, StructureLabel structure, bool end_tonic,
                 LineRecord& rec) {
    addRelaxation(rec, "split");
    const int base = count / pieces;
    const int extra = count % pieces;
    for (int p = 0; p < pieces; ++p) {
      const int size = base + (p < extra ? 1 : 0);
      composeSpan(size, structure, end_tonic && p == pieces - 1, rec);
    }
  }

  void composeLine(size_t idx) {
    const LyricLine& line = sheet_.lines[idx];
    LineRecord rec;
    rec.line = static_cast<int>(idx) + 1;
    rec.text = line.text;
    rec.syllables = line.syllables;
    rec.struct_index = line.struct_index;
    rec.structure = line.structure;
    rec.context_chord = state_.last_chord.has_value() ? state_.last_chord->name() : "";

    const size_t line_begin = state_.context_notes.size();

    if (line.struct_index > 0) {
      const auto& ref_rec = lines_[static_cast<size_t>(line.struct_index) - 1];
      const auto [ref_begin, ref_end] = spans_[static_cast<size_t>(line.struct_index) - 1];

      std::vector<Note> copy(state_.context_notes.begin() + ref_begin,
                             state_.context_notes.begin() + ref_end);
      const int base = copy.empty() ? 0 : copy.front().onset;
      for (Note& n : copy) n.onset -= base;

      // Chord context entering the copy may not match the copied chords;
      // record the mismatch rather than altering the shared melody.
      std::optional<ChordSymbol> anchor = state_.last_chord;
      if (anchor.has_value() && !inProgression(*anchor)) anchor.reset();
      const std::regex context_pattern(buildChordRegex(progression_, anchor));
      if (!std::regex_match(chordText(ref_rec.chords), context_pattern)) {
        addRelaxation(rec, "copied-chords-mismatch");
      }

      placeNotes(copy);
      rec.fragment_ids = ref_rec.fragment_ids;
      rec.chords = ref_rec.chords;
      rec.melisma_extras = ref_rec.melisma_extras;
      rec.notes_per_syllable = ref_rec.notes_per_syllable;
      if (!rec.chords.empty()) state_.last_chord = rec.chords.back();
    } else {
      int extras = 0;
      rec.notes_per_syllable.assign(static_cast<size_t>(line.syllables), 1);
      if (cfg_.max_extra_notes > 0 && cfg_.melisma_prob > 0 &&
          rngUnit() < cfg_.melisma_prob) {
        extras = 1 + static_cast<int>(state_.rng() % static_cast<uint64_t>(cfg_.max_extra_notes));
        extras = std::min(extras, line.syllables);
        // Pick `extras` distinct syllables to carry two notes each.
        std::vector<int> order(static_cast<size_t>(line.syllables));
        std::iota(order.begin(), order.end(), 0);
        for (int j = 0; j < extras; ++j) {
          const size_t pick = static_cast<size_t>(j) +
              state_.rng() % static_cast<uint64_t>(line.syllables - j);
          std::swap(order[static_cast<size_t>(j)], order[pick]);
          rec.notes_per_syllable[static_cast<size_t>(order[static_cast<size_t>(j)])] = 2;
        }
      }
      rec.melisma_extras = extras;
      composeSpan(line.syllables + extras, line.structure,
                  static_cast<int>(idx) == tonic_line_, rec);
    }

    spans_.emplace_back(static_cast<int>(line_begin),
                        static_cast<int>(state_.context_notes.size()));
    lines_.push_back(std::move(rec));
  }

  bool lineNotesIdentical(int b1, int e1, int b2, int e2) const {
    if (e1 - b1 != e2 - b2 || e1 == b1) return false;
    const auto& notes = state_.context_notes;
    for (int j = 0; j < e1 - b1; ++j) {
      const Note& a = notes[static_cast<size_t>(b1 + j)];
      const Note& b = notes[static_cast<size_t>(b2 + j)];
      if (a.pitch != b.pitch || a.duration != b.duration) return false;
      if (j > 0) {
        const int gap_a = a.onset - notes[static_cast<size_t>(b1 + j - 1)].end();
        const int gap_b = b.onset - notes[static_cast<size_t>(b2 + j - 1)].end();
        if (gap_a != gap_b) return false;
      }
    }
    return true;
  }

  // Re-retrieves the trailing d notes of the second line of each adjacent
  // identical pair so the pair ends similar rather than the same. Only
  // pitches change; onsets and durations stay, which keeps the shared rhythm.
  void polish() {
    for (size_t i = 0; i + 1 < lines_.size(); ++i) {
      if (sheet_.lines[i].syllables != sheet_.lines[i + 1].syllables) continue;
      const auto [b1, e1] = spans_[i];
      const auto [b2, e2] = spans_[i + 1];
      if (!lineNotesIdentical(b1, e1, b2, e2)) continue;

      LineRecord& rec = lines_[i + 1];
      const int len = e2 - b2;
      int d = 1 + static_cast<int>(state_.rng() % 2);
      d = std::min(d, len - 1);
      if (d < 1 || rec.chords.empty()) {
        rec.polish_failed = true;
        continue;
      }

      const std::string pattern = "^" + rec.chords.back().name() + "$";
      auto candidates = db_.query(d, sheet_.tonality.mode,
                                  sheet_.lines[i + 1].structure, pattern);
      const Note& kept_last = state_.context_notes[static_cast<size_t>(b2 + len - d - 1)];
      std::erase_if(candidates, [&](const Fragment* f) {
        if (f->bar_count != 1 || f->notes.empty()) return true;
        if (std::abs(f->notes.front().pitch - kept_last.pitch) >= cfg_.max_leap) return true;
        for (int j = 0; j < d; ++j) {  // must actually change something
          if (f->notes[static_cast<size_t>(j)].pitch !=
              state_.context_notes[static_cast<size_t>(b2 + len - d + j)].pitch) {
            return false;
          }
        }
        return true;
      });
      if (candidates.empty()) {
        rec.polish_failed = true;
        continue;
      }

      std::vector<Note> kept(state_.context_notes.begin() + b2,
                             state_.context_notes.begin() + (b2 + len - d));
      const int base = kept.front().onset;
      for (Note& n : kept) n.onset -= base;
      const auto kept_tokens = tokenize(kept, tb_);

      std::vector<double> scores;
      scores.reserve(candidates.size());
      for (const Fragment* f : candidates) {
        scores.push_back(candidateScore(model_, kept_tokens, kept_last.pitch, *f,
                                        cfg_, tb_));
      }
      const Fragment* chosen = sampleTopK(candidates, scores, cfg_.top_k, state_.rng);
      for (int j = 0; j < d; ++j) {
        state_.context_notes[static_cast<size_t>(b2 + len - d + j)].pitch =
            chosen->notes[static_cast<size_t>(j)].pitch;
      }
      rec.polish_depth = d;
    }
  }

  Song assemble() {
    Song song;
    song.tb = tb_;
    song.tonality = sheet_.tonality;
    song.notes = state_.context_notes;
    song.line_spans = spans_;
    song.lines = lines_;
    for (const LyricLine& line : sheet_.lines) song.struct_array.push_back(line.struct_index);

    if (options_.language != Language::kNumeric) {
      std::vector<std::string> texts(song.notes.size());
      bool any = false;
      for (size_t i = 0; i < lines_.size(); ++i) {
        const auto chunks = syllableTexts(sheet_.lines[i].text, options_.language);
        const auto& per_syllable = lines_[i].notes_per_syllable;
        if (chunks.size() != per_syllable.size()) continue;
        const int span_size = spans_[i].second - spans_[i].first;
        if (std::accumulate(per_syllable.begin(), per_syllable.end(), 0) != span_size) {
          continue;
        }
        size_t pos = static_cast<size_t>(spans_[i].first);
        for (size_t s = 0; s < chunks.size(); ++s) {
          texts[pos] = chunks[s];
          pos += static_cast<size_t>(per_syllable[s]);
        }
        any = true;
      }
      if (any) song.syllable_texts = std::move(texts);
    }
    return song;
  }

  const FragmentDatabase& db_;
  const MelodyModel& model_;
  const ChordProgression& progression_;
  const GuidelineConfig cfg_;
  const ComposeOptions& options_;
  LyricSheet sheet_;
  TimeBase tb_;
  CompositionState state_;
  std::vector<std::pair<int, int>> spans_;
  std::vector<LineRecord> lines_;
  int max_fragment_notes_ = 0;
  int tonic_line_ = 0;
};

}  // namespace

Song composeSong(const std::string& lyrics_content, const ChordProgression& progression,
                 const FragmentDatabase& db, const MelodyModel& model,
                 const ComposeOptions& options, const SentimentLexicon& lexicon) {
  LyricSheet sheet = analyzeLyrics(lyrics_content, options.language, lexicon,
                                   options.tonality_override,
                                   options.structure_granularity);
  Composer composer(db, model, progression, options, std::move(sheet));
  return composer.run();
}

std::string renderSongReport(const Song& song, const ChordProgression& progression,
                             uint64_t seed) {
  std::ostringstream out;
  out << "tonality\t" << modeName(song.tonality.mode) << "\n";
  out << "progression\t" << progression.text() << "\n";
  out << "seed\t" << seed << "\n";
  out << "lines\t" << song.lines.size() << "\n";
  out << "line\tsyllables\tstruct\tstructure\tfragments\tchords\tcontext\t"
         "melisma\trelaxations\tpolish\n";
  for (const LineRecord& rec : song.lines) {
    out << rec.line << '\t' << rec.syllables << '\t' << rec.struct_index << '\t'
        << structureName(rec.structure) << '\t';
    for (size_t i = 0; i < rec.fragment_ids.size(); ++i) {
      if (i > 0) out << ',';
      out << rec.fragment_ids[i];
    }
    out << '\t' << chordText(rec.chords) << '\t'
        << (rec.context_chord.empty() ? "-" : rec.context_chord) << '\t'
        << rec.melisma_extras << '\t';
    if (rec.relaxations.empty()) {
      out << '-';
    } else {
      for (size_t i = 0; i < rec.relaxations.size(); ++i) {
        if (i > 0) out << ',';
        out << rec.relaxations[i];
      }
    }
    out << '\t';
    if (rec.polish_depth > 0) {
      out << rec.polish_depth;
    } else {
      out << (rec.polish_failed ? "failed" : "-");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cantus
