// Python bindings for the cantus core: note types, the melody model, the
// fragment database, lyric analysis, composition, metrics, and MIDI I/O.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cantus/compose.h"
#include "cantus/config.h"
#include "cantus/fragment_db.h"
#include "cantus/lyrics.h"
#include "cantus/melody_model.h"
#include "cantus/metrics.h"
#include "cantus/midi_io.h"

namespace py = pybind11;
using namespace cantus;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lyric-to-melody composition by retrieval from a generated fragment database";

  py::class_<Note>(m, "Note")
      .def(py::init([](int pitch, int onset, int duration, int velocity) {
             return Note{pitch, onset, duration, velocity};
           }),
           py::arg("pitch"), py::arg("onset"), py::arg("duration"),
           py::arg("velocity") = kDefaultVelocity)
      .def_readwrite("pitch", &Note::pitch)
      .def_readwrite("onset", &Note::onset)
      .def_readwrite("duration", &Note::duration)
      .def_readwrite("velocity", &Note::velocity)
      .def("end", &Note::end)
      .def("__eq__", [](const Note& a, const Note& b) { return a == b; })
      .def("__repr__", [](const Note& n) {
        return "Note(pitch=" + std::to_string(n.pitch) + ", onset=" +
               std::to_string(n.onset) + ", duration=" + std::to_string(n.duration) + ")";
      });

  py::class_<TimeBase>(m, "TimeBase")
      .def(py::init([](int tpq, int beats) { return TimeBase{tpq, beats}; }),
           py::arg("ticks_per_quarter") = 480, py::arg("beats_per_bar") = 4)
      .def_readwrite("ticks_per_quarter", &TimeBase::ticks_per_quarter)
      .def_readwrite("beats_per_bar", &TimeBase::beats_per_bar)
      .def("bar_ticks", &TimeBase::barTicks);

  py::class_<NoteToken>(m, "NoteToken")
      .def(py::init([](int pitch, int duration_class, int rest_class) {
             return NoteToken{pitch, duration_class, rest_class};
           }),
           py::arg("pitch"), py::arg("duration_class"), py::arg("rest_class") = 0)
      .def_readwrite("pitch", &NoteToken::pitch)
      .def_readwrite("duration_class", &NoteToken::duration_class)
      .def_readwrite("rest_class", &NoteToken::rest_class)
      .def("__eq__", [](const NoteToken& a, const NoteToken& b) { return a == b; })
      .def("__hash__", [](const NoteToken& t) {
        return py::hash(py::make_tuple(t.pitch, t.duration_class, t.rest_class));
      });

  m.def("split_into_bars", &splitIntoBars, py::arg("notes"), py::arg("tb") = TimeBase{});
  m.def("tokenize", &tokenize, py::arg("notes"), py::arg("tb") = TimeBase{});
  m.def("detokenize", &detokenize, py::arg("tokens"), py::arg("tb") = TimeBase{},
        py::arg("start_onset") = 0, py::arg("velocity") = kDefaultVelocity);
  m.def("pitch_name_to_midi", &pitchNameToMidi, py::arg("name"));
  m.def("midi_to_pitch_name", &midiToPitchName, py::arg("midi"));

  py::enum_<Mode>(m, "Mode")
      .value("MAJOR", Mode::kMajor)
      .value("MINOR", Mode::kMinor);
  py::enum_<StructureLabel>(m, "StructureLabel")
      .value("CHORUS", StructureLabel::kChorus)
      .value("VERSE", StructureLabel::kVerse);
  py::enum_<Language>(m, "Language")
      .value("ENGLISH", Language::kEnglish)
      .value("CHINESE", Language::kChinese)
      .value("NUMERIC", Language::kNumeric);

  py::class_<ChordSymbol>(m, "ChordSymbol")
      .def(py::init([](const std::string& name) { return parseChord(name); }),
           py::arg("name"))
      .def_readwrite("root", &ChordSymbol::root)
      .def_readwrite("quality", &ChordSymbol::quality)
      .def("name", &ChordSymbol::name)
      .def("__eq__", [](const ChordSymbol& a, const ChordSymbol& b) { return a == b; })
      .def("__repr__", [](const ChordSymbol& c) { return "ChordSymbol(" + c.name() + ")"; });

  py::class_<Tonality>(m, "Tonality")
      .def(py::init([](Mode mode) { return Tonality::normalized(mode); }), py::arg("mode"))
      .def_readwrite("mode", &Tonality::mode)
      .def_readwrite("key_root", &Tonality::key_root);

  py::class_<TonalityResult>(m, "TonalityResult")
      .def_readonly("tonality", &TonalityResult::tonality)
      .def_readonly("transposition", &TonalityResult::transposition);

  m.def("infer_tonality", &inferTonality, py::arg("notes"));
  m.def("infer_chords", &inferChords, py::arg("bars"), py::arg("tonality"),
        py::arg("change_penalty") = 0.1);
  m.def("is_monotonous", &isMonotonous, py::arg("notes"), py::arg("min_unique") = 3);
  m.def("transpose_notes", &transposeNotes, py::arg("notes"), py::arg("semitones"));

  py::class_<MelodyModel>(m, "MelodyModel")
      .def_static("train", &MelodyModel::train, py::arg("corpus"), py::arg("order") = 3,
                  py::arg("alpha") = 0.01)
      .def_static("load", &MelodyModel::load, py::arg("path"))
      .def("save", &MelodyModel::save, py::arg("path"))
      .def("score", &MelodyModel::score, py::arg("tokens"))
      .def("prob", &MelodyModel::prob, py::arg("context"), py::arg("next"))
      .def("perplexity", &MelodyModel::perplexity, py::arg("heldout"))
      .def("generate_continuation", &MelodyModel::generateContinuation, py::arg("context"),
           py::arg("tb"), py::arg("top_k") = 5, py::arg("seed") = 0)
      .def_property_readonly("order", &MelodyModel::order)
      .def_property_readonly("vocabulary_size", &MelodyModel::vocabularySize);

  py::class_<Fragment>(m, "Fragment")
      .def(py::init<>())
      .def_readwrite("id", &Fragment::id)
      .def_readwrite("notes", &Fragment::notes)
      .def_readwrite("length", &Fragment::length)
      .def_readwrite("structure", &Fragment::structure)
      .def_readwrite("chords", &Fragment::chords)
      .def_readwrite("tonality", &Fragment::tonality)
      .def_readwrite("bar_count", &Fragment::bar_count);

  py::enum_<InsertResult>(m, "InsertResult")
      .value("INSERTED", InsertResult::kInserted)
      .value("DUPLICATE", InsertResult::kDuplicate)
      .value("MONOTONOUS", InsertResult::kMonotonous);

  py::class_<FragmentDatabase>(m, "FragmentDatabase")
      .def(py::init<const TimeBase&, int>(), py::arg("tb") = TimeBase{},
           py::arg("min_unique_pitches") = 3)
      .def_static("load", &FragmentDatabase::load, py::arg("path"))
      .def("save", &FragmentDatabase::save, py::arg("path"))
      .def("insert", &FragmentDatabase::insert, py::arg("fragment"))
      .def("query",
           [](const FragmentDatabase& db, int length, Mode mode, StructureLabel structure,
              const std::string& pattern) {
             std::vector<Fragment> out;
             for (const Fragment* f : db.query(length, mode, structure, pattern)) {
               out.push_back(*f);
             }
             return out;
           },
           py::arg("length"), py::arg("mode"), py::arg("structure"), py::arg("pattern"))
      .def("max_fragment_notes", &FragmentDatabase::maxFragmentNotes)
      .def("__len__", &FragmentDatabase::size);

  py::class_<BuildConfig>(m, "BuildConfig")
      .def(py::init([](int top_k, uint64_t seed, int min_unique) {
             return BuildConfig{top_k, seed, min_unique};
           }),
           py::arg("model_top_k") = 5, py::arg("seed") = 0,
           py::arg("min_unique_pitches") = 3)
      .def_readwrite("model_top_k", &BuildConfig::model_top_k)
      .def_readwrite("seed", &BuildConfig::seed)
      .def_readwrite("min_unique_pitches", &BuildConfig::min_unique_pitches);

  py::class_<BuildStats>(m, "BuildStats")
      .def(py::init<>())
      .def_readonly("windows", &BuildStats::windows)
      .def_readonly("generations", &BuildStats::generations)
      .def_readonly("originality_removed", &BuildStats::originality_removed)
      .def_readonly("surviving_generations", &BuildStats::surviving_generations)
      .def_readonly("pre_dedup_records", &BuildStats::pre_dedup_records)
      .def_readonly("monotonous_removed", &BuildStats::monotonous_removed)
      .def_readonly("duplicates_removed", &BuildStats::duplicates_removed)
      .def_readonly("records", &BuildStats::records);

  m.def("build_database",
        [](const std::vector<std::vector<Note>>& seeds, const MelodyModel& model,
           const TimeBase& tb, const BuildConfig& config) {
          BuildStats stats;
          FragmentDatabase db = buildDatabase(seeds, model, tb, config, &stats);
          return py::make_tuple(std::move(db), stats);
        },
        py::arg("seed_melodies"), py::arg("model"), py::arg("tb") = TimeBase{},
        py::arg("config") = BuildConfig{});

  m.def("count_syllables",
        [](const std::string& line, Language language) {
          return countSyllables(line, language);
        },
        py::arg("line"), py::arg("language") = Language::kEnglish);
  m.def("recognize_structure",
        [](const std::vector<int>& S, int g) {
          const StructureResult r = recognizeStructure(S, g);
          return py::make_tuple(r.struct_array, r.chorus_positions);
        },
        py::arg("syllable_counts"), py::arg("g") = 2);

  m.def("dist_n", &distN, py::arg("tokens"), py::arg("n"));
  m.def("ent_n", &entN, py::arg("tokens"), py::arg("n"));
  m.def("iou", &iou, py::arg("predicted"), py::arg("truth"));

  py::class_<GuidelineConfig>(m, "GuidelineConfig")
      .def(py::init<>())
      .def_readwrite("first_note_low", &GuidelineConfig::first_note_low)
      .def_readwrite("first_note_high", &GuidelineConfig::first_note_high)
      .def_readwrite("max_leap", &GuidelineConfig::max_leap)
      .def_readwrite("tendency_bonus", &GuidelineConfig::tendency_bonus)
      .def_readwrite("top_k", &GuidelineConfig::top_k)
      .def_readwrite("melisma_prob", &GuidelineConfig::melisma_prob)
      .def_readwrite("max_extra_notes", &GuidelineConfig::max_extra_notes);

  py::class_<ComposeOptions>(m, "ComposeOptions")
      .def(py::init<>())
      .def_readwrite("guidelines", &ComposeOptions::guidelines)
      .def_readwrite("language", &ComposeOptions::language)
      .def_readwrite("tonality_override", &ComposeOptions::tonality_override)
      .def_readwrite("structure_granularity", &ComposeOptions::structure_granularity)
      .def_readwrite("seed", &ComposeOptions::seed);

  py::class_<LineRecord>(m, "LineRecord")
      .def_readonly("line", &LineRecord::line)
      .def_readonly("text", &LineRecord::text)
      .def_readonly("syllables", &LineRecord::syllables)
      .def_readonly("struct_index", &LineRecord::struct_index)
      .def_readonly("structure", &LineRecord::structure)
      .def_readonly("melisma_extras", &LineRecord::melisma_extras)
      .def_readonly("notes_per_syllable", &LineRecord::notes_per_syllable)
      .def_readonly("fragment_ids", &LineRecord::fragment_ids)
      .def_readonly("chords", &LineRecord::chords)
      .def_readonly("context_chord", &LineRecord::context_chord)
      .def_readonly("relaxations", &LineRecord::relaxations)
      .def_readonly("polish_depth", &LineRecord::polish_depth)
      .def_readonly("polish_failed", &LineRecord::polish_failed);

  py::class_<Song>(m, "Song")
      .def_readonly("notes", &Song::notes)
      .def_readonly("line_spans", &Song::line_spans)
      .def_readonly("syllable_texts", &Song::syllable_texts)
      .def_readonly("tonality", &Song::tonality)
      .def_readonly("struct_array", &Song::struct_array)
      .def_readonly("lines", &Song::lines)
      .def_readonly("tb", &Song::tb);

  m.def("build_chord_regex",
        [](const std::string& progression, const std::optional<std::string>& last_chord) {
          std::optional<ChordSymbol> last;
          if (last_chord.has_value()) last = parseChord(*last_chord);
          return buildChordRegex(ChordProgression::parse(progression), last);
        },
        py::arg("progression"), py::arg("last_chord") = std::nullopt);

  m.def("compose_song",
        [](const std::string& lyrics, const std::string& chords, const FragmentDatabase& db,
           const MelodyModel& model, const ComposeOptions& options) {
          return composeSong(lyrics, ChordProgression::parse(chords), db, model, options);
        },
        py::arg("lyrics"), py::arg("chords"), py::arg("db"), py::arg("model"),
        py::arg("options") = ComposeOptions{});

  m.def("render_song_report",
        [](const Song& song, const std::string& chords, uint64_t seed) {
          return renderSongReport(song, ChordProgression::parse(chords), seed);
        },
        py::arg("song"), py::arg("chords"), py::arg("seed") = 0);

  py::class_<MidiSong>(m, "MidiSong")
      .def(py::init([](std::vector<Note> notes, TimeBase tb, std::vector<std::string> lyrics) {
             return MidiSong{std::move(notes), tb, std::move(lyrics)};
           }),
           py::arg("notes"), py::arg("tb") = TimeBase{},
           py::arg("lyrics") = std::vector<std::string>{})
      .def_readwrite("notes", &MidiSong::notes)
      .def_readwrite("tb", &MidiSong::tb)
      .def_readwrite("lyrics", &MidiSong::lyrics);

  m.def("read_midi", &readMidi, py::arg("path"));
  m.def("write_midi", &writeMidi, py::arg("song"), py::arg("path"));
}
