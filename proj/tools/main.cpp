// Command-line surface for the cantus pipeline: build the fragment database,
// compose songs from lyrics, inspect lyric structure, and report metrics.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cantus/compose.h"
#include "cantus/config.h"
#include "cantus/fragment_db.h"
#include "cantus/melody_model.h"
#include "cantus/metrics.h"
#include "cantus/midi_io.h"

namespace fs = std::filesystem;
using namespace cantus;

namespace {

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<Note> rescaleTicks(std::vector<Note> notes, int from_tpq, int to_tpq) {
  if (from_tpq == to_tpq) return notes;
  for (Note& n : notes) {
    const long long end =
        (static_cast<long long>(n.onset + n.duration) * to_tpq + from_tpq / 2) / from_tpq;
    n.onset = static_cast<int>(
        (static_cast<long long>(n.onset) * to_tpq + from_tpq / 2) / from_tpq);
    n.duration = std::max(1, static_cast<int>(end) - n.onset);
  }
  return notes;
}

SentimentLexicon lexiconFor(const Config& config) {
  return config.lexicon_path.empty() ? SentimentLexicon::defaults()
                                     : SentimentLexicon::loadFile(config.lexicon_path);
}

int runBuildDb(const Config& config, const std::string& corpus_dir,
               const std::string& model_out, const std::string& db_out) {
  std::vector<fs::path> files;
  if (!fs::is_directory(corpus_dir)) {
    throw std::invalid_argument("corpus directory not found: " + corpus_dir);
  }
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".mid" || ext == ".midi") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::invalid_argument("no MIDI files in " + corpus_dir);
  }

  std::vector<std::vector<Note>> melodies;
  for (const fs::path& file : files) {
    MidiSong song = readMidi(file.string());
    if (song.notes.empty()) {
      std::cerr << "skipping " << file << ": no notes\n";
      continue;
    }
    auto notes = rescaleTicks(std::move(song.notes), song.tb.ticks_per_quarter,
                              config.tb.ticks_per_quarter);
    if (splitIntoBars(notes, config.tb).size() < 4) {
      std::cerr << "skipping " << file << ": shorter than 4 bars\n";
      continue;
    }
    // Normalize every seed melody to C major / A minor before training.
    const TonalityResult key = inferTonality(notes);
    melodies.push_back(transposeNotes(std::move(notes), key.transposition));
  }
  if (melodies.empty()) {
    throw std::invalid_argument("no usable seed melodies in " + corpus_dir);
  }

  std::vector<std::vector<NoteToken>> corpus;
  corpus.reserve(melodies.size());
  for (const auto& melody : melodies) corpus.push_back(tokenize(melody, config.tb));

  const MelodyModel model = MelodyModel::train(corpus, config.model_order,
                                               config.model_alpha);
  BuildStats stats;
  const FragmentDatabase db = buildDatabase(
      melodies, model, config.tb,
      BuildConfig{config.gen_top_k, config.seed, 3}, &stats);

  model.save(model_out);
  db.save(db_out);

  std::cout << "seed melodies: " << melodies.size() << "\n";
  std::cout << "model: order=" << model.order() << " vocabulary=" << model.vocabularySize()
            << " -> " << model_out << "\n";
  std::cout << "windows=" << stats.windows << " generations=" << stats.generations
            << " originality_removed=" << stats.originality_removed
            << " survivors=" << stats.surviving_generations << "\n";
  std::cout << "pre_dedup_records=" << stats.pre_dedup_records
            << " monotonous_removed=" << stats.monotonous_removed
            << " duplicates_removed=" << stats.duplicates_removed << "\n";
  std::cout << "records=" << db.size() << " -> " << db_out << "\n";
  return 0;
}

int runCompose(const Config& config, const std::string& lyrics_path,
               const std::string& chords_text, const std::string& db_path,
               const std::string& model_path, const std::string& out_path) {
  const std::string lyrics = readTextFile(lyrics_path);
  const FragmentDatabase db = FragmentDatabase::load(db_path);
  const MelodyModel model = MelodyModel::load(model_path);
  const ChordProgression progression = ChordProgression::parse(chords_text);

  ComposeOptions options;
  options.guidelines = config.guidelines;
  options.language = config.language;
  options.tonality_override = config.tonality_override;
  options.structure_granularity = config.g;
  options.seed = config.seed;

  const Song song = composeSong(lyrics, progression, db, model, options,
                                lexiconFor(config));

  MidiSong midi{song.notes, song.tb, song.syllable_texts};
  writeMidi(midi, out_path);
  const std::string report = renderSongReport(song, progression, config.seed);
  {
    std::ofstream out(out_path + ".report.txt");
    if (!out) throw std::runtime_error("cannot write " + out_path + ".report.txt");
    out << report;
  }

  std::cout << report;
  std::cout << "notes=" << song.notes.size() << " -> " << out_path << "\n";
  return 0;
}

int runRecognize(const Config& config, const std::string& lyrics_path,
                 const std::string& gold_path) {
  const std::string content = readTextFile(lyrics_path);
  const LyricSheet sheet = analyzeLyrics(content, config.language, lexiconFor(config),
                                         config.tonality_override, config.g);

  std::cout << "S:";
  for (const int s : sheet.syllable_counts) std::cout << ' ' << s;
  std::cout << "\nstruct:";
  std::set<int> chorus;
  for (size_t i = 0; i < sheet.lines.size(); ++i) {
    std::cout << ' ' << sheet.lines[i].struct_index;
    if (sheet.lines[i].structure == StructureLabel::kChorus) {
      chorus.insert(static_cast<int>(i) + 1);
    }
  }
  std::cout << "\nchorus:";
  if (chorus.empty()) std::cout << " -";
  for (const int line : chorus) std::cout << ' ' << line;
  std::cout << "\n";

  if (!gold_path.empty()) {
    std::istringstream in(readTextFile(gold_path));
    std::set<int> gold;
    int line = 0;
    while (in >> line) gold.insert(line);
    char value[32];
    std::snprintf(value, sizeof value, "%.3f", iou(chorus, gold));
    std::cout << "IoU: " << value << "\n";
  }
  return 0;
}

int runEval(const std::vector<std::string>& midi_paths, std::vector<int> ns) {
  if (ns.empty()) ns = {1, 2};
  std::sort(ns.begin(), ns.end());

  std::cout << "song";
  for (const int n : ns) std::cout << "\tDist-" << n;
  for (const int n : ns) std::cout << "\tEnt-" << n;
  std::cout << "\n";

  std::vector<double> sums(2 * ns.size(), 0.0);
  for (const std::string& path : midi_paths) {
    const MidiSong song = readMidi(path);
    const auto tokens = tokenize(song.notes, song.tb);
    std::cout << fs::path(path).filename().string();
    std::vector<double> row;
    for (const int n : ns) row.push_back(distN(tokens, n));
    for (const int n : ns) row.push_back(entN(tokens, n));
    for (size_t i = 0; i < row.size(); ++i) {
      char value[32];
      std::snprintf(value, sizeof value, "%.4f", row[i]);
      std::cout << '\t' << value;
      sums[i] += row[i];
    }
    std::cout << "\n";
  }
  std::cout << "mean";
  for (const double sum : sums) {
    char value[32];
    std::snprintf(value, sizeof value, "%.4f", sum / static_cast<double>(midi_paths.size()));
    std::cout << '\t' << value;
  }
  std::cout << "\n";
  return 0;
}

// Flags override the config file; only options the user actually set apply.
struct ConfigFlags {
  std::string config_path;
  uint64_t seed = 0;
  std::string language;
  std::string tonality;
  int g = 2;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* language_opt = nullptr;
  CLI::Option* tonality_opt = nullptr;
  CLI::Option* g_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    seed_opt = cmd->add_option("--seed", seed, "random seed");
    language_opt = cmd->add_option("--language", language,
                                   "lyric language: english, chinese, numeric");
    tonality_opt = cmd->add_option("--tonality", tonality,
                                   "tonality: auto, major, minor");
    g_opt = cmd->add_option("--g", g, "structure recognition granularity");
  }

  Config resolve() const {
    Config config = config_path.empty() ? Config{} : Config::fromFile(config_path);
    if (seed_opt->count() > 0) config.seed = seed;
    if (language_opt->count() > 0) config.language = parseLanguage(language);
    if (tonality_opt->count() > 0) {
      config.tonality_override =
          tonality == "auto" ? std::nullopt : std::optional<Mode>(parseMode(tonality));
    }
    if (g_opt->count() > 0) config.g = g;
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cantus: lyric-to-melody composition by fragment retrieval"};
  app.require_subcommand(1);
  int status = 0;

  // build-db
  auto* build = app.add_subcommand("build-db", "train the melody model and build the database");
  std::string corpus_dir, model_out, db_out;
  build->add_option("--corpus", corpus_dir, "directory of seed MIDI files")->required();
  build->add_option("--model-out", model_out, "output model path")->required();
  build->add_option("--db-out", db_out, "output database path")->required();
  ConfigFlags build_flags;
  build_flags.attach(build);
  build->callback([&] { status = runBuildDb(build_flags.resolve(), corpus_dir, model_out, db_out); });

  // compose
  auto* compose = app.add_subcommand("compose", "compose a melody for a lyric file");
  std::string lyrics_path, chords_text, db_path, model_path, out_path;
  compose->add_option("--lyrics", lyrics_path, "lyric text file")->required();
  compose->add_option("--chords", chords_text, "chord progression, e.g. \"C G Am F\"")
      ->required();
  compose->add_option("--db", db_path, "fragment database path");
  compose->add_option("--model", model_path, "melody model path")->required();
  compose->add_option("--out", out_path, "output MIDI path")->required();
  ConfigFlags compose_flags;
  compose_flags.attach(compose);
  compose->callback([&] {
    Config config = compose_flags.resolve();
    const std::string db_file = db_path.empty() ? config.db_path : db_path;
    if (db_file.empty()) throw std::invalid_argument("no database path (--db or config db_path)");
    status = runCompose(config, lyrics_path, chords_text, db_file, model_path, out_path);
  });

  // recognize
  auto* recognize = app.add_subcommand("recognize", "print lyric structure recognition");
  std::string rec_lyrics, gold_path;
  recognize->add_option("--lyrics", rec_lyrics, "lyric text file")->required();
  recognize->add_option("--gold", gold_path, "gold chorus line indices for IoU");
  ConfigFlags recognize_flags;
  recognize_flags.attach(recognize);
  recognize->callback([&] {
    status = runRecognize(recognize_flags.resolve(), rec_lyrics, gold_path);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "objective metrics over MIDI files");
  std::vector<std::string> midi_paths;
  std::vector<int> ns;
  eval->add_option("files", midi_paths, "MIDI files")->required();
  eval->add_option("--n", ns, "n-gram sizes (default 1 2)");
  eval->callback([&] { status = runEval(midi_paths, ns); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
