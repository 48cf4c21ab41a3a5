#include "cantus/note.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace cantus {

std::vector<std::vector<Note>> splitIntoBars(const std::vector<Note>& notes,
                                             const TimeBase& tb) {
  std::vector<std::vector<Note>> bars;
  if (notes.empty()) return bars;

  const int bar_ticks = tb.barTicks();
  int last_bar = 0;
  for (const Note& n : notes) {
    last_bar = std::max(last_bar, n.onset / bar_ticks);
  }
  bars.resize(static_cast<size_t>(last_bar) + 1);

  for (const Note& n : notes) {
    const int bar = n.onset / bar_ticks;
    Note clipped = n;
    const int bar_end = (bar + 1) * bar_ticks;
    if (clipped.end() > bar_end) {
      clipped.duration = bar_end - clipped.onset;
    }
    bars[static_cast<size_t>(bar)].push_back(clipped);
  }
  return bars;
}

namespace {

int roundToGrid(int ticks, int grid) {
  return static_cast<int>((2 * ticks + grid) / (2 * grid));
}

}  // namespace

int quantizeDurationClass(int ticks, const TimeBase& tb) {
  const int sixteenths = std::max(1, roundToGrid(ticks, tb.sixteenthTicks()));
  return std::min(sixteenths, kDurationClasses) - 1;
}

int quantizeRestClass(int ticks, const TimeBase& tb) {
  const int sixteenths = std::max(0, roundToGrid(ticks, tb.sixteenthTicks()));
  return std::min(sixteenths, kRestClasses - 1);
}

int durationClassTicks(int duration_class, const TimeBase& tb) {
  return (duration_class + 1) * tb.sixteenthTicks();
}

int restClassTicks(int rest_class, const TimeBase& tb) {
  return rest_class * tb.sixteenthTicks();
}

std::vector<NoteToken> tokenize(const std::vector<Note>& notes, const TimeBase& tb) {
  std::vector<NoteToken> tokens;
  tokens.reserve(notes.size());
  int prev_end = 0;
  for (const Note& n : notes) {
    if (n.onset < prev_end) {
      throw std::invalid_argument("tokenize: overlapping notes in monophonic melody");
    }
    tokens.push_back(NoteToken{
        .pitch = n.pitch,
        .duration_class = quantizeDurationClass(n.duration, tb),
        .rest_class = quantizeRestClass(n.onset - prev_end, tb),
    });
    prev_end = n.end();
  }
  return tokens;
}

std::vector<Note> detokenize(const std::vector<NoteToken>& tokens, const TimeBase& tb,
                             int start_onset, int velocity) {
  std::vector<Note> notes;
  notes.reserve(tokens.size());
  int cursor = start_onset;
  for (const NoteToken& t : tokens) {
    const int onset = cursor + restClassTicks(t.rest_class, tb);
    const int duration = durationClassTicks(t.duration_class, tb);
    notes.push_back(Note{.pitch = t.pitch, .onset = onset, .duration = duration,
                         .velocity = velocity});
    cursor = onset + duration;
  }
  return notes;
}

namespace {

constexpr int kLetterSemitones[7] = {9, 11, 0, 2, 4, 5, 7};  // A B C D E F G

}  // namespace

int pitchNameToMidi(const std::string& name) {
  size_t pos = 0;
  if (name.empty()) throw std::invalid_argument("pitchNameToMidi: empty name");
  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(name[pos])));
  if (letter < 'A' || letter > 'G') {
    throw std::invalid_argument("pitchNameToMidi: bad note letter in '" + name + "'");
  }
  int semitone = kLetterSemitones[letter - 'A'];
  ++pos;
  if (pos < name.size() && (name[pos] == '#' || name[pos] == 'b')) {
    semitone += (name[pos] == '#') ? 1 : -1;
    ++pos;
  }
  if (pos >= name.size()) {
    throw std::invalid_argument("pitchNameToMidi: missing octave in '" + name + "'");
  }
  char* end = nullptr;
  const long octave = std::strtol(name.c_str() + pos, &end, 10);
  if (end == name.c_str() + pos || *end != '\0') {
    throw std::invalid_argument("pitchNameToMidi: bad octave in '" + name + "'");
  }
  const long midi = 12 * (octave + 1) + semitone;
  if (midi < 0 || midi > 127) {
    throw std::invalid_argument("pitchNameToMidi: out of MIDI range: '" + name + "'");
  }
  return static_cast<int>(midi);
}

std::string midiToPitchName(int midi) {
  static const char* kNames[12] = {"C",  "C#", "D",  "D#", "E",  "F",
                                   "F#", "G",  "G#", "A",  "A#", "B"};
  if (midi < 0 || midi > 127) throw std::invalid_argument("midiToPitchName: out of range");
  return std::string(kNames[midi % 12]) + std::to_string(midi / 12 - 1);
}

}  // namespace cantus
