#pragma once

#include <compare>
#include <string>
#include <vector>

namespace cantus {

// A single monophonic note event. Times are in ticks from song start.
struct Note {
  int pitch = 60;     // MIDI note number, 0-127
  int onset = 0;      // ticks, >= 0
  int duration = 0;   // ticks, > 0
  int velocity = 80;  // 1-127

  int end() const { return onset + duration; }
  bool operator==(const Note&) const = default;
};

// Tick resolution and meter. Defaults: 480 ticks per quarter note, 4/4.
struct TimeBase {
  int ticks_per_quarter = 480;
  int beats_per_bar = 4;

  int barTicks() const { return ticks_per_quarter * beats_per_bar; }
  int sixteenthTicks() const { return ticks_per_quarter / 4; }
  bool operator==(const TimeBase&) const = default;
};

// Quantized note event used by the melody model and for fragment dedup.
// duration_class d encodes (d + 1) sixteenths, d in [0, 15]; longer values
// saturate at a whole 4/4 bar. rest_class r encodes r sixteenths of silence
// before the note, r in [0, 15], also saturating.
struct NoteToken {
  int pitch = 60;
  int duration_class = 3;
  int rest_class = 0;

  auto operator<=>(const NoteToken&) const = default;
};

inline constexpr int kDurationClasses = 16;
inline constexpr int kRestClasses = 16;
inline constexpr int kDefaultVelocity = 80;

// Assigns each note to bar floor(onset / bar_ticks). Notes crossing a bar
// boundary are clipped at the boundary. The result covers bars 0 through the
// last occupied bar; interior bars with no notes are present but empty.
std::vector<std::vector<Note>> splitIntoBars(const std::vector<Note>& notes,
                                             const TimeBase& tb);

// One token per note; the rest class quantizes the gap since the previous
// note's end (song start counts as tick 0). Throws std::invalid_argument on
// overlapping notes.
std::vector<NoteToken> tokenize(const std::vector<Note>& notes, const TimeBase& tb);

// Inverse of tokenize up to the sixteenth grid; exact on grid-aligned input.
std::vector<Note> detokenize(const std::vector<NoteToken>& tokens, const TimeBase& tb,
                             int start_onset = 0, int velocity = kDefaultVelocity);

int durationClassTicks(int duration_class, const TimeBase& tb);
int restClassTicks(int rest_class, const TimeBase& tb);
int quantizeDurationClass(int ticks, const TimeBase& tb);
int quantizeRestClass(int ticks, const TimeBase& tb);

// "C4" -> 60 (C4 = 60 convention). Accepts letter, optional # or b, octave.
int pitchNameToMidi(const std::string& name);
std::string midiToPitchName(int midi);

}  // namespace cantus
