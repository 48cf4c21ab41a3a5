#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cantus/note.h"

namespace cantus {

// A monophonic melody extracted from (or destined for) a Standard MIDI File.
// When lyric text is present it is per-note and the same length as notes.
struct MidiSong {
  std::vector<Note> notes;
  TimeBase tb;
  std::vector<std::string> lyrics;
};

// Reads SMF format 0 or 1. Takes the track named "melody" when present,
// otherwise the first track containing notes. Overlapping notes are resolved
// by keeping the higher-velocity note (ties: higher pitch). Tempo and meter
// events are ignored beyond the header's ticks-per-quarter.
MidiSong readMidiBytes(const std::vector<uint8_t>& bytes);
MidiSong readMidi(const std::string& path);

// Writes SMF format 1 with a single melody track at a fixed 120 BPM. Lyric
// meta events carry one syllable per note when alignment is available.
std::vector<uint8_t> writeMidiBytes(const MidiSong& song);
void writeMidi(const MidiSong& song, const std::string& path);

}  // namespace cantus
