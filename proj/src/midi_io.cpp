#include "cantus/midi_io.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace cantus {

namespace {

[[noreturn]] void malformed(size_t offset, const std::string& why) {
  throw std::runtime_error("readMidi: " + why + " at byte " + std::to_string(offset));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

  size_t offset() const { return offset_; }
  bool atEnd() const { return offset_ >= bytes_.size(); }

  uint8_t u8() {
    if (offset_ >= bytes_.size()) malformed(offset_, "unexpected end of file");
    return bytes_[offset_++];
  }
  uint16_t u16() { return static_cast<uint16_t>(u8() << 8 | u8()); }
  uint32_t u32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | u8();
    return v;
  }
  uint32_t varint() {
    uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      const uint8_t b = u8();
      value = (value << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return value;
    }
    malformed(offset_, "variable-length quantity too long");
  }
  std::string text(size_t len) {
    if (offset_ + len > bytes_.size()) malformed(offset_, "truncated event data");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_), len);
    offset_ += len;
    return s;
  }
  void skip(size_t len) {
    if (offset_ + len > bytes_.size()) malformed(offset_, "truncated chunk");
    offset_ += len;
  }
  void expect(const char* tag) {
    const size_t at = offset_;
    for (int i = 0; i < 4; ++i) {
      if (u8() != static_cast<uint8_t>(tag[i])) {
        malformed(at, std::string("expected chunk '") + tag + "'");
      }
    }
  }

 private:
  const std::vector<uint8_t>& bytes_;
  size_t offset_ = 0;
};

struct TrackData {
  std::string name;
  std::vector<Note> notes;
  std::vector<std::pair<int, std::string>> lyrics;  // (tick, text)
};

TrackData readTrack(ByteReader& in, size_t file_size) {
  in.expect("MTrk");
  const uint32_t length = in.u32();
  const size_t track_end = in.offset() + length;
  if (track_end > file_size) malformed(in.offset(), "truncated track chunk");

  TrackData track;
  int tick = 0;
  uint8_t running = 0;
  std::vector<Note> open;

  auto closeNote = [&](int pitch, int end_tick) {
    for (auto it = open.begin(); it != open.end(); ++it) {
      if (it->pitch == pitch) {
        Note n = *it;
        n.duration = std::max(1, end_tick - n.onset);
        track.notes.push_back(n);
        open.erase(it);
        return;
      }
    }
  };

  while (in.offset() < track_end) {
    tick += static_cast<int>(in.varint());
    const uint8_t first = in.u8();
    uint8_t status = 0;
    uint8_t data1 = 0;
    if (first & 0x80) {
      status = first;
      if (status == 0xFF) {
        const uint8_t type = in.u8();
        const uint32_t len = in.varint();
        if (type == 0x03) {
          track.name = in.text(len);
        } else if (type == 0x05) {
          track.lyrics.emplace_back(tick, in.text(len));
        } else {
          in.skip(len);
        }
        continue;
      }
      if (status == 0xF0 || status == 0xF7) {
        running = 0;
        in.skip(in.varint());
        continue;
      }
      running = status;
      data1 = in.u8();
    } else {
      if (running == 0) malformed(in.offset() - 1, "data byte without running status");
      status = running;
      data1 = first;
    }

    switch (status & 0xF0) {
      case 0x80:
        in.u8();  // release velocity
        closeNote(data1, tick);
        break;
      case 0x90: {
        const uint8_t velocity = in.u8();
        if (velocity == 0) {
          closeNote(data1, tick);
        } else {
          closeNote(data1, tick);  // retrigger closes any held copy
          open.push_back(Note{.pitch = data1, .onset = tick, .duration = 0,
                              .velocity = velocity});
        }
        break;
      }
      case 0xA0:
      case 0xB0:
      case 0xE0:
        in.u8();  // second data byte
        break;
      case 0xC0:
      case 0xD0:
        break;  // single data byte, already consumed
      default:
        malformed(in.offset() - 1, "unexpected status byte");
    }
  }

  // Unmatched note-ons close at the end of the track.
  for (const Note& held : open) {
    Note n = held;
    n.duration = std::max(1, tick - n.onset);
    track.notes.push_back(n);
  }
  return track;
}

}  // namespace

MidiSong readMidiBytes(const std::vector<uint8_t>& bytes) {
  if (bytes.empty()) throw std::runtime_error("readMidi: empty file");
  ByteReader in(bytes);
  in.expect("MThd");
  const uint32_t header_len = in.u32();
  if (header_len < 6) malformed(in.offset(), "bad header length");
  const uint16_t format = in.u16();
  const uint16_t ntrks = in.u16();
  const uint16_t division = in.u16();
  in.skip(header_len - 6);
  if (format > 1) malformed(8, "unsupported SMF format " + std::to_string(format));
  if (division & 0x8000) malformed(12, "SMPTE time division unsupported");
  if (division == 0) malformed(12, "zero time division");

  MidiSong song;
  song.tb.ticks_per_quarter = division;

  std::vector<TrackData> tracks;
  for (uint16_t t = 0; t < ntrks; ++t) {
    tracks.push_back(readTrack(in, bytes.size()));
  }

  // Pick the track named "melody" if any, else the first with notes.
  const TrackData* chosen = nullptr;
  for (const TrackData& track : tracks) {
    std::string lowered = track.name;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lowered == "melody" && !track.notes.empty()) {
      chosen = &track;
      break;
    }
  }
  if (chosen == nullptr) {
    for (const TrackData& track : tracks) {
      if (!track.notes.empty()) {
        chosen = &track;
        break;
      }
    }
  }
  if (chosen == nullptr) return song;

  std::vector<Note> notes = chosen->notes;
  std::stable_sort(notes.begin(), notes.end(), [](const Note& a, const Note& b) {
    return a.onset < b.onset;
  });

  // Enforce monophony: on overlap keep the higher velocity, ties to the
  // higher pitch.
  std::vector<Note> mono;
  for (const Note& n : notes) {
    if (!mono.empty() && n.onset < mono.back().end()) {
      const Note& held = mono.back();
      const bool replace = n.velocity > held.velocity ||
                           (n.velocity == held.velocity && n.pitch > held.pitch);
      if (replace) {
        mono.pop_back();
        mono.push_back(n);
      }
      continue;
    }
    mono.push_back(n);
  }
  song.notes = std::move(mono);

  if (!chosen->lyrics.empty()) {
    song.lyrics.assign(song.notes.size(), "");
    for (const auto& [tick, text] : chosen->lyrics) {
      for (size_t i = 0; i < song.notes.size(); ++i) {
        if (song.notes[i].onset == tick && song.lyrics[i].empty()) {
          song.lyrics[i] = text;
          break;
        }
      }
    }
    const bool any = std::any_of(song.lyrics.begin(), song.lyrics.end(),
                                 [](const std::string& s) { return !s.empty(); });
    if (!any) song.lyrics.clear();
  }
  return song;
}

MidiSong readMidi(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("readMidi: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return readMidiBytes(bytes);
}

namespace {

void putVarint(std::vector<uint8_t>& out, uint32_t value) {
  uint8_t stack[5];
  int n = 0;
  do {
    stack[n++] = static_cast<uint8_t>(value & 0x7F);
    value >>= 7;
  } while (value > 0);
  while (n > 1) out.push_back(stack[--n] | 0x80);
  out.push_back(stack[0]);
}

void putU32(std::vector<uint8_t>& out, uint32_t value) {
  out.push_back(static_cast<uint8_t>(value >> 24));
  out.push_back(static_cast<uint8_t>(value >> 16));
  out.push_back(static_cast<uint8_t>(value >> 8));
  out.push_back(static_cast<uint8_t>(value));
}

struct Event {
  int tick = 0;
  int priority = 0;  // 0 note-off, 1 meta, 2 note-on
  std::vector<uint8_t> bytes;
};

}  // namespace

std::vector<uint8_t> writeMidiBytes(const MidiSong& song) {
  const bool with_lyrics = song.lyrics.size() == song.notes.size() && !song.notes.empty();

  std::vector<Event> events;
  // 4/4 time signature and a fixed 120 BPM tempo (500000 us per quarter).
  events.push_back({0, 1, {0xFF, 0x58, 0x04,
                           static_cast<uint8_t>(song.tb.beats_per_bar), 0x02, 24, 8}});
  events.push_back({0, 1, {0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20}});

  for (size_t i = 0; i < song.notes.size(); ++i) {
    const Note& n = song.notes[i];
    if (n.duration <= 0) throw std::invalid_argument("writeMidi: non-positive duration");
    if (n.pitch < 0 || n.pitch > 127) throw std::invalid_argument("writeMidi: bad pitch");
    if (with_lyrics && !song.lyrics[i].empty()) {
      Event lyric{n.onset, 1, {0xFF, 0x05}};
      putVarint(lyric.bytes, static_cast<uint32_t>(song.lyrics[i].size()));
      lyric.bytes.insert(lyric.bytes.end(), song.lyrics[i].begin(), song.lyrics[i].end());
      events.push_back(std::move(lyric));
    }
    const uint8_t velocity =
        static_cast<uint8_t>(std::clamp(n.velocity, 1, 127));
    events.push_back({n.onset, 2, {0x90, static_cast<uint8_t>(n.pitch), velocity}});
    events.push_back({n.end(), 0, {0x80, static_cast<uint8_t>(n.pitch), 0x40}});
  }

  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    return a.priority < b.priority;
  });

  std::vector<uint8_t> track;
  int cursor = 0;
  for (const Event& e : events) {
    putVarint(track, static_cast<uint32_t>(e.tick - cursor));
    track.insert(track.end(), e.bytes.begin(), e.bytes.end());
    cursor = e.tick;
  }
  putVarint(track, 0);
  track.insert(track.end(), {0xFF, 0x2F, 0x00});

  std::vector<uint8_t> out;
  out.insert(out.end(), {'M', 'T', 'h', 'd'});
  putU32(out, 6);
  out.insert(out.end(), {0x00, 0x01, 0x00, 0x01});  // format 1, one track
  out.push_back(static_cast<uint8_t>(song.tb.ticks_per_quarter >> 8));
  out.push_back(static_cast<uint8_t>(song.tb.ticks_per_quarter & 0xFF));
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  putU32(out, static_cast<uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

void writeMidi(const MidiSong& song, const std::string& path) {
  const auto bytes = writeMidiBytes(song);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("writeMidi: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("writeMidi: write failed for " + path);
}

}  // namespace cantus
