#include "cantus/lyrics.h"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cantus {

std::string languageName(Language language) {
  switch (language) {
    case Language::kEnglish: return "english";
    case Language::kChinese: return "chinese";
    case Language::kNumeric: return "numeric";
  }
  return "english";
}

Language parseLanguage(const std::string& text) {
  if (text == "english") return Language::kEnglish;
  if (text == "chinese") return Language::kChinese;
  if (text == "numeric") return Language::kNumeric;
  throw std::invalid_argument("parseLanguage: unknown language '" + text + "'");
}

SentimentLexicon SentimentLexicon::defaults() {
  SentimentLexicon lex;
  for (const char* w : {"love",  "happy", "joy",     "smile",   "shine", "bright",
                        "sweet", "dream", "dance",   "sun",     "light", "heart",
                        "free",  "laugh", "warm",    "hope",    "alive", "glory",
                        "gold",  "fly",   "wonderful", "beautiful"}) {
    lex.polarity[w] = 1;
  }
  for (const char* w : {"sad",    "cry",   "tears", "lonely", "pain",  "dark",
                        "cold",   "broken", "goodbye", "lost", "hurt", "fear",
                        "die",    "death", "sorrow", "grief", "empty", "alone",
                        "wrong",  "fall"}) {
    lex.polarity[w] = -1;
  }
  // A handful of Chinese entries, matched as substrings.
  lex.polarity["爱"] = 1;        // 爱
  lex.polarity["快乐"] = 1;  // 快乐
  lex.polarity["幸福"] = 1;  // 幸福
  lex.polarity["悲"] = -1;       // 悲
  lex.polarity["哭"] = -1;       // 哭
  lex.polarity["孤独"] = -1; // 孤独
  lex.polarity["伤"] = -1;       // 伤
  return lex;
}

SentimentLexicon SentimentLexicon::loadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("SentimentLexicon::loadFile: cannot open " + path);
  SentimentLexicon lex;
  std::string word;
  int value = 0;
  while (in >> word >> value) {
    if (value != 1 && value != -1) {
      throw std::runtime_error("SentimentLexicon::loadFile: polarity must be 1 or -1 for '" +
                               word + "'");
    }
    lex.polarity[word] = value;
  }
  return lex;
}

namespace {

bool isBlank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

bool isVowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

std::vector<std::string> splitWords(const std::string& line) {
  std::vector<std::string> words;
  std::string current;
  for (const char raw : line) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalpha(c) || raw == '\'') {
      current += static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      words.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(current);
  // Drop apostrophe-only tokens.
  std::erase_if(words, [](const std::string& w) {
    return std::none_of(w.begin(), w.end(), [](char c) { return c != '\''; });
  });
  return words;
}

// Vowel-group spans of a lowercase word, after the silent terminal 'e' merge.
// A group splits after 'i' before a/o/u (cham-pi-ons style hiatus).
std::vector<std::pair<size_t, size_t>> vowelGroups(const std::string& word) {
  std::vector<std::pair<size_t, size_t>> groups;
  for (size_t i = 0; i < word.size(); ++i) {
    if (!isVowel(word[i])) continue;
    if (!groups.empty() && groups.back().second == i &&
        !(word[i - 1] == 'i' && (word[i] == 'a' || word[i] == 'o' || word[i] == 'u'))) {
      groups.back().second = i + 1;
    } else {
      groups.emplace_back(i, i + 1);
    }
  }
  if (groups.size() > 1 && word.size() >= 2 && word.back() == 'e') {
    const auto& last = groups.back();
    const bool lone_final_e = last.first == word.size() - 1;
    const bool consonant_le = word.size() >= 3 && word[word.size() - 2] == 'l' &&
                              !isVowel(word[word.size() - 3]);
    if (lone_final_e && !consonant_le) groups.pop_back();
  }
  if (groups.empty() && !word.empty()) groups.emplace_back(0, word.size());
  return groups;
}

bool isCjk(uint32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0xF900 && cp <= 0xFAFF);
}

// Decodes UTF-8 into (code point, byte offset, byte length) entries; invalid
// bytes are skipped.
std::vector<std::tuple<uint32_t, size_t, size_t>> decodeUtf8(const std::string& s) {
  std::vector<std::tuple<uint32_t, size_t, size_t>> out;
  size_t i = 0;
  while (i < s.size()) {
    const unsigned char b = static_cast<unsigned char>(s[i]);
    uint32_t cp = 0;
    size_t len = 1;
    if (b < 0x80) {
      cp = b;
    } else if ((b >> 5) == 0x6) {
      cp = b & 0x1F;
      len = 2;
    } else if ((b >> 4) == 0xE) {
      cp = b & 0x0F;
      len = 3;
    } else if ((b >> 3) == 0x1E) {
      cp = b & 0x07;
      len = 4;
    } else {
      ++i;
      continue;
    }
    if (i + len > s.size()) break;
    bool valid = true;
    for (size_t j = 1; j < len; ++j) {
      const unsigned char cont = static_cast<unsigned char>(s[i + j]);
      if ((cont >> 6) != 0x2) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (valid) {
      out.emplace_back(cp, i, len);
      i += len;
    } else {
      ++i;
    }
  }
  return out;
}

int parseNumericLine(const std::string& line) {
  std::string trimmed = line;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  trimmed.erase(trimmed.find_last_not_of(" \t\r\n") + 1);
  if (trimmed.empty()) throw std::invalid_argument("countSyllables: blank numeric line");
  char* end = nullptr;
  const long value = std::strtol(trimmed.c_str(), &end, 10);
  if (end != trimmed.c_str() + trimmed.size() || value < 1) {
    throw std::invalid_argument("countSyllables: numeric line must be a positive integer: '" +
                                line + "'");
  }
  return static_cast<int>(value);
}

}  // namespace

int countSyllables(const std::string& line, Language language,
                   const std::map<std::string, int>& exceptions) {
  if (isBlank(line)) throw std::invalid_argument("countSyllables: blank line");

  switch (language) {
    case Language::kNumeric:
      return parseNumericLine(line);
    case Language::kChinese: {
      int count = 0;
      for (const auto& [cp, offset, len] : decodeUtf8(line)) {
        (void)offset;
        (void)len;
        if (isCjk(cp)) ++count;
      }
      if (count == 0) {
        throw std::invalid_argument("countSyllables: no CJK characters in '" + line + "'");
      }
      return count;
    }
    case Language::kEnglish: {
      int count = 0;
      for (const std::string& word : splitWords(line)) {
        auto it = exceptions.find(word);
        if (it != exceptions.end()) {
          count += it->second;
        } else {
          count += static_cast<int>(vowelGroups(word).size());
        }
      }
      if (count == 0) {
        throw std::invalid_argument("countSyllables: no syllables in '" + line + "'");
      }
      return count;
    }
  }
  throw std::invalid_argument("countSyllables: bad language");
}

std::vector<std::string> syllableTexts(const std::string& line, Language language) {
  std::vector<std::string> chunks;
  switch (language) {
    case Language::kNumeric:
      return chunks;
    case Language::kChinese: {
      for (const auto& [cp, offset, len] : decodeUtf8(line)) {
        if (isCjk(cp)) chunks.push_back(line.substr(offset, len));
      }
      return chunks;
    }
    case Language::kEnglish: {
      for (const std::string& word : splitWords(line)) {
        const auto groups = vowelGroups(word);
        if (groups.size() <= 1) {
          chunks.push_back(word);
          continue;
        }
        size_t start = 0;
        for (size_t k = 0; k < groups.size(); ++k) {
          size_t end = word.size();
          if (k + 1 < groups.size()) {
            const size_t gap_begin = groups[k].second;
            const size_t gap_end = groups[k + 1].first;
            end = gap_begin + (gap_end - gap_begin + 1) / 2;
          }
          std::string chunk = word.substr(start, end - start);
          if (k + 1 < groups.size()) chunk += "-";
          chunks.push_back(chunk);
          start = end;
        }
      }
      return chunks;
    }
  }
  return chunks;
}

Tonality sentimentTonality(const std::vector<std::string>& lines,
                           const SentimentLexicon& lexicon, Language language,
                           std::optional<Mode> override) {
  if (override.has_value()) return Tonality::normalized(*override);

  long long sum = 0;
  if (language == Language::kChinese) {
    for (const std::string& line : lines) {
      for (const auto& [word, value] : lexicon.polarity) {
        size_t pos = 0;
        while ((pos = line.find(word, pos)) != std::string::npos) {
          sum += value;
          pos += word.size();
        }
      }
    }
  } else {
    for (const std::string& line : lines) {
      for (const std::string& word : splitWords(line)) {
        auto it = lexicon.polarity.find(word);
        if (it != lexicon.polarity.end()) sum += it->second;
      }
    }
  }
  return Tonality::normalized(sum >= 0 ? Mode::kMajor : Mode::kMinor);
}

std::optional<RepeatFind> findLongestRepeat(const std::vector<int>& S,
                                            const std::vector<bool>& mask, int g) {
  if (mask.size() != S.size()) {
    throw std::invalid_argument("findLongestRepeat: mask size mismatch");
  }

  // Reduced string: unmasked values with their original 0-based positions.
  std::vector<int> values;
  std::vector<int> origin;
  values.reserve(S.size());
  origin.reserve(S.size());
  for (size_t i = 0; i < S.size(); ++i) {
    if (!mask[i]) {
      values.push_back(S[i]);
      origin.push_back(static_cast<int>(i));
    }
  }

  const int n = static_cast<int>(values.size());
  for (int length = n / 2; length > g; --length) {
    for (int first = 0; first + 2 * length <= n; ++first) {
      const int* pattern = values.data() + first;
      std::vector<int> starts{first};
      int probe = first + length;
      while (probe + length <= n) {
        if (std::equal(pattern, pattern + length, values.data() + probe)) {
          starts.push_back(probe);
          probe += length;
        } else {
          ++probe;
        }
      }
      if (starts.size() < 2) continue;

      RepeatFind found;
      found.length = length;
      found.count = static_cast<int>(starts.size());
      for (const int start : starts) {
        found.positions.push_back(origin[start] + 1);
        std::vector<int> elements(static_cast<size_t>(length));
        for (int j = 0; j < length; ++j) elements[j] = origin[start + j] + 1;
        found.occurrence_positions.push_back(std::move(elements));
      }
      return found;
    }
  }
  return std::nullopt;
}

StructureResult recognizeStructure(const std::vector<int>& S, int g) {
  if (g < 1) throw std::invalid_argument("recognizeStructure: g must be >= 1");

  StructureResult result;
  result.struct_array.assign(S.size(), 0);
  std::vector<bool> mask(S.size(), false);

  bool first = true;
  while (auto repeat = findLongestRepeat(S, mask, g)) {
    const auto& occ = repeat->occurrence_positions;
    for (size_t i = 1; i < occ.size(); ++i) {
      for (int j = 0; j < repeat->length; ++j) {
        result.struct_array[static_cast<size_t>(occ[i][j] - 1)] = occ[0][j];
      }
    }
    for (const auto& elements : occ) {
      for (const int pos : elements) mask[static_cast<size_t>(pos - 1)] = true;
    }
    if (first) {
      for (const auto& elements : occ) {
        result.chorus_positions.insert(elements.begin(), elements.end());
      }
      first = false;
    }
  }
  return result;
}

LyricSheet analyzeLyrics(const std::string& content, Language language,
                         const SentimentLexicon& lexicon,
                         std::optional<Mode> tonality_override, int g,
                         const std::map<std::string, int>& syllable_exceptions) {
  LyricSheet sheet;
  sheet.language = language;

  std::istringstream in(content);
  std::string raw;
  std::vector<std::string> texts;
  while (std::getline(in, raw)) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (isBlank(raw)) continue;
    texts.push_back(raw);
  }
  if (texts.empty()) throw std::invalid_argument("analyzeLyrics: no lyric lines");

  for (const std::string& text : texts) {
    LyricLine line;
    line.text = text;
    line.syllables = countSyllables(text, language, syllable_exceptions);
    sheet.lines.push_back(std::move(line));
    sheet.syllable_counts.push_back(sheet.lines.back().syllables);
  }

  const StructureResult structure = recognizeStructure(sheet.syllable_counts, g);
  for (size_t i = 0; i < sheet.lines.size(); ++i) {
    sheet.lines[i].struct_index = structure.struct_array[i];
    sheet.lines[i].structure =
        structure.chorus_positions.count(static_cast<int>(i) + 1) > 0
            ? StructureLabel::kChorus
            : StructureLabel::kVerse;
  }
  sheet.tonality = sentimentTonality(texts, lexicon, language, tonality_override);
  return sheet;
}

}  // namespace cantus
