#pragma once

#include <optional>
#include <string>

#include "cantus/compose.h"
#include "cantus/lyrics.h"

namespace cantus {

// Tool configuration, serializable to a key=value file. Unknown keys are
// rejected on parse; '#' starts a comment.
struct Config {
  GuidelineConfig guidelines;
  int model_order = 3;
  double model_alpha = 0.01;
  int gen_top_k = 5;  // decoding width in the creation stage
  std::string db_path;
  uint64_t seed = 0;
  Language language = Language::kEnglish;
  std::optional<Mode> tonality_override;  // absent = auto from sentiment
  TimeBase tb;
  int g = 2;  // structure recognition granularity
  std::string key_profiles = "krumhansl";  // tonality template pair in use
  std::string lexicon_path;

  static Config fromString(const std::string& text);
  static Config fromFile(const std::string& path);
  std::string toString() const;
  void saveFile(const std::string& path) const;

  bool operator==(const Config&) const = default;
};

}  // namespace cantus
