#include "cantus/config.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cantus {

namespace {

std::string trim(const std::string& s) {
  const size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string tendencyText(const std::map<int, std::set<int>>& tendency) {
  std::string out;
  for (const auto& [pc, targets] : tendency) {
    if (!out.empty()) out += ' ';
    out += std::to_string(pc) + ":";
    bool first = true;
    for (const int t : targets) {
      if (!first) out += ',';
      out += std::to_string(t);
      first = false;
    }
  }
  return out;
}

std::map<int, std::set<int>> parseTendency(const std::string& text) {
  std::map<int, std::set<int>> tendency;
  std::istringstream in(text);
  std::string entry;
  while (in >> entry) {
    const size_t colon = entry.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("config: bad tendency entry '" + entry + "'");
    }
    const int pc = std::stoi(entry.substr(0, colon));
    std::set<int>& targets = tendency[pc];
    std::istringstream list(entry.substr(colon + 1));
    std::string item;
    while (std::getline(list, item, ',')) {
      if (!item.empty()) targets.insert(std::stoi(item));
    }
  }
  return tendency;
}

int parseInt(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + value + "'");
  }
}

double parseDouble(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
  }
}

}  // namespace

Config Config::fromString(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value: '" + raw + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "first_note_low") {
      config.guidelines.first_note_low = parseInt(key, value);
    } else if (key == "first_note_high") {
      config.guidelines.first_note_high = parseInt(key, value);
    } else if (key == "max_leap") {
      config.guidelines.max_leap = parseInt(key, value);
    } else if (key == "tendency") {
      config.guidelines.tendency = parseTendency(value);
    } else if (key == "tendency_bonus") {
      config.guidelines.tendency_bonus = parseDouble(key, value);
    } else if (key == "top_k") {
      config.guidelines.top_k = parseInt(key, value);
    } else if (key == "melisma_prob") {
      config.guidelines.melisma_prob = parseDouble(key, value);
    } else if (key == "max_extra_notes") {
      config.guidelines.max_extra_notes = parseInt(key, value);
    } else if (key == "model_order") {
      config.model_order = parseInt(key, value);
    } else if (key == "model_alpha") {
      config.model_alpha = parseDouble(key, value);
    } else if (key == "gen_top_k") {
      config.gen_top_k = parseInt(key, value);
    } else if (key == "db_path") {
      config.db_path = value;
    } else if (key == "seed") {
      config.seed = std::strtoull(value.c_str(), nullptr, 10);
    } else if (key == "language") {
      config.language = parseLanguage(value);
    } else if (key == "tonality") {
      config.tonality_override =
          value == "auto" ? std::nullopt : std::optional<Mode>(parseMode(value));
    } else if (key == "ticks_per_quarter") {
      config.tb.ticks_per_quarter = parseInt(key, value);
    } else if (key == "beats_per_bar") {
      config.tb.beats_per_bar = parseInt(key, value);
    } else if (key == "g") {
      config.g = parseInt(key, value);
    } else if (key == "key_profiles") {
      config.key_profiles = value;
    } else if (key == "lexicon_path") {
      config.lexicon_path = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "' on line " +
                                  std::to_string(line_no));
    }
  }

  if (config.guidelines.first_note_low >= config.guidelines.first_note_high) {
    throw std::invalid_argument("config: first_note_low must be below first_note_high");
  }
  if (config.guidelines.max_leap <= 0) {
    throw std::invalid_argument("config: max_leap must be positive");
  }
  if (config.guidelines.melisma_prob < 0.0 || config.guidelines.melisma_prob > 1.0) {
    throw std::invalid_argument("config: melisma_prob must be in [0, 1]");
  }
  if (config.tb.ticks_per_quarter <= 0 || config.tb.ticks_per_quarter % 4 != 0) {
    throw std::invalid_argument("config: ticks_per_quarter must be a positive multiple of 4");
  }
  if (config.key_profiles != "krumhansl") {
    throw std::invalid_argument("config: unsupported key_profiles '" +
                                config.key_profiles + "'");
  }
  return config;
}

Config Config::fromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fromString(buffer.str());
}

std::string Config::toString() const {
  std::ostringstream out;
  char number[64];
  out << "first_note_low=" << guidelines.first_note_low << "\n";
  out << "first_note_high=" << guidelines.first_note_high << "\n";
  out << "max_leap=" << guidelines.max_leap << "\n";
  out << "tendency=" << tendencyText(guidelines.tendency) << "\n";
  std::snprintf(number, sizeof number, "%.17g", guidelines.tendency_bonus);
  out << "tendency_bonus=" << number << "\n";
  out << "top_k=" << guidelines.top_k << "\n";
  std::snprintf(number, sizeof number, "%.17g", guidelines.melisma_prob);
  out << "melisma_prob=" << number << "\n";
  out << "max_extra_notes=" << guidelines.max_extra_notes << "\n";
  out << "model_order=" << model_order << "\n";
  std::snprintf(number, sizeof number, "%.17g", model_alpha);
  out << "model_alpha=" << number << "\n";
  out << "gen_top_k=" << gen_top_k << "\n";
  out << "db_path=" << db_path << "\n";
  out << "seed=" << seed << "\n";
  out << "language=" << languageName(language) << "\n";
  out << "tonality=" << (tonality_override ? modeName(*tonality_override) : "auto") << "\n";
  out << "ticks_per_quarter=" << tb.ticks_per_quarter << "\n";
  out << "beats_per_bar=" << tb.beats_per_bar << "\n";
  out << "g=" << g << "\n";
  out << "key_profiles=" << key_profiles << "\n";
  out << "lexicon_path=" << lexicon_path << "\n";
  return out.str();
}

void Config::saveFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << toString();
}

}  // namespace cantus
