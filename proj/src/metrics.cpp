#include "cantus/metrics.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace cantus {

namespace {

std::map<std::vector<NoteToken>, size_t> ngramCounts(const std::vector<NoteToken>& tokens,
                                                     int n) {
  if (n < 1) throw std::invalid_argument("n-gram metrics: n must be >= 1");
  if (static_cast<int>(tokens.size()) < n) {
    throw std::invalid_argument("n-gram metrics: sequence shorter than n");
  }
  std::map<std::vector<NoteToken>, size_t> counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<NoteToken>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double distN(const std::vector<NoteToken>& tokens, int n) {
  const auto counts = ngramCounts(tokens, n);
  const double total = static_cast<double>(tokens.size() - n + 1);
  return static_cast<double>(counts.size()) / total;
}

double entN(const std::vector<NoteToken>& tokens, int n) {
  const auto counts = ngramCounts(tokens, n);
  const double total = static_cast<double>(tokens.size() - n + 1);
  double entropy = 0.0;
  for (const auto& [gram, count] : counts) {
    const double p = static_cast<double>(count) / total;
    entropy -= p * std::log(p);
  }
  return entropy;
}

double iou(const std::set<int>& predicted, const std::set<int>& truth) {
  if (predicted.empty() && truth.empty()) return 1.0;
  size_t intersection = 0;
  for (const int line : predicted) intersection += truth.count(line);
  const size_t united = predicted.size() + truth.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(united);
}

MetricReport buildMetricReport(
    const std::vector<std::pair<std::string, std::vector<NoteToken>>>& songs) {
  MetricReport report;
  report.mean.name = "mean";
  for (const auto& [name, tokens] : songs) {
    SongMetrics m;
    m.name = name;
    m.dist_1 = distN(tokens, 1);
    m.ent_1 = entN(tokens, 1);
    if (tokens.size() >= 2) {
      m.dist_2 = distN(tokens, 2);
      m.ent_2 = entN(tokens, 2);
    }
    report.mean.dist_1 += m.dist_1;
    report.mean.dist_2 += m.dist_2;
    report.mean.ent_1 += m.ent_1;
    report.mean.ent_2 += m.ent_2;
    report.songs.push_back(std::move(m));
  }
  if (!report.songs.empty()) {
    const double n = static_cast<double>(report.songs.size());
    report.mean.dist_1 /= n;
    report.mean.dist_2 /= n;
    report.mean.ent_1 /= n;
    report.mean.ent_2 /= n;
  }
  return report;
}

std::string renderMetricReport(const MetricReport& report) {
  std::string out = "song\tDist-1\tDist-2\tEnt-1\tEnt-2\n";
  auto row = [&out](const SongMetrics& m) {
    char line[256];
    std::snprintf(line, sizeof line, "%s\t%.4f\t%.4f\t%.4f\t%.4f\n", m.name.c_str(),
                  m.dist_1, m.dist_2, m.ent_1, m.ent_2);
    out += line;
  };
  for (const SongMetrics& m : report.songs) row(m);
  row(report.mean);
  return out;
}

}  // namespace cantus
