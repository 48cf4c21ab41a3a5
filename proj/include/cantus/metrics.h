#pragma once

#include <set>
#include <string>
#include <vector>

#include "cantus/note.h"

namespace cantus {

// Unique n-grams divided by total n-grams, over full NoteTokens
// (pitch + duration class + rest class). Throws when |tokens| < n.
double distN(const std::vector<NoteToken>& tokens, int n);

// Shannon entropy (natural log) of the empirical n-gram distribution.
double entN(const std::vector<NoteToken>& tokens, int n);

// Intersection over union of chorus line sets; both empty counts as 1.0.
double iou(const std::set<int>& predicted, const std::set<int>& truth);

struct SongMetrics {
  std::string name;
  double dist_1 = 0.0;
  double dist_2 = 0.0;
  double ent_1 = 0.0;
  double ent_2 = 0.0;
};

struct MetricReport {
  std::vector<SongMetrics> songs;
  SongMetrics mean;  // name "mean"
};

MetricReport buildMetricReport(const std::vector<std::pair<std::string,
                                                           std::vector<NoteToken>>>& songs);

// Tab-separated table: one row per song plus a mean row.
std::string renderMetricReport(const MetricReport& report);

}  // namespace cantus
