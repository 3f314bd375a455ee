// Copyright 2026 The RadarNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Confusion matrices, class-balanced mean accuracy, multi-run aggregation and
// the distance-weighted kNN baseline.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radarnas/common.hpp"

namespace radarnas::eval {

using Matrix4 = std::array<std::array<double, kNumClasses>, kNumClasses>;

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  std::int64_t row_total(int t) const {
    std::int64_t n = 0;
    for (auto v : counts[t]) n += v;
    return n;
  }

  // Row-normalised; rows of empty classes stay zero.
  Matrix4 normalized() const {
    Matrix4 out{};
    for (int t = 0; t < kNumClasses; ++t) {
      const auto n = row_total(t);
      if (n == 0) continue;
      for (int p = 0; p < kNumClasses; ++p) {
        out[t][p] = static_cast<double>(counts[t][p]) / static_cast<double>(n);
      }
    }
    return out;
  }
};

inline ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truth) {
  if (preds.size() != truth.size()) {
    throw LengthMismatch("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= kNumClasses || truth[i] < 0 || truth[i] >= kNumClasses) {
      throw LengthMismatch("confusion: label out of range at index " + std::to_string(i));
    }
    ++cm.counts[truth[i]][preds[i]];
  }
  return cm;
}

// Mean of per-class recall, (1/C) sum_c p_c / N_c.
inline double mean_accuracy(const ConfusionMatrix& cm) {
  const Matrix4 norm = cm.normalized();
  double sum = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (cm.row_total(c) == 0) {
      throw EmptyClass("mean_accuracy: class " + std::string(category_name(category_from_label(c))) +
                       " has no samples");
    }
    sum += norm[c][c];
  }
  return sum / kNumClasses;
}

// Same average restricted to classes that have samples; used for model
// selection on small validation splits.
inline double mean_accuracy_present(const ConfusionMatrix& cm) {
  const Matrix4 norm = cm.normalized();
  double sum = 0;
  int present = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (cm.row_total(c) == 0) continue;
    sum += norm[c][c];
    ++present;
  }
  return present ? sum / present : 0.0;
}

struct RunAggregate {
  Matrix4 mean{};
  Matrix4 variance{};  // population variance
  std::array<std::array<bool, kNumClasses>, kNumClasses> significant{};
  double mean_accuracy = 0;
  double accuracy_variance = 0;
  bool any_significant = false;
};

inline constexpr double kSignificantVariance = 0.05;

inline RunAggregate aggregate_runs(std::span<const ConfusionMatrix> cms) {
  if (cms.size() < 2) throw InvalidConfig("aggregate_runs needs at least two matrices");
  RunAggregate agg;
  const double n = static_cast<double>(cms.size());
  std::vector<Matrix4> norms;
  std::vector<double> accs;
  for (const auto& cm : cms) {
    norms.push_back(cm.normalized());
    accs.push_back(mean_accuracy_present(cm));
  }
  for (int t = 0; t < kNumClasses; ++t) {
    for (int p = 0; p < kNumClasses; ++p) {
      double s = 0;
      for (const auto& m : norms) s += m[t][p];
      const double mu = s / n;
      double v = 0;
      for (const auto& m : norms) v += (m[t][p] - mu) * (m[t][p] - mu);
      agg.mean[t][p] = mu;
      agg.variance[t][p] = v / n;
      agg.significant[t][p] = agg.variance[t][p] > kSignificantVariance;
      agg.any_significant = agg.any_significant || agg.significant[t][p];
    }
  }
  double s = 0;
  for (double a : accs) s += a;
  agg.mean_accuracy = s / n;
  double v = 0;
  for (double a : accs) v += (a - agg.mean_accuracy) * (a - agg.mean_accuracy);
  agg.accuracy_variance = v / n;
  return agg;
}

inline void write_matrix_csv(std::ostream& os, const Matrix4& m) {
  os << "true\\pred";
  for (Category c : kAllCategories) os << ',' << category_name(c);
  os << '\n';
  for (int t = 0; t < kNumClasses; ++t) {
    os << category_name(category_from_label(t));
    for (int p = 0; p < kNumClasses; ++p) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",%.6f", m[t][p]);
      os << buf;
    }
    os << '\n';
  }
}

inline std::string format_matrix_table(const Matrix4& m, const std::string& title = {}) {
  std::string out;
  char buf[64];
  if (!title.empty()) out += title + "\n";
  std::snprintf(buf, sizeof(buf), "%-13s", "true\\pred");
  out += buf;
  for (Category c : kAllCategories) {
    std::snprintf(buf, sizeof(buf), "%13s", std::string(category_name(c)).c_str());
    out += buf;
  }
  out += "\n";
  for (int t = 0; t < kNumClasses; ++t) {
    std::snprintf(buf, sizeof(buf), "%-13s", std::string(category_name(category_from_label(t))).c_str());
    out += buf;
    for (int p = 0; p < kNumClasses; ++p) {
      std::snprintf(buf, sizeof(buf), "%13.3f", m[t][p]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// kNN

struct LabeledPoint {
  std::vector<float> features;
  int label = 0;
};

inline double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return s;
}

// Votes of the k nearest training points (L2), each weighted by
// 1 / (distance + 1e-9). Candidates are ranked by (distance, label) so the
// result does not depend on the order of the training set; vote ties go to
// the lowest label.
inline int knn_classify(std::span<const LabeledPoint> train, std::span<const float> query, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw InvalidConfig("knn: k must lie in [1, training size]");
  }
  std::vector<std::pair<double, int>> dist;
  dist.reserve(train.size());
  for (const auto& p : train) {
    if (p.features.size() != query.size()) throw ShapeMismatch("knn: feature length mismatch");
    dist.emplace_back(std::sqrt(squared_distance(p.features, query)), p.label);
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::array<double, kNumClasses> votes{};
  for (int i = 0; i < k; ++i) votes[dist[i].second] += 1.0 / (dist[i].first + 1e-9);
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return best;
}

inline constexpr std::array<int, 5> kKnnCandidates = {3, 4, 5, 7, 10};

struct KnnSelection {
  int best_k = 0;
  std::vector<std::pair<int, double>> validation_accuracy;  // (k, mean accuracy)
};

// Predicts every query for each k in one pass over the distances.
inline std::vector<std::vector<int>> knn_predict_many(std::span<const LabeledPoint> train,
                                                      std::span<const LabeledPoint> queries,
                                                      std::span<const int> ks) {
  std::vector<std::vector<int>> preds(ks.size(), std::vector<int>(queries.size()));
  const int kmax = *std::max_element(ks.begin(), ks.end());
  if (kmax < 1 || static_cast<std::size_t>(kmax) > train.size()) {
    throw InvalidConfig("knn: k must lie in [1, training size]");
  }
  std::vector<std::pair<double, int>> dist(train.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      dist[i] = {std::sqrt(squared_distance(train[i].features, queries[q].features)), train[i].label};
    }
    std::partial_sort(dist.begin(), dist.begin() + kmax, dist.end());
    for (std::size_t j = 0; j < ks.size(); ++j) {
      std::array<double, kNumClasses> votes{};
      for (int i = 0; i < ks[j]; ++i) votes[dist[i].second] += 1.0 / (dist[i].first + 1e-9);
      int best = 0;
      for (int c = 1; c < kNumClasses; ++c) {
        if (votes[c] > votes[best]) best = c;
      }
      preds[j][q] = best;
    }
  }
  return preds;
}

inline std::vector<int> labels_of(std::span<const LabeledPoint> pts) {
  std::vector<int> out;
  for (const auto& p : pts) out.push_back(p.label);
  return out;
}

// Picks k from the candidate set by validation mean accuracy; ties go to the
// smaller k.
inline KnnSelection knn_select_k(std::span<const LabeledPoint> train,
                                 std::span<const LabeledPoint> val,
                                 std::span<const int> candidates = kKnnCandidates) {
  if (train.empty() || val.empty()) throw InvalidConfig("knn_select_k needs nonempty splits");
  const auto preds = knn_predict_many(train, val, candidates);
  const std::vector<int> truth = labels_of(val);
  KnnSelection sel;
  double best = -1;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const double acc = mean_accuracy_present(confusion(preds[j], truth));
    sel.validation_accuracy.emplace_back(candidates[j], acc);
    if (acc > best || (acc == best && candidates[j] < sel.best_k)) {
      best = acc;
      sel.best_k = candidates[j];
    }
  }
  return sel;
}

}  // namespace radarnas::eval
