// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avtime/corpus.hpp"

namespace avtime {

/// Partition of a corpus into clusters with contiguous ids [0, cluster_count).
struct ClusterAssignment {
  /// Parallel arrays in corpus order.
  std::vector<std::string> clip_ids;
  std::vector<std::size_t> cluster_of;
  std::size_t cluster_count = 0;
  /// Unit-norm centroids, one per cluster. Empty when read back from an
  /// assignment file.
  std::vector<std::vector<double>> centroids;
  /// Mean (1 - cosine) to the assigned centroid, recorded after every update
  /// step. Non-increasing.
  std::vector<double> objective_history;

  std::optional<std::size_t> cluster_of_id(std::string_view id) const;
  /// Member row indices per cluster, in corpus order.
  std::vector<std::vector<std::size_t>> members() const;
};

/// Throws ValidationError unless every cluster id is in range, no cluster is
/// empty and ids are unique.
void validate_assignment(const ClusterAssignment& assignment);

struct ClusterOptions {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  /// Independent k-means++ initialisations; the lowest objective is kept.
  std::size_t restarts = 8;
};

/// k = round(n / 1.3), at least 1 and at most n.
std::size_t default_cluster_count(std::size_t clip_count);

/// Spherical k-means over L2-normalized embeddings with k-means++ seeding.
///
/// Points are visited in clip-id order, so the partition does not depend on
/// corpus row order. A point equidistant to several centroids joins the
/// lowest cluster id. Empty clusters are repaired by moving in the point that
/// is farthest from its current centroid. Stops when no assignment changes or
/// after max_iters update steps.
ClusterAssignment cluster(const Corpus& corpus, const ClusterOptions& options);

struct ClusterStats {
  std::vector<std::size_t> sizes;
  /// Mean pairwise cosine within each cluster; 1.0 for singletons.
  std::vector<double> intra_cosine;
  /// Size-weighted mean of intra_cosine.
  double mean_intra_cosine = 0.0;
};

ClusterStats cluster_stats(const Corpus& corpus, const ClusterAssignment& assignment);

/// JSONL rows {"id": str, "cluster": int}.
void write_assignment(const ClusterAssignment& assignment, const std::filesystem::path& path);
ClusterAssignment read_assignment(const std::filesystem::path& path);

/// {"clip_count", "cluster_count", "sizes", "size_histogram", "mean_intra_cosine"}
std::string stats_summary_json(const ClusterStats& stats);

}  // namespace avtime
