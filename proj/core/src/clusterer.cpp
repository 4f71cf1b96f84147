// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/clusterer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "avtime/error.hpp"
#include "avtime/rng.hpp"
#include "jsonl.hpp"

namespace avtime {
namespace {

using detail::json;

// Row-major n x dim block of unit vectors.
struct PointSet {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  const double* row(std::size_t i) const { return values.data() + i * dim; }
  double* row(std::size_t i) { return values.data() + i * dim; }
};

double dot(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

void normalize(double* v, std::size_t dim) {
  const double norm = std::sqrt(dot(v, v, dim));
  if (norm == 0.0) return;
  for (std::size_t i = 0; i < dim; ++i) v[i] /= norm;
}

// k-means++ seeding with cosine distance 1 - cos as the D^2 weight.
PointSet seed_centroids(const PointSet& x, std::size_t k, Rng& rng) {
  PointSet c{k, x.dim, std::vector<double>(k * x.dim)};
  std::vector<double> weight(x.n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(x.n, false);

  auto take = [&](std::size_t p, std::size_t slot) {
    chosen[p] = true;
    std::copy_n(x.row(p), x.dim, c.row(slot));
    for (std::size_t i = 0; i < x.n; ++i) {
      const double d = chosen[i] ? 0.0 : std::max(0.0, 1.0 - dot(x.row(i), c.row(slot), x.dim));
      weight[i] = std::min(weight[i], d);
    }
  };

  take(rng.uniform_index(x.n), 0);
  for (std::size_t slot = 1; slot < k; ++slot) {
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    std::size_t pick = x.n;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < x.n; ++i) {
        if (chosen[i] || weight[i] <= 0.0) continue;
        acc += weight[i];
        pick = i;
        if (r < acc) break;
      }
    }
    if (pick == x.n) {
      // Every remaining point coincides with a centroid; choose uniformly
      // among the unchosen ones.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < x.n; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[rng.uniform_index(rest.size())];
    }
    take(pick, slot);
  }
  return c;
}

struct LloydRun {
  std::vector<std::size_t> label;
  PointSet centroids;
  std::vector<double> history;
};

LloydRun lloyd(const PointSet& x, std::size_t k, std::size_t max_iters, Rng& rng) {
  PointSet c = seed_centroids(x, k, rng);
  const std::size_t n = x.n;

  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(n, kUnassigned);
  std::vector<double> sim(n, 0.0);
  std::vector<std::size_t> sizes(k, 0);
  std::vector<double> history;

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      std::size_t best = 0;
      double best_sim = dot(x.row(p), c.row(0), x.dim);
      for (std::size_t j = 1; j < k; ++j) {
        const double s = dot(x.row(p), c.row(j), x.dim);
        if (s > best_sim) {
          best_sim = s;
          best = j;
        }
      }
      changed |= label[p] != best;
      label[p] = best;
      sim[p] = best_sim;
      ++sizes[best];
    }
    if (!changed) break;

    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t worst = n;
      for (std::size_t p = 0; p < n; ++p) {
        if (sizes[label[p]] > 1 && (worst == n || sim[p] < sim[worst])) worst = p;
      }
      --sizes[label[worst]];
      label[worst] = j;
      sizes[j] = 1;
      sim[worst] = 1.0;
      std::copy_n(x.row(worst), x.dim, c.row(j));
    }

    std::vector<double> sums(k * x.dim, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      double* s = sums.data() + label[p] * x.dim;
      const double* v = x.row(p);
      for (std::size_t d = 0; d < x.dim; ++d) s[d] += v[d];
    }
    for (std::size_t j = 0; j < k; ++j) {
      double* s = sums.data() + j * x.dim;
      if (dot(s, s, x.dim) == 0.0) continue;  // antipodal members: keep the old centroid
      normalize(s, x.dim);
      std::copy_n(s, x.dim, c.row(j));
    }

    double objective = 0.0;
    for (std::size_t p = 0; p < n; ++p) objective += 1.0 - dot(x.row(p), c.row(label[p]), x.dim);
    history.push_back(objective / static_cast<double>(n));
  }

  return {std::move(label), std::move(c), std::move(history)};
}

}  // namespace

std::optional<std::size_t> ClusterAssignment::cluster_of_id(std::string_view id) const {
  for (std::size_t i = 0; i < clip_ids.size(); ++i)
    if (clip_ids[i] == id) return cluster_of[i];
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> ClusterAssignment::members() const {
  std::vector<std::vector<std::size_t>> groups(cluster_count);
  for (std::size_t i = 0; i < cluster_of.size(); ++i) groups[cluster_of[i]].push_back(i);
  return groups;
}

void validate_assignment(const ClusterAssignment& a) {
  if (a.clip_ids.size() != a.cluster_of.size()) {
    throw ValidationError("assignment: id and cluster arrays differ in length");
  }
  std::unordered_set<std::string_view> ids;
  std::vector<std::size_t> sizes(a.cluster_count, 0);
  for (std::size_t i = 0; i < a.clip_ids.size(); ++i) {
    if (!ids.insert(a.clip_ids[i]).second) {
      throw ValidationError("assignment: clip \"" + a.clip_ids[i] + "\" appears twice");
    }
    if (a.cluster_of[i] >= a.cluster_count) {
      throw ValidationError("assignment: cluster id " + std::to_string(a.cluster_of[i]) +
                            " out of range");
    }
    ++sizes[a.cluster_of[i]];
  }
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] == 0) throw ValidationError("assignment: cluster " + std::to_string(c) + " is empty");
  }
}

std::size_t default_cluster_count(std::size_t clip_count) {
  if (clip_count == 0) return 0;
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(clip_count) / 1.3));
  return std::clamp<std::size_t>(k, 1, clip_count);
}

ClusterAssignment cluster(const Corpus& corpus, const ClusterOptions& options) {
  if (!corpus.has_embeddings()) {
    throw ValidationError("cluster: corpus has no embeddings");
  }
  const std::size_t n = corpus.size();
  const std::size_t k = options.k;
  if (k < 1 || k > n) {
    throw ValidationError("cluster: k = " + std::to_string(k) + " must be in [1, " +
                          std::to_string(n) + "]");
  }
  if (options.max_iters < 1) throw ValidationError("cluster: max_iters must be positive");
  if (options.restarts < 1) throw ValidationError("cluster: restarts must be positive");

  // Canonical (id-sorted) order makes the result independent of row order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return corpus[a].id < corpus[b].id; });

  PointSet x{n, corpus.embedding_dim(), std::vector<double>(n * corpus.embedding_dim())};
  for (std::size_t p = 0; p < n; ++p) {
    std::copy(corpus[order[p]].embedding->begin(), corpus[order[p]].embedding->end(), x.row(p));
    normalize(x.row(p), x.dim);
  }

  // Independent restarts; the lowest final objective wins, ties to the earliest.
  LloydRun best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, r, 0));
    LloydRun run = lloyd(x, k, options.max_iters, rng);
    if (r == 0 || run.history.back() < best.history.back()) best = std::move(run);
  }
  const PointSet& c = best.centroids;
  const std::vector<std::size_t>& label = best.label;

  ClusterAssignment result;
  result.cluster_count = k;
  result.clip_ids.resize(n);
  result.cluster_of.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    result.clip_ids[order[p]] = corpus[order[p]].id;
    result.cluster_of[order[p]] = label[p];
  }
  result.centroids.resize(k);
  for (std::size_t j = 0; j < k; ++j) result.centroids[j].assign(c.row(j), c.row(j) + x.dim);
  result.objective_history = std::move(best.history);
  return result;
}

ClusterStats cluster_stats(const Corpus& corpus, const ClusterAssignment& assignment) {
  validate_assignment(assignment);
  ClusterStats stats;
  stats.sizes.assign(assignment.cluster_count, 0);
  for (std::size_t c : assignment.cluster_of) ++stats.sizes[c];
  stats.intra_cosine.assign(assignment.cluster_count, 1.0);

  if (corpus.has_embeddings()) {
    const std::size_t dim = corpus.embedding_dim();
    std::vector<double> sums(assignment.cluster_count * dim, 0.0);
    std::vector<double> self(assignment.cluster_count, 0.0);
    for (std::size_t i = 0; i < assignment.clip_ids.size(); ++i) {
      const auto row = corpus.index_of(assignment.clip_ids[i]);
      if (!row) throw ValidationError("cluster_stats: unknown clip \"" + assignment.clip_ids[i] + "\"");
      std::vector<double> v = *corpus[*row].embedding;
      normalize(v.data(), dim);
      double* s = sums.data() + assignment.cluster_of[i] * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += v[d];
      self[assignment.cluster_of[i]] += dot(v.data(), v.data(), dim);
    }
    // Sum over ordered pairs i != j of x_i . x_j = |sum x|^2 - sum |x_i|^2.
    for (std::size_t c = 0; c < assignment.cluster_count; ++c) {
      const auto s = static_cast<double>(stats.sizes[c]);
      if (stats.sizes[c] < 2) continue;
      const double* sum = sums.data() + c * dim;
      const double pair_sum = dot(sum, sum, dim) - self[c];
      stats.intra_cosine[c] = std::clamp(pair_sum / (s * (s - 1.0)), -1.0, 1.0);
    }
  }

  double weighted = 0.0, total = 0.0;
  for (std::size_t c = 0; c < assignment.cluster_count; ++c) {
    weighted += stats.intra_cosine[c] * static_cast<double>(stats.sizes[c]);
    total += static_cast<double>(stats.sizes[c]);
  }
  stats.mean_intra_cosine = total > 0.0 ? weighted / total : 0.0;
  return stats;
}

void write_assignment(const ClusterAssignment& assignment, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (std::size_t i = 0; i < assignment.clip_ids.size(); ++i) {
    json rec = json::object();
    rec["id"] = assignment.clip_ids[i];
    rec["cluster"] = assignment.cluster_of[i];
    out << detail::dump_line(rec) << '\n';
  }
  detail::finish_write(out, path);
}

ClusterAssignment read_assignment(const std::filesystem::path& path) {
  ClusterAssignment a;
  detail::for_each_jsonl(path, [&](const json& rec, std::size_t line_no) {
    const std::string ctx = detail::where(path, line_no);
    a.clip_ids.push_back(detail::require<std::string>(rec, "id", ctx));
    const auto it = rec.find("cluster");
    if (it == rec.end() || !it->is_number_unsigned()) {
      throw ValidationError(ctx + ": \"cluster\" must be a non-negative integer");
    }
    a.cluster_of.push_back(it->get<std::size_t>());
    a.cluster_count = std::max(a.cluster_count, a.cluster_of.back() + 1);
  });
  validate_assignment(a);
  return a;
}

std::string stats_summary_json(const ClusterStats& stats) {
  json out = json::object();
  std::size_t clips = 0;
  std::map<std::size_t, std::size_t> histogram;
  for (std::size_t s : stats.sizes) {
    clips += s;
    ++histogram[s];
  }
  json hist = json::object();
  for (const auto& [size, count] : histogram) hist[std::to_string(size)] = count;
  out["clip_count"] = clips;
  out["cluster_count"] = stats.sizes.size();
  out["sizes"] = stats.sizes;
  out["size_histogram"] = hist;
  out["mean_intra_cosine"] = stats.mean_intra_cosine;
  return out.dump(2);
}

}  // namespace avtime
