#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dycast/core.hpp"

namespace dycast {

// A store of unit-norm continuous latents with opaque provenance ids
// (defaulting to the row number rendered as text).
struct LatentPool {
  FrameSequence vectors;          // M x L
  std::vector<std::string> ids;   // M entries

  int size() const { return vectors.num_frames(); }
  int dim() const { return vectors.dim(); }
};

LatentPool make_pool(FrameSequence vectors, std::vector<std::string> ids = {});

// Sidecar id list: one id per line, row order.
std::vector<std::string> read_pool_ids(const std::string& path);
void write_pool_ids(const std::string& path, const std::vector<std::string>& ids);

struct IvfBuildConfig {
  int n_list = 16;
  int kmeans_train_size = 0;      // 0 means the whole pool
  int kmeans_iterations = 25;
  std::uint64_t seed = 0;
  int n_probe_default = 1;
};

// Inverted-file index: coarse k-means centroids plus per-centroid lists of
// pool row ids. The pool vectors are kept alongside so queries are
// self-contained; the serialized container ("DYCI") holds only the
// structure and pairs with the pool file.
class IvfIndex {
 public:
  int n_list() const { return n_list_; }
  int dim() const { return dim_; }
  int num_vectors() const { return pool_.size(); }
  int n_probe_default() const { return build_.n_probe_default; }
  const LatentPool& pool() const { return pool_; }
  const std::vector<float>& centroids() const { return centroids_; }
  const std::vector<std::vector<std::uint32_t>>& lists() const { return lists_; }

  // Structure only: magic "DYCI" | u32 version | parameters | centroids |
  // list offsets | member ids.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  // Rebinds a saved structure to its pool; shape and membership must agree.
  static IvfIndex load(std::istream& in, LatentPool pool);
  static IvfIndex load(const std::string& path, LatentPool pool);

  friend IvfIndex build_index(LatentPool pool, const IvfBuildConfig& cfg);

 private:
  IvfIndex() = default;
  int n_list_ = 0;
  int dim_ = 0;
  IvfBuildConfig build_;
  std::vector<float> centroids_;  // n_list x dim row-major
  std::vector<std::vector<std::uint32_t>> lists_;
  LatentPool pool_;
};

// Coarse clustering by k-means++ seeding and a fixed number of Lloyd
// iterations over a seeded uniform subsample, then every pool vector is
// filed under its nearest centroid. An emptied centroid is re-seeded from
// the training point farthest from its assignment. Deterministic given
// (seed, data, parameters).
IvfIndex build_index(LatentPool pool, const IvfBuildConfig& cfg);

struct QueryResult {
  std::uint32_t id = 0;       // pool row
  double cosine = 0.0;
};

// Scans the n_probe nearest centroids' lists exhaustively and returns the
// highest-cosine candidate (ties to the lowest row id). With
// n_probe == n_list this equals brute-force search over the pool. Probing
// only empty lists yields no candidate.
std::optional<QueryResult> query_nearest(const IvfIndex& index,
                                         std::span<const float> query, int n_probe);

struct RadConfig {
  double tau = 97.0;  // percent cosine; replace iff 100*cos >= tau
  int n_probe = 1;
};

void validate_rad_config(const RadConfig& cfg);

// Threshold-gated replacement: each row is swapped for its retrieved
// continuous neighbor when the similarity clears tau, otherwise passed
// through unchanged.
struct RadResult {
  FrameSequence latents;
  std::vector<bool> replaced;
  int replacement_count = 0;
};

RadResult rad_apply(const FrameSequence& quantized, const IvfIndex& index,
                    const RadConfig& cfg);

}  // namespace dycast
