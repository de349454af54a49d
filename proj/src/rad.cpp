#include "dycast/rad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <numeric>

#include "dycast/io.hpp"
#include "dycast/random.hpp"

namespace dycast {

namespace {

constexpr char kIndexMagic[4] = {'D', 'Y', 'C', 'I'};
constexpr std::uint32_t kIndexVersion = 1;

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * b[i];
  return sum;
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - b[i];
    sum += diff * diff;
  }
  return sum;
}

void check_unit_rows(const FrameSequence& rows, double tolerance, const char* what) {
  for (int i = 0; i < rows.num_frames(); ++i) {
    double sum = 0.0;
    for (float v : rows.row(i)) sum += static_cast<double>(v) * v;
    if (std::abs(std::sqrt(sum) - 1.0) > tolerance) {
      throw ValidationError(std::string(what) + ": row " + std::to_string(i) +
                            " is not unit norm");
    }
  }
}

}  // namespace

LatentPool make_pool(FrameSequence vectors, std::vector<std::string> ids) {
  check_unit_rows(vectors, 1e-5, "LatentPool");
  LatentPool pool;
  if (ids.empty()) {
    ids.reserve(vectors.num_frames());
    for (int i = 0; i < vectors.num_frames(); ++i) ids.push_back(std::to_string(i));
  } else if (static_cast<int>(ids.size()) != vectors.num_frames()) {
    throw ValidationError("LatentPool: id count must match vector count");
  }
  pool.vectors = std::move(vectors);
  pool.ids = std::move(ids);
  return pool;
}

std::vector<std::string> read_pool_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file " + path, 0);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) ids.push_back(line);
  return ids;
}

void write_pool_ids(const std::string& path, const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot create file " + path);
  for (const auto& id : ids) out << id << '\n';
}

namespace {

// Nearest centroid by Euclidean distance, ties to the lower centroid index.
int nearest_centroid(const std::vector<float>& centroids, int n_list, int dim,
                     std::span<const float> v) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n_list; ++c) {
    const std::span<const float> centroid(centroids.data() +
                                          static_cast<std::size_t>(c) * dim,
                                          static_cast<std::size_t>(dim));
    const double dist = squared_distance(centroid, v);
    if (dist < best_dist) {
      best = c;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

IvfIndex build_index(LatentPool pool, const IvfBuildConfig& cfg) {
  check_unit_rows(pool.vectors, 1e-5, "build_index pool");
  const int num_vectors = pool.size();
  const int dim = pool.dim();
  if (num_vectors < 1) throw ValidationError("build_index: pool must be non-empty");
  if (cfg.n_list < 1 || cfg.n_list > num_vectors) {
    throw ValidationError("build_index: n_list must lie in [1, pool size]");
  }
  if (cfg.kmeans_train_size < 0 || cfg.kmeans_train_size > num_vectors) {
    throw ValidationError("build_index: kmeans_train_size must lie in [0, pool size]");
  }
  if (cfg.kmeans_iterations < 1) {
    throw ValidationError("build_index: kmeans_iterations must be >= 1");
  }
  if (cfg.n_probe_default < 1 || cfg.n_probe_default > cfg.n_list) {
    throw ValidationError("build_index: n_probe_default must lie in [1, n_list]");
  }

  const int train_size = cfg.kmeans_train_size == 0
                             ? num_vectors
                             : std::max(cfg.kmeans_train_size, cfg.n_list);
  Rng rng(cfg.seed);

  // Seeded uniform subsample (partial Fisher-Yates over row indices).
  std::vector<std::uint32_t> rows(num_vectors);
  std::iota(rows.begin(), rows.end(), 0u);
  for (int i = 0; i < train_size; ++i) {
    const auto j = i + static_cast<int>(rng.next_below(num_vectors - i));
    std::swap(rows[i], rows[j]);
  }
  rows.resize(train_size);

  const auto train_row = [&](int i) { return pool.vectors.row(rows[i]); };

  // k-means++ seeding over the subsample.
  std::vector<float> centroids(static_cast<std::size_t>(cfg.n_list) * dim);
  std::vector<double> nearest_dist(train_size, std::numeric_limits<double>::infinity());
  {
    const int first = static_cast<int>(rng.next_below(train_size));
    const auto src = train_row(first);
    std::copy(src.begin(), src.end(), centroids.begin());
  }
  for (int c = 1; c < cfg.n_list; ++c) {
    const std::span<const float> last(centroids.data() +
                                      static_cast<std::size_t>(c - 1) * dim,
                                      static_cast<std::size_t>(dim));
    double total = 0.0;
    for (int i = 0; i < train_size; ++i) {
      nearest_dist[i] = std::min(nearest_dist[i], squared_distance(last, train_row(i)));
      total += nearest_dist[i];
    }
    int chosen = 0;
    if (total > 0.0) {
      double target = rng.next_double() * total;
      for (int i = 0; i < train_size; ++i) {
        target -= nearest_dist[i];
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<int>(rng.next_below(train_size));
    }
    const auto src = train_row(chosen);
    std::copy(src.begin(), src.end(),
              centroids.begin() + static_cast<std::size_t>(c) * dim);
  }

  // Lloyd iterations with deterministic empty-cluster recovery.
  std::vector<int> assignment(train_size, 0);
  for (int iter = 0; iter < cfg.kmeans_iterations; ++iter) {
    for (int i = 0; i < train_size; ++i) {
      assignment[i] = nearest_centroid(centroids, cfg.n_list, dim, train_row(i));
    }
    std::vector<double> sums(static_cast<std::size_t>(cfg.n_list) * dim, 0.0);
    std::vector<int> counts(cfg.n_list, 0);
    for (int i = 0; i < train_size; ++i) {
      const auto v = train_row(i);
      double* dst = sums.data() + static_cast<std::size_t>(assignment[i]) * dim;
      for (int d = 0; d < dim; ++d) dst[d] += v[d];
      ++counts[assignment[i]];
    }
    for (int c = 0; c < cfg.n_list; ++c) {
      if (counts[c] == 0) continue;
      float* dst = centroids.data() + static_cast<std::size_t>(c) * dim;
      const double* src = sums.data() + static_cast<std::size_t>(c) * dim;
      for (int d = 0; d < dim; ++d) {
        dst[d] = static_cast<float>(src[d] / counts[c]);
      }
    }
    // Re-seed empties from the points farthest off their centroids, one per
    // empty cluster, farthest first with index tie-break.
    std::vector<int> empties;
    for (int c = 0; c < cfg.n_list; ++c) {
      if (counts[c] == 0) empties.push_back(c);
    }
    if (!empties.empty()) {
      std::vector<int> order(train_size);
      std::iota(order.begin(), order.end(), 0);
      std::vector<double> dist(train_size);
      for (int i = 0; i < train_size; ++i) {
        const std::span<const float> centroid(
            centroids.data() + static_cast<std::size_t>(assignment[i]) * dim,
            static_cast<std::size_t>(dim));
        dist[i] = squared_distance(centroid, train_row(i));
      }
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return a < b;
      });
      for (std::size_t e = 0; e < empties.size() && e < order.size(); ++e) {
        const auto src = train_row(order[e]);
        std::copy(src.begin(), src.end(),
                  centroids.begin() + static_cast<std::size_t>(empties[e]) * dim);
      }
    }
  }

  IvfIndex index;
  index.n_list_ = cfg.n_list;
  index.dim_ = dim;
  index.build_ = cfg;
  index.build_.kmeans_train_size = train_size;
  index.centroids_ = std::move(centroids);
  index.lists_.assign(cfg.n_list, {});
  for (int i = 0; i < num_vectors; ++i) {
    const int c = nearest_centroid(index.centroids_, cfg.n_list, dim, pool.vectors.row(i));
    index.lists_[c].push_back(static_cast<std::uint32_t>(i));
  }
  index.pool_ = std::move(pool);
  return index;
}

void IvfIndex::save(std::ostream& out) const {
  detail::Writer w(out);
  w.write_magic(kIndexMagic);
  w.write_u32(kIndexVersion);
  w.write_u32(static_cast<std::uint32_t>(n_list_));
  w.write_u32(static_cast<std::uint32_t>(dim_));
  w.write_u32(static_cast<std::uint32_t>(pool_.size()));
  w.write_u32(static_cast<std::uint32_t>(build_.n_probe_default));
  w.write_u64(build_.seed);
  w.write_u32(static_cast<std::uint32_t>(build_.kmeans_iterations));
  w.write_u32(static_cast<std::uint32_t>(build_.kmeans_train_size));
  for (float v : centroids_) w.write_f32(v);
  std::uint32_t offset = 0;
  w.write_u32(offset);
  for (const auto& list : lists_) {
    offset += static_cast<std::uint32_t>(list.size());
    w.write_u32(offset);
  }
  for (const auto& list : lists_) {
    for (std::uint32_t id : list) w.write_u32(id);
  }
}

void IvfIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot create file " + path);
  save(out);
  if (!out) throw ValidationError("write failed for " + path);
}

IvfIndex IvfIndex::load(std::istream& in, LatentPool pool) {
  detail::Reader r(in);
  r.expect_magic(kIndexMagic, "DYCI index file");
  const std::uint32_t version = r.read_u32("version");
  if (version != kIndexVersion) throw FormatError("unsupported index version", 4);
  IvfIndex index;
  index.n_list_ = static_cast<int>(r.read_u32("n_list"));
  index.dim_ = static_cast<int>(r.read_u32("dim"));
  const std::uint32_t num_vectors = r.read_u32("vector count");
  index.build_.n_list = index.n_list_;
  index.build_.n_probe_default = static_cast<int>(r.read_u32("n_probe default"));
  index.build_.seed = r.read_u64("seed");
  index.build_.kmeans_iterations = static_cast<int>(r.read_u32("kmeans iterations"));
  index.build_.kmeans_train_size = static_cast<int>(r.read_u32("kmeans train size"));
  if (index.n_list_ < 1) throw FormatError("n_list must be >= 1", 8);
  if (index.dim_ < 1) throw FormatError("dim must be >= 1", 12);
  if (pool.size() != static_cast<int>(num_vectors) || pool.dim() != index.dim_) {
    throw ValidationError("IvfIndex::load: pool shape does not match index");
  }

  index.centroids_.resize(static_cast<std::size_t>(index.n_list_) * index.dim_);
  for (float& v : index.centroids_) v = r.read_f32("centroids");

  std::vector<std::uint32_t> offsets(index.n_list_ + 1);
  for (auto& v : offsets) v = r.read_u32("list offsets");
  if (offsets.front() != 0 || offsets.back() != num_vectors) {
    throw FormatError("list offsets do not cover the pool", r.offset());
  }
  index.lists_.assign(index.n_list_, {});
  std::vector<bool> seen(num_vectors, false);
  for (int c = 0; c < index.n_list_; ++c) {
    if (offsets[c + 1] < offsets[c]) throw FormatError("list offsets not monotone", r.offset());
    index.lists_[c].resize(offsets[c + 1] - offsets[c]);
    for (auto& id : index.lists_[c]) {
      const std::uint64_t at = r.offset();
      id = r.read_u32("list member ids");
      if (id >= num_vectors || seen[id]) throw FormatError("bad list member id", at);
      seen[id] = true;
    }
  }
  r.expect_eof("DYCI payload");
  index.pool_ = std::move(pool);
  return index;
}

IvfIndex IvfIndex::load(const std::string& path, LatentPool pool) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file " + path, 0);
  return load(in, std::move(pool));
}

std::optional<QueryResult> query_nearest(const IvfIndex& index,
                                         std::span<const float> query, int n_probe) {
  if (static_cast<int>(query.size()) != index.dim()) {
    throw ValidationError("query_nearest: query dimension mismatch");
  }
  if (n_probe < 1 || n_probe > index.n_list()) {
    throw ValidationError("query_nearest: n_probe must lie in [1, n_list]");
  }

  // Rank centroids by distance to the query; probe the closest n_probe.
  std::vector<int> order(index.n_list());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(index.n_list());
  for (int c = 0; c < index.n_list(); ++c) {
    const std::span<const float> centroid(
        index.centroids().data() + static_cast<std::size_t>(c) * index.dim(),
        static_cast<std::size_t>(index.dim()));
    dist[c] = squared_distance(centroid, query);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });

  std::optional<QueryResult> best;
  for (int p = 0; p < n_probe; ++p) {
    for (std::uint32_t id : index.lists()[order[p]]) {
      const double cosine = dot(query, index.pool().vectors.row(static_cast<int>(id)));
      if (!best || cosine > best->cosine ||
          (cosine == best->cosine && id < best->id)) {
        best = QueryResult{id, cosine};
      }
    }
  }
  return best;
}

void validate_rad_config(const RadConfig& cfg) {
  if (cfg.tau < 0.0 || cfg.tau > 100.0) {
    throw ValidationError("RadConfig: tau must lie in [0, 100]");
  }
  if (cfg.n_probe < 1) throw ValidationError("RadConfig: n_probe must be >= 1");
}

RadResult rad_apply(const FrameSequence& quantized, const IvfIndex& index,
                    const RadConfig& cfg) {
  validate_rad_config(cfg);
  if (cfg.n_probe > index.n_list()) {
    throw ValidationError("rad_apply: n_probe must be <= n_list");
  }
  check_unit_rows(quantized, 1e-5, "rad_apply input");
  if (quantized.dim() != index.dim()) {
    throw ValidationError("rad_apply: latent dimension mismatch");
  }

  RadResult result{quantized, std::vector<bool>(quantized.num_frames(), false), 0};
  for (int i = 0; i < quantized.num_frames(); ++i) {
    const auto found = query_nearest(index, quantized.row(i), cfg.n_probe);
    if (!found) continue;  // empty probed lists: pass the row through
    if (100.0 * found->cosine >= cfg.tau) {
      const auto src = index.pool().vectors.row(static_cast<int>(found->id));
      std::copy(src.begin(), src.end(), result.latents.row(i).begin());
      result.replaced[i] = true;
      ++result.replacement_count;
    }
  }
  return result;
}

}  // namespace dycast
