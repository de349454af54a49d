#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dycast/io.hpp"
#include "dycast/pipeline.hpp"
#include "dycast/rad.hpp"
#include "dycast/random.hpp"
#include "support/oracles.hpp"

using namespace dycast;

namespace {

LatentPool random_pool(Rng& rng, int count, int dim) {
  FrameSequence vectors(count, dim, 1.0);
  for (int i = 0; i < count; ++i) {
    double sq = 0.0;
    std::vector<double> v(dim);
    for (int d = 0; d < dim; ++d) {
      v[d] = rng.next_gaussian();
      sq += v[d] * v[d];
    }
    for (int d = 0; d < dim; ++d) {
      vectors.at(i, d) = static_cast<float>(v[d] / std::sqrt(sq));
    }
  }
  return make_pool(std::move(vectors));
}

std::vector<std::vector<float>> pool_rows(const LatentPool& pool) {
  std::vector<std::vector<float>> rows;
  for (int i = 0; i < pool.size(); ++i) {
    rows.emplace_back(pool.vectors.row(i).begin(), pool.vectors.row(i).end());
  }
  return rows;
}

}  // namespace

TEST_CASE("make_pool insists on unit rows and matching ids") {
  FrameSequence bad(1, 2, 1.0);
  bad.at(0, 0) = 2.0f;
  CHECK_THROWS_AS(make_pool(std::move(bad)), ValidationError);

  Rng rng(71);
  LatentPool pool = random_pool(rng, 3, 4);
  CHECK(pool.ids == std::vector<std::string>{"0", "1", "2"});
}

TEST_CASE("build_index recovers well-separated clusters") {
  const LatentPool pool = synth_clustered_latents(4, 100, 8, 0.05, 72);
  IvfBuildConfig cfg;
  cfg.n_list = 4;
  cfg.seed = 7;
  const IvfIndex index = build_index(pool, cfg);

  // Every list should hold exactly the members of one synthetic cluster.
  for (const auto& list : index.lists()) {
    REQUIRE(!list.empty());
    const std::string prefix = index.pool().ids[list.front()].substr(0, 2);
    CHECK(list.size() == 25);
    for (std::uint32_t id : list) {
      CHECK(index.pool().ids[id].substr(0, 2) == prefix);
    }
  }
}

TEST_CASE("single-list index holds the whole pool") {
  Rng rng(73);
  const LatentPool pool = random_pool(rng, 20, 4);
  IvfBuildConfig cfg;
  cfg.n_list = 1;
  const IvfIndex index = build_index(pool, cfg);
  CHECK(index.lists()[0].size() == 20);
}

TEST_CASE("build_index validates its configuration") {
  Rng rng(74);
  const LatentPool pool = random_pool(rng, 10, 4);
  IvfBuildConfig cfg;
  cfg.n_list = 11;
  CHECK_THROWS_AS(build_index(pool, cfg), ValidationError);
  cfg.n_list = 4;
  cfg.kmeans_train_size = 50;
  CHECK_THROWS_AS(build_index(pool, cfg), ValidationError);
}

TEST_CASE("index build and serialization are deterministic per seed") {
  Rng rng(75);
  const LatentPool pool = random_pool(rng, 64, 6);
  IvfBuildConfig cfg;
  cfg.n_list = 8;
  cfg.seed = 99;
  cfg.kmeans_train_size = 48;

  std::ostringstream first;
  build_index(pool, cfg).save(first);
  std::ostringstream second;
  build_index(pool, cfg).save(second);
  CHECK(first.str() == second.str());

  cfg.seed = 100;
  std::ostringstream other;
  build_index(pool, cfg).save(other);
  CHECK(other.str() != first.str());
}

TEST_CASE("index round trips through the DYCI container") {
  Rng rng(76);
  const LatentPool pool = random_pool(rng, 32, 5);
  IvfBuildConfig cfg;
  cfg.n_list = 4;
  cfg.n_probe_default = 2;
  const IvfIndex index = build_index(pool, cfg);

  std::ostringstream out;
  index.save(out);
  std::istringstream in(out.str());
  const IvfIndex back = IvfIndex::load(in, pool);
  CHECK(back.n_list() == index.n_list());
  CHECK(back.lists() == index.lists());
  CHECK(back.centroids() == index.centroids());
  CHECK(back.n_probe_default() == 2);

  std::ostringstream again;
  back.save(again);
  CHECK(again.str() == out.str());

  std::istringstream bad_magic("XXXX");
  CHECK_THROWS_AS(IvfIndex::load(bad_magic, pool), FormatError);

  Rng rng2(77);
  const LatentPool wrong_pool = random_pool(rng2, 31, 5);
  std::istringstream in2(out.str());
  CHECK_THROWS_AS(IvfIndex::load(in2, wrong_pool), ValidationError);
}

TEST_CASE("self queries return similarity one") {
  Rng rng(78);
  const LatentPool pool = random_pool(rng, 30, 6);
  IvfBuildConfig cfg;
  cfg.n_list = 5;
  const IvfIndex index = build_index(pool, cfg);
  for (int i = 0; i < pool.size(); ++i) {
    const auto hit = query_nearest(index, pool.vectors.row(i), index.n_list());
    REQUIRE(hit.has_value());
    CHECK(hit->id == static_cast<std::uint32_t>(i));
    CHECK(hit->cosine == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("full-probe retrieval equals brute force") {
  Rng rng(79);
  const LatentPool pool = random_pool(rng, 1000, 8);
  IvfBuildConfig cfg;
  cfg.n_list = 16;
  cfg.seed = 5;
  const IvfIndex index = build_index(pool, cfg);
  const auto rows = pool_rows(pool);

  for (int q = 0; q < 100; ++q) {
    std::vector<double> v(8);
    double sq = 0.0;
    for (double& x : v) {
      x = rng.next_gaussian();
      sq += x * x;
    }
    std::vector<float> query(8);
    for (int d = 0; d < 8; ++d) query[d] = static_cast<float>(v[d] / std::sqrt(sq));

    const auto hit = query_nearest(index, query, index.n_list());
    REQUIRE(hit.has_value());
    CHECK(hit->id == oracle::brute_force_nearest(rows, query));
  }
}

TEST_CASE("recall against brute force never drops as probes widen") {
  Rng rng(80);
  const LatentPool pool = random_pool(rng, 400, 6);
  IvfBuildConfig cfg;
  cfg.n_list = 20;
  cfg.seed = 11;
  const IvfIndex index = build_index(pool, cfg);
  const auto rows = pool_rows(pool);

  std::vector<std::vector<float>> queries;
  for (int q = 0; q < 50; ++q) {
    std::vector<double> v(6);
    double sq = 0.0;
    for (double& x : v) {
      x = rng.next_gaussian();
      sq += x * x;
    }
    std::vector<float> query(6);
    for (int d = 0; d < 6; ++d) query[d] = static_cast<float>(v[d] / std::sqrt(sq));
    queries.push_back(query);
  }

  int prev_recall = -1;
  for (int n_probe = 1; n_probe <= index.n_list(); ++n_probe) {
    int recall = 0;
    for (const auto& query : queries) {
      const auto hit = query_nearest(index, query, n_probe);
      if (hit && hit->id == oracle::brute_force_nearest(rows, query)) ++recall;
    }
    CHECK(recall >= prev_recall);
    prev_recall = recall;
  }
  CHECK(prev_recall == 50);  // full probe is exact
}

TEST_CASE("an orthogonal query reports near-zero similarity without error") {
  FrameSequence vectors(2, 4, 1.0);
  vectors.at(0, 0) = 1.0f;
  vectors.at(1, 1) = 1.0f;
  const LatentPool pool = make_pool(std::move(vectors));
  IvfBuildConfig cfg;
  cfg.n_list = 1;
  const IvfIndex index = build_index(pool, cfg);

  std::vector<float> query{0.0f, 0.0f, 0.0f, 1.0f};
  const auto hit = query_nearest(index, query, 1);
  REQUIRE(hit.has_value());
  CHECK(std::abs(hit->cosine) < 1e-6);
}

TEST_CASE("rad_apply replaces rows exactly when the threshold clears") {
  const LatentPool pool = synth_clustered_latents(3, 60, 8, 0.05, 81);
  IvfBuildConfig cfg;
  cfg.n_list = 3;
  const IvfIndex index = build_index(pool, cfg);

  // Queries are pool members: similarity 1.0 everywhere.
  FrameSequence queries(5, 8, 1.0);
  for (int i = 0; i < 5; ++i) {
    const auto src = pool.vectors.row(i * 7);
    std::copy(src.begin(), src.end(), queries.row(i).begin());
  }

  RadConfig rad;
  rad.n_probe = 3;
  rad.tau = 0.0;
  const auto all = rad_apply(queries, index, rad);
  CHECK(all.replacement_count == 5);
  for (int i = 0; i < 5; ++i) {
    // Replacement is whole-vector substitution of the retrieved row.
    const auto src = pool.vectors.row(i * 7);
    for (int d = 0; d < 8; ++d) CHECK(all.latents.at(i, d) == src[d]);
  }

  // Perturb one query so its best similarity falls below a strict tau.
  FrameSequence offset = queries;
  for (int d = 0; d < 8; ++d) offset.at(0, d) = -offset.at(0, d);
  rad.tau = 99.0;
  const auto gated = rad_apply(offset, index, rad);
  CHECK_FALSE(gated.replaced[0]);
  CHECK(gated.replacement_count == 4);
  for (int d = 0; d < 8; ++d) {
    CHECK(gated.latents.at(0, d) == offset.at(0, d));  // untouched pass-through
  }
}

TEST_CASE("empty probed lists yield no candidate and pass rows through") {
  // Hand-built container: two opposite centroids, every vector filed under
  // the first, so probing near the second centroid scans nothing.
  FrameSequence vectors(3, 4, 1.0);
  for (int i = 0; i < 3; ++i) vectors.at(i, 0) = 1.0f;
  const LatentPool pool = make_pool(std::move(vectors));

  std::ostringstream out;
  dycast::detail::Writer w(out);
  w.write_magic("DYCI");
  w.write_u32(1);   // version
  w.write_u32(2);   // n_list
  w.write_u32(4);   // dim
  w.write_u32(3);   // vectors
  w.write_u32(1);   // n_probe default
  w.write_u64(0);   // seed
  w.write_u32(25);  // iterations
  w.write_u32(3);   // train size
  const float centroids[2][4] = {{1, 0, 0, 0}, {-1, 0, 0, 0}};
  for (const auto& c : centroids) {
    for (float v : c) w.write_f32(v);
  }
  for (std::uint32_t offset : {0u, 3u, 3u}) w.write_u32(offset);
  for (std::uint32_t id : {0u, 1u, 2u}) w.write_u32(id);

  std::istringstream in(out.str());
  const IvfIndex index = IvfIndex::load(in, pool);

  FrameSequence query(1, 4, 1.0);
  query.at(0, 0) = -1.0f;  // nearest centroid is the empty list
  CHECK_FALSE(query_nearest(index, query.row(0), 1).has_value());

  RadConfig rad;
  rad.tau = 0.0;
  rad.n_probe = 1;
  const RadResult result = rad_apply(query, index, rad);
  CHECK(result.replacement_count == 0);
  CHECK(result.latents.data() == query.data());
}

TEST_CASE("raising tau never increases replacements") {
  Rng rng(82);
  const LatentPool pool = random_pool(rng, 200, 6);
  IvfBuildConfig cfg;
  cfg.n_list = 10;
  const IvfIndex index = build_index(pool, cfg);
  const LatentPool query_pool = random_pool(rng, 40, 6);

  RadConfig rad;
  rad.n_probe = 10;
  int prev = std::numeric_limits<int>::max();
  for (double tau : {0.0, 50.0, 80.0, 90.0, 95.0, 99.0, 100.0}) {
    rad.tau = tau;
    const int count = rad_apply(query_pool.vectors, index, rad).replacement_count;
    CHECK(count <= prev);
    prev = count;
  }

  rad.tau = 101.0;
  CHECK_THROWS_AS(rad_apply(query_pool.vectors, index, rad), ValidationError);
}
