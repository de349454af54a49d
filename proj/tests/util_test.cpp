#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dycast/duration.hpp"
#include "dycast/rad.hpp"
#include "dycast/random.hpp"

using namespace dycast;

TEST_CASE("rng streams are reproducible and split streams diverge") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng base(7);
  Rng left = base.split(1);
  Rng right = base.split(2);
  int equal = 0;
  for (int i = 0; i < 64; ++i) {
    if (left.next_u64() == right.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("uniform and gaussian draws have sane moments") {
  Rng rng(1234);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));

  double gsum = 0.0;
  double gsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.next_gaussian();
    gsum += g;
    gsq += g * g;
  }
  CHECK(gsum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(gsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma and poisson samplers match their means") {
  Rng rng(77);
  const int n = 50000;
  double gamma_sum = 0.0;
  for (int i = 0; i < n; ++i) gamma_sum += rng.next_gamma(0.5, 4.0);
  CHECK(gamma_sum / n == doctest::Approx(2.0).epsilon(0.05));

  long long poisson_sum = 0;
  for (int i = 0; i < n; ++i) poisson_sum += rng.next_poisson(6.5);
  CHECK(static_cast<double>(poisson_sum) / n == doctest::Approx(6.5).epsilon(0.03));

  // The additive split keeps large rates exact in expectation.
  long long large = 0;
  for (int i = 0; i < 2000; ++i) large += rng.next_poisson(900.0);
  CHECK(static_cast<double>(large) / 2000.0 == doctest::Approx(900.0).epsilon(0.01));
}

TEST_CASE("softplus maps raw reals onto positive free means") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(softplus(50.0) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(softplus(-50.0) == doctest::Approx(std::exp(-50.0)).epsilon(1e-6));
  CHECK(softplus(-3.0) > 0.0);
}

TEST_CASE("digamma matches reference values") {
  // psi(1) = -gamma, psi(2) = 1 - gamma, psi(1/2) = -gamma - 2 ln 2.
  const double euler_gamma = 0.57721566490153286;
  CHECK(digamma(1.0) == doctest::Approx(-euler_gamma).epsilon(1e-12));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - euler_gamma).epsilon(1e-12));
  CHECK(digamma(0.5) ==
        doctest::Approx(-euler_gamma - 2.0 * std::log(2.0)).epsilon(1e-12));
  // psi(n) = -gamma + H_{n-1}.
  double harmonic = 0.0;
  for (int k = 1; k <= 24; ++k) harmonic += 1.0 / k;
  CHECK(digamma(25.0) == doctest::Approx(harmonic - euler_gamma).epsilon(1e-13));
  CHECK_THROWS_AS(digamma(0.0), ValidationError);
}

TEST_CASE("pool id sidecars round trip") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "dycast-ids-test.txt";
  const std::vector<std::string> ids{"utt1_frame3", "utt1_frame9", "utt2_frame0"};
  write_pool_ids(path.string(), ids);
  CHECK(read_pool_ids(path.string()) == ids);
  fs::remove(path);
}

TEST_CASE("kmeans survives duplicate-only pools via empty-cluster reseeding") {
  FrameSequence vectors(5, 4, 1.0);
  for (int i = 0; i < 5; ++i) vectors.at(i, 0) = 1.0f;  // five identical rows
  IvfBuildConfig cfg;
  cfg.n_list = 3;
  const IvfIndex index = build_index(make_pool(std::move(vectors)), cfg);
  std::size_t total = 0;
  for (const auto& list : index.lists()) total += list.size();
  CHECK(total == 5);
  const auto hit = query_nearest(index, std::vector<float>{1, 0, 0, 0}, 3);
  REQUIRE(hit.has_value());
  CHECK(hit->cosine == doctest::Approx(1.0));
  CHECK(hit->id == 0);  // lowest id wins the tie among duplicates
}
