#include <doctest.h>

#include <sstream>

#include "dycast/chunking.hpp"
#include "dycast/random.hpp"

using namespace dycast;

namespace {

FrameSequence counting_frames(int num_frames, int dim) {
  FrameSequence f(num_frames, dim, 50.0);
  for (int t = 0; t < num_frames; ++t) {
    for (int d = 0; d < dim; ++d) f.at(t, d) = static_cast<float>(t * dim + d);
  }
  return f;
}

}  // namespace

TEST_CASE("downsample selects the last frame of each chunk") {
  const FrameSequence f = counting_frames(4, 2);
  const FrameSequence pooled = downsample(f, {{1, 3}});
  REQUIRE(pooled.num_frames() == 2);
  CHECK(pooled.at(0, 0) == f.at(1, 0));
  CHECK(pooled.at(0, 1) == f.at(1, 1));
  CHECK(pooled.at(1, 0) == f.at(3, 0));

  const FrameSequence identity = downsample(f, {{0, 1, 2, 3}});
  CHECK(identity.data() == f.data());

  const FrameSequence last_only = downsample(f, {{3}});
  REQUIRE(last_only.num_frames() == 1);
  CHECK(last_only.at(0, 0) == f.at(3, 0));

  CHECK_THROWS_AS(downsample(f, {{1, 5}}), ValidationError);
}

TEST_CASE("upsample repeats each row by its duration") {
  FrameSequence z(2, 1, 50.0);
  z.at(0, 0) = 1.0f;
  z.at(1, 0) = 2.0f;
  const FrameSequence out = upsample(z, {2, 3});
  REQUIRE(out.num_frames() == 5);
  CHECK(out.data() == std::vector<float>{1, 1, 2, 2, 2});

  const FrameSequence same = upsample(z, {1, 1});
  CHECK(same.data() == z.data());

  CHECK_THROWS_AS(upsample(z, {2}), ValidationError);
  CHECK_THROWS_AS(upsample(z, {2, 0}), ValidationError);
}

TEST_CASE("down/upsample round trips agree on chunk ends") {
  Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const int num_frames = 1 + static_cast<int>(rng.next_below(40));
    FrameSequence f(num_frames, 3, 50.0);
    for (float& v : f.data()) v = static_cast<float>(rng.next_gaussian());

    BoundarySet b;
    for (int t = 0; t < num_frames; ++t) {
      if (t == num_frames - 1 || rng.next_bernoulli(0.3)) b.ends.push_back(t);
    }
    const DurationVector d = boundaries_to_durations(b, num_frames);

    const FrameSequence z = downsample(f, b);
    const FrameSequence expanded = upsample(z, d);
    CHECK(expanded.num_frames() == num_frames);
    for (int i = 0; i < b.num_chunks(); ++i) {
      for (int dd = 0; dd < 3; ++dd) {
        CHECK(expanded.at(b.ends[i], dd) == f.at(b.ends[i], dd));
      }
    }
    // The opposite composition is exact everywhere.
    const FrameSequence z2 = downsample(upsample(z, d), durations_to_boundaries(d));
    CHECK(z2.data() == z.data());
  }
}

TEST_CASE("alignment_to_targets folds silence forward") {
  const std::vector<AlignmentSpan> spans{
      {"SIL", 0, 4}, {"a", 5, 7}, {"b", 8, 9}};
  const auto targets = alignment_to_targets(spans);
  CHECK(targets.boundaries.ends == std::vector<int>{7, 9});
  CHECK(targets.labels == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(targets.all_silence);
}

TEST_CASE("alignment_to_targets folds trailing silence backward") {
  const std::vector<AlignmentSpan> spans{{"a", 0, 2}, {"SIL", 3, 9}};
  const auto targets = alignment_to_targets(spans);
  CHECK(targets.boundaries.ends == std::vector<int>{9});
  CHECK(targets.labels == std::vector<std::string>{"a"});
}

TEST_CASE("alignment_to_targets passes silence-free spans through") {
  const std::vector<AlignmentSpan> spans{{"x", 0, 1}, {"y", 2, 2}, {"z", 3, 6}};
  const auto targets = alignment_to_targets(spans);
  CHECK(targets.boundaries.ends == std::vector<int>{1, 2, 6});
  CHECK(targets.labels == std::vector<std::string>{"x", "y", "z"});
}

TEST_CASE("alignment_to_targets merges runs of silence") {
  const std::vector<AlignmentSpan> spans{
      {"SIL", 0, 1}, {"SIL", 2, 3}, {"a", 4, 5}, {"SIL", 6, 6}, {"SIL", 7, 8}};
  const auto targets = alignment_to_targets(spans);
  CHECK(targets.boundaries.ends == std::vector<int>{8});
  CHECK(targets.labels == std::vector<std::string>{"a"});
}

TEST_CASE("alignment_to_targets flags all-silence input") {
  const auto targets = alignment_to_targets({{"SIL", 0, 3}, {"SIL", 4, 7}});
  CHECK(targets.all_silence);
  CHECK(targets.boundaries.ends == std::vector<int>{7});
  CHECK(targets.labels == std::vector<std::string>{"SIL"});
}

TEST_CASE("alignment_to_targets rejects non-tiling spans") {
  CHECK_THROWS_AS(alignment_to_targets({{"a", 0, 2}, {"b", 4, 5}}), ValidationError);
  CHECK_THROWS_AS(alignment_to_targets({{"a", 1, 2}}), ValidationError);
  CHECK_THROWS_AS(alignment_to_targets({{"a", 0, 2}, {"b", 2, 5}}), ValidationError);
  CHECK_THROWS_AS(alignment_to_targets({}), ValidationError);
}

TEST_CASE("alignment text format round trips") {
  const std::vector<AlignmentSpan> spans{{"SIL", 0, 4}, {"a", 5, 7}, {"b", 8, 9}};
  std::ostringstream out;
  write_alignment(out, spans);
  CHECK(out.str() == "SIL\t0\t4\na\t5\t7\nb\t8\t9\n");
  std::istringstream in(out.str());
  const auto back = read_alignment(in);
  REQUIRE(back.size() == 3);
  CHECK(back[1].label == "a");
  CHECK(back[1].start_frame == 5);
  CHECK(back[1].end_frame == 7);

  std::istringstream bad("a\t1\n");
  CHECK_THROWS_AS(read_alignment(bad), FormatError);
  std::istringstream non_numeric("a\tx\t2\n");
  CHECK_THROWS_AS(read_alignment(non_numeric), FormatError);
}
