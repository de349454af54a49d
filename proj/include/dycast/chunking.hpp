#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dycast/core.hpp"

namespace dycast {

// One span of a character alignment, inclusive frame indices. Silence spans
// carry the label "SIL".
struct AlignmentSpan {
  std::string label;
  int start_frame = 0;
  int end_frame = 0;
};

inline constexpr const char* kSilenceLabel = "SIL";

// Chunk targets derived from an alignment: silence is folded into the next
// non-silence span (utterance-final silence folds backward), so labels are
// silence-free unless the whole input is silence.
struct AlignmentTargets {
  BoundarySet boundaries;
  std::vector<std::string> labels;
  bool all_silence = false;
};

// Token-level sequence: the last frame of every chunk.
FrameSequence downsample(const FrameSequence& frames, const BoundarySet& boundaries);

// Frame-level sequence: row i of the token-level input repeated durations[i]
// times.
FrameSequence upsample(const FrameSequence& token_level, const DurationVector& durations);

// Builds boundary targets from spans that tile [0, T).
AlignmentTargets alignment_to_targets(const std::vector<AlignmentSpan>& spans);

// Line-oriented text format: label<TAB>start<TAB>end, UTF-8.
std::vector<AlignmentSpan> read_alignment(std::istream& in);
std::vector<AlignmentSpan> read_alignment(const std::string& path);
void write_alignment(std::ostream& out, const std::vector<AlignmentSpan>& spans);
void write_alignment(const std::string& path, const std::vector<AlignmentSpan>& spans);

}  // namespace dycast
