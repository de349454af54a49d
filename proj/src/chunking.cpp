#include "dycast/chunking.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dycast {

FrameSequence downsample(const FrameSequence& frames, const BoundarySet& boundaries) {
  validate_boundaries(boundaries, frames.num_frames());
  FrameSequence out(boundaries.num_chunks(), frames.dim(), frames.frame_rate_hz());
  for (int i = 0; i < boundaries.num_chunks(); ++i) {
    const auto src = frames.row(boundaries.ends[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

FrameSequence upsample(const FrameSequence& token_level, const DurationVector& durations) {
  validate_durations(durations);
  if (static_cast<int>(durations.size()) != token_level.num_frames()) {
    throw ValidationError("upsample: durations length must equal token count");
  }
  long long total = 0;
  for (int d : durations) total += d;
  if (total > (1LL << 28)) throw ValidationError("upsample: expanded length too large");
  FrameSequence out(static_cast<int>(total), token_level.dim(),
                    token_level.frame_rate_hz());
  int t = 0;
  for (int i = 0; i < token_level.num_frames(); ++i) {
    const auto src = token_level.row(i);
    for (int rep = 0; rep < durations[i]; ++rep) {
      std::copy(src.begin(), src.end(), out.row(t++).begin());
    }
  }
  return out;
}

namespace {

void check_spans_tile(const std::vector<AlignmentSpan>& spans) {
  if (spans.empty()) throw ValidationError("alignment: at least one span required");
  int expected_start = 0;
  for (const auto& span : spans) {
    if (span.start_frame != expected_start) {
      throw ValidationError("alignment: spans must tile the sequence contiguously");
    }
    if (span.end_frame < span.start_frame) {
      throw ValidationError("alignment: span end before start");
    }
    if (span.label.empty()) throw ValidationError("alignment: empty label");
    expected_start = span.end_frame + 1;
  }
}

}  // namespace

AlignmentTargets alignment_to_targets(const std::vector<AlignmentSpan>& spans) {
  check_spans_tile(spans);

  AlignmentTargets out;
  bool pending_silence = false;  // open silence waiting for its next chunk
  for (const auto& span : spans) {
    if (span.label == kSilenceLabel) {
      pending_silence = true;
      continue;
    }
    out.boundaries.ends.push_back(span.end_frame);
    out.labels.push_back(span.label);
    pending_silence = false;
  }

  if (out.boundaries.ends.empty()) {
    // Degenerate all-silence input: one chunk carrying the silence label.
    out.boundaries.ends.push_back(spans.back().end_frame);
    out.labels.push_back(kSilenceLabel);
    out.all_silence = true;
    return out;
  }
  if (pending_silence) {
    // Trailing silence has no successor; extend the final chunk over it.
    out.boundaries.ends.back() = spans.back().end_frame;
  }
  return out;
}

std::vector<AlignmentSpan> read_alignment(std::istream& in) {
  std::vector<AlignmentSpan> spans;
  std::string line;
  std::uint64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    AlignmentSpan span;
    std::string start_text;
    std::string end_text;
    if (!std::getline(fields, span.label, '\t') ||
        !std::getline(fields, start_text, '\t') ||
        !std::getline(fields, end_text)) {
      throw FormatError("alignment line needs label<TAB>start<TAB>end", line_number);
    }
    try {
      span.start_frame = std::stoi(start_text);
      span.end_frame = std::stoi(end_text);
    } catch (const std::exception&) {
      throw FormatError("alignment frame index not an integer", line_number);
    }
    spans.push_back(std::move(span));
  }
  return spans;
}

std::vector<AlignmentSpan> read_alignment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file " + path, 0);
  return read_alignment(in);
}

void write_alignment(std::ostream& out, const std::vector<AlignmentSpan>& spans) {
  for (const auto& span : spans) {
    out << span.label << '\t' << span.start_frame << '\t' << span.end_frame << '\n';
  }
}

void write_alignment(const std::string& path, const std::vector<AlignmentSpan>& spans) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot create file " + path);
  write_alignment(out, spans);
}

}  // namespace dycast
