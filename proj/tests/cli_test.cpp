// Drives the installed CLI end to end through temp files: synth -> encode ->
// decode -> bitrate, the retrieval flow, and the documented exit codes.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dycast/io.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::printf("[ ok ] %s\n", what.c_str());
  } else {
    std::printf("[FAIL] %s\n", what.c_str());
    ++failures;
  }
}

int run_cli(const std::string& args) {
  const std::string command = std::string(DYCAST_CLI_PATH) + " " + args +
                              " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "dycast-cli-test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::current_path(dir);

  check(run_cli("synth periodic --frames 120 --period 6 --dim 40 --latent-dim 8 "
                "--seed 5 --out x.dycf --boundaries-out ends.txt") == 0,
        "synth periodic succeeds");

  check(run_cli("encode --input x.dycf --boundaries ends.txt --latent-dim 8 "
                "--levels 4 --mode durations --compressor-seed 5 --out t.dyct") == 0,
        "encode with provided boundaries succeeds");
  {
    const auto tokens = dycast::read_tokens("t.dyct");
    check(tokens.num_tokens() == 20, "encode emitted one token per chunk");
    check(tokens.durations.has_value(), "durations side info attached");
  }

  check(run_cli("decode --tokens t.dyct --out xhat.dycf --feature-dim 40 "
                "--mode durations --compressor-seed 5") == 0,
        "decode in durations mode succeeds");
  {
    const auto frames = dycast::read_frames("xhat.dycf");
    check(frames.num_frames() == 120, "decode restored the frame count");
    check(frames.dim() == 40, "decode restored the feature dimension");
  }

  check(run_cli("bitrate --tokens-per-second 14.4 --streams 32 --levels 4") == 0,
        "bitrate from explicit rate succeeds");
  check(read_file("cli_stdout.txt").find("bitrate_kbps: 0.9216") != std::string::npos,
        "bitrate prints the 0.9216 kbps figure");

  check(run_cli("bitrate --tokens t.dyct --base-rate 50") == 0,
        "bitrate from a token file succeeds");

  // Hazard-driven boundaries from a D=1 probability file.
  {
    dycast::FrameSequence hazard(12, 1, 50.0);
    for (int t = 0; t < 12; ++t) hazard.at(t, 0) = (t % 3 == 2) ? 0.95f : 0.05f;
    dycast::write_frames("h.dycf", hazard);
  }
  check(run_cli("boundaries --hazard h.dycf --tau-h 0.5 --min-gap 1 --out b.txt") == 0,
        "boundaries subcommand succeeds");
  check(read_file("b.txt") == "2\n5\n8\n11\n", "boundaries match the hazard spikes");

  // Duration decoding from free means.
  {
    dycast::FrameSequence mu(20, 1, 1.0);
    for (int t = 0; t < 20; ++t) mu.at(t, 0) = 2.0f;
    dycast::write_frames("mu.dycf", mu);
  }
  check(run_cli("durations --mu-free mu.dycf --duration-mode budget "
                "--target-frames 120 --tokens t.dyct --out tb.dyct") == 0,
        "durations attach to a token file");
  {
    const auto tokens = dycast::read_tokens("tb.dyct");
    int total = 0;
    for (int d : *tokens.durations) total += d;
    check(total == 120, "budget durations sum to the target");
  }

  // Alignment-driven encoding with silence folding.
  {
    std::ofstream spans("spans.tsv");
    spans << "SIL\t0\t19\na\t20\t59\nb\t60\t119\n";
  }
  check(run_cli("encode --input x.dycf --alignment spans.tsv --latent-dim 8 "
                "--levels 4 --mode durations --compressor-seed 5 --out ta.dyct") == 0,
        "encode from an alignment succeeds");
  {
    const auto tokens = dycast::read_tokens("ta.dyct");
    check(tokens.num_tokens() == 2, "silence folded into the next chunk");
    check(*tokens.durations == dycast::DurationVector{60, 60},
          "alignment durations carried through");
  }

  // Duration NLL scoring exposes alpha and lambda.
  {
    std::ofstream observed("observed.txt");
    for (int i = 0; i < 20; ++i) observed << 6 << '\n';
  }
  check(run_cli("durations --mu-free mu.dycf --duration-mode nll --eval observed.txt "
                "--alpha 0.5 --lambda 0.05") == 0,
        "duration nll scoring succeeds");
  check(read_file("cli_stdout.txt").rfind("nll:", 0) == 0, "nll line printed");

  // Retrieval flow.
  check(run_cli("synth clustered-latents --clusters 4 --count 80 --latent-dim 8 "
                "--seed 9 --out pool.dycf --ids-out pool.ids") == 0,
        "synth clustered-latents succeeds");
  check(run_cli("rad-build --pool pool.dycf --n-list 4 --seed 11 --out idx.dyci") == 0,
        "rad-build succeeds");
  check(run_cli("rad-apply --index idx.dyci --pool pool.dycf --input pool.dycf "
                "--tau 95 --n-probe 4 --out refined.dycf") == 0,
        "rad-apply succeeds");
  check(read_file("refined.dycf") == read_file("pool.dycf"),
        "self-pool refinement reproduces the pool");

  // Determinism: rebuilding with the same seed is byte-identical.
  check(run_cli("rad-build --pool pool.dycf --n-list 4 --seed 11 --out idx2.dyci") == 0,
        "second rad-build succeeds");
  check(read_file("idx.dyci") == read_file("idx2.dyci"),
        "same-seed index builds are byte-identical");

  // Exit codes: 2 for validation problems, 3 for format problems.
  check(run_cli("encode --input x.dycf --out t2.dyct") == 2,
        "missing boundary source exits 2");
  check(run_cli("decode --tokens x.dycf --out y.dycf --feature-dim 40") == 3,
        "frame file fed as tokens exits 3");
  check(run_cli("boundaries --hazard t.dyct") == 3, "token file fed as hazards exits 3");
  check(run_cli("bitrate --tokens-per-second -1") == 2, "negative rate exits 2");
  check(run_cli("nonsense") == 2, "unknown subcommand exits 2");

  std::printf("%s\n", failures == 0 ? "cli tests passed" : "cli tests FAILED");
  return failures == 0 ? 0 : 1;
}
