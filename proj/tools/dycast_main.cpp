// Command-line front end for the dycast toolkit. Subcommands mirror the
// pipeline stages: boundary decoding, duration decoding, encode/decode,
// retrieval index handling, rate accounting, and synthetic data generation.
//
// Exit codes: 0 success, 2 validation error, 3 file format error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dycast/chunking.hpp"
#include "dycast/core.hpp"
#include "dycast/duration.hpp"
#include "dycast/hazard.hpp"
#include "dycast/io.hpp"
#include "dycast/pipeline.hpp"
#include "dycast/rad.hpp"
#include "dycast/ssq.hpp"

namespace {

using namespace dycast;

HazardSequence read_hazard_file(const std::string& path) {
  const FrameSequence frames = read_frames(path);
  if (frames.dim() != 1) {
    throw ValidationError("hazard file must be a D=1 frame file of probabilities");
  }
  std::vector<double> probs(frames.num_frames());
  for (int t = 0; t < frames.num_frames(); ++t) probs[t] = frames.at(t, 0);
  return HazardSequence::from_probs(probs);
}

std::vector<double> read_column_file(const std::string& path) {
  const FrameSequence frames = read_frames(path);
  if (frames.dim() != 1) {
    throw ValidationError("expected a D=1 frame file at " + path);
  }
  std::vector<double> values(frames.num_frames());
  for (int t = 0; t < frames.num_frames(); ++t) values[t] = frames.at(t, 0);
  return values;
}

BoundarySet read_boundaries_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file " + path, 0);
  BoundarySet b;
  std::string line;
  std::uint64_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      b.ends.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw FormatError("boundary line is not an integer", line_number);
    }
  }
  return b;
}

void write_boundaries_text(std::ostream& out, const BoundarySet& b) {
  for (int e : b.ends) out << e << '\n';
}

struct BoundaryFlags {
  std::string hazard_path;
  double tau_h = 0.5;
  int min_gap = 1;
  int max_gap = 0;  // 0 means unset
  std::string mode = "greedy";
  std::uint64_t seed = 0;

  BoundaryDecodeConfig to_config() const {
    BoundaryDecodeConfig cfg;
    cfg.tau_h = tau_h;
    cfg.min_gap = min_gap;
    if (max_gap > 0) cfg.max_gap = max_gap;
    if (mode == "greedy") {
      cfg.mode = BoundaryDecodeConfig::Mode::greedy;
    } else if (mode == "sample") {
      cfg.mode = BoundaryDecodeConfig::Mode::sample;
    } else {
      throw ValidationError("boundary mode must be greedy or sample");
    }
    cfg.seed = seed;
    return cfg;
  }
};

void add_boundary_flags(CLI::App* cmd, BoundaryFlags& flags, bool require_hazard) {
  auto* hazard = cmd->add_option("--hazard", flags.hazard_path,
                                 "Boundary probabilities (D=1 frame file)");
  if (require_hazard) hazard->required();
  cmd->add_option("--tau-h", flags.tau_h, "Hazard emission threshold");
  cmd->add_option("--min-gap", flags.min_gap, "Minimum chunk length (frames)");
  cmd->add_option("--max-gap", flags.max_gap, "Forced boundary chunk length");
  cmd->add_option("--boundary-mode", flags.mode, "greedy or sample");
  cmd->add_option("--seed", flags.seed, "Sampling seed");
}

PipelineConfig::DecodeMode parse_decode_mode(const std::string& mode) {
  if (mode == "durations") return PipelineConfig::DecodeMode::tokens_and_durations;
  if (mode == "length") return PipelineConfig::DecodeMode::tokens_and_length;
  if (mode == "tokens-only") return PipelineConfig::DecodeMode::tokens_only;
  throw ValidationError("mode must be durations, length, or tokens-only");
}

void print_rates(const CodecRates& rates) {
  std::printf("tokens_per_second: %.6f\n", rates.frame_rate_hz);
  std::printf("bits_per_token: %.6f\n", rates.bits_per_token);
  std::printf("bitrate_bps: %.6f\n", rates.bitrate_bps);
  std::printf("bitrate_kbps: %.4f\n", rates.bitrate_bps / 1000.0);
  std::printf("duration_overhead_bps: %.6f\n", rates.duration_overhead_bps);
}

int run(int argc, char** argv) {
  CLI::App app{"dycast: variable-frame-rate speech tokenization toolkit"};
  app.require_subcommand(1);

  // ---- boundaries ----
  auto* boundaries_cmd =
      app.add_subcommand("boundaries", "Decode chunk boundaries from hazards");
  BoundaryFlags boundary_flags;
  add_boundary_flags(boundaries_cmd, boundary_flags, true);
  std::string boundaries_out;
  bool print_durations = false;
  boundaries_cmd->add_option("--out", boundaries_out, "Write ends here instead of stdout");
  boundaries_cmd->add_flag("--durations", print_durations,
                           "Print chunk durations instead of end indices");
  boundaries_cmd->callback([&] {
    const HazardSequence h = read_hazard_file(boundary_flags.hazard_path);
    const BoundarySet b = decode_boundaries(h, boundary_flags.to_config());
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!boundaries_out.empty()) {
      file.open(boundaries_out);
      if (!file) throw ValidationError("cannot create file " + boundaries_out);
      out = &file;
    }
    if (print_durations) {
      for (int d : boundaries_to_durations(b, h.num_frames())) *out << d << '\n';
    } else {
      write_boundaries_text(*out, b);
    }
  });

  // ---- durations ----
  auto* durations_cmd =
      app.add_subcommand("durations", "Decode token durations from free means");
  std::string mu_free_path;
  std::string durations_mode = "free";
  std::string durations_tokens_in;
  std::string durations_out;
  std::string durations_eval;
  int durations_d_min = 1;
  int durations_target = 0;
  double durations_alpha = 1.0;
  double durations_lambda = 0.05;
  durations_cmd->add_option("--mu-free", mu_free_path, "Free means (D=1 frame file)")
      ->required();
  durations_cmd->add_option("--duration-mode", durations_mode,
                            "free, budget, or nll (score observed durations)");
  durations_cmd->add_option("--d-min", durations_d_min, "Minimum duration");
  durations_cmd->add_option("--target-frames", durations_target,
                            "Frame budget (budget and nll modes)");
  durations_cmd->add_option("--alpha", durations_alpha, "NB dispersion (nll mode)");
  durations_cmd->add_option("--lambda", durations_lambda,
                            "Length-regularizer strength (nll mode)");
  durations_cmd->add_option("--eval", durations_eval,
                            "Observed durations, one per line (nll mode)");
  durations_cmd->add_option("--tokens", durations_tokens_in,
                            "Token file to attach the durations to");
  durations_cmd->add_option("--out", durations_out, "Output token file");
  durations_cmd->callback([&] {
    DurationParams params;
    params.mu_free = read_column_file(mu_free_path);
    params.d_min = durations_d_min;
    params.alpha = durations_alpha;
    params.lambda = durations_lambda;
    if (durations_mode == "nll") {
      if (durations_eval.empty()) throw ValidationError("nll mode needs --eval");
      std::ifstream in(durations_eval);
      if (!in) throw FormatError("cannot open file " + durations_eval, 0);
      DurationVector observed;
      std::string line;
      std::uint64_t line_number = 0;
      int total = 0;
      while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
          observed.push_back(std::stoi(line));
        } catch (const std::exception&) {
          throw FormatError("duration line is not an integer", line_number);
        }
        total += observed.back();
      }
      if (durations_target > 0) total = durations_target;
      std::printf("nll: %.10f\n", duration_nll(params, observed, total).nll);
      return;
    }
    DurationVector d;
    if (durations_mode == "free") {
      d = decode_free(params);
    } else if (durations_mode == "budget") {
      if (durations_target <= 0) {
        throw ValidationError("budget mode needs --target-frames");
      }
      d = decode_budget(params, durations_target);
    } else {
      throw ValidationError("duration mode must be free, budget, or nll");
    }
    if (!durations_tokens_in.empty()) {
      if (durations_out.empty()) {
        throw ValidationError("--tokens needs --out for the updated token file");
      }
      TokenSequence tokens = read_tokens(durations_tokens_in);
      if (tokens.num_tokens() != static_cast<int>(d.size())) {
        throw ValidationError("token count does not match free-mean count");
      }
      tokens.durations = d;
      write_tokens(durations_out, tokens);
    } else {
      for (int v : d) std::cout << v << '\n';
    }
  });

  // ---- encode ----
  auto* encode_cmd = app.add_subcommand("encode", "Features to tokens");
  std::string encode_input;
  std::string encode_out;
  std::string encode_boundaries_path;
  std::string encode_mode = "durations";
  int encode_latent_dim = 32;
  int encode_levels = 4;
  std::uint64_t encode_comp_seed = 0;
  BoundaryFlags encode_boundary_flags;
  std::string encode_alignment_path;
  encode_cmd->add_option("--input", encode_input, "Input frame file")->required();
  encode_cmd->add_option("--out", encode_out, "Output token file")->required();
  encode_cmd->add_option("--boundaries", encode_boundaries_path,
                         "Chunk ends, one per line (alternative to --hazard)");
  encode_cmd->add_option("--alignment", encode_alignment_path,
                         "Character alignment (label<TAB>start<TAB>end); silence "
                         "spans fold into the next chunk");
  add_boundary_flags(encode_cmd, encode_boundary_flags, false);
  encode_cmd->add_option("--mode", encode_mode,
                         "Side info: durations, length, or tokens-only");
  encode_cmd->add_option("--latent-dim", encode_latent_dim, "Latent dimension L");
  encode_cmd->add_option("--levels", encode_levels, "Levels per dimension K");
  encode_cmd->add_option("--compressor-seed", encode_comp_seed, "Projection seed");
  encode_cmd->callback([&] {
    const FrameSequence features = read_frames(encode_input);
    PipelineConfig cfg;
    cfg.mode = parse_decode_mode(encode_mode);
    cfg.ssq = SsqConfig(encode_latent_dim, encode_levels);
    cfg.compressor_seed = encode_comp_seed;
    EncodeResult result = [&] {
      if (!encode_boundaries_path.empty()) {
        return encode(features, read_boundaries_text(encode_boundaries_path), cfg);
      }
      if (!encode_alignment_path.empty()) {
        const auto targets = alignment_to_targets(read_alignment(encode_alignment_path));
        return encode(features, targets.boundaries, cfg);
      }
      if (encode_boundary_flags.hazard_path.empty()) {
        throw ValidationError("encode needs --boundaries, --alignment, or --hazard");
      }
      cfg.boundary_source = PipelineConfig::BoundarySource::hazard;
      cfg.boundary_decode = encode_boundary_flags.to_config();
      return encode(features, read_hazard_file(encode_boundary_flags.hazard_path), cfg);
    }();
    write_tokens(encode_out, result.tokens);
    std::fprintf(stderr, "encoded %d tokens from %d frames\n",
                 result.tokens.num_tokens(), features.num_frames());
  });

  // ---- decode ----
  auto* decode_cmd = app.add_subcommand("decode", "Tokens to features");
  std::string decode_tokens_path;
  std::string decode_out;
  std::string decode_mode = "durations";
  std::string decode_mu_free;
  std::string decode_rad_index;
  std::string decode_rad_pool;
  int decode_feature_dim = 0;
  int decode_d_min = 1;
  int decode_target = 0;
  double decode_base_rate = 50.0;
  double decode_tau = 97.0;
  int decode_n_probe = 0;
  std::uint64_t decode_comp_seed = 0;
  decode_cmd->add_option("--tokens", decode_tokens_path, "Input token file")->required();
  decode_cmd->add_option("--out", decode_out, "Output frame file")->required();
  decode_cmd->add_option("--feature-dim", decode_feature_dim, "Decoded feature dim")
      ->required();
  decode_cmd->add_option("--mode", decode_mode,
                         "durations, length, or tokens-only");
  decode_cmd->add_option("--mu-free", decode_mu_free,
                         "Per-token free means (D=1 frame file)");
  decode_cmd->add_option("--d-min", decode_d_min, "Minimum duration");
  decode_cmd->add_option("--target-frames", decode_target, "Frame budget override");
  decode_cmd->add_option("--base-rate", decode_base_rate, "Base frame rate (Hz)");
  decode_cmd->add_option("--compressor-seed", decode_comp_seed, "Projection seed");
  decode_cmd->add_option("--rad-index", decode_rad_index, "Retrieval index (DYCI)");
  decode_cmd->add_option("--rad-pool", decode_rad_pool, "Retrieval pool (frame file)");
  decode_cmd->add_option("--tau", decode_tau, "Similarity threshold (percent)");
  decode_cmd->add_option("--n-probe", decode_n_probe, "Lists probed per query");
  decode_cmd->callback([&] {
    const TokenSequence tokens = read_tokens(decode_tokens_path);
    PipelineConfig cfg;
    cfg.mode = parse_decode_mode(decode_mode);
    cfg.ssq = SsqConfig(tokens.num_streams, tokens.num_levels);
    cfg.feature_dim = decode_feature_dim;
    cfg.base_rate_hz = decode_base_rate;
    cfg.compressor_seed = decode_comp_seed;

    DecodeOptions options;
    std::optional<IvfIndex> index;
    if (!decode_rad_index.empty()) {
      if (decode_rad_pool.empty()) {
        throw ValidationError("--rad-index needs --rad-pool");
      }
      index = IvfIndex::load(decode_rad_index, make_pool(read_frames(decode_rad_pool)));
      RadConfig rad;
      rad.tau = decode_tau;
      rad.n_probe = decode_n_probe > 0 ? decode_n_probe : index->n_probe_default();
      cfg.rad = rad;
      options.rad_index = &*index;
    }
    if (!decode_mu_free.empty()) {
      DurationParams params;
      params.mu_free = read_column_file(decode_mu_free);
      params.d_min = decode_d_min;
      options.duration_params = std::move(params);
    }
    if (decode_target > 0) options.target_frames = decode_target;

    const FrameSequence out = decode(tokens, cfg, options);
    write_frames(decode_out, out);
    std::fprintf(stderr, "decoded %d frames\n", out.num_frames());
  });

  // ---- rad-build ----
  auto* rad_build_cmd = app.add_subcommand("rad-build", "Build a retrieval index");
  std::string build_pool_path;
  std::string build_out;
  IvfBuildConfig build_cfg;
  rad_build_cmd->add_option("--pool", build_pool_path, "Pool (frame file)")->required();
  rad_build_cmd->add_option("--out", build_out, "Output index file")->required();
  rad_build_cmd->add_option("--n-list", build_cfg.n_list, "Inverted list count");
  rad_build_cmd->add_option("--train-size", build_cfg.kmeans_train_size,
                            "Clustering subsample size (0: whole pool)");
  rad_build_cmd->add_option("--iters", build_cfg.kmeans_iterations, "Lloyd iterations");
  rad_build_cmd->add_option("--seed", build_cfg.seed, "Clustering seed");
  rad_build_cmd->add_option("--n-probe", build_cfg.n_probe_default,
                            "Default probe count stored in the index");
  rad_build_cmd->callback([&] {
    const IvfIndex index = build_index(make_pool(read_frames(build_pool_path)), build_cfg);
    index.save(build_out);
    std::fprintf(stderr, "indexed %d vectors into %d lists\n", index.num_vectors(),
                 index.n_list());
  });

  // ---- rad-apply ----
  auto* rad_apply_cmd =
      app.add_subcommand("rad-apply", "Replace latents from the retrieval pool");
  std::string apply_index_path;
  std::string apply_pool_path;
  std::string apply_input;
  std::string apply_out;
  double apply_tau = 97.0;
  int apply_n_probe = 0;
  rad_apply_cmd->add_option("--index", apply_index_path, "Index file")->required();
  rad_apply_cmd->add_option("--pool", apply_pool_path, "Pool (frame file)")->required();
  rad_apply_cmd->add_option("--input", apply_input, "Latents to refine")->required();
  rad_apply_cmd->add_option("--out", apply_out, "Output frame file")->required();
  rad_apply_cmd->add_option("--tau", apply_tau, "Similarity threshold (percent)");
  rad_apply_cmd->add_option("--n-probe", apply_n_probe, "Lists probed per query");
  rad_apply_cmd->callback([&] {
    const IvfIndex index =
        IvfIndex::load(apply_index_path, make_pool(read_frames(apply_pool_path)));
    RadConfig rad;
    rad.tau = apply_tau;
    rad.n_probe = apply_n_probe > 0 ? apply_n_probe : index.n_probe_default();
    const RadResult result = rad_apply(read_frames(apply_input), index, rad);
    write_frames(apply_out, result.latents);
    std::fprintf(stderr, "replaced %d of %d latents\n", result.replacement_count,
                 result.latents.num_frames());
  });

  // ---- bitrate ----
  auto* bitrate_cmd = app.add_subcommand("bitrate", "Rate accounting");
  double rate_tokens_per_second = 0.0;
  std::string rate_tokens_path;
  double rate_base = 50.0;
  int rate_streams = 32;
  int rate_levels = 4;
  int rate_max_duration = 1;
  bitrate_cmd->add_option("--tokens-per-second", rate_tokens_per_second,
                          "Token rate (Hz)");
  bitrate_cmd->add_option("--tokens", rate_tokens_path,
                          "Measure the rate of this token file");
  bitrate_cmd->add_option("--base-rate", rate_base, "Base frame rate (Hz)");
  bitrate_cmd->add_option("--streams", rate_streams, "Streams per token L");
  bitrate_cmd->add_option("--levels", rate_levels, "Levels per stream K");
  bitrate_cmd->add_option("--max-duration", rate_max_duration,
                          "Duration range for side-info overhead");
  bitrate_cmd->callback([&] {
    if (!rate_tokens_path.empty()) {
      const TokenSequence tokens = read_tokens(rate_tokens_path);
      print_rates(report_rates(tokens, rate_base, tokens.num_streams,
                               tokens.num_levels, rate_max_duration));
    } else if (rate_tokens_per_second > 0.0) {
      print_rates(compute_rates(rate_tokens_per_second, rate_streams, rate_levels,
                                rate_max_duration));
    } else {
      throw ValidationError("bitrate needs --tokens-per-second or --tokens");
    }
  });

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic test data");
  std::string synth_kind;
  std::string synth_out;
  std::string synth_boundaries_out;
  std::string synth_alignment_out;
  std::string synth_ids_out;
  int synth_frames = 64;
  int synth_period = 4;
  int synth_dim = 64;
  int synth_latent_dim = 32;
  double synth_frame_rate = 50.0;
  double synth_mu = 5.0;
  double synth_alpha = 0.5;
  int synth_d_min = 1;
  int synth_count = 100;
  int synth_clusters = 4;
  double synth_noise = 0.05;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("kind", synth_kind,
                        "periodic, nb-durations, or clustered-latents")
      ->required();
  synth_cmd->add_option("--out", synth_out, "Output file")->required();
  synth_cmd->add_option("--frames", synth_frames, "Sequence length (periodic)");
  synth_cmd->add_option("--period", synth_period, "Planted chunk length");
  synth_cmd->add_option("--dim", synth_dim, "Feature dimension");
  synth_cmd->add_option("--latent-dim", synth_latent_dim, "Latent dimension");
  synth_cmd->add_option("--frame-rate", synth_frame_rate, "Base frame rate (Hz)");
  synth_cmd->add_option("--boundaries-out", synth_boundaries_out,
                        "Write planted chunk ends here");
  synth_cmd->add_option("--alignment-out", synth_alignment_out,
                        "Write a matching alignment here");
  synth_cmd->add_option("--mu", synth_mu, "NB mean (nb-durations)");
  synth_cmd->add_option("--alpha", synth_alpha, "NB dispersion (nb-durations)");
  synth_cmd->add_option("--d-min", synth_d_min, "Minimum duration");
  synth_cmd->add_option("--count", synth_count, "Sample or vector count");
  synth_cmd->add_option("--clusters", synth_clusters, "Cluster count");
  synth_cmd->add_option("--noise", synth_noise, "Cluster spread");
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--ids-out", synth_ids_out, "Write provenance ids here");
  synth_cmd->callback([&] {
    if (synth_kind == "periodic") {
      const PeriodicSynth synth = synth_periodic(synth_frames, synth_period, synth_dim,
                                                 synth_latent_dim, synth_frame_rate,
                                                 synth_seed);
      write_frames(synth_out, synth.features);
      if (!synth_boundaries_out.empty()) {
        std::ofstream out(synth_boundaries_out);
        if (!out) throw ValidationError("cannot create file " + synth_boundaries_out);
        write_boundaries_text(out, synth.boundaries);
      }
      if (!synth_alignment_out.empty()) {
        std::vector<AlignmentSpan> spans;
        int start = 0;
        for (int i = 0; i < synth.boundaries.num_chunks(); ++i) {
          spans.push_back({std::string(1, static_cast<char>('a' + i % 26)), start,
                           synth.boundaries.ends[i]});
          start = synth.boundaries.ends[i] + 1;
        }
        write_alignment(synth_alignment_out, spans);
      }
    } else if (synth_kind == "nb-durations") {
      const DurationVector d =
          synth_nb_durations(synth_mu, synth_alpha, synth_d_min, synth_count, synth_seed);
      std::ofstream out(synth_out);
      if (!out) throw ValidationError("cannot create file " + synth_out);
      for (int v : d) out << v << '\n';
    } else if (synth_kind == "clustered-latents") {
      const LatentPool pool = synth_clustered_latents(synth_clusters, synth_count,
                                                      synth_latent_dim, synth_noise,
                                                      synth_seed);
      write_frames(synth_out, pool.vectors);
      if (!synth_ids_out.empty()) write_pool_ids(synth_ids_out, pool.ids);
    } else {
      throw ValidationError("kind must be periodic, nb-durations, or clustered-latents");
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const dycast::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const dycast::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
