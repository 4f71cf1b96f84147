// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/commands.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "avtime/clusterer.hpp"
#include "avtime/corpus.hpp"
#include "avtime/error.hpp"
#include "avtime/evaluator.hpp"
#include "avtime/interleaver.hpp"
#include "avtime/promptgen.hpp"
#include "avtime/rng.hpp"
#include "avtime/run_config.hpp"
#include "avtime/synthesizer.hpp"

namespace avtime::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ClusterArgs {
  std::string corpus;
  std::string out;
  std::string summary;
  std::string embeddings;
  bool hash_embed = false;
};

struct SynthesizeArgs {
  std::string corpus;
  std::string assignment;
  std::string out;
};

struct InterleaveArgs {
  std::string video;
  std::string audio;
  std::string input_format = "json";
  std::string out;
};

struct GenQaArgs {
  std::string manifest;
  std::string clips;
  std::string templates;
  std::string out;
};

struct EvalArgs {
  std::string mode = "avedl";
  std::string gt;
  std::string preds;
  std::string responses;
  std::string sweep_air;
  std::string out;
};

void require_input(const std::string& path, std::string_view flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw IoError(std::string(flag) + ": no such file " + path);
}

void require_output(const std::string& path, std::string_view flag) {
  if (path.empty()) throw ValidationError(std::string(flag) + " is required");
  const fs::path parent = fs::absolute(path).parent_path();
  if (!fs::is_directory(parent)) {
    throw IoError(std::string(flag) + ": directory does not exist: " + parent.string());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  if (!f) throw IoError("failed writing " + path);
}

// --config is applied before flags are bound so that explicit flags win.
std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

int cmd_cluster(const RunConfig& cfg, const ClusterArgs& a, std::ostream& out, spdlog::logger& log) {
  require_input(a.corpus, "--corpus");
  if (!a.embeddings.empty()) require_input(a.embeddings, "--embeddings");
  require_output(a.out, "--out");
  if (!a.summary.empty()) require_output(a.summary, "--summary");

  LoadOptions opts;
  if (!a.embeddings.empty()) opts.embeddings_sidecar = a.embeddings;
  Corpus corpus = load_corpus(a.corpus, opts);
  if (a.hash_embed) {
    log.info("hash-embedding {} captions into {} dimensions", corpus.size(), cfg.embed_dim);
    corpus = with_hash_embeddings(corpus, cfg.embed_dim, cfg.seed);
  } else if (!corpus.has_embeddings()) {
    throw ValidationError("corpus " + a.corpus +
                          " has no embeddings; pass --hash-embed to derive them from captions");
  }
  ClusterOptions options;
  options.k = cfg.k.value_or(default_cluster_count(corpus.size()));
  options.seed = cfg.seed;
  options.max_iters = cfg.max_iters;
  options.restarts = cfg.restarts;
  const auto assignment = cluster(corpus, options);
  log.info("clustered {} clips into {} clusters in {} iterations", corpus.size(),
           assignment.cluster_count, assignment.objective_history.size());
  write_assignment(assignment, a.out);

  const auto stats = cluster_stats(corpus, assignment);
  const std::string summary = stats_summary_json(stats);
  if (!a.summary.empty()) write_text(a.summary, summary);
  if (cfg.format == OutputFormat::json) {
    out << summary << '\n';
  } else {
    std::map<std::size_t, std::size_t> hist;
    for (auto s : stats.sizes) ++hist[s];
    out << "clips " << corpus.size() << "  clusters " << assignment.cluster_count
        << "  mean intra-cluster cosine " << stats.mean_intra_cosine << '\n';
    out << "size  clusters\n";
    for (const auto& [size, count] : hist) out << size << "  " << count << '\n';
  }
  return kExitOk;
}

int cmd_synthesize(const RunConfig& cfg, const SynthesizeArgs& a, std::ostream& out,
                   spdlog::logger& log) {
  require_input(a.corpus, "--corpus");
  require_input(a.assignment, "--assignment");
  require_output(a.out, "--out");

  const Corpus corpus = load_corpus(a.corpus);
  const ClusterAssignment assignment = read_assignment(a.assignment);
  SynthesisConfig sc;
  sc.m_min = cfg.m_min;
  sc.m_max = cfg.m_max;
  sc.grid = make_scale_grid(cfg.scale_min, cfg.scale_max, cfg.scale_step);
  sc.videos_per_cluster = cfg.videos_per_cluster;
  sc.master_seed = cfg.seed;
  const auto result = build_dataset(corpus, assignment, sc);
  write_manifest(result.videos, a.out);
  if (result.skipped_clusters > 0) {
    log.info("skipped {} clusters with fewer than {} clips", result.skipped_clusters, sc.m_min);
  }
  if (cfg.format == OutputFormat::json) {
    out << json{{"videos", result.videos.size()}, {"skipped_clusters", result.skipped_clusters}}.dump()
        << '\n';
  } else {
    out << "videos " << result.videos.size() << "  skipped clusters " << result.skipped_clusters << '\n';
  }
  return kExitOk;
}

int cmd_interleave(const RunConfig& cfg, const InterleaveArgs& a, std::ostream& out, spdlog::logger&) {
  if (a.input_format != "json" && a.input_format != "raw") {
    throw ValidationError("--input-format must be json or raw");
  }
  if (a.video.empty() && a.audio.empty()) throw ValidationError("need --video and/or --audio");
  if (!a.video.empty()) require_input(a.video, "--video");
  if (!a.audio.empty()) require_input(a.audio, "--audio");
  require_output(a.out, "--out");

  auto read = [&](const std::string& path) {
    return a.input_format == "json" ? read_tokens_json(path) : read_tokens_raw(path);
  };
  std::optional<TokenSequence> video, audio;
  if (!a.video.empty()) video = read(a.video);
  if (!a.audio.empty()) audio = read(a.audio);
  const auto ctx = interleave(video, audio, cfg.T, cfg.rho);
  write_context_json(ctx, a.out);

  if (cfg.format == OutputFormat::json) {
    out << json{{"T", ctx.T}, {"rho", ctx.rho},
                {"omega", ctx.omega ? json(*ctx.omega) : json(nullptr)},
                {"n_audio", ctx.n_audio}, {"n_video", ctx.n_video},
                {"pattern", ctx.pattern_string()}}.dump()
        << '\n';
  } else {
    out << "T " << ctx.T << "  rho " << ctx.rho << "  audio " << ctx.n_audio << "  video "
        << ctx.n_video << '\n'
        << ctx.pattern_string() << '\n';
  }
  return kExitOk;
}

int cmd_gen_qa(const RunConfig& cfg, const GenQaArgs& a, std::ostream& out, spdlog::logger& log) {
  if (a.manifest.empty() && a.clips.empty()) throw ValidationError("need --manifest and/or --clips");
  if (!a.manifest.empty()) require_input(a.manifest, "--manifest");
  if (!a.clips.empty()) require_input(a.clips, "--clips");
  if (!a.templates.empty()) require_input(a.templates, "--templates");
  require_output(a.out, "--out");

  const TemplateBank bank = a.templates.empty() ? default_template_bank() : load_template_bank(a.templates);
  std::vector<QAPair> pairs;
  std::size_t skipped = 0;
  if (!a.manifest.empty()) {
    const auto videos = read_manifest(a.manifest);
    for (std::size_t i = 0; i < videos.size(); ++i) {
      Rng rng(derive_seed(cfg.seed, 0, i));
      auto gen = gen_cba_pairs(videos[i], bank, rng, cfg.T);
      skipped += gen.skipped_annotations;
      std::move(gen.pairs.begin(), gen.pairs.end(), std::back_inserter(pairs));
    }
  }
  if (!a.clips.empty()) {
    const Corpus corpus = load_corpus(a.clips);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      Rng rng(derive_seed(cfg.seed, 1, i));
      pairs.push_back(gen_audio_pairs(corpus[i], bank, rng));
    }
  }
  if (skipped > 0) log.warn("skipped {} annotations with empty or time-bearing captions", skipped);
  write_pairs(pairs, a.out);

  std::map<std::string, std::size_t> by_kind;
  for (const auto& p : pairs) ++by_kind[std::string(to_string(p.kind))];
  if (cfg.format == OutputFormat::json) {
    out << json{{"pairs", pairs.size()}, {"by_kind", by_kind}}.dump() << '\n';
  } else {
    out << "pairs " << pairs.size() << '\n';
    for (const auto& [kind, n] : by_kind) out << kind << "  " << n << '\n';
  }
  return kExitOk;
}

std::vector<Prediction> read_responses(const std::string& path, std::size_t T) {
  std::vector<Prediction> preds;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json rec = json::parse(line, nullptr, false);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("video_id") ||
        !rec.contains("response") || !rec.contains("total_duration_s") ||
        !rec["total_duration_s"].is_number()) {
      throw ValidationError(ctx + ": expected {\"video_id\", \"response\", \"total_duration_s\"}");
    }
    auto got = predictions_from_response(rec["video_id"].get<std::string>(),
                                         rec["response"].get<std::string>(),
                                         rec["total_duration_s"].get<double>(), T,
                                         rec.value("label", std::string{}), rec.value("score", 1.0));
    std::move(got.begin(), got.end(), std::back_inserter(preds));
  }
  return preds;
}

int cmd_eval(const RunConfig& cfg, const EvalArgs& a, std::ostream& out, spdlog::logger& log) {
  if (a.mode != "avedl" && a.mode != "vtg") throw ValidationError("--mode must be avedl or vtg");
  const int sources = int(!a.preds.empty()) + int(!a.responses.empty()) + int(!a.sweep_air.empty());
  if (sources != 1) {
    throw ValidationError("give exactly one of --preds, --responses or --sweep-air");
  }
  if (!a.sweep_air.empty() && a.mode != "avedl") {
    throw ValidationError("--sweep-air is only defined for --mode avedl");
  }
  require_input(a.gt, "--gt");
  if (!a.preds.empty()) require_input(a.preds, "--preds");
  if (!a.responses.empty()) require_input(a.responses, "--responses");
  if (!a.out.empty()) require_output(a.out, "--out");
  const auto gts = read_ground_truth(a.gt);

  if (!a.sweep_air.empty()) {
    const auto slot = a.sweep_air.find("{air}");
    if (slot == std::string::npos) throw ValidationError("--sweep-air path must contain {air}");
    const auto rows = sweep_air(default_air_grid_percent(), [&](int air) -> std::optional<std::vector<Prediction>> {
      std::string path = a.sweep_air;
      path.replace(slot, 5, std::to_string(air));
      if (!fs::is_regular_file(path)) {
        log.warn("no predictions for AIR {}% ({})", air, path);
        return std::nullopt;
      }
      return read_predictions(path);
    }, gts);
    if (rows.empty()) throw IoError("--sweep-air matched no prediction files");
    const std::string report = air_to_json(rows);
    if (!a.out.empty()) write_text(a.out, report);
    out << (cfg.format == OutputFormat::json ? report + "\n" : air_table(rows));
    return kExitOk;
  }

  const auto preds = !a.preds.empty() ? read_predictions(a.preds) : read_responses(a.responses, cfg.T);
  const EvalReport report = a.mode == "avedl" ? evaluate_avedl(preds, gts) : evaluate_vtg(preds, gts);
  for (const auto& w : report.warnings) log.warn("{}", w);
  const std::string text = report_to_json(report);
  if (!a.out.empty()) write_text(a.out, text);
  if (cfg.format == OutputFormat::json) {
    out << text << '\n';
  } else {
    out << (a.mode == "avedl" ? avedl_table(report) : vtg_table(report));
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
  spdlog::logger log("avtime", sink);
  log.set_pattern("avtime: %l: %v");

  RunConfig cfg;
  try {
    if (auto path = find_config_path(args)) apply_config_file(cfg, *path);
  } catch (const ValidationError& e) {
    err << "avtime: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "avtime: " << e.what() << '\n';
    return kExitIo;
  }

  CLI::App app{"Pseudo-untrimmed audio-visual dataset synthesis, token interleaving, "
               "instruction-pair generation and temporal evaluation."};
  app.name("avtime");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string format = cfg.format == OutputFormat::json ? "json" : "table";
  app.add_option("--seed", cfg.seed, "Master seed for every random draw")->capture_default_str();
  app.add_option("--config", config_path, "JSON file overriding defaults (flags still win)");
  app.add_option("--format", format, "Standard output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  ClusterArgs ca;
  auto* c = app.add_subcommand("cluster", "Cluster clips by caption embedding");
  c->add_option("--corpus", ca.corpus, "Clip JSONL")->required();
  c->add_option("--out", ca.out, "Assignment JSONL to write")->required();
  c->add_option("--summary", ca.summary, "Cluster size summary JSON to write");
  c->add_option("--embeddings", ca.embeddings, "float32 sidecar matrix for embedding_row records");
  c->add_flag("--hash-embed", ca.hash_embed, "Derive embeddings from captions with the hashing embedder");
  c->add_option("--embed-dim", cfg.embed_dim, "Dimension for --hash-embed")->capture_default_str();
  c->add_option("--k", cfg.k, "Number of clusters (default round(n / 1.3))");
  c->add_option("--restarts", cfg.restarts, "k-means++ initialisations, best kept")->capture_default_str();
  c->add_option("--max-iters", cfg.max_iters, "k-means iteration cap")->capture_default_str();

  SynthesizeArgs sa;
  auto* s = app.add_subcommand("synthesize", "Build pseudo-untrimmed videos from clusters");
  s->add_option("--corpus", sa.corpus, "Clip JSONL")->required();
  s->add_option("--assignment", sa.assignment, "Assignment JSONL from `cluster`")->required();
  s->add_option("--out", sa.out, "Manifest JSONL to write")->required();
  s->add_option("--m-min", cfg.m_min, "Fewest clips per video")->capture_default_str();
  s->add_option("--m-max", cfg.m_max, "Most clips per video")->capture_default_str();
  s->add_option("--videos-per-cluster", cfg.videos_per_cluster, "Videos drawn per cluster")
      ->capture_default_str();
  s->add_option("--scale-min", cfg.scale_min, "Smallest playback scale")->capture_default_str();
  s->add_option("--scale-max", cfg.scale_max, "Largest playback scale")->capture_default_str();
  s->add_option("--scale-step", cfg.scale_step, "Scale grid step")->capture_default_str();

  InterleaveArgs ia;
  auto* i = app.add_subcommand("interleave", "Interleave audio and video token sequences");
  i->add_option("--video", ia.video, "Video token sequence");
  i->add_option("--audio", ia.audio, "Audio token sequence");
  i->add_option("--input-format", ia.input_format, "json, or raw float32 with a .json header")
      ->check(CLI::IsMember({"json", "raw"}))
      ->capture_default_str();
  i->add_option("--T", cfg.T, "Context length")->capture_default_str();
  i->add_option("--rho", cfg.rho, "Audio-interleaving rate in [0, 1]")->capture_default_str();
  i->add_option("--out", ia.out, "Context JSON to write")->required();

  GenQaArgs ga;
  auto* g = app.add_subcommand("gen-qa", "Generate instruction/response pairs");
  g->add_option("--manifest", ga.manifest, "Manifest JSONL from `synthesize`");
  g->add_option("--clips", ga.clips, "Clip JSONL for audio captioning pairs");
  g->add_option("--templates", ga.templates, "Template bank JSON (default: built-in)");
  g->add_option("--T", cfg.T, "Token timeline length")->capture_default_str();
  g->add_option("--out", ga.out, "Pairs JSONL to write")->required();

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Score temporal predictions");
  e->add_option("--mode", ea.mode, "avedl (mAP) or vtg (R1, mIoU)")
      ->check(CLI::IsMember({"avedl", "vtg"}))
      ->capture_default_str();
  e->add_option("--gt", ea.gt, "Ground truth JSONL")->required();
  e->add_option("--preds", ea.preds, "Prediction JSONL");
  e->add_option("--responses", ea.responses, "Model response JSONL to parse");
  e->add_option("--sweep-air", ea.sweep_air, "Prediction path template containing {air}");
  e->add_option("--T", cfg.T, "Token timeline length for --responses")->capture_default_str();
  e->add_option("--out", ea.out, "Report JSON to write");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  cfg.format = format == "table" ? OutputFormat::table : OutputFormat::json;

  try {
    if (c->parsed()) return cmd_cluster(cfg, ca, out, log);
    if (s->parsed()) return cmd_synthesize(cfg, sa, out, log);
    if (i->parsed()) return cmd_interleave(cfg, ia, out, log);
    if (g->parsed()) return cmd_gen_qa(cfg, ga, out, log);
    if (e->parsed()) return cmd_eval(cfg, ea, out, log);
  } catch (const ValidationError& ex) {
    log.error("{}", ex.what());
    return kExitValidation;
  } catch (const IoError& ex) {
    log.error("{}", ex.what());
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace avtime::cli
