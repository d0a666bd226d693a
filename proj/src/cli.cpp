// Copyright 2026-present the latentsearch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "latentsearch/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "latentsearch/autoencoder.hpp"
#include "latentsearch/bench.hpp"
#include "latentsearch/embedding_io.hpp"
#include "latentsearch/error.hpp"
#include "latentsearch/flat_index.hpp"
#include "latentsearch/hnsw_index.hpp"
#include "latentsearch/hybrid_search.hpp"

namespace latentsearch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Merges one stage's record into the run manifest at `path`.
void record_stage(const std::string& path, const std::string& stage, json entry) {
  if (path.empty()) return;
  json manifest = json::object();
  if (std::ifstream in(path); in) {
    try {
      manifest = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError("manifest " + path + " is not valid JSON: " + e.what());
    }
  }
  manifest["manifest_version"] = 1;
  manifest["stages"][stage] = std::move(entry);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path);
  out << manifest.dump(2) << '\n';
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

struct GenSyntheticArgs {
  std::size_t count = 500;
  std::size_t dim = 384;
  std::size_t clusters = 8;
  std::uint64_t seed = 42;
  double noise = 0.1;
  std::string out;
  std::string labels_out;
  std::size_t query_count = 0;
  std::uint64_t query_seed = 0;
  bool query_seed_set = false;
  std::string queries_out;
  std::string manifest;
};

int cmd_gen_synthetic(const GenSyntheticArgs& a, std::ostream& out) {
  const auto corpus = generate_synthetic(a.count, a.dim, a.clusters, a.seed, a.noise);
  const auto bytes = save_emb1(corpus.set, a.out);
  const std::string labels_path = a.labels_out.empty() ? a.out + ".labels" : a.labels_out;
  std::ostringstream labels;
  for (auto l : corpus.labels) labels << l << '\n';
  write_text_file(labels_path, labels.str());
  out << "wrote " << a.out << " (" << corpus.set.count() << " x " << corpus.set.dim()
      << ", " << bytes << " bytes) and " << labels_path << "\n";

  const std::uint64_t query_seed = a.query_seed_set ? a.query_seed : a.seed + 1;
  json entry{{"out", a.out}, {"labels", labels_path}, {"count", a.count},
             {"dim", a.dim}, {"clusters", a.clusters}, {"seed", a.seed},
             {"noise", a.noise}};
  if (a.query_count > 0) {
    if (a.queries_out.empty()) {
      throw ArgumentError("--query-count needs --queries-out");
    }
    const auto queries = generate_synthetic_queries(a.query_count, a.dim, a.clusters,
                                                    a.seed, query_seed, a.noise);
    save_emb1(queries.set, a.queries_out);
    std::ostringstream qlabels;
    for (auto l : queries.labels) qlabels << l << '\n';
    write_text_file(a.queries_out + ".labels", qlabels.str());
    out << "wrote " << a.queries_out << " (" << a.query_count << " queries)\n";
    entry["queries_out"] = a.queries_out;
    entry["query_count"] = a.query_count;
    entry["query_seed"] = query_seed;
  }
  record_stage(a.manifest, "gen-synthetic", entry);
  return kExitOk;
}

struct IngestArgs {
  std::string corpus;
  std::string embeddings;
  std::string manifest;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const auto records = load_corpus_jsonl(fs::path(a.corpus));
  const auto set = load_emb1(a.embeddings);
  check_corpus_alignment(records, set);
  out << "corpus " << a.corpus << ": " << records.size() << " records aligned with "
      << a.embeddings << " (" << set.count() << " x " << set.dim() << ")\n";
  record_stage(a.manifest, "ingest",
               {{"corpus", a.corpus}, {"embeddings", a.embeddings},
                {"count", set.count()}, {"dim", set.dim()}});
  return kExitOk;
}

struct TrainArgs {
  std::string in;
  std::string out;
  std::size_t hidden_dim = 256;
  std::size_t latent_dim = 128;
  TrainConfig config;
  std::string manifest;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  a.config.validate();
  const auto data = load_emb1(a.in);
  auto model = init_model(data.dim(), a.hidden_dim, a.latent_dim, a.config.seed);
  TrainConfig config = a.config;
  // The shuffle stream is keyed off the init seed so one flag drives both.
  config.seed = a.config.seed + 1;
  auto [trained, report] = train(std::move(model), data, config);
  for (std::size_t e = 0; e < report.per_epoch_loss.size(); ++e) {
    out << "epoch " << (e + 1) << " loss " << std::setprecision(8)
        << report.per_epoch_loss[e] << "\n";
  }
  save_aem1(trained, a.out);
  out << "wrote " << a.out << " (" << trained.input_dim() << " -> "
      << trained.latent_dim() << ", " << std::fixed << std::setprecision(3)
      << report.wall_time_seconds << " s)\n";
  out.unsetf(std::ios::fixed);
  record_stage(a.manifest, "train",
               {{"in", a.in}, {"out", a.out}, {"hidden_dim", a.hidden_dim},
                {"latent_dim", a.latent_dim}, {"epochs", a.config.epochs},
                {"batch_size", a.config.batch_size},
                {"learning_rate", a.config.learning_rate},
                {"adam_beta1", a.config.adam_beta1},
                {"adam_beta2", a.config.adam_beta2},
                {"adam_epsilon", a.config.adam_epsilon},
                {"seed", a.config.seed},
                {"per_epoch_loss", report.per_epoch_loss}});
  return kExitOk;
}

struct EncodeArgs {
  std::string model;
  std::string in;
  std::string out;
  std::string manifest;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  const auto model = load_aem1(a.model);
  const auto data = load_emb1(a.in);
  const auto latent = encode_set(model, data);
  save_emb1(latent, a.out);
  out << "wrote " << a.out << " (" << latent.count() << " x " << latent.dim() << ")\n";
  record_stage(a.manifest, "encode", {{"model", a.model}, {"in", a.in}, {"out", a.out}});
  return kExitOk;
}

struct BuildFlatArgs {
  std::string in;
  std::string out;
  std::string manifest;
};

int cmd_build_flat(const BuildFlatArgs& a, std::ostream& out) {
  const auto index = build_flat(load_emb1(a.in));
  save_emb1(index.to_embedding_set(), a.out);
  out << "wrote " << a.out << " (" << index.count() << " normalized rows)\n";
  record_stage(a.manifest, "build-flat", {{"in", a.in}, {"out", a.out}});
  return kExitOk;
}

struct BuildHnswArgs {
  std::string in;
  std::string out;
  HnswConfig config;
  std::size_t m_max0 = 0;
  std::string manifest;
};

int cmd_build_hnsw(const BuildHnswArgs& a, std::ostream& out) {
  HnswConfig config = a.config;
  config.m_max0 = a.m_max0 == 0 ? 2 * config.m : a.m_max0;
  config.validate();
  const auto latent = load_emb1(a.in, SpaceTag::latent);
  const auto graph = HnswIndex::build(latent, config);
  graph.save(a.out);
  out << "wrote " << a.out << " (" << graph.size() << " nodes, top layer "
      << graph.max_level() << ")\n";
  record_stage(a.manifest, "build-hnsw",
               {{"in", a.in}, {"out", a.out}, {"m", config.m},
                {"m_max0", config.m_max0}, {"ef_construction", config.ef_construction},
                {"ef_search", config.ef_search}, {"seed", config.seed}});
  return kExitOk;
}

struct PipelinePaths {
  std::string embeddings;
  std::string model;
  std::string latent;
  std::string hnsw;
  std::string corpus;
};

HybridPipeline load_pipeline(const PipelinePaths& p) {
  for (const auto* required : {&p.embeddings, &p.model, &p.latent, &p.hnsw}) {
    if (required->empty()) {
      throw ArgumentError("hybrid search needs --embeddings, --model, --latent and --hnsw");
    }
  }
  auto original = load_emb1(p.embeddings, SpaceTag::original);
  auto latent = load_emb1(p.latent, SpaceTag::latent);
  auto model = load_aem1(p.model);
  auto graph = HnswIndex::load(p.hnsw, latent);
  std::vector<CorpusRecord> corpus;
  if (!p.corpus.empty()) corpus = load_corpus_jsonl(fs::path(p.corpus));
  return HybridPipeline(std::move(model), std::move(graph), std::move(latent),
                        std::move(original), std::move(corpus));
}

std::vector<float> query_row(const std::string& path, std::size_t index) {
  if (path.empty()) throw ArgumentError("--queries is required");
  const auto queries = load_emb1(path);
  if (index >= queries.count()) {
    throw ArgumentError("--query-index " + std::to_string(index) + " out of range (" +
                        std::to_string(queries.count()) + " queries)");
  }
  const auto row = queries.row(index);
  return {row.begin(), row.end()};
}

struct QueryArgs {
  std::string system = "hybrid";
  PipelinePaths paths;
  std::string flat;
  std::string queries;
  std::size_t query_index = 0;
  HybridConfig hybrid;
  std::string format = "text";
};

void print_hits(std::ostream& out, const std::vector<SearchHit>& hits,
                const std::vector<std::string>& texts) {
  for (std::size_t i = 0; i < hits.size(); ++i) {
    out << hits[i].rank << "\t" << hits[i].id << "\t" << std::fixed
        << std::setprecision(6) << hits[i].score;
    out.unsetf(std::ios::fixed);
    if (i < texts.size() && !texts[i].empty()) out << "\t" << texts[i];
    out << "\n";
  }
}

json hits_json(const std::vector<SearchHit>& hits, const std::vector<std::string>& texts) {
  json arr = json::array();
  for (std::size_t i = 0; i < hits.size(); ++i) {
    json h{{"rank", hits[i].rank}, {"id", hits[i].id}, {"score", hits[i].score}};
    if (i < texts.size()) h["text"] = texts[i];
    arr.push_back(h);
  }
  return arr;
}

int cmd_query(const QueryArgs& a, std::ostream& out) {
  a.hybrid.validate();
  const auto q = query_row(a.queries, a.query_index);
  std::vector<SearchHit> hits;
  std::vector<std::string> texts;
  double elapsed = 0.0;
  if (a.system == "flat") {
    if (a.flat.empty()) throw ArgumentError("flat search needs --flat");
    const auto index = build_flat(load_emb1(a.flat));
    std::vector<CorpusRecord> corpus;
    if (!a.paths.corpus.empty()) corpus = load_corpus_jsonl(fs::path(a.paths.corpus));
    auto timed = time_query([&] { return flat_search(index, q, a.hybrid.k); });
    hits = std::move(timed.result);
    elapsed = timed.seconds;
    for (const auto& h : hits) texts.push_back(h.id < corpus.size() ? corpus[h.id].text : "");
  } else {
    const auto pipeline = load_pipeline(a.paths);
    const auto result = hybrid_search(pipeline, q, a.hybrid);
    hits = result.latent_hits();
    elapsed = result.elapsed_seconds;
    for (const auto& h : result.hits) texts.push_back(h.text);
  }
  if (a.format == "json") {
    out << json{{"system", a.system}, {"k", a.hybrid.k},
                {"elapsed_seconds", elapsed}, {"hits", hits_json(hits, texts)}}
               .dump(2)
        << "\n";
  } else {
    print_hits(out, hits, texts);
    out << "elapsed " << elapsed << " s\n";
  }
  return kExitOk;
}

struct BenchArgs {
  PipelinePaths paths;
  std::string flat;
  std::string queries;
  std::size_t query_index = 0;
  std::string query_text;
  HybridConfig hybrid;
  UtilityWeights weights;
  std::size_t repeats = 1;
  std::string out;
  std::string format = "json";
  std::string manifest;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  a.hybrid.validate();
  a.weights.validate();
  if (a.repeats == 0) throw ArgumentError("--repeats must be positive");
  if (a.flat.empty()) throw ArgumentError("bench needs --flat");
  const auto q = query_row(a.queries, a.query_index);
  const auto index = build_flat(load_emb1(a.flat));
  const auto pipeline = load_pipeline(a.paths);
  const TimingMode mode = a.repeats > 1 ? TimingMode::median : TimingMode::single_shot;

  auto flat = time_query([&] { return flat_search(index, q, a.hybrid.k); }, a.repeats);
  auto hybrid = time_query([&] { return hybrid_search(pipeline, q, a.hybrid); }, a.repeats);

  SystemRun flat_run{SystemLabel::flat_baseline, a.hybrid.k, mean_score(flat.result),
                     flat.seconds, mode, a.repeats, std::nullopt};
  const auto latent_hits = hybrid.result.latent_hits();
  SystemRun hybrid_run{SystemLabel::hybrid, a.hybrid.k, mean_score(latent_hits),
                       hybrid.seconds, mode, a.repeats,
                       hybrid.result.cross_space_similarity()};

  std::string text = a.query_text;
  if (text.empty()) text = "query row " + std::to_string(a.query_index) + " of " + a.queries;
  const auto report = compare(flat_run, hybrid_run, a.weights, text);
  const auto format = a.format == "text" ? ReportFormat::human_text : ReportFormat::json;
  const auto rendered = emit_report(report, format);
  if (!a.out.empty()) {
    write_text_file(a.out, rendered);
    out << "wrote " << a.out << "\n";
    if (format == ReportFormat::json) out << emit_report(report, ReportFormat::human_text);
  } else {
    out << rendered;
  }
  record_stage(a.manifest, "bench",
               {{"flat", a.flat}, {"embeddings", a.paths.embeddings},
                {"model", a.paths.model}, {"latent", a.paths.latent},
                {"hnsw", a.paths.hnsw}, {"queries", a.queries},
                {"query_index", a.query_index}, {"k", a.hybrid.k},
                {"candidate_multiplier", a.hybrid.candidate_multiplier},
                {"alpha", a.weights.alpha}, {"beta", a.weights.beta},
                {"repeats", a.repeats}, {"out", a.out}});
  return kExitOk;
}

void add_manifest_flag(CLI::App* cmd, std::string& target) {
  cmd->add_option("--manifest", target, "Run manifest JSON to record this stage in");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"latentsearch: latent-space compressed vector search and benchmark"};
  app.name("latentsearch");
  app.require_subcommand(1);

  GenSyntheticArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a seeded clustered corpus as EMB1");
  gen_cmd->add_option("--count", gen.count)->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dim", gen.dim)->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--clusters", gen.clusters)->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "RMS norm of the per-sample noise vector")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--out", gen.out)->required();
  gen_cmd->add_option("--labels-out", gen.labels_out, "Defaults to <out>.labels");
  gen_cmd->add_option("--query-count", gen.query_count)->capture_default_str();
  auto* qs = gen_cmd->add_option("--query-seed", gen.query_seed, "Defaults to seed + 1");
  gen_cmd->add_option("--queries-out", gen.queries_out);
  add_manifest_flag(gen_cmd, gen.manifest);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a corpus JSONL against its EMB1 embeddings");
  ingest_cmd->add_option("--corpus", ingest.corpus)->required();
  ingest_cmd->add_option("--embeddings", ingest.embeddings)->required();
  add_manifest_flag(ingest_cmd, ingest.manifest);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the autoencoder and write AEM1");
  train_cmd->add_option("--in", tr.in)->required();
  train_cmd->add_option("--out", tr.out)->required();
  train_cmd->add_option("--epochs", tr.config.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.config.batch_size)->capture_default_str();
  train_cmd->add_option("--learning-rate", tr.config.learning_rate)->capture_default_str();
  train_cmd->add_option("--adam-beta1", tr.config.adam_beta1)->capture_default_str();
  train_cmd->add_option("--adam-beta2", tr.config.adam_beta2)->capture_default_str();
  train_cmd->add_option("--adam-epsilon", tr.config.adam_epsilon)->capture_default_str();
  train_cmd->add_option("--seed", tr.config.seed)->capture_default_str();
  train_cmd->add_option("--hidden-dim", tr.hidden_dim)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--latent-dim", tr.latent_dim)->capture_default_str()->check(CLI::PositiveNumber);
  add_manifest_flag(train_cmd, tr.manifest);

  EncodeArgs enc;
  auto* encode_cmd = app.add_subcommand("encode", "Project an EMB1 file into the latent space");
  encode_cmd->add_option("--model", enc.model)->required();
  encode_cmd->add_option("--in", enc.in)->required();
  encode_cmd->add_option("--out", enc.out)->required();
  add_manifest_flag(encode_cmd, enc.manifest);

  BuildFlatArgs bf;
  auto* flat_cmd = app.add_subcommand("build-flat", "Write the normalized flat index as EMB1");
  flat_cmd->add_option("--in", bf.in)->required();
  flat_cmd->add_option("--out", bf.out)->required();
  add_manifest_flag(flat_cmd, bf.manifest);

  BuildHnswArgs bh;
  auto* hnsw_cmd = app.add_subcommand("build-hnsw", "Build an HNSW graph over latent vectors");
  hnsw_cmd->add_option("--in", bh.in)->required();
  hnsw_cmd->add_option("--out", bh.out)->required();
  hnsw_cmd->add_option("--m", bh.config.m)->capture_default_str();
  hnsw_cmd->add_option("--m-max0", bh.m_max0, "Layer-0 degree cap, defaults to 2 * m");
  hnsw_cmd->add_option("--ef-construction", bh.config.ef_construction)->capture_default_str();
  hnsw_cmd->add_option("--ef-search", bh.config.ef_search)->capture_default_str();
  hnsw_cmd->add_option("--seed", bh.config.seed)->capture_default_str();
  add_manifest_flag(hnsw_cmd, bh.manifest);

  auto add_pipeline_flags = [](CLI::App* cmd, PipelinePaths& p) {
    cmd->add_option("--embeddings", p.embeddings, "Original-space EMB1");
    cmd->add_option("--model", p.model, "AEM1 model");
    cmd->add_option("--latent", p.latent, "Latent EMB1");
    cmd->add_option("--hnsw", p.hnsw, "HNW1 graph");
    cmd->add_option("--corpus", p.corpus, "Corpus JSONL for hit texts");
  };

  QueryArgs qa;
  auto* query_cmd = app.add_subcommand("query", "Run one query against either system");
  query_cmd->add_option("--system", qa.system)->capture_default_str()
      ->check(CLI::IsMember({"hybrid", "flat"}));
  add_pipeline_flags(query_cmd, qa.paths);
  query_cmd->add_option("--flat", qa.flat, "Flat index EMB1");
  query_cmd->add_option("--queries", qa.queries, "EMB1 file of query vectors")->required();
  query_cmd->add_option("--query-index", qa.query_index)->capture_default_str();
  query_cmd->add_option("--k", qa.hybrid.k)->capture_default_str();
  query_cmd->add_option("--candidate-multiplier", qa.hybrid.candidate_multiplier)->capture_default_str();
  query_cmd->add_option("--format", qa.format)->capture_default_str()
      ->check(CLI::IsMember({"text", "json"}));

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Compare flat and hybrid search under the utility model");
  add_pipeline_flags(bench_cmd, ba.paths);
  bench_cmd->add_option("--flat", ba.flat, "Flat index EMB1")->required();
  bench_cmd->add_option("--queries", ba.queries, "EMB1 file of query vectors")->required();
  bench_cmd->add_option("--query-index", ba.query_index)->capture_default_str();
  bench_cmd->add_option("--query-text", ba.query_text, "Label for the query in the report");
  bench_cmd->add_option("--k", ba.hybrid.k)->capture_default_str();
  bench_cmd->add_option("--candidate-multiplier", ba.hybrid.candidate_multiplier)->capture_default_str();
  bench_cmd->add_option("--alpha", ba.weights.alpha)->capture_default_str();
  bench_cmd->add_option("--beta", ba.weights.beta)->capture_default_str();
  bench_cmd->add_option("--repeats", ba.repeats, "Median of this many timed runs")->capture_default_str();
  bench_cmd->add_option("--out", ba.out, "Write the report here");
  bench_cmd->add_option("--format", ba.format)->capture_default_str()
      ->check(CLI::IsMember({"text", "json"}));
  add_manifest_flag(bench_cmd, ba.manifest);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  gen.query_seed_set = qs->count() > 0;

  try {
    if (gen_cmd->parsed()) return cmd_gen_synthetic(gen, out);
    if (ingest_cmd->parsed()) return cmd_ingest(ingest, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (encode_cmd->parsed()) return cmd_encode(enc, out);
    if (flat_cmd->parsed()) return cmd_build_flat(bf, out);
    if (hnsw_cmd->parsed()) return cmd_build_hnsw(bh, out);
    if (query_cmd->parsed()) return cmd_query(qa, out);
    if (bench_cmd->parsed()) return cmd_bench(ba, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace latentsearch::cli
