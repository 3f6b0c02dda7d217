// stretto: cross-modal passage retrieval toolkit.
//
// One binary with subcommands covering the full workflow: corpus
// generation, snippet pretraining, passage-model training, embedding,
// retrieval, evaluation, sweeps, and a single-seed `repro` chain.

#include "stretto/corpus.hpp"
#include "stretto/matrix_io.hpp"
#include "stretto/metrics.hpp"
#include "stretto/model.hpp"
#include "stretto/retrieval.hpp"
#include "stretto/sweeps.hpp"
#include "stretto/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stretto;

namespace {

void ensure_writable(const fs::path& path, bool force) {
  if (fs::exists(path) && !force)
    throw IoError("refusing to overwrite " + path.string() +
                  " (pass --force to allow)");
}

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config: " + path);
  return json::parse(f);
}

// --set key=value patches applied onto the config json
void apply_overrides(json& j, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got: " + kv);
    std::string key = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      parsed = value;  // plain string
    }
    j[key] = parsed;
  }
}

TrainConfig make_train_config(const std::string& config_path,
                              const std::vector<std::string>& sets,
                              std::uint64_t seed, int epochs) {
  json j = config_path.empty() ? json::object() : load_json_file(config_path);
  apply_overrides(j, sets);
  TrainConfig cfg = train_config_from_json(j.dump());
  if (seed != 0) cfg.seed = seed;
  if (epochs > 0) cfg.max_epochs = epochs;
  cfg.validate();
  return cfg;
}

CorpusConfig make_corpus_config(const std::string& config_path,
                                const std::vector<std::string>& sets,
                                const std::string& profile) {
  CorpusConfig cfg;
  if (profile == "small") cfg.generator = small_generator_config();
  else if (profile != "default")
    throw ConfigError("unknown generator profile: " + profile);
  json j = json::object();
  if (!config_path.empty()) j = load_json_file(config_path);
  apply_overrides(j, sets);
  if (!j.empty()) {
    // config files share the manifest's generator schema
    json base = json::parse(corpus_config_to_json_text(cfg));
    base.merge_patch(j);
    cfg = corpus_config_from_json_text(base.dump());
  }
  cfg.validate();
  return cfg;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << text;
}

json report_to_json_obj(const EvalReport& r) {
  return json{{"direction", r.direction}, {"dataset", r.dataset},
              {"variant", r.variant},     {"num_queries", r.num_queries},
              {"num_candidates", r.num_candidates},
              {"r_at_1", r.r_at_1},       {"r_at_10", r.r_at_10},
              {"r_at_25", r.r_at_25},     {"mrr", r.mrr},
              {"mr", r.mr}};
}

// ---------------------------------------------------------------------------
// subcommand bodies

int cmd_gen_corpus(const std::string& out, int pairs, std::uint64_t seed,
                   const std::string& config, const std::string& profile,
                   const std::vector<std::string>& sets, bool force) {
  ensure_writable(fs::path(out) / "train" / "manifest.json", force);
  CorpusConfig cfg = make_corpus_config(config, sets, profile);
  auto manifests = build_corpus(out, cfg, pairs, seed);
  for (const auto& m : manifests)
    std::cerr << "[gen-corpus] " << m.split << ": " << m.records.size()
              << " records\n";
  return 0;
}

int cmd_pretrain(const std::string& corpus, const std::string& out,
                 const std::string& config, const std::vector<std::string>& sets,
                 std::uint64_t seed, int epochs, const std::string& log_path,
                 bool no_cca, bool force) {
  ensure_writable(out, force);
  TrainConfig cfg = make_train_config(config, sets, seed, epochs);
  cfg.variant = "bl";
  CorpusManifest train = load_manifest(corpus, "train");
  CorpusManifest valid = load_manifest(corpus, "valid");

  std::ofstream log_file;
  std::ostream* log = nullptr;
  if (!log_path.empty()) {
    ensure_writable(log_path, force);
    log_file.open(log_path);
    log = &log_file;
  }
  TrainResult res;
  SnippetModelF model = pretrain_variant(train, valid, cfg, log, &res, !no_cca);
  save_checkpoint(out, model);
  std::cerr << "[pretrain] best snippet val MRR " << res.best_val_mrr
            << " at epoch " << res.best_epoch << "; saved " << out << "\n";
  return 0;
}

int cmd_train(const std::string& variant, const std::string& corpus,
              const std::string& out, const std::string& pretrained,
              const std::string& config, const std::vector<std::string>& sets,
              std::uint64_t seed, int epochs, const std::string& log_path,
              bool force) {
  ensure_writable(out, force);
  TrainConfig cfg = make_train_config(config, sets, seed, epochs);
  cfg.variant = variant;
  CorpusManifest train = load_manifest(corpus, "train");
  CorpusManifest valid = load_manifest(corpus, "valid");

  std::ofstream log_file;
  std::ostream* log = nullptr;
  if (!log_path.empty()) {
    ensure_writable(log_path, force);
    log_file.open(log_path);
    log = &log_file;
  }

  if (variant == "bl") {
    TrainResult res;
    SnippetModelF model = pretrain_variant(train, valid, cfg, log, &res);
    save_checkpoint(out, model);
    std::cerr << "[train bl] best snippet val MRR " << res.best_val_mrr
              << "; saved " << out << "\n";
    return 0;
  }

  TrainResult res;
  PassageModelF model = train_variant(train, valid, cfg, pretrained, log, &res);
  save_checkpoint(out, model);
  std::cerr << "[train " << variant << "] best val MRR " << res.best_val_mrr
            << " at epoch " << res.best_epoch << "; saved " << out << "\n";
  return 0;
}

int cmd_embed(const std::string& ckpt, const std::string& corpus,
              const std::string& split, const std::string& modality,
              const std::string& out, bool force) {
  ensure_writable(out, force);
  if (peek_checkpoint_kind(ckpt) != CheckpointKind::Passage)
    throw ArgumentError("embed needs a passage (recurrent) checkpoint");
  PassageModelF model = load_passage_checkpoint(ckpt);
  CorpusManifest m = load_manifest(corpus, split);
  Modality mod = modality == "sheet" ? Modality::Sheet : Modality::Audio;
  EmbeddingIndex index = build_index(model, m, m.base_records(), mod,
                                     checkpoint_fingerprint(ckpt));
  save_index(out, index);
  std::cerr << "[embed] " << index.size() << " x " << index.dim()
            << " index written to " << out << "\n";
  return 0;
}

int cmd_retrieve(const std::string& query_path, const std::string& cand_path,
                 const std::string& direction, const std::string& out,
                 bool force) {
  ensure_writable(out, force);
  EmbeddingIndex queries = load_index(query_path);
  EmbeddingIndex cands = load_index(cand_path);
  std::vector<RankedList> lists = retrieve_all(queries, cands);
  write_ranks(out, lists, direction);
  std::cerr << "[retrieve] " << lists.size() << " ranked lists written to "
            << out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& ranks_path, const std::string& out,
                 const std::string& dataset, const std::string& variant,
                 bool force) {
  ensure_writable(out, force);
  RanksFile rf = read_ranks(ranks_path);
  EvalReport rep = evaluate(rf.lists, rf.direction, dataset, variant);
  write_report(out, rep);
  std::cerr << "[evaluate] " << rep.direction << " MRR " << rep.mrr << " R@1 "
            << rep.r_at_1 << " written to " << out << "\n";
  return 0;
}

int cmd_sweep_dim(const std::string& corpus, const std::string& out,
                  const std::string& dims_csv, const std::string& config,
                  const std::vector<std::string>& sets, std::uint64_t seed,
                  int epochs) {
  TrainConfig cfg = make_train_config(config, sets, seed, epochs);
  CorpusManifest train = load_manifest(corpus, "train");
  CorpusManifest valid = load_manifest(corpus, "valid");
  CorpusManifest test = load_manifest(corpus, "test");
  auto rows =
      sweep_embedding_dim(parse_int_list(dims_csv), train, valid, test, cfg, out);
  for (const auto& r : rows)
    std::cerr << "[sweep dim] D=" << r.dim << " mrr_a2s=" << r.mrr_a2s
              << " mrr_s2a=" << r.mrr_s2a << "\n";
  return 0;
}

int cmd_sweep_tempo(const std::string& corpus, const std::string& out,
                    const std::string& ratios_csv,
                    const std::vector<std::string>& ckpts, int top_k) {
  CorpusManifest test = load_manifest(corpus, "test");
  std::map<std::string, std::string> checkpoints;
  for (const auto& kv : ckpts) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--ckpt expects name=path, got: " + kv);
    checkpoints[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (checkpoints.empty()) throw ConfigError("tempo sweep needs --ckpt entries");
  sweep_tempo(parse_double_list(ratios_csv), test, checkpoints, out, top_k);
  return 0;
}

int cmd_scatter(const std::string& ckpt, const std::string& corpus,
                const std::string& out) {
  PassageModelF model = load_passage_checkpoint(ckpt);
  CorpusManifest test = load_manifest(corpus, "test");
  auto points = scatter_analysis(model, test, out);
  std::cerr << "[scatter] " << points.size() << " points written under " << out
            << "\n";
  return 0;
}

// the full pipeline from one seed: corpus, pretraining, variants,
// retrieval, evaluation, sweeps, scatter, aggregate report
int cmd_repro(const std::string& out, std::uint64_t seed, int pairs,
              int pretrain_epochs, int epochs, bool force) {
  fs::path root(out);
  if (fs::exists(root / "report.json") && !force)
    throw IoError("refusing to overwrite " + (root / "report.json").string() +
                  " (pass --force to allow)");
  fs::create_directories(root);
  fs::create_directories(root / "ckpt");
  fs::create_directories(root / "index");
  fs::create_directories(root / "ranks");
  fs::create_directories(root / "logs");

  std::cerr << "[repro] corpus\n";
  CorpusConfig ccfg;
  ccfg.generator = small_generator_config();
  ccfg.split_ratios = {0.6, 0.15, 0.25};
  ccfg.aug_factor = 3;
  auto manifests = build_corpus((root / "corpus").string(), ccfg, pairs, seed);
  const CorpusManifest& train = manifests[0];
  const CorpusManifest& valid = manifests[1];
  const CorpusManifest& test = manifests[2];

  TrainConfig base;
  base.seed = seed;
  base.batch_size = 8;
  base.max_epochs = epochs;
  base.pretrain_pairs_per_epoch = 128;
  base.cca_max_pairs = 512;

  std::cerr << "[repro] pretrain\n";
  TrainConfig pre = base;
  pre.max_epochs = pretrain_epochs;
  std::ofstream pre_log(root / "logs" / "pretrain.jsonl");
  SnippetModelF bl = pretrain_variant(train, valid, pre, &pre_log);
  std::string bl_path = (root / "ckpt" / "bl.stck").string();
  save_checkpoint(bl_path, bl);

  std::map<std::string, std::string> ckpts{{"bl", bl_path}};
  json variant_reports = json::object();
  for (const std::string variant : {"rnn", "rnn-ft"}) {
    std::cerr << "[repro] train " << variant << "\n";
    TrainConfig cfg = base;
    cfg.variant = variant;
    std::ofstream log(root / "logs" / (variant + ".jsonl"));
    PassageModelF model = train_variant(train, valid, cfg, bl_path, &log);
    std::string path = (root / "ckpt" / (variant + ".stck")).string();
    save_checkpoint(path, model);
    ckpts[variant] = path;
  }

  // embed + retrieve + evaluate the recurrent model through the same file
  // formats the standalone subcommands use
  std::cerr << "[repro] retrieve\n";
  PassageModelF rnn = load_passage_checkpoint(ckpts["rnn"]);
  std::uint64_t fp = checkpoint_fingerprint(ckpts["rnn"]);
  EmbeddingIndex sheet_idx =
      build_index(rnn, test, test.base_records(), Modality::Sheet, fp);
  EmbeddingIndex audio_idx =
      build_index(rnn, test, test.base_records(), Modality::Audio, fp);
  save_index((root / "index" / "sheet.eidx").string(), sheet_idx);
  save_index((root / "index" / "audio.eidx").string(), audio_idx);

  std::vector<RankedList> a2s = retrieve_all(audio_idx, sheet_idx);
  std::vector<RankedList> s2a = retrieve_all(sheet_idx, audio_idx);
  write_ranks((root / "ranks" / "rnn_a2s.json").string(), a2s, "A2S");
  write_ranks((root / "ranks" / "rnn_s2a.json").string(), s2a, "S2A");
  EvalReport rep_a2s = evaluate(a2s, "A2S", "synthetic", "rnn");
  EvalReport rep_s2a = evaluate(s2a, "S2A", "synthetic", "rnn");
  variant_reports["rnn"] =
      json{{"a2s", report_to_json_obj(rep_a2s)}, {"s2a", report_to_json_obj(rep_s2a)}};

  // baseline voting over the same split
  std::cerr << "[repro] baseline voting\n";
  SnippetModelF bl_loaded = load_snippet_checkpoint(bl_path);
  SnippetIndex bl_sheet = build_snippet_index(bl_loaded, test,
                                              test.base_records(), Modality::Sheet);
  SnippetIndex bl_audio = build_snippet_index(bl_loaded, test,
                                              test.base_records(), Modality::Audio);
  std::vector<RankedList> bl_a2s = baseline_retrieve_all(
      bl_loaded, test, test.base_records(), Modality::Audio, bl_sheet);
  std::vector<RankedList> bl_s2a = baseline_retrieve_all(
      bl_loaded, test, test.base_records(), Modality::Sheet, bl_audio);
  variant_reports["bl"] =
      json{{"a2s", report_to_json_obj(evaluate(bl_a2s, "A2S", "synthetic", "bl"))},
           {"s2a", report_to_json_obj(evaluate(bl_s2a, "S2A", "synthetic", "bl"))}};

  // rnn-ft evaluation in-process
  {
    PassageModelF ft = load_passage_checkpoint(ckpts["rnn-ft"]);
    std::vector<PassageData> test_data = load_passage_data(test, ft.hops);
    SplitRetrieval r = evaluate_split(ft, test_data);
    variant_reports["rnn-ft"] = json{{"a2s", {{"mrr", r.mrr_a2s}, {"r_at_1", r.r1_a2s}}},
                                     {"s2a", {{"mrr", r.mrr_s2a}, {"r_at_1", r.r1_s2a}}}};
  }

  std::cerr << "[repro] sweeps\n";
  TempoSweepTable tempo = sweep_tempo({0.5, 1.0, 2.0}, test, ckpts,
                                      (root / "sweeps").string());
  TrainConfig sweep_cfg = base;
  sweep_cfg.max_epochs = std::max(2, epochs / 2);
  auto dim_rows = sweep_embedding_dim({16, 32}, train, valid, test, sweep_cfg,
                                      (root / "sweeps").string());
  scatter_analysis(rnn, test, (root / "sweeps").string());

  json report{{"seed", seed},
              {"pairs", pairs},
              {"variants", variant_reports},
              {"fingerprints",
               {{"rnn", hex64(fp)},
                {"bl", hex64(checkpoint_fingerprint(bl_path))},
                {"rnn-ft", hex64(checkpoint_fingerprint(ckpts["rnn-ft"]))}}}};
  json tempo_json = json::object();
  for (const auto& [name, cells] : tempo) {
    json rows = json::array();
    for (const auto& c : cells)
      rows.push_back(json{{"ratio", c.ratio},
                          {"mrr_a2s", c.mrr_a2s},
                          {"mrr_s2a", c.mrr_s2a}});
    tempo_json[name] = rows;
  }
  report["tempo"] = tempo_json;
  json dims = json::array();
  for (const auto& r : dim_rows)
    dims.push_back(
        json{{"dim", r.dim}, {"mrr_a2s", r.mrr_a2s}, {"mrr_s2a", r.mrr_s2a}});
  report["dim_sweep"] = dims;

  write_text(root / "report.json", report.dump(1) + "\n");
  std::cerr << "[repro] report written to " << (root / "report.json") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stretto: audio / sheet-music passage retrieval toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool force = false;
  int threads = 1;
  std::string config;
  std::vector<std::string> sets;
  app.add_option("--seed", seed, "master seed (0 keeps config/default)");
  app.add_flag("--force", force, "allow overwriting existing outputs");
  app.add_option("--threads", threads, "worker threads for tower passes");
  app.add_option("--config", config, "JSON config file");
  app.add_option("--set", sets, "config override key=value (repeatable)");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
  std::string gen_out, gen_profile = "default";
  int gen_pairs = 32;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--pairs", gen_pairs, "number of passage pairs");
  gen->add_option("--profile", gen_profile, "generator profile: default|small");

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "train the snippet baseline model");
  std::string pre_corpus, pre_out, pre_log;
  int pre_epochs = 0;
  bool pre_no_cca = false;
  pre->add_option("--corpus", pre_corpus, "corpus directory")->required();
  pre->add_option("--out", pre_out, "checkpoint path")->required();
  pre->add_option("--epochs", pre_epochs, "override max epochs");
  pre->add_option("--log", pre_log, "epoch log (JSONL)");
  pre->add_flag("--no-cca", pre_no_cca, "skip the CCA refinement step");

  // train
  auto* tr = app.add_subcommand("train", "train a retrieval model variant");
  std::string tr_variant = "rnn", tr_corpus, tr_out, tr_pre, tr_log;
  int tr_epochs = 0;
  tr->add_option("--variant", tr_variant,
                 "bl|rnn|rnn-ft|rnn-fz|rnn-ft-cca|rnn-fz-cca");
  tr->add_option("--corpus", tr_corpus, "corpus directory")->required();
  tr->add_option("--out", tr_out, "checkpoint path")->required();
  tr->add_option("--pretrained", tr_pre, "snippet pretraining checkpoint");
  tr->add_option("--epochs", tr_epochs, "override max epochs");
  tr->add_option("--log", tr_log, "epoch log (JSONL)");

  // embed
  auto* em = app.add_subcommand("embed", "embed one split into an index");
  std::string em_ckpt, em_corpus, em_split = "test", em_modality, em_out;
  em->add_option("--ckpt", em_ckpt, "passage checkpoint")->required();
  em->add_option("--corpus", em_corpus, "corpus directory")->required();
  em->add_option("--split", em_split, "train|valid|test");
  em->add_option("--modality", em_modality, "sheet|audio")->required();
  em->add_option("--out", em_out, "index file")->required();

  // retrieve
  auto* re = app.add_subcommand("retrieve", "rank candidates for every query");
  std::string re_query, re_cand, re_dir = "A2S", re_out;
  re->add_option("--query-index", re_query, "query index file")->required();
  re->add_option("--cand-index", re_cand, "candidate index file")->required();
  re->add_option("--direction", re_dir, "A2S|S2A");
  re->add_option("--out", re_out, "ranks.json path")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "compute metrics from ranks.json");
  std::string ev_ranks, ev_out, ev_dataset = "synthetic", ev_variant = "rnn";
  ev->add_option("--ranks", ev_ranks, "ranks.json path")->required();
  ev->add_option("--out", ev_out, "report.json path")->required();
  ev->add_option("--dataset", ev_dataset, "dataset tag");
  ev->add_option("--variant", ev_variant, "model variant tag");

  // sweep
  auto* sw = app.add_subcommand("sweep", "embedding-dimension or tempo sweep");
  sw->require_subcommand(1);
  auto* swd = sw->add_subcommand("dim", "embedding dimension sweep");
  std::string swd_corpus, swd_out, swd_dims = "16,64,256";
  int swd_epochs = 0;
  swd->add_option("--corpus", swd_corpus, "corpus directory")->required();
  swd->add_option("--out", swd_out, "output directory")->required();
  swd->add_option("--dims", swd_dims, "comma-separated dimensions");
  swd->add_option("--epochs", swd_epochs, "override max epochs");
  auto* swt = sw->add_subcommand("tempo", "tempo-ratio sweep");
  std::string swt_corpus, swt_out, swt_ratios = "0.5,1,2";
  std::vector<std::string> swt_ckpts;
  int swt_topk = 5;
  swt->add_option("--corpus", swt_corpus, "corpus directory")->required();
  swt->add_option("--out", swt_out, "output directory")->required();
  swt->add_option("--ratios", swt_ratios, "comma-separated tempo ratios");
  swt->add_option("--ckpt", swt_ckpts, "name=path (repeatable)");
  swt->add_option("--top-k", swt_topk, "votes per query snippet");

  // scatter
  auto* sc = app.add_subcommand("scatter", "distance vs duration analysis");
  std::string sc_ckpt, sc_corpus, sc_out;
  sc->add_option("--ckpt", sc_ckpt, "passage checkpoint")->required();
  sc->add_option("--corpus", sc_corpus, "corpus directory")->required();
  sc->add_option("--out", sc_out, "output directory")->required();

  // repro
  auto* rp = app.add_subcommand("repro", "full pipeline from one seed");
  std::string rp_out;
  int rp_pairs = 28, rp_pre_epochs = 3, rp_epochs = 8;
  rp->add_option("--out", rp_out, "output directory")->required();
  rp->add_option("--pairs", rp_pairs, "corpus pairs");
  rp->add_option("--pretrain-epochs", rp_pre_epochs, "pretraining epochs");
  rp->add_option("--epochs", rp_epochs, "training epochs per variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    set_num_threads(threads);
    if (*gen)
      return cmd_gen_corpus(gen_out, gen_pairs, seed == 0 ? 1 : seed, config,
                            gen_profile, sets, force);
    if (*pre)
      return cmd_pretrain(pre_corpus, pre_out, config, sets, seed, pre_epochs,
                          pre_log, pre_no_cca, force);
    if (*tr)
      return cmd_train(tr_variant, tr_corpus, tr_out, tr_pre, config, sets,
                       seed, tr_epochs, tr_log, force);
    if (*em) return cmd_embed(em_ckpt, em_corpus, em_split, em_modality, em_out, force);
    if (*re) return cmd_retrieve(re_query, re_cand, re_dir, re_out, force);
    if (*ev) return cmd_evaluate(ev_ranks, ev_out, ev_dataset, ev_variant, force);
    if (*swd)
      return cmd_sweep_dim(swd_corpus, swd_out, swd_dims, config, sets, seed,
                           swd_epochs);
    if (*swt) return cmd_sweep_tempo(swt_corpus, swt_out, swt_ratios, swt_ckpts, swt_topk);
    if (*sc) return cmd_scatter(sc_ckpt, sc_corpus, sc_out);
    if (*rp)
      return cmd_repro(rp_out, seed == 0 ? 42 : seed, rp_pairs, rp_pre_epochs,
                       rp_epochs, force);
    std::cerr << "usage error: no subcommand\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
