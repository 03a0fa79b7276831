#include "uanet/app/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "uanet/app/pipeline.hpp"
#include "uanet/core/error.hpp"
#include "uanet/eval/bench.hpp"
#include "uanet/eval/report.hpp"

namespace uanet::app {

namespace {

namespace fs = std::filesystem;

// Level from UANET_LOG: error, warn, info (default) or debug.
class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {
    const char* env = std::getenv("UANET_LOG");
    const std::string v = env ? env : "info";
    level_ = v == "error" ? 0 : v == "warn" ? 1 : v == "debug" ? 3 : 2;
  }
  void info(const std::string& msg) const { emit(2, "info", msg); }
  void debug(const std::string& msg) const { emit(3, "debug", msg); }
  void error(const std::string& msg) const { emit(0, "error", msg); }

 private:
  void emit(int at, const char* tag, const std::string& msg) const {
    if (at <= level_) err_ << "level=" << tag << " msg=\"" << msg << "\"\n";
  }
  std::ostream& err_;
  int level_ = 2;
};

struct Options {
  std::optional<std::string> config;
  std::vector<std::string> sets;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> decoder;
  std::optional<double> gamma;
  std::optional<std::size_t> samples;
  std::optional<int> workers;
  bool legalize = false;
  std::optional<std::string> model;
  std::optional<std::string> input;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON config file");
  sub->add_option("--set", o.sets, "override, e.g. training.stage1_epochs=5 (repeatable)");
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "seed for every random stream");
  sub->add_option("--decoder", o.decoder, "mix, draft, refined or viterbi");
  sub->add_option("--gamma", o.gamma, "uncertainty threshold");
  sub->add_option("--samples", o.samples, "Monte-Carlo samples");
  sub->add_option("--workers", o.workers, "threads (default 1)");
  sub->add_flag("--legalize", o.legalize, "repair illegal label sequences");
  sub->add_option("--model", o.model, "model directory (default <out>/model)");
  sub->add_option("--input", o.input, "CoNLL input (default: the configured test split)");
}

Config resolve(const Options& o) {
  std::vector<std::string> sets = o.sets;
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  if (o.seed) sets.push_back("seed=" + std::to_string(*o.seed));
  if (o.decoder) sets.push_back("inference.decoder=" + nlohmann::json(*o.decoder).dump());
  if (o.gamma) sets.push_back("inference.gamma=" + num(*o.gamma));
  if (o.samples) sets.push_back("inference.samples=" + std::to_string(*o.samples));
  if (o.workers)
    for (const char* k : {"inference.workers=", "training.workers=", "bench.workers="})
      sets.push_back(k + std::to_string(*o.workers));
  if (o.legalize) sets.push_back("inference.legalize=true");
  std::optional<fs::path> file;
  if (o.config) file = *o.config;
  return load_config(file, sets);
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  body(f);
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  write_file(p, [&](std::ostream& f) { f << j.dump(2) << '\n'; });
}

fs::path model_dir(const Options& o) { return o.model ? fs::path(*o.model) : fs::path(o.out) / "model"; }

std::vector<data::Sentence> input_or(const Config& c, const Options& o, const model::Tagger& t,
                                     std::vector<data::Sentence> (*pick)(Corpus&&)) {
  if (o.input) return read_sentences(c, *o.input, t.scheme);
  return pick(load_corpus(c));
}

std::vector<data::Sentence> test_split(Corpus&& c) { return std::move(c.test); }
std::vector<data::Sentence> dev_split(Corpus&& c) { return std::move(c.dev); }

int cmd_synth(const Options& o, const Config& c, const Log& log) {
  if (c.data.source != "synthetic") throw ConfigError("data.source", "synth needs the synthetic source");
  const auto corpus = load_corpus(c);
  const fs::path dir = fs::path(o.out) / "data";
  fs::create_directories(dir);
  data::write_conll(dir / "train.txt", corpus.train, corpus.scheme);
  data::write_conll(dir / "dev.txt", corpus.dev, corpus.scheme);
  data::write_conll(dir / "test.txt", corpus.test, corpus.scheme);
  log.info("wrote " + std::to_string(corpus.train.size()) + "/" + std::to_string(corpus.dev.size()) + "/" +
           std::to_string(corpus.test.size()) + " sentences to " + dir.string());
  return 0;
}

int cmd_train(const Options& o, const Config& c, const Log& log) {
  const auto corpus = load_corpus(c);
  log.info("training on " + std::to_string(corpus.train.size()) + " sentences, " +
           std::to_string(corpus.scheme.size()) + " labels");
  const fs::path out(o.out);
  fs::create_directories(out);
  std::ofstream train_log(out / "train_log.jsonl", std::ios::binary);
  train::TrainSummary summary;
  const auto tagger = train_model(
      c, corpus,
      [&](const nlohmann::json& rec) {
        train_log << rec.dump() << '\n';
        train_log.flush();
        log.debug(rec.dump());
      },
      &summary);
  model::save_tagger(model_dir(o), tagger);
  write_json(out / "train_summary.json", {{"dev_token_accuracy", summary.dev_token_accuracy},
                                          {"stage1_best_epoch", summary.stage1_best_epoch},
                                          {"stage2_best_epoch", summary.stage2_best_epoch},
                                          {"gamma", tagger.gamma},
                                          {"dev_sweep", eval::to_json(summary.sweep)}});
  log.info("model saved to " + model_dir(o).string() + ", gamma " + std::to_string(tagger.gamma));
  return 0;
}

int cmd_predict(const Options& o, const Config& c, const Log& log) {
  const auto tagger = model::load_tagger(model_dir(o));
  const auto sentences = input_or(c, o, tagger, test_split);
  const auto tagged = model::tag(tagger, sentences, predict_options(c, tagger));
  const fs::path p = fs::path(o.out) / "predictions.txt";
  write_file(p, [&](std::ostream& f) { model::write_predictions(f, sentences, tagged, tagger.scheme); });
  log.info("wrote " + p.string());
  return 0;
}

int cmd_eval(const Options& o, const Config& c, const Log& log, std::ostream& out) {
  const auto tagger = model::load_tagger(model_dir(o));
  const auto sentences = input_or(c, o, tagger, test_split);
  const auto report = evaluate(c, tagger, sentences, predict_options(c, tagger));
  const fs::path dir(o.out);
  write_json(dir / "report.json", eval::to_json(report, tagger.scheme));
  write_file(dir / "report.csv", [&](std::ostream& f) { eval::write_report_csv(f, report); });
  write_file(dir / "report.txt", [&](std::ostream& f) { eval::write_report_text(f, report, tagger.scheme); });
  eval::write_report_text(out, report, tagger.scheme);
  log.info("wrote " + (dir / "report.txt").string());
  return 0;
}

int cmd_sweep(const Options& o, const Config& c, const Log& log) {
  const auto tagger = model::load_tagger(model_dir(o));
  const auto sentences = input_or(c, o, tagger, dev_split);
  auto opt = predict_options(c, tagger);
  opt.decoder = model::DecoderKind::refined;
  const auto tagged = model::tag(tagger, sentences, opt);
  eval::Sequences gold, refined;
  std::vector<model::DraftPrediction> drafts;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    gold.push_back(sentences[k].gold);
    refined.push_back(tagged[k].refined);
    drafts.push_back(tagged[k].draft);
  }
  const auto grid = eval::gamma_grid(tagger.scheme.size(), c.training.gamma_step);
  const auto gamma = eval::gamma_sweep(tagger.scheme, drafts, refined, gold, grid);
  auto mopt = predict_options(c, tagger);
  mopt.decoder = model::DecoderKind::mix;
  const auto samples = eval::sample_sweep(tagger, sentences, c.sweep.samples, mopt);
  const fs::path dir(o.out);
  write_file(dir / "sweep_gamma.csv", [&](std::ostream& f) { eval::write_gamma_csv(f, gamma); });
  write_file(dir / "sweep_samples.csv", [&](std::ostream& f) { eval::write_samples_csv(f, samples); });
  write_file(dir / "sweep.gp",
             [&](std::ostream& f) { eval::write_sweep_gnuplot(f, "sweep_gamma.csv", "sweep_samples.csv"); });
  nlohmann::json j = {{"gamma", eval::to_json(gamma)}};
  for (const auto& p : samples) j["samples"].push_back({{"samples", p.samples}, {"f1", p.f1}, {"draft_f1", p.draft_f1}});
  write_json(dir / "sweep.json", j);
  log.info("best gamma " + std::to_string(gamma.best_gamma) + " F1 " + std::to_string(gamma.best_f1));
  return 0;
}

int cmd_bench(const Options& o, const Config& c, const Log& log, std::ostream& out) {
  const auto r = eval::decode_throughput(c.bench);
  const fs::path dir(o.out);
  write_file(dir / "bench.csv", [&](std::ostream& f) { eval::write_bench_csv(f, r); });
  write_file(dir / "bench.txt", [&](std::ostream& f) { eval::write_bench_text(f, r); });
  write_file(dir / "bench.gp", [&](std::ostream& f) { eval::write_bench_gnuplot(f, "bench.csv"); });
  write_json(dir / "bench.json", eval::to_json(r));
  eval::write_bench_text(out, r);
  log.info("wrote " + (dir / "bench.txt").string());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage sequence labeling with uncertainty-gated refinement"};
  app.require_subcommand(1);
  Options o;
  std::string chosen;
  const std::vector<std::pair<const char*, const char*>> subs = {
      {"synth", "write the synthetic corpus"},        {"train", "train both stages and tune the threshold"},
      {"predict", "label a corpus"},                  {"eval", "score a labeled corpus"},
      {"sweep", "threshold and sample-count sweeps"}, {"bench", "decoder throughput"}};
  for (const auto& [name, help] : subs) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const Log log(err);
  try {
    const Config c = resolve(o);
    fs::create_directories(o.out);
    write_json(fs::path(o.out) / "resolved_config.json", to_json(c));
    if (chosen == "synth") return cmd_synth(o, c, log);
    if (chosen == "train") return cmd_train(o, c, log);
    if (chosen == "predict") return cmd_predict(o, c, log);
    if (chosen == "eval") return cmd_eval(o, c, log, out);
    if (chosen == "sweep") return cmd_sweep(o, c, log);
    if (chosen == "bench") return cmd_bench(o, c, log, out);
    return 2;
  } catch (const ConfigError& e) {
    log.error(std::string("config error at ") + e.what());
    return 2;
  } catch (const MissingFileError& e) {
    log.error(std::string("missing file: ") + e.path());
    return 2;
  } catch (const NumericalError& e) {
    log.error(e.what());
    std::ofstream(fs::path(o.out) / "numerical_error_batch.txt") << e.dump();
    return 1;
  } catch (const std::exception& e) {
    log.error(e.what());
    return 1;
  }
}

}  // namespace uanet::app
