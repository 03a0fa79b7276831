// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
//   uanet_acceptance <demo config> <work dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "support/brute_force.hpp"
#include "support/finite_diff.hpp"
#include "uanet/app/cli.hpp"
#include "uanet/app/pipeline.hpp"
#include "uanet/autodiff/ops.hpp"
#include "uanet/decode/decoders.hpp"
#include "uanet/eval/bench.hpp"
#include "uanet/model/mc.hpp"
#include "uanet/model/refiner.hpp"
#include "uanet/train/losses.hpp"

using namespace uanet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1: gradient integrity ------------------------------------------------

model::EncodedSentence toy_sentence(std::size_t n, Rng& rng) {
  model::EncodedSentence s;
  for (std::size_t i = 0; i < n; ++i) {
    s.words.push_back(1 + rng.below(6));
    s.chars.emplace_back(1 + rng.below(4));
    for (auto& c : s.chars.back()) c = 1 + rng.below(5);
  }
  return s;
}

std::string group_of(const std::string& name, std::size_t idx, const ad::Tensor& t, std::size_t hidden) {
  auto has = [&](const char* s) { return name.find(s) != std::string::npos; };
  if (has("word_embedding") || has("char_embedding")) return "embeddings";
  if (has("char_filters") || has("char_bias")) return "char-CNN";
  if (has("encoder.fwd") || has("encoder.bwd")) {
    static const char* gates[] = {"g", "i", "f", "o"};
    return std::string("LSTM gate ") + gates[(idx % t.cols()) / hidden];
  }
  if (has(".out.")) return "output heads";
  if (has("transitions")) return "CRF transitions";
  if (has("label_embedding")) return "label embedding";
  if (has(".u_") || has(".v_")) return "attention biases";
  if (has(".W_")) return "attention weights";
  return "attention linear/norm/ff";
}

void check_groups(ad::ParamStore& ps, const std::function<double()>& loss, double h, std::size_t hidden,
                  std::map<std::string, std::pair<double, std::size_t>>& groups) {
  for (auto& [name, t] : ps) {
    std::vector<double> analytic(t.grad().begin(), t.grad().end());
    if (analytic.empty()) analytic.assign(t.size(), 0.0);
    const auto numeric = oracle::numeric_gradient(t, loss, h);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      auto& g = groups[group_of(name, i, t, hidden)];
      if (std::abs(numeric[i]) < 1e-7 && std::abs(analytic[i]) < 1e-7) continue;
      g.first = std::max(g.first, oracle::relative_error(analytic[i], numeric[i]));
      ++g.second;
    }
  }
}

Outcome gradient_integrity() {
  const auto t0 = Clock::now();
  std::map<std::string, std::pair<double, std::size_t>> groups;
  Rng rng(101);
  constexpr std::size_t labels = 5;

  model::EncoderConfig ec;
  ec.word_dim = 3;
  ec.char_dim = 2;
  ec.char_filters = 2;
  ec.hidden = 3;
  ec.crf = true;
  model::Encoder enc(ec, 7, 6, labels);
  for (auto& [n, t] : enc.params())
    for (auto& v : t.data()) v = rng.uniform(-0.5, 0.5);
  std::vector<model::EncodedSentence> sents = {toy_sentence(5, rng), toy_sentence(4, rng)};
  std::vector<std::vector<std::size_t>> gold = {{0, 1, 2, 3, 4}, {4, 2, 2, 0}};
  std::vector<train::Stage1Item> items;
  for (std::size_t k = 0; k < sents.size(); ++k)
    items.push_back({&sents[k], gold[k], model::sample_masks(ec.input_dim(), ec.hidden, 0.25, rng),
                     model::dropout_mask(sents[k].size() * ec.input_dim(), 0.5, rng)});
  {
    ad::Tape tape;
    auto scope = tape.activate();
    tape.backward(train::loss_stage1(enc, items, 10));
  }
  check_groups(enc.params(), [&] { return train::loss_stage1(enc, items, 10).item(); }, 1e-5, ec.hidden, groups);

  model::RefinerConfig rc;
  rc.layers = 2;
  rc.heads = 2;
  rc.head_dim = 2;
  rc.ff_dim = 5;
  model::Refiner ref(rc, 4, labels);
  for (auto& [n, t] : ref.params())
    for (auto& v : t.data()) v = rng.uniform(-0.6, 0.6);
  std::vector<double> xv(5 * 4);
  for (auto& v : xv) v = rng.uniform(-1, 1);
  const auto x = ad::Tensor::from({5, 4}, xv);
  const std::vector<std::size_t> drafts = {0, 5, 1, 4, 2}, rgold = {1, 4, 1, 3, 0};  // 5 = mask symbol
  const std::vector<train::Stage2Item> ritems = {{&x, drafts, rgold}};
  {
    ad::Tape tape;
    auto scope = tape.activate();
    tape.backward(train::loss_stage2(ref, ritems));
  }
  // Two stacked layers: h = 1e-4 keeps round-off below the tolerance.
  check_groups(ref.params(), [&] { return train::loss_stage2(ref, ritems).item(); }, 1e-4, 0, groups);

  const double secs = since(t0);
  bool pass = secs < 60.0;
  std::string worst;
  double max_err = 0.0;
  for (const auto& [g, v] : groups) {
    pass = pass && v.second > 0 && v.first < 1e-4;
    if (v.first >= max_err) max_err = v.first, worst = g;
  }
  return {pass, fmt("%zu groups, max rel err %.2e (%s), %.1fs", groups.size(), max_err, worst.c_str(), secs)};
}

// ---- 2: Viterbi vs enumeration --------------------------------------------

Outcome viterbi_oracle() {
  const auto t0 = Clock::now();
  Rng rng(202);
  std::size_t instances = 0, path_mismatch = 0;
  double worst_logz = 0.0;
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t C = 1; C <= 5; ++C)
      for (int draw = 0; draw < 200; ++draw) {
        std::vector<double> e(n * C), t((C + 2) * (C + 2));
        for (auto& v : e) v = rng.uniform(-2, 2);
        for (auto& v : t) v = rng.uniform(-2, 2);
        double best = -1e300;
        std::vector<std::size_t> arg;
        std::vector<double> all;
        oracle::each_path(n, C, [&](const std::vector<std::size_t>& p) {
          const double s = oracle::brute_score(e, t, C, p);
          all.push_back(s);
          if (s > best) best = s, arg = p;
        });
        const decode::MatrixView ev{e, n, C}, tv{t, C + 2, C + 2};
        path_mismatch += decode::viterbi(ev, tv).path != arg;
        worst_logz = std::max(worst_logz, std::abs(decode::crf_log_partition(ev, tv) - oracle::logsumexp(all)));
        ++instances;
      }
  const double secs = since(t0);
  return {path_mismatch == 0 && worst_logz < 1e-8 && secs < 60.0,
          fmt("%zu instances, %zu path mismatches, max |logZ diff| %.1e, %.1fs", instances, path_mismatch, worst_logz,
              secs)};
}

// ---- 3: entropy ---------------------------------------------------------------

Outcome entropy_invariants() {
  double uniform_err = 0.0, onehot = 0.0;
  for (std::size_t C = 1; C <= 100; ++C) {
    std::vector<double> p(C, 1.0 / C), q(C, 0.0);
    uniform_err = std::max(uniform_err, std::abs(model::entropy(p) - std::log(static_cast<double>(C))));
    q[C / 2] = 1.0;
    onehot = std::max(onehot, std::abs(model::entropy(q)));
  }
  Rng rng(303);
  std::size_t out_of_range = 0;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t C = 2 + rng.below(80);
    std::vector<double> p(C);
    double s = 0.0;
    // Flat Dirichlet, with some coordinates zeroed to reach the faces.
    for (auto& v : p) s += v = rng.bernoulli(0.2) ? 0.0 : -std::log(1.0 - rng.uniform());
    if (s == 0.0) p[0] = s = 1.0;
    for (auto& v : p) v /= s;
    const double u = model::entropy(p);
    out_of_range += !(u >= 0.0 && u <= std::log(static_cast<double>(C)));
  }
  return {uniform_err <= 1e-12 && onehot == 0.0 && out_of_range == 0,
          fmt("uniform err %.1e, one-hot %.1e, %zu/10000 outside [0, ln C]", uniform_err, onehot, out_of_range)};
}

// ---- 4: mask locking ------------------------------------------------------

Outcome mask_locking() {
  Rng rng(404);
  model::EncoderConfig ec;
  ec.word_dim = 4;
  ec.char_dim = 3;
  ec.char_filters = 3;
  ec.hidden = 5;
  model::Encoder enc(ec, 7, 6, 4);
  for (auto& [n, t] : enc.params())
    for (auto& v : t.data()) v = rng.uniform(-0.5, 0.5);
  const auto s = toy_sentence(9, rng);
  const auto masks = model::sample_masks(ec.input_dim(), ec.hidden, 0.25, rng);
  const auto a = enc.forward(s, masks).hidden, b = enc.forward(s, masks).hidden;
  bool replay = a.data().size() == b.data().size() &&
                std::equal(a.data().begin(), a.data().end(), b.data().begin());

  // Stepwise replay of the forward direction with the same captured pair.
  const auto x = enc.represent(s);
  const auto w = enc.direction(false);
  const auto whole = model::run_direction(x, masks.forward, w, false);
  model::LstmState st{ad::Tensor::zeros({1, ec.hidden}), ad::Tensor::zeros({1, ec.hidden})};
  for (std::size_t t = 0; t < s.size(); ++t) {
    st = model::vlstm_step(ad::slice_rows(x, t, 1), st, masks.forward, w);
    for (std::size_t k = 0; k < ec.hidden; ++k) replay = replay && whole.at(t, k) == st.h.at(0, k);
  }

  ec.recurrent_dropout = 0.0;
  model::Encoder enc0(ec, 7, 6, 4);
  for (auto& [n, t] : enc0.params())
    for (auto& v : t.data()) v = rng.uniform(-0.5, 0.5);
  constexpr std::size_t M = 8;
  std::vector<std::vector<double>> passes;
  for (std::size_t j = 0; j < M; ++j) passes.push_back(model::sample_pass(enc0, s, model::sample_seed(9, j)));
  double var = 0.0;
  bool identical = true;
  for (std::size_t e = 0; e < passes[0].size(); ++e) {
    // Shifted by the first sample so equal samples give exactly zero.
    double d1 = 0.0, d2 = 0.0;
    for (const auto& p : passes) {
      d1 += p[e] - passes[0][e];
      d2 += (p[e] - passes[0][e]) * (p[e] - passes[0][e]);
    }
    var = std::max(var, d2 / M - (d1 / M) * (d1 / M));
    for (const auto& p : passes) identical = identical && p[e] == passes[0][e];
  }
  return {replay && identical && var == 0.0,
          fmt("replay bit-exact %s, r=0 samples identical %s, max variance %.1e", replay ? "yes" : "no",
              identical ? "yes" : "no", var)};
}

// ---- 5: threshold mixing --------------------------------------------------

Outcome threshold_mix_bounds() {
  Rng rng(505);
  std::size_t zero_bad = 0, top_bad = 0, monotone_bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng.below(40), C = 2 + rng.below(80);
    const double lnc = std::log(static_cast<double>(C));
    std::vector<std::size_t> draft(n), refined(n);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
      draft[i] = rng.below(C);
      refined[i] = (draft[i] + 1 + rng.below(C - 1)) % C;  // always differs
      u[i] = rng.uniform(1e-9, lnc);
    }
    zero_bad += decode::threshold_mix(draft, u, refined, 0.0) != refined;
    top_bad += decode::threshold_mix(draft, u, refined, lnc) != draft;
    top_bad += decode::threshold_mix(draft, u, refined, lnc + 1.0) != draft;
    double g1 = rng.uniform(0.0, lnc), g2 = rng.uniform(0.0, lnc);
    if (g1 > g2) std::swap(g1, g2);
    const auto lo = decode::threshold_mix(draft, u, refined, g1), hi = decode::threshold_mix(draft, u, refined, g2);
    for (std::size_t i = 0; i < n; ++i) monotone_bad += hi[i] == refined[i] && lo[i] != refined[i];
  }
  return {zero_bad + top_bad + monotone_bad == 0,
          fmt("1000 instances: gamma=0 misses %zu, gamma>=lnC misses %zu, monotonicity violations %zu", zero_bad,
              top_bad, monotone_bad)};
}

// ---- 8: decoding speed ----------------------------------------------------

Outcome decoding_speed() {
  eval::BenchConfig cfg;
  const auto r = eval::decode_throughput(cfg);
  double min_ratio = 1e300;
  for (std::size_t k = 0; k + 1 < r.by_length.size(); k += 2) {
    const auto& v = r.by_length[k];
    const auto& m = r.by_length[k + 1];
    if (v.lo >= 30) min_ratio = std::min(min_ratio, m.sentences_per_s / v.sentences_per_s);
  }
  const bool pass = min_ratio >= 2.0 && r.viterbi_exponent >= 1.5 && r.mix_exponent <= 0.2;
  return {pass, fmt("C=%zu length>=30 mix/viterbi >= %.0fx, exponent viterbi %.2f mix %.2f", cfg.labels, min_ratio,
                    r.viterbi_exponent, r.mix_exponent)};
}

// ---- 9a: ablation identity ------------------------------------------------

std::vector<double> sinusoid_ref(long off, std::size_t d) {
  std::vector<double> r(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double angle = static_cast<double>(off) / std::pow(10000.0, static_cast<double>(k - k % 2) / d);
    r[k] = k % 2 == 0 ? std::sin(angle) : std::cos(angle);
  }
  return r;
}

// Max over heads, streams and pairs of |score - content| and of the three
// position/bias terms, all from plain loops over the weights.
std::pair<double, double> ablation_errors() {
  Rng rng(606);
  model::RefinerConfig rc;
  rc.layers = 1;
  rc.heads = 2;
  rc.head_dim = 3;
  rc.ff_dim = 4;
  constexpr std::size_t d = 4, n = 5;
  model::Refiner ref(rc, d, 6);
  for (auto& [name, t] : ref.params())
    for (auto& v : t.data()) v = rng.uniform(-0.6, 0.6);
  for (const char* z : {"refiner.layer0.W_kR", "refiner.u_x", "refiner.v_x", "refiner.u_l", "refiner.v_l"})
    for (auto& v : ref.params().get(z).data()) v = 0.0;
  std::vector<double> xv(n * d);
  for (auto& v : xv) v = rng.uniform(-1, 1);
  const auto ex = ad::Tensor::from({n, d}, xv);
  const std::vector<std::size_t> drafts = {1, 4, 0, 6, 2};
  const auto ey = ref.embed_labels(drafts);
  double score_err = 0.0, other_terms = 0.0;
  for (bool lab : {false, true})
    for (std::size_t h = 0; h < rc.heads; ++h) {
      const auto w = ref.head(0, h, lab);
      const auto& keys = lab ? ey : ex;
      const auto got = lab ? ref.scores_x2l(ex, ey, 0, h) : ref.scores_x2x(ex, 0, h);
      const std::size_t dh = rc.head_dim;
      auto proj = [&](const ad::Tensor& m, std::size_t i, const ad::Tensor& W, std::size_t c) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += m.at(i, k) * W.at(k, c);
        return s;
      };
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const auto R = sinusoid_ref(static_cast<long>(i) - static_cast<long>(j), d);
          double content = 0.0, position = 0.0, u_term = 0.0, v_term = 0.0;
          for (std::size_t c = 0; c < dh; ++c) {
            double r = 0.0;
            for (std::size_t k = 0; k < d; ++k) r += R[k] * w.wkr.at(k, c);
            const double q = proj(ex, i, w.wq, c), kk = proj(keys, j, w.wk, c);
            content += q * kk;
            position += q * r;
            u_term += w.u.at(0, c) * kk;
            v_term += w.v.at(0, c) * r;
          }
          const double scale = std::sqrt(static_cast<double>(dh));
          score_err = std::max(score_err, std::abs(got.at(i, j) - content / scale));
          other_terms = std::max({other_terms, std::abs(position), std::abs(u_term), std::abs(v_term)});
        }
    }
  return {score_err, other_terms};
}

// ---- demo pipeline: 6, 7, 9b, 10 ------------------------------------------

int cli(std::vector<std::string> args, std::ostream& log) {
  args.insert(args.begin(), "uanet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  return app::run_cli(static_cast<int>(argv.size()), argv.data(), out, log);
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

struct DemoRun {
  double train_seconds = 0.0;
};

DemoRun run_demo(const fs::path& config, const fs::path& dir) {
  fs::remove_all(dir);
  const std::vector<std::string> base = {"--config", config.string(), "--out", dir.string()};
  auto with = [&](const char* cmd) {
    std::vector<std::string> a = {cmd};
    a.insert(a.end(), base.begin(), base.end());
    return a;
  };
  DemoRun r;
  const auto t0 = Clock::now();
  if (cli(with("train"), std::cerr) != 0) throw std::runtime_error("demo training failed");
  r.train_seconds = since(t0);
  if (cli(with("eval"), std::cerr) != 0) throw std::runtime_error("demo eval failed");
  if (cli(with("predict"), std::cerr) != 0) throw std::runtime_error("demo predict failed");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: uanet_acceptance <demo config> <work dir>\n";
    return 2;
  }
  const fs::path config = argv[1], work = argv[2];
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << fmt("criterion %2d  %-28s %s  %s  [%.1fs]", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                     since(t0))
              << std::endl;
  };

  report(1, "gradient integrity", gradient_integrity);
  report(2, "viterbi oracle", viterbi_oracle);
  report(3, "entropy invariants", entropy_invariants);
  report(4, "mask locking", mask_locking);
  report(5, "threshold mix boundaries", threshold_mix_bounds);

  // The demo pipeline feeds 6, 7, 9 and 10; a failure here fails all four.
  std::optional<DemoRun> demo_a;
  std::string demo_error;
  try {
    demo_a = run_demo(config, work / "run_a");
  } catch (const std::exception& e) {
    demo_error = e.what();
  }
  auto need_demo = [&] {
    if (!demo_a) throw std::runtime_error(demo_error);
  };
  const fs::path a = work / "run_a";

  report(6, "uncertainty flags errors", [&] {
    need_demo();
    const auto cfg = read_json(a / "resolved_config.json");
    const auto audit = read_json(a / "report.json").at("audit");
    const double ratio = audit.at("ratio").get<double>();
    const std::size_t M = cfg.at("training").at("samples");
    const double r = cfg.at("encoder").at("recurrent_dropout");
    const bool pass = ratio >= 3.0 && M == 8 && r == 0.25 && demo_a->train_seconds < 600.0;
    return Outcome{pass, fmt("mean u incorrect / correct = %.2f (M=%zu, r=%.2f), training %.0fs", ratio, M, r,
                             demo_a->train_seconds)};
  });

  report(7, "threshold sweep", [&] {
    need_demo();
    const auto sweep = read_json(a / "train_summary.json").at("dev_sweep");
    const double best = sweep.at("best_f1"), at_zero = sweep.at("points").at(0).at("f1"),
                 draft = sweep.at("draft_f1");
    const auto rep = read_json(a / "report.json");
    const double cf = rep.at("constrained").at("f1"), cd = rep.at("constrained_draft").at("f1");
    const bool pass = best >= at_zero && best >= draft && cf - cd >= 0.01;
    return Outcome{pass, fmt("dev best %.4f (gamma %.2f) vs gamma=0 %.4f, draft %.4f; test constrained F1 %.4f vs "
                             "draft %.4f",
                             best, sweep.at("best_gamma").get<double>(), at_zero, draft, cf, cd)};
  });

  report(8, "decoding speed shape", decoding_speed);

  report(9, "two-stream ablations", [&] {
    const auto [score_err, other] = ablation_errors();
    need_demo();
    const auto c = app::load_config(config, {});
    const auto tagger = model::load_tagger(a / "model");
    const auto test = app::load_corpus(c).test;
    auto opt = app::predict_options(c, tagger);
    const double full = app::evaluate(c, tagger, test, opt).scores.f1();
    opt.mask_drafts = true;
    const double masked = app::evaluate(c, tagger, test, opt).scores.f1();
    const bool pass = score_err <= 1e-12 && other == 0.0 && masked < full;
    return Outcome{pass, fmt("ablated scores vs content %.1e, other terms %.1e; test F1 %.4f, drafts masked %.4f",
                             score_err, other, full, masked)};
  });

  report(10, "determinism", [&] {
    need_demo();
    run_demo(config, work / "run_b");
    const fs::path b = work / "run_b";
    std::size_t compared = 0;
    std::string differs;
    for (const char* f : {"model/encoder.json", "model/refiner.json", "predictions.txt", "report.txt", "report.json",
                          "report.csv", "train_summary.json", "resolved_config.json"}) {
      ++compared;
      if (slurp(a / f) != slurp(b / f)) differs += std::string(differs.empty() ? "" : ",") + f;
    }
    return Outcome{differs.empty(), differs.empty() ? fmt("%zu files byte-identical across two runs", compared)
                                                    : "differs: " + differs};
  });

  std::cout << (failures ? fmt("%d criteria failed", failures) : std::string("all criteria passed")) << std::endl;
  return failures ? 1 : 0;
}
