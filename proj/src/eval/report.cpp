#include "uanet/eval/report.hpp"

#include <cstdio>
#include <ostream>

namespace uanet::eval {

std::vector<SamplePoint> sample_sweep(const model::Tagger& t, const std::vector<data::Sentence>& sentences,
                                      const std::vector<std::size_t>& samples, model::PredictOptions opt) {
  Sequences gold;
  for (const auto& s : sentences) gold.push_back(s.gold);
  std::vector<SamplePoint> out;
  for (auto m : samples) {
    opt.samples = m;
    const auto tagged = model::tag(t, sentences, opt);
    Sequences fin, dr;
    for (const auto& x : tagged) {
      fin.push_back(x.final);
      dr.push_back(x.draft.draft);
    }
    out.push_back({m, span_f1(t.scheme, gold, fin).f1(), span_f1(t.scheme, gold, dr).f1()});
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

nlohmann::json counts(const SpanCounts& c) {
  return {{"gold", c.gold}, {"predicted", c.predicted}, {"correct", c.correct}, {"f1", c.f1()}};
}

}  // namespace

nlohmann::json to_json(const FullReport& r, const data::TagScheme& scheme) {
  nlohmann::json j = {{"decoder", r.decoder},
                      {"gamma", r.gamma},
                      {"scores", to_json(r.scores, scheme)},
                      {"draft_scores", to_json(r.draft_scores, scheme)},
                      {"audit", to_json(r.audit)}};
  if (r.constrained) j["constrained"] = counts(*r.constrained);
  if (r.constrained_draft) j["constrained_draft"] = counts(*r.constrained_draft);
  return j;
}

void write_report_text(std::ostream& out, const FullReport& r, const data::TagScheme& scheme) {
  const auto& s = r.scores;
  out << "decoder " << r.decoder << "  gamma " << fmt(r.gamma) << '\n';
  out << "tokens " << s.tokens << "  phrases " << s.spans.gold << "  found " << s.spans.predicted << "  correct "
      << s.spans.correct << '\n';
  out << "accuracy " << pct(s.token_accuracy()) << "  precision " << pct(s.precision()) << "  recall "
      << pct(s.recall()) << "  F1 " << pct(s.f1()) << '\n';
  out << "draft-only F1 " << pct(r.draft_scores.f1()) << '\n';
  if (r.constrained)
    out << "constrained positions F1 " << pct(r.constrained->f1()) << "  (draft " << pct(r.constrained_draft->f1())
        << ")\n";
  out << '\n';
  for (const auto& [type, c] : s.per_type)
    out << type << "  precision " << pct(c.precision()) << "  recall " << pct(c.recall()) << "  F1 " << pct(c.f1())
        << "  " << c.gold << '\n';
  out << '\n';
  for (const auto& b : s.buckets) {
    const std::string range = std::to_string(b.lo) + (b.hi ? "-" + std::to_string(b.hi) : std::string("+"));
    out << "length " << range << "  sentences " << b.sentences << "  F1 " << pct(b.spans.f1()) << '\n';
  }
  const auto& a = r.audit;
  out << "\nrefinement audit\n";
  out << "  draft correct " << a.draft_correct << " / " << a.tokens << '\n';
  out << "  mean u correct   " << (a.mean_u_correct ? fmt(*a.mean_u_correct) : "n/a") << '\n';
  out << "  mean u incorrect " << (a.mean_u_incorrect ? fmt(*a.mean_u_incorrect) : "n/a") << '\n';
  out << "  ratio            " << (a.ratio() ? fmt(*a.ratio()) : "n/a") << '\n';
  out << "  correct->wrong " << a.correct_to_wrong << "  wrong->correct " << a.wrong_to_correct << "  wrong->wrong "
      << a.wrong_to_wrong << "  unchanged " << a.unchanged << '\n';
  (void)scheme;
}

void write_report_csv(std::ostream& out, const FullReport& r) {
  out << "group,name,gold,predicted,correct,precision,recall,f1\n";
  auto row = [&](const std::string& g, const std::string& n, const SpanCounts& c) {
    out << g << ',' << n << ',' << c.gold << ',' << c.predicted << ',' << c.correct << ',' << fmt(c.precision())
        << ',' << fmt(c.recall()) << ',' << fmt(c.f1()) << '\n';
  };
  row("overall", r.decoder, r.scores.spans);
  row("overall", "draft", r.draft_scores.spans);
  if (r.constrained) {
    row("constrained", r.decoder, *r.constrained);
    row("constrained", "draft", *r.constrained_draft);
  }
  for (const auto& [type, c] : r.scores.per_type) row("type", type, c);
  for (const auto& b : r.scores.buckets)
    row("length", std::to_string(b.lo) + "-" + (b.hi ? std::to_string(b.hi) : std::string("")), b.spans);
}

void write_gamma_csv(std::ostream& out, const GammaSweep& s) {
  out << "gamma,f1,delta_f1,refined_tokens\n";
  for (const auto& p : s.points)
    out << fmt(p.gamma) << ',' << fmt(p.f1) << ',' << fmt(p.delta) << ',' << p.refined_tokens << '\n';
}

void write_samples_csv(std::ostream& out, const std::vector<SamplePoint>& s) {
  out << "samples,f1,draft_f1\n";
  for (const auto& p : s) out << p.samples << ',' << fmt(p.f1) << ',' << fmt(p.draft_f1) << '\n';
}

void write_sweep_gnuplot(std::ostream& out, const std::string& gamma_csv, const std::string& samples_csv) {
  out << "set datafile separator ','\n"
         "set terminal svg size 900,360\n"
         "set output 'sweep.svg'\n"
         "set multiplot layout 1,2\n"
         "set xlabel 'uncertainty threshold'\nset ylabel 'F1 change vs all-refined'\n"
         "plot '"
      << gamma_csv
      << "' using 1:3 skip 1 with linespoints title 'dev'\n"
         "set xlabel 'MC samples'\nset ylabel 'F1'\nset logscale x 2\n"
         "plot '"
      << samples_csv
      << "' using 1:2 skip 1 with linespoints title 'final', '' using 1:3 skip 1 with linespoints title 'draft'\n"
         "unset multiplot\n";
}

void write_bench_csv(std::ostream& out, const BenchReport& r) {
  out << "sweep,decoder,labels,min_len,max_len,sentences,tokens,reps,seconds,sentences_per_s,ns_per_token\n";
  auto rows = [&](const char* name, const std::vector<ThroughputPoint>& v) {
    for (const auto& p : v) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.9f,%.3f,%.3f", p.seconds, p.sentences_per_s, p.ns_per_token);
      out << name << ',' << p.decoder << ',' << p.labels << ',' << p.lo << ',' << p.hi << ',' << p.sentences << ','
          << p.tokens << ',' << p.reps << ',' << buf << '\n';
    }
  };
  rows("length", r.by_length);
  rows("labels", r.by_labels);
}

void write_bench_text(std::ostream& out, const BenchReport& r) {
  if (r.empty()) {
    out << "no measurements\n";
    return;
  }
  out << "environment " << r.environment.dump() << "\n\n";
  for (std::size_t k = 0; k + 1 < r.by_length.size(); k += 2) {
    const auto& v = r.by_length[k];
    const auto& m = r.by_length[k + 1];
    char buf[160];
    std::snprintf(buf, sizeof buf, "C=%zu len %zu-%zu  viterbi %.0f sent/s  mix %.0f sent/s  ratio %.1f\n", v.labels,
                  v.lo, v.hi, v.sentences_per_s, m.sentences_per_s, m.sentences_per_s / v.sentences_per_s);
    out << buf;
  }
  out << '\n';
  for (const auto& p : r.by_labels) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "C=%-3zu %-8s %10.1f ns/token\n", p.labels, p.decoder.c_str(), p.ns_per_token);
    out << buf;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "\nexponent vs C: viterbi %.3f  mix %.3f\n", r.viterbi_exponent, r.mix_exponent);
  out << buf;
}

void write_bench_gnuplot(std::ostream& out, const std::string& csv) {
  out << "set datafile separator ','\n"
         "set terminal svg size 900,360\n"
         "set output 'bench.svg'\n"
         "set multiplot layout 1,2\n"
         "set logscale xy\nset xlabel 'labels C'\nset ylabel 'ns per token'\n"
         "plot '"
      << csv << "' using (strcol(1) eq 'labels' && strcol(2) eq 'viterbi' ? $3 : 1/0):11 with linespoints title 'viterbi', \\\n"
      << "     '' using (strcol(1) eq 'labels' && strcol(2) eq 'mix' ? $3 : 1/0):11 with linespoints title 'mix'\n"
         "unset logscale\nset xlabel 'sentence length (bucket start)'\nset ylabel 'sentences per second'\n"
         "plot '"
      << csv << "' using (strcol(1) eq 'length' && strcol(2) eq 'viterbi' ? $4 : 1/0):10 with linespoints title 'viterbi', \\\n"
      << "     '' using (strcol(1) eq 'length' && strcol(2) eq 'mix' ? $4 : 1/0):10 with linespoints title 'mix'\n"
         "unset multiplot\n";
}

}  // namespace uanet::eval
