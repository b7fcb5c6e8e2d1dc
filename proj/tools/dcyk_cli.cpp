// Command-line front end: symbolic parsing, distributed parsing, sentence
// generation, grammar expansion, sweeps and chart comparison.
//
// Exit codes for parse/dparse: 0 recognized, 1 not recognized, 2 error.
// compare: 0 charts equal, 1 charts differ, 2 error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "dcyk/cyk.hpp"
#include "dcyk/dcyk.hpp"
#include "dcyk/eval.hpp"
#include "dcyk/grammar.hpp"
#include "dcyk/hrr.hpp"
#include "dcyk/rng.hpp"

namespace fs = std::filesystem;
using namespace dcyk;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<Sentence> load_sentences(const std::string& path) {
  std::vector<Sentence> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    Sentence w = Sentence::from_line(line);
    if (w.size() > 0) out.push_back(std::move(w));
  }
  return out;
}

struct DparseFlags {
  int dim = 1000;
  std::uint64_t seed = 1;
  double beta = 40.0;
  double threshold = 0.99;
  bool dense = false;
  std::string dump_scores;
};

void add_dparse_flags(CLI::App* cmd, DparseFlags& f) {
  cmd->add_option("--dim", f.dim, "matrix dimension d")->envname("DCYK_DIM")->check(CLI::Range(8, 1 << 20));
  cmd->add_option("--seed", f.seed, "master seed")->envname("DCYK_SEED");
  cmd->add_option("--beta", f.beta, "sigmoid steepness")->envname("DCYK_BETA")->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", f.threshold, "decode threshold")
      ->envname("DCYK_THRESHOLD")
      ->check(CLI::Range(0.0, 1.0));
  auto* sm = cmd->add_flag("--structured-matmul,!--dense-matmul",
                           "apply operators via fast convolution (default) or densely");
  sm->envname("DCYK_STRUCTURED_MATMUL");
  cmd->add_option("--dump-scores", f.dump_scores, "write per-(i,j,A) decode scores as CSV")
      ->envname("DCYK_DUMP_SCORES");
}

int cmd_parse(const std::string& grammar_path, const std::string& sentence,
              const std::string& out_path) {
  Grammar g = load_grammar_file(grammar_path);
  Sentence w = Sentence::from_line(sentence);
  Chart chart = cyk_parse(g, w);
  const std::string text = chart.serialize();
  if (!out_path.empty()) write_file(out_path, text);
  std::cout << text;
  const bool ok = recognizes(chart, g);
  std::cout << (ok ? "recognized" : "not recognized") << "\n";
  return ok ? 0 : 1;
}

int cmd_dparse(const std::string& grammar_path, const std::string& sentence,
               const DparseFlags& f, bool dense, const std::string& out_path) {
  Grammar g = load_grammar_file(grammar_path);
  Sentence w = Sentence::from_line(sentence);
  HrrSpace space(f.dim, f.seed, f.beta);
  RuleOperators ops = build_rule_operators(space, g);
  const MatmulPolicy policy = dense ? MatmulPolicy::dense : MatmulPolicy::structured;
  RecognitionResult res = dcyk_recognize(space, g, ops, w, policy, f.threshold);
  if (!f.dump_scores.empty()) {
    std::ostringstream csv;
    csv << "i,j,symbol,raw,score\n";
    char buf[64];
    for (const auto& r : decode_scores(space, res.dist, g)) {
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g", r.raw, r.score);
      csv << r.i << "," << r.j << "," << csv_escape(r.symbol) << "," << buf << "\n";
    }
    write_file(f.dump_scores, csv.str());
  }
  const std::string text = res.chart.serialize();
  if (!out_path.empty()) write_file(out_path, text);
  std::cout << text;
  std::cout << (res.recognized ? "recognized" : "not recognized") << "\n";
  return res.recognized ? 0 : 1;
}

int cmd_gen(const std::string& grammar_path, int count, int max_len, std::uint64_t seed,
            const std::string& out_path) {
  Grammar g = load_grammar_file(grammar_path);
  std::ostringstream out;
  for (int i = 0; i < count; ++i)
    out << generate_sentence(g, max_len, mix_seed(seed, static_cast<std::uint64_t>(i))).to_line()
        << "\n";
  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());
  return 0;
}

int cmd_expand(const std::string& grammar_path, const std::string& kind, int count,
               std::uint64_t seed, const std::string& out_path) {
  Grammar g = load_grammar_file(grammar_path);
  RuleKind k = kind == "unary" ? RuleKind::unary : RuleKind::binary;
  Grammar out = expand_grammar(g, k, count, seed);
  if (out_path.empty())
    std::cout << render_grammar(out);
  else
    write_file(out_path, render_grammar(out));
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path) {
  Chart a = Chart::parse(read_file(a_path));
  Chart b = Chart::parse(read_file(b_path));
  if (a == b) {
    std::cout << "charts equal\n";
    return 0;
  }
  for (const auto& [span, syms] : a.cells)
    for (const auto& s : syms)
      if (!b.contains(span.first, span.second, s))
        std::cout << "- " << span.first << " " << span.second << " " << s << "\n";
  for (const auto& [span, syms] : b.cells)
    for (const auto& s : syms)
      if (!a.contains(span.first, span.second, s))
        std::cout << "+ " << span.first << " " << span.second << " " << s << "\n";
  return 1;
}

int cmd_calibrate(const std::vector<int>& dims, int trials, std::uint64_t seed,
                  const std::string& out_path) {
  auto recs = run_calibration(dims, trials, seed);
  const std::string csv = calibration_to_csv(recs);
  if (out_path.empty())
    std::cout << csv;
  else
    write_file(out_path, csv);
  return 0;
}

struct SweepFlags {
  std::vector<std::string> grammar_paths;
  std::string sentences_path;
  int gen_count = 50;
  int max_len = 7;
  std::uint64_t gen_seed = 20240101;
  std::vector<int> dims = {100, 500, 1000, 2000};
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "sweep_out";
  int workers = 0;
  bool full_protocol = false;
  bool resume = false;
};

int cmd_sweep(const SweepFlags& sf, const DparseFlags& df, bool dense) {
  SweepConfig cfg;
  for (const auto& p : sf.grammar_paths) {
    cfg.grammar_ids.push_back(fs::path(p).stem().string());
    cfg.grammars.push_back(load_grammar_file(p));
  }
  if (cfg.grammars.empty()) throw std::runtime_error("sweep: no grammars given");

  cfg.dims = sf.dims;
  cfg.seeds = sf.seeds;
  int gen_count = sf.gen_count;
  if (sf.full_protocol) {
    cfg.dims = {100, 1000, 2000, 3000, 4000, 5000, 6000};
    gen_count = 2000;
  }
  if (!sf.sentences_path.empty()) {
    cfg.sentences = load_sentences(sf.sentences_path);
    if (sf.full_protocol && cfg.sentences.size() > 2000) cfg.sentences.resize(2000);
  } else {
    for (int i = 0; i < gen_count; ++i)
      cfg.sentences.push_back(
          generate_sentence(cfg.grammars[0], sf.max_len, mix_seed(sf.gen_seed, i)));
  }
  cfg.beta = df.beta;
  cfg.threshold = df.threshold;
  cfg.policy = dense ? MatmulPolicy::dense : MatmulPolicy::structured;
  cfg.workers = sf.workers;

  fs::create_directories(sf.out_dir);
  const std::string rows_path = sf.out_dir + "/rows.csv";

  std::vector<SweepRow> done;
  if (sf.resume && fs::exists(rows_path)) done = rows_from_csv(read_file(rows_path));

  auto rows = run_sweep(cfg, done.empty() ? nullptr : &done);
  write_file(rows_path, rows_to_csv(rows));
  write_file(sf.out_dir + "/timings.csv", timings_to_csv(rows));
  write_file(sf.out_dir + "/summary_by_dim.csv", summary_to_csv(aggregate_by_dim(rows)));
  write_file(sf.out_dir + "/summary_by_length.csv", summary_to_csv(aggregate_by_length(rows)));
  write_file(sf.out_dir + "/summary.txt", summary_to_table(aggregate_by_dim(rows)));

  // resolved configuration, reproducible from this file alone
  std::ostringstream rc;
  rc << "grammars=";
  for (std::size_t i = 0; i < sf.grammar_paths.size(); ++i)
    rc << (i ? "," : "") << sf.grammar_paths[i];
  rc << "\nsentences=" << (sf.sentences_path.empty() ? "<generated>" : sf.sentences_path)
     << "\ngen_count=" << gen_count << "\nmax_len=" << sf.max_len << "\ngen_seed=" << sf.gen_seed
     << "\ndims=";
  for (std::size_t i = 0; i < cfg.dims.size(); ++i) rc << (i ? "," : "") << cfg.dims[i];
  rc << "\nseeds=";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) rc << (i ? "," : "") << cfg.seeds[i];
  rc << "\nbeta=" << cfg.beta << "\nthreshold=" << cfg.threshold
     << "\nstructured_matmul=" << (cfg.policy == MatmulPolicy::structured ? 1 : 0)
     << "\nworkers=" << cfg.workers << "\nfull_protocol=" << (sf.full_protocol ? 1 : 0) << "\n";
  write_file(sf.out_dir + "/resolved_config.txt", rc.str());

  std::cout << summary_to_table(aggregate_by_dim(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CYK recognition over distributed holographic representations"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key=value file");
  app.get_config_formatter_base()->comment('#');

  std::string grammar_path, sentence, out_path;
  DparseFlags df;
  bool dense = false;

  auto* parse = app.add_subcommand("parse", "symbolic CYK recognition");
  parse->add_option("--grammar", grammar_path, "grammar file")->required()->envname("DCYK_GRAMMAR");
  parse->add_option("--sentence", sentence, "space-separated tokens")->required();
  parse->add_option("--out", out_path, "also write the chart to this file")->envname("DCYK_OUT");

  auto* dparse = app.add_subcommand("dparse", "distributed CYK recognition");
  dparse->add_option("--grammar", grammar_path, "grammar file")->required()->envname("DCYK_GRAMMAR");
  dparse->add_option("--sentence", sentence, "space-separated tokens")->required();
  dparse->add_option("--out", out_path, "also write the chart to this file")->envname("DCYK_OUT");
  add_dparse_flags(dparse, df);

  int count = 50, max_len = 7;
  std::uint64_t seed = 1;
  auto* gen = app.add_subcommand("gen", "generate random sentences");
  gen->add_option("--grammar", grammar_path, "grammar file")->required()->envname("DCYK_GRAMMAR");
  gen->add_option("--count", count, "number of sentences");
  gen->add_option("--max-len", max_len, "maximum sentence length")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "generator seed")->envname("DCYK_SEED");
  gen->add_option("--out", out_path, "output file (stdout when omitted)")->envname("DCYK_OUT");

  std::string kind = "unary";
  auto* expand = app.add_subcommand("expand", "add random rules to a grammar");
  expand->add_option("--grammar", grammar_path, "grammar file")->required()->envname("DCYK_GRAMMAR");
  expand->add_option("--kind", kind, "unary or binary")
      ->check(CLI::IsMember({"unary", "binary"}));
  expand->add_option("--count", count, "rules to add")->check(CLI::PositiveNumber);
  expand->add_option("--seed", seed, "expansion seed")->envname("DCYK_SEED");
  expand->add_option("--out", out_path, "output grammar file (stdout when omitted)")
      ->envname("DCYK_OUT");

  std::string chart_a, chart_b;
  auto* compare = app.add_subcommand("compare", "diff two serialized charts");
  compare->add_option("a", chart_a, "first chart file")->required();
  compare->add_option("b", chart_b, "second chart file")->required();

  std::vector<int> calib_dims = {100, 256, 500, 1000, 2000};
  int trials = 1000;
  auto* calibrate = app.add_subcommand("calibrate", "sample unbinding tolerance bounds");
  calibrate->add_option("--dims", calib_dims, "dimensions to calibrate")->delimiter(',');
  calibrate->add_option("--trials", trials, "samples per dimension")->check(CLI::PositiveNumber);
  calibrate->add_option("--seed", seed, "sampling seed")->envname("DCYK_SEED");
  calibrate->add_option("--out", out_path, "output CSV (stdout when omitted)")->envname("DCYK_OUT");

  SweepFlags sf;
  auto* sweep = app.add_subcommand("sweep", "score the distributed parser against the oracle");
  sweep->add_option("--grammar", sf.grammar_paths, "grammar file (repeatable)")
      ->required()
      ->envname("DCYK_GRAMMAR");
  sweep->add_option("--sentences", sf.sentences_path, "sentence file (one per line)")
      ->envname("DCYK_SENTENCES");
  sweep->add_option("--gen-count", sf.gen_count, "sentences to generate when no file is given");
  sweep->add_option("--max-len", sf.max_len, "maximum generated sentence length");
  sweep->add_option("--gen-seed", sf.gen_seed, "sentence generation seed");
  sweep->add_option("--dims", sf.dims, "dimensions to sweep")->delimiter(',')->envname("DCYK_DIMS");
  sweep->add_option("--seeds", sf.seeds, "master seeds to sweep")
      ->delimiter(',')
      ->envname("DCYK_SEEDS");
  sweep->add_option("--out", sf.out_dir, "output directory")->envname("DCYK_OUT");
  sweep->add_option("--workers", sf.workers, "worker threads (0 = all cores)")
      ->envname("DCYK_WORKERS");
  sweep->add_flag("--full-protocol", sf.full_protocol,
                  "2000 sentences, dims 100..6000 (hours of compute)");
  sweep->add_flag("--resume", sf.resume, "reuse rows already present in the output CSV");
  add_dparse_flags(sweep, df);

  CLI11_PARSE(app, argc, argv);

  // the negated flag pair writes into the app; recover the desired policy
  dense = false;
  for (auto* cmd : {dparse, sweep})
    if (cmd->parsed() && cmd->count("--dense-matmul")) dense = true;

  try {
    if (parse->parsed()) return cmd_parse(grammar_path, sentence, out_path);
    if (dparse->parsed()) return cmd_dparse(grammar_path, sentence, df, dense, out_path);
    if (gen->parsed()) return cmd_gen(grammar_path, count, max_len, seed, out_path);
    if (expand->parsed()) return cmd_expand(grammar_path, kind, count, seed, out_path);
    if (compare->parsed()) return cmd_compare(chart_a, chart_b);
    if (calibrate->parsed()) return cmd_calibrate(calib_dims, trials, seed, out_path);
    if (sweep->parsed()) return cmd_sweep(sf, df, dense);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
