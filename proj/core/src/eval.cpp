#include "dcyk/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace dcyk {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

using RowKey = std::tuple<std::string, int, std::uint64_t, int>;

RowKey key_of(const SweepRow& r) { return {r.grammar_id, r.dim, r.seed, r.sentence_id}; }

}  // namespace

CellScores score_cells(const Chart& oracle, const Chart& decoded) {
  if (oracle.n != decoded.n)
    throw std::invalid_argument("score_cells: charts have different sentence lengths");
  CellScores s;
  for (const auto& [span, syms] : oracle.cells)
    for (const auto& a : syms)
      (decoded.contains(span.first, span.second, a) ? s.tp : s.fn)++;
  for (const auto& [span, syms] : decoded.cells)
    for (const auto& a : syms)
      if (!oracle.contains(span.first, span.second, a)) s.fp++;

  const bool no_pred = s.tp + s.fp == 0;
  const bool no_gold = s.tp + s.fn == 0;
  s.precision = no_pred ? (no_gold ? 1.0 : 0.0) : double(s.tp) / double(s.tp + s.fp);
  s.recall = no_gold ? (no_pred ? 1.0 : 0.0) : double(s.tp) / double(s.tp + s.fn);
  s.f1 = (s.precision + s.recall == 0.0) ? 0.0
                                         : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config, const std::vector<SweepRow>* done) {
  if (config.grammar_ids.size() != config.grammars.size())
    throw std::invalid_argument("run_sweep: grammar_ids and grammars differ in length");

  std::map<RowKey, const SweepRow*> done_index;
  if (done)
    for (const auto& r : *done) done_index[key_of(r)] = &r;

  std::vector<SweepRow> rows;
  for (std::size_t gi = 0; gi < config.grammars.size(); ++gi)
    for (int dim : config.dims)
      for (std::uint64_t seed : config.seeds)
        for (std::size_t si = 0; si < config.sentences.size(); ++si) {
          SweepRow r;
          r.grammar_id = config.grammar_ids[gi];
          r.dim = dim;
          r.seed = seed;
          r.sentence_id = static_cast<int>(si);
          r.sentence_len = config.sentences[si].size();
          rows.push_back(std::move(r));
        }

  std::vector<char> pending(rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = done_index.find(key_of(rows[i]));
    if (it != done_index.end()) {
      rows[i] = *it->second;
      pending[i] = 0;
    }
  }

  const auto grammar_by_id = [&](const std::string& id) -> const Grammar& {
    for (std::size_t gi = 0; gi < config.grammar_ids.size(); ++gi)
      if (config.grammar_ids[gi] == id) return config.grammars[gi];
    throw std::logic_error("run_sweep: unknown grammar id");
  };

  auto work_one = [&](SweepRow& row) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Grammar& g = grammar_by_id(row.grammar_id);
      const Sentence& w = config.sentences[row.sentence_id];
      HrrSpace space(row.dim, row.seed, config.beta);
      RuleOperators ops = build_rule_operators(space, g);
      Chart oracle = cyk_parse(g, w);
      RecognitionResult res = dcyk_recognize(space, g, ops, w, config.policy, config.threshold);
      CellScores s = score_cells(oracle, res.chart);
      row.precision = s.precision;
      row.recall = s.recall;
      row.f1 = s.f1;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  int workers = config.workers > 0 ? config.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  if (workers == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (pending[i]) work_one(rows[i]);
  } else {
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= rows.size()) break;
        if (pending[i]) work_one(rows[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "grammar_id,dim,seed,sentence_id,sentence_len,precision,recall,f1,error\n";
  for (const auto& r : rows)
    out << csv_escape(r.grammar_id) << "," << r.dim << "," << r.seed << "," << r.sentence_id << ","
        << r.sentence_len << "," << fmt(r.precision) << "," << fmt(r.recall) << "," << fmt(r.f1)
        << "," << csv_escape(r.error) << "\n";
  return out.str();
}

std::string timings_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "grammar_id,dim,seed,sentence_id,wall_time_ms\n";
  for (const auto& r : rows)
    out << csv_escape(r.grammar_id) << "," << r.dim << "," << r.seed << "," << r.sentence_id << ","
        << fmt(r.wall_time_ms) << "\n";
  return out.str();
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
  std::vector<SweepRow> out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // split respecting quotes
    std::vector<std::string> f;
    std::string cur;
    bool q = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (q) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          q = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        q = true;
      } else if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() != 9) throw std::runtime_error("rows_from_csv: bad line: " + line);
    SweepRow r;
    r.grammar_id = f[0];
    r.dim = std::stoi(f[1]);
    r.seed = std::stoull(f[2]);
    r.sentence_id = std::stoi(f[3]);
    r.sentence_len = std::stoi(f[4]);
    r.precision = std::stod(f[5]);
    r.recall = std::stod(f[6]);
    r.f1 = std::stod(f[7]);
    r.error = f[8];
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::vector<SummaryRow> aggregate(const std::vector<SweepRow>& rows, bool by_length) {
  std::map<std::tuple<std::string, int, int>, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    groups[{r.grammar_id, r.dim, by_length ? r.sentence_len : -1}].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.grammar_id = std::get<0>(key);
    s.dim = std::get<1>(key);
    s.sentence_len = std::get<2>(key);
    s.count = static_cast<int>(members.size());
    double sp = 0, sr = 0, sf = 0;
    for (const auto* r : members) {
      sp += r->precision;
      sr += r->recall;
      sf += r->f1;
    }
    s.mean_precision = sp / s.count;
    s.mean_recall = sr / s.count;
    s.mean_f1 = sf / s.count;
    if (s.count > 1) {
      double var = 0;
      for (const auto* r : members) var += (r->f1 - s.mean_f1) * (r->f1 - s.mean_f1);
      var /= (s.count - 1);
      s.ci95_f1 = 1.96 * std::sqrt(var / s.count);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<SummaryRow> aggregate_by_dim(const std::vector<SweepRow>& rows) {
  return aggregate(rows, false);
}

std::vector<SummaryRow> aggregate_by_length(const std::vector<SweepRow>& rows) {
  return aggregate(rows, true);
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "grammar_id,dim,sentence_len,count,mean_precision,mean_recall,mean_f1,ci95_f1\n";
  for (const auto& r : rows)
    out << csv_escape(r.grammar_id) << "," << r.dim << "," << r.sentence_len << "," << r.count
        << "," << fmt(r.mean_precision) << "," << fmt(r.mean_recall) << "," << fmt(r.mean_f1)
        << "," << fmt(r.ci95_f1) << "\n";
  return out.str();
}

std::string summary_to_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %6s %4s %6s %10s %10s %10s %10s\n", "grammar", "dim",
                "len", "count", "precision", "recall", "f1", "ci95(f1)");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-10s %6d %4d %6d %10.4f %10.4f %10.4f %10.4f\n",
                  r.grammar_id.c_str(), r.dim, r.sentence_len, r.count, r.mean_precision,
                  r.mean_recall, r.mean_f1, r.ci95_f1);
    out << buf;
  }
  return out.str();
}

}  // namespace dcyk
