#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcyk/cyk.hpp"
#include "dcyk/dcyk.hpp"
#include "dcyk/grammar.hpp"

namespace dcyk {

// Triple-level agreement between an oracle chart and a decoded chart.
// Degenerate cases: a score is 1.0 when both charts are empty, 0.0 when only
// one side is.
struct CellScores {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

CellScores score_cells(const Chart& oracle, const Chart& decoded);

struct SweepRow {
  std::string grammar_id;
  int dim = 0;
  std::uint64_t seed = 0;
  int sentence_id = 0;
  int sentence_len = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  double wall_time_ms = 0.0;  // serialized separately so the rows CSV is byte-stable
  std::string error;          // empty when the row succeeded
};

struct SweepConfig {
  std::vector<std::string> grammar_ids;
  std::vector<Grammar> grammars;
  std::vector<int> dims;
  std::vector<std::uint64_t> seeds;
  std::vector<Sentence> sentences;
  double beta = 40.0;
  double threshold = 0.99;
  MatmulPolicy policy = MatmulPolicy::structured;
  int workers = 0;  // 0 = hardware concurrency
};

// Runs symbolic CYK and the distributed pipeline for every
// (grammar, dim, seed, sentence) combination and scores the decoded chart
// against the oracle. Rows come back sorted by key regardless of which worker
// finished first; per-row failures land in `error` instead of aborting the
// sweep. `done` rows (from a previous partial run) are reused untouched.
std::vector<SweepRow> run_sweep(const SweepConfig& config,
                                const std::vector<SweepRow>* done = nullptr);

// Deterministic data columns only (no wall time).
std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> rows_from_csv(const std::string& text);
// Key columns plus wall_time_ms.
std::string timings_to_csv(const std::vector<SweepRow>& rows);

struct SummaryRow {
  std::string grammar_id;
  int dim = 0;
  int sentence_len = -1;  // -1 in the by-dimension grouping
  int count = 0;
  double mean_precision = 0.0, mean_recall = 0.0, mean_f1 = 0.0;
  double ci95_f1 = 0.0;
};

// Macro means across sentences, grouped by (grammar, dim) and by
// (grammar, dim, sentence length). Failed rows are excluded.
std::vector<SummaryRow> aggregate_by_dim(const std::vector<SweepRow>& rows);
std::vector<SummaryRow> aggregate_by_length(const std::vector<SweepRow>& rows);

std::string summary_to_csv(const std::vector<SummaryRow>& rows);
std::string summary_to_table(const std::vector<SummaryRow>& rows);

std::string csv_escape(const std::string& field);

}  // namespace dcyk
