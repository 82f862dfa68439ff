#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "byzsim_app/config.hpp"

namespace byzsim::app {

inline constexpr const char* kCsvHeader =
    "mode,model,aggregator,K,m,n,p,alpha,attack,reps,seed,rmse,rmse_std,baseline_rmse,ratio,"
    "mean_iters,nonconverged";

/// One grid cell. rmse is NaN when every replication of the cell failed.
struct ResultRow {
  std::string mode;
  std::string model;
  std::string aggregator;
  /// Set for vrmom only.
  std::optional<int> k;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  double alpha = 0.0;
  std::string attack;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  /// Unset when reps == 1.
  std::optional<double> rmse_std;
  /// Unset without a baseline.
  std::optional<double> baseline_rmse;
  std::optional<double> ratio;
  double mean_iters = 0.0;
  std::size_t nonconverged = 0;

  bool failed() const;
  friend bool operator==(const ResultRow& a, const ResultRow& b);
};

struct ResultTable {
  std::vector<ResultRow> rows;
  /// Baseline name, for the markdown layout only.
  std::string baseline;
  /// One line per failed replication group; not part of the CSV.
  std::vector<std::string> diagnostics;

  friend bool operator==(const ResultTable& a, const ResultTable& b) { return a.rows == b.rows; }
};

/// Runs every cell of p x alpha x attack, pairing each configured
/// aggregator with the baseline on identical data. A cell whose
/// replications all fail gets rmse = NaN; the rest of the table is kept.
ResultTable run_table(const ExperimentConfig& config);

void write_csv(const ResultTable& table, std::ostream& out);
/// Inverse of write_csv. Throws std::runtime_error on malformed input.
ResultTable read_csv(std::istream& in);

/// Per (p, attack) block: one column per alpha, rows for the aggregator(s),
/// the baseline and their ratios.
void write_markdown(const ResultTable& table, std::ostream& out);

/// Shortest round-trip decimal form ("nan", "inf" for non-finite values).
std::string format_double(double value);

}  // namespace byzsim::app
