#include "byzsim_app/analyze.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "byzsim/analysis.hpp"
#include "byzsim_app/table.hpp"

namespace byzsim::app {

namespace {

std::vector<double> grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  // Pin the endpoints so sin(pi/2) and rho = 1 are hit exactly.
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace

AnalysisTable run_analysis(const ExperimentConfig& config) {
  config.validate();
  AnalysisTable t;
  const std::string& sub = config.analysis;
  if (sub == "sigma-k") {
    t.header = {"K", "sigma_k_sq", "ratio_to_limit"};
    for (int k : config.k) {
      const double s = sigma_k_squared(k);
      t.rows.push_back({static_cast<double>(k), s, s / kVrmomLimitVariance});
    }
  } else if (sub == "efficiency") {
    t.header = {"K", "efficiency", "mom_efficiency", "limit_efficiency"};
    for (int k : config.k) {
      const EfficiencyReport r = efficiency_report(k);
      t.rows.push_back({static_cast<double>(k), r.efficiency, r.mom_efficiency, r.limit_efficiency});
    }
  } else if (sub == "c-matrix") {
    t.header = {"rho", "K", "c_entry", "c_mom_entry", "c_limit_entry", "c_limit_error"};
    for (double rho : grid(-1.0, 1.0, config.points)) {
      const QuadratureValue lim = c_limit_entry(rho);
      for (int k : config.k) {
        CovEntryInputs in;
        in.rho = rho;
        in.quantile_levels = k;
        t.rows.push_back({rho, static_cast<double>(k), c_matrix_entry(in), c_mom_entry(rho),
                          lim.value, lim.error});
      }
    }
  } else if (sub == "hphi") {
    t.header = {"phi", "h"};
    const double half_pi = std::numbers::pi / 2.0;
    for (double phi : grid(-half_pi, half_pi, config.points)) t.rows.push_back({phi, h_phi(phi)});
  }
  return t;
}

void write_csv(const AnalysisTable& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

void write_markdown(const AnalysisTable& table, std::ostream& out) {
  out << '|';
  for (const auto& h : table.header) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < table.header.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& row : table.rows) {
    out << '|';
    for (double v : row) out << ' ' << format_double(v) << " |";
    out << '\n';
  }
}

}  // namespace byzsim::app
