#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "byzsim_app/config.hpp"

namespace byzsim::app {

struct AnalysisTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// sigma-k:    K, sigma_k_sq, ratio_to_limit           (one row per K)
/// efficiency: K, efficiency, mom_efficiency, limit_efficiency
/// c-matrix:   rho, K, c_entry, c_mom_entry, c_limit_entry, c_limit_error
///             (`points` correlations evenly spaced on [-1, 1], per K)
/// hphi:       phi, h                                  (`points` angles on [-pi/2, pi/2])
AnalysisTable run_analysis(const ExperimentConfig& config);

void write_csv(const AnalysisTable& table, std::ostream& out);
void write_markdown(const AnalysisTable& table, std::ostream& out);

}  // namespace byzsim::app
