#include "byzsim_app/app.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "byzsim/error.hpp"
#include "byzsim_app/analyze.hpp"
#include "byzsim_app/config.hpp"
#include "byzsim_app/table.hpp"

namespace byzsim::app {

namespace {

std::string render(const ExperimentConfig& config, std::ostream& err) {
  std::ostringstream text;
  if (config.mode == Mode::Analyze) {
    const AnalysisTable t = run_analysis(config);
    if (config.format == OutputFormat::Csv) {
      write_csv(t, text);
    } else {
      write_markdown(t, text);
    }
    return text.str();
  }
  const ResultTable t = run_table(config);
  for (const auto& line : t.diagnostics) err << "byzsim: " << line << '\n';
  if (config.format == OutputFormat::Csv) {
    write_csv(t, text);
  } else {
    write_markdown(t, text);
  }
  return text.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Invocation inv;
  try {
    inv = parse_args(args);
  } catch (const UsageError& e) {
    err << "byzsim: " << e.what() << '\n';
    return kExitUsage;
  }
  if (inv.help) {
    out << *inv.help;
    return kExitOk;
  }
  const ExperimentConfig& config = inv.config;
  try {
    const std::string text = render(config, err);
    if (config.out.empty()) {
      out << text;
      out.flush();
      return out ? kExitOk : kExitRuntime;
    }
    std::ofstream file(config.out, std::ios::binary);
    if (!file) {
      err << "byzsim: cannot write '" << config.out << "'\n";
      return kExitRuntime;
    }
    file << text;
    if (!file.flush()) {
      err << "byzsim: write to '" << config.out << "' failed\n";
      return kExitRuntime;
    }
  } catch (const UsageError& e) {
    err << "byzsim: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "byzsim: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace byzsim::app
