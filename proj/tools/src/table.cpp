#include "byzsim_app/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "byzsim/error.hpp"
#include "byzsim/replication.hpp"

namespace byzsim::app {

namespace {

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same(*a, *b);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : "n/a";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error(std::string("csv: bad value '") + s + "' in column " + column);
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s, const char* column) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(std::string("csv: bad integer '") + s + "' in column " + column);
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, const char* column) {
  if (s == "n/a") return std::nullopt;
  return parse_double(s, column);
}

std::string fixed4(double v) {
  if (std::isnan(v)) return "failed";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string row_label(const std::string& aggregator, const std::optional<int>& k) {
  std::string label = aggregator;
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  if (k) label += " (K=" + std::to_string(*k) + ")";
  return label;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

bool ResultRow::failed() const { return std::isnan(rmse); }

bool operator==(const ResultRow& a, const ResultRow& b) {
  return a.mode == b.mode && a.model == b.model && a.aggregator == b.aggregator && a.k == b.k &&
         a.m == b.m && a.n == b.n && a.p == b.p && same(a.alpha, b.alpha) && a.attack == b.attack &&
         a.reps == b.reps && a.seed == b.seed && same(a.rmse, b.rmse) &&
         same(a.rmse_std, b.rmse_std) && same(a.baseline_rmse, b.baseline_rmse) &&
         same(a.ratio, b.ratio) && same(a.mean_iters, b.mean_iters) &&
         a.nonconverged == b.nonconverged;
}

ResultTable run_table(const ExperimentConfig& config) {
  config.validate();
  const std::vector<AggregatorSpec> specs = config.aggregator_specs();
  const std::optional<AggregatorSpec> baseline = config.baseline_spec();

  ResultTable table;
  table.baseline = baseline ? baseline->name() : "none";
  const SeededRng rng(config.seed);

  for (std::size_t p : config.p) {
    for (AttackKind attack : config.attack) {
      for (double alpha : config.alpha) {
        ReplicationConfig rc;
        rc.data = config.data_spec(p);
        rc.m = config.m;
        rc.n = config.n;
        rc.alpha = alpha;
        rc.attack = config.attack_spec(attack);
        rc.aggregators = specs;
        std::optional<std::size_t> baseline_index;
        if (baseline) {
          auto it = std::find(specs.begin(), specs.end(), *baseline);
          baseline_index = static_cast<std::size_t>(it - specs.begin());
          if (it == specs.end()) rc.aggregators.push_back(*baseline);
        }
        rc.stop = config.stopping_rule();
        rc.reps = config.reps;
        rc.rmse_mode = config.rmse_mode;
        rc.threads = config.threads;

        std::vector<ExperimentResult> results;
        std::string cell_error;
        try {
          results = run_paired_replications(rc, rng);
        } catch (const std::exception& e) {
          cell_error = e.what();
        }

        auto cell_rmse = [&](std::size_t i) {
          if (results.empty() || results[i].successes() == 0) return std::nan("");
          return results[i].rmse;
        };
        std::ostringstream where;
        where << "p=" << p << " attack=" << to_string(attack) << " alpha=" << format_double(alpha);
        if (!cell_error.empty()) table.diagnostics.push_back(where.str() + ": " + cell_error);
        for (std::size_t i = 0; i < results.size(); ++i) {
          if (results[i].failures == 0) continue;
          std::string line = where.str() + " " + results[i].aggregator.name() + ": " +
                             std::to_string(results[i].failures) + " failed replications";
          if (!results[i].failure_messages.empty()) line += " (" + results[i].failure_messages.front() + ")";
          table.diagnostics.push_back(line);
        }

        for (std::size_t i = 0; i < specs.size(); ++i) {
          ResultRow row;
          row.mode = to_string(config.mode);
          row.model = config.mode == Mode::Mean ? "none" : to_string(config.model);
          row.aggregator = specs[i].name();
          if (specs[i].kind() == AggregatorKind::Vrmom) row.k = specs[i].quantile_levels();
          row.m = config.m;
          row.n = config.n;
          row.p = p;
          row.alpha = alpha;
          row.attack = to_string(attack);
          row.reps = config.reps;
          row.seed = config.seed;
          row.rmse = cell_rmse(i);
          if (!results.empty()) {
            const ExperimentResult& r = results[i];
            if (r.successes() > 1) row.rmse_std = r.rmse_std;
            row.mean_iters = r.mean_iterations;
            row.nonconverged = r.nonconverged;
          }
          if (baseline_index) {
            row.baseline_rmse = cell_rmse(*baseline_index);
            row.ratio = row.rmse / *row.baseline_rmse;
          }
          table.rows.push_back(std::move(row));
        }
      }
    }
  }
  return table;
}

void write_csv(const ResultTable& table, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const ResultRow& r : table.rows) {
    out << r.mode << ',' << r.model << ',' << r.aggregator << ','
        << (r.k ? std::to_string(*r.k) : "n/a") << ',' << r.m << ',' << r.n << ',' << r.p << ','
        << format_double(r.alpha) << ',' << r.attack << ',' << r.reps << ',' << r.seed << ','
        << format_double(r.rmse) << ',' << format_optional(r.rmse_std) << ','
        << format_optional(r.baseline_rmse) << ',' << format_optional(r.ratio) << ','
        << format_double(r.mean_iters) << ',' << r.nonconverged << '\n';
  }
}

ResultTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("csv: missing or unexpected header");
  }
  ResultTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 17) throw std::runtime_error("csv: expected 17 fields, got " + std::to_string(f.size()));
    ResultRow r;
    r.mode = f[0];
    r.model = f[1];
    r.aggregator = f[2];
    if (f[3] != "n/a") r.k = parse_int<int>(f[3], "K");
    r.m = parse_int<std::size_t>(f[4], "m");
    r.n = parse_int<std::size_t>(f[5], "n");
    r.p = parse_int<std::size_t>(f[6], "p");
    r.alpha = parse_double(f[7], "alpha");
    r.attack = f[8];
    r.reps = parse_int<std::size_t>(f[9], "reps");
    r.seed = parse_int<std::uint64_t>(f[10], "seed");
    r.rmse = parse_double(f[11], "rmse");
    r.rmse_std = parse_optional(f[12], "rmse_std");
    r.baseline_rmse = parse_optional(f[13], "baseline_rmse");
    r.ratio = parse_optional(f[14], "ratio");
    r.mean_iters = parse_double(f[15], "mean_iters");
    r.nonconverged = parse_int<std::size_t>(f[16], "nonconverged");
    table.rows.push_back(std::move(r));
  }
  return table;
}

void write_markdown(const ResultTable& table, std::ostream& out) {
  // Blocks keyed by (p, attack) in first-appearance order.
  std::vector<std::pair<std::size_t, std::string>> blocks;
  for (const ResultRow& r : table.rows) {
    std::pair<std::size_t, std::string> key{r.p, r.attack};
    if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
  }
  bool first = true;
  for (const auto& [p, attack] : blocks) {
    std::vector<double> alphas;
    std::vector<std::pair<std::string, std::optional<int>>> methods;
    for (const ResultRow& r : table.rows) {
      if (r.p != p || r.attack != attack) continue;
      if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) alphas.push_back(r.alpha);
      std::pair<std::string, std::optional<int>> key{r.aggregator, r.k};
      if (std::find(methods.begin(), methods.end(), key) == methods.end()) methods.push_back(key);
    }
    auto find = [&](const std::pair<std::string, std::optional<int>>& method, double alpha) {
      for (const ResultRow& r : table.rows) {
        if (r.p == p && r.attack == attack && r.alpha == alpha && r.aggregator == method.first &&
            r.k == method.second) {
          return &r;
        }
      }
      return static_cast<const ResultRow*>(nullptr);
    };

    if (!first) out << '\n';
    first = false;
    const ResultRow& any = *find(methods.front(), alphas.front());
    out << "p = " << p << ", attack = " << attack;
    if (any.mode == "rcsl") out << ", model = " << any.model;
    out << "\n\n| method |";
    for (double a : alphas) out << " alpha = " << format_double(a) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < alphas.size(); ++i) out << "---|";
    out << '\n';

    auto cell = [](double rmse, const std::optional<double>& sd) {
      std::string s = fixed4(rmse);
      if (!std::isnan(rmse) && sd) s += " (" + fixed4(*sd) + ")";
      return s;
    };
    for (const auto& method : methods) {
      out << "| " << row_label(method.first, method.second) << " |";
      for (double a : alphas) {
        const ResultRow* r = find(method, a);
        out << ' ' << (r ? cell(r->rmse, r->rmse_std) : "") << " |";
      }
      out << '\n';
    }
    if (!any.baseline_rmse) continue;
    out << "| " << row_label(table.baseline.empty() ? "baseline" : table.baseline, std::nullopt) << " |";
    for (double a : alphas) {
      const ResultRow* r = find(methods.front(), a);
      out << ' ' << (r && r->baseline_rmse ? fixed4(*r->baseline_rmse) : "") << " |";
    }
    out << '\n';
    for (const auto& method : methods) {
      out << "| Ratio";
      if (methods.size() > 1) out << ' ' << row_label(method.first, method.second);
      out << " |";
      for (double a : alphas) {
        const ResultRow* r = find(method, a);
        out << ' ' << (r && r->ratio ? fixed4(*r->ratio) : "") << " |";
      }
      out << '\n';
    }
  }
}

}  // namespace byzsim::app
