#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asp/cost.hpp"
#include "asp/distributions.hpp"
#include "asp/errors.hpp"
#include "asp/text.hpp"

namespace asp {

inline constexpr const char* kVersion = "1.0.0";

// Flat key=value experiment description. `job` repeats, once per job in order;
// '#' starts a comment line.
struct ExperimentConfig {
  std::vector<std::string> jobs;
  std::string cost = "l1(1,1)";
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> m_grid;
  std::uint64_t replications = 30;
  std::string method = "heuristic";
  std::string out;
  double tol = 1e-6;
  std::uint64_t max_iters = 5000;

  bool operator==(const ExperimentConfig&) const = default;

  std::vector<DurationDistribution> distributions() const {
    std::vector<DurationDistribution> out_jobs;
    for (const auto& j : jobs) out_jobs.push_back(parse_distribution(j));
    return out_jobs;
  }
  CostFunction cost_function() const { return parse_cost(cost); }
};

namespace detail {

inline std::uint64_t positive_count(std::string_view key, std::string_view value) {
  const auto v = text::parse_count(value);
  if (v == 0) throw ParseError(std::string(key) + " must be at least 1", std::string(value));
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view body) {
  ExperimentConfig cfg;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    const auto line = text::trim(body.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", std::string(line));
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    if (key == "job") {
      parse_distribution(value);  // validate now so the error names the line
      cfg.jobs.emplace_back(value);
    } else if (key == "cost") {
      parse_cost(value);
      cfg.cost = value;
    } else if (key == "samples") {
      cfg.samples = detail::positive_count(key, value);
    } else if (key == "seed") {
      cfg.seed = text::parse_count(value);
    } else if (key == "m_grid") {
      cfg.m_grid.clear();
      for (auto part : text::split(value, ',')) cfg.m_grid.push_back(detail::positive_count(key, part));
    } else if (key == "replications") {
      cfg.replications = detail::positive_count(key, value);
    } else if (key == "method") {
      if (value != "heuristic" && value != "brute") throw ParseError("method must be heuristic or brute", std::string(value));
      cfg.method = value;
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "tol") {
      cfg.tol = text::parse_double(value);
      if (!(cfg.tol > 0.0)) throw ParseError("tol must be positive", std::string(value));
    } else if (key == "max_iters") {
      cfg.max_iters = detail::positive_count(key, value);
    } else {
      throw ParseError("unknown config key", std::string(key));
    }
    if (end == body.size()) break;
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& j : cfg.jobs) out += "job=" + j + "\n";
  out += "cost=" + cfg.cost + "\n";
  out += "samples=" + std::to_string(cfg.samples) + "\n";
  out += "seed=" + std::to_string(cfg.seed) + "\n";
  if (!cfg.m_grid.empty()) {
    out += "m_grid=";
    for (std::size_t i = 0; i < cfg.m_grid.size(); ++i) out += (i ? "," : "") + std::to_string(cfg.m_grid[i]);
    out += "\n";
  }
  out += "replications=" + std::to_string(cfg.replications) + "\n";
  out += "method=" + cfg.method + "\n";
  if (!cfg.out.empty()) out += "out=" + cfg.out + "\n";
  out += "tol=" + text::format_double(cfg.tol) + "\n";
  out += "max_iters=" + std::to_string(cfg.max_iters) + "\n";
  return out;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) { return text::fnv1a(serialize_config(cfg)); }

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct CsvMeta {
  std::uint64_t seed = 0;
  std::uint64_t m = 0;
  std::uint64_t config_hash = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

// Fields are quoted only when they contain a comma, quote or newline.
inline std::string csv_field(std::string_view f) {
  if (f.find_first_of(",\"\n") == std::string_view::npos) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string render_csv(const CsvMeta& meta, const CsvTable& table) {
  std::string out = "# asp,version=" + std::string(kVersion) + ",seed=" + std::to_string(meta.seed) +
                    ",m=" + std::to_string(meta.m) + ",config_hash=" + hex64(meta.config_hash);
  for (const auto& [k, v] : meta.extra) out += "," + k + "=" + v;
  out += "\n";
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ",";
      out += csv_field(fields[i]);
    }
    out += "\n";
  };
  line(table.columns);
  for (const auto& r : table.rows) line(r);
  return out;
}

inline std::string join_ids(const std::vector<std::size_t>& perm, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(perm[i]);
  }
  return out;
}

}  // namespace asp
