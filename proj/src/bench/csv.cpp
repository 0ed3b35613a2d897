#include "csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srba::bench {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << kTraceHeader << '\n';
  const auto opt = [](const std::optional<double>& v) {
    return v.has_value() ? format_double(*v) : std::string();
  };
  for (const TraceRecord& r : trace) {
    out << r.t << ',' << r.k << ',' << r.oracle_total << ',' << r.oracle_grad_F
        << ',' << r.oracle_grad1_G << ',' << r.oracle_hvp << ','
        << r.oracle_jvp << ',' << opt(r.h) << ',' << opt(r.grad_h_sq) << ','
        << opt(r.subopt) << ',' << opt(r.wall_ms) << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error(path + ": unexpected CSV header");
  }

  std::vector<TraceRecord> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    // a trailing empty field is dropped by getline; restore it
    while (cells.size() < 11) cells.emplace_back();
    if (cells.size() != 11) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": wrong column count");
    }
    try {
      TraceRecord r;
      r.t = std::stoi(cells[0]);
      r.k = std::stoi(cells[1]);
      r.oracle_total = std::stoull(cells[2]);
      r.oracle_grad_F = std::stoull(cells[3]);
      r.oracle_grad1_G = std::stoull(cells[4]);
      r.oracle_hvp = std::stoull(cells[5]);
      r.oracle_jvp = std::stoull(cells[6]);
      const auto opt = [](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        return std::stod(s);
      };
      r.h = opt(cells[7]);
      r.grad_h_sq = opt(cells[8]);
      r.subopt = opt(cells[9]);
      r.wall_ms = opt(cells[10]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": bad row");
    }
  }
  return rows;
}

}  // namespace srba::bench
