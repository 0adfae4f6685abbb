#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "tbm/io.hpp"

namespace tbm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(pos, end - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(pos)));
      break;
    }
    cells.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

double require_number(std::string_view cell, std::size_t row, const std::string& column) {
  if (cell.empty()) throw ParseError(row, column, "missing value in column " + column);
  const auto v = parse_number(cell);
  if (!v) throw ParseError(row, column, "non-numeric value \"" + std::string(cell) + "\" in column " + column);
  return *v;
}

int require_integer(std::string_view cell, std::size_t row, const std::string& column) {
  const double v = require_number(cell, row, column);
  if (v != std::floor(v) || std::abs(v) > 1e6)
    throw ParseError(row, column, "column " + column + " must be an integer");
  return static_cast<int>(v);
}

std::optional<double> optional_number(std::string_view cell, std::size_t row, const std::string& column) {
  if (cell.empty()) return std::nullopt;
  return require_number(cell, row, column);
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c;
    std::string_view h = kRecordsHeader;
    for (auto cell : split_cells(h)) c.emplace_back(cell);
    return c;
  }();
  return cols;
}

// Maps validation field names onto CSV column names.
std::string column_for_field(const std::string& field) {
  static const std::map<std::string, std::string> m = {
      {"chainage", "chainage_m"}, {"src", "src"},      {"ucs", "ucs_mpa"},  {"rqd", "rqd_pct"},
      {"cai", "cai"},             {"q", "q_pct"},      {"ci", "ci"},        {"m", "m_mm"},
      {"mgt", "mgt"},             {"th", "th_kn"},     {"tor", "tor_knm"},  {"pr", "pr_mm_min"},
      {"ef", "ef_m3_mm"}};
  const auto it = m.find(field);
  return it == m.end() ? field : it->second;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<TunnelingRecord> parse_records_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(1, "", "missing header row");
  if (trim(lines[0]) != kRecordsHeader)
    throw ParseError(1, "", "header must be exactly: " + std::string(kRecordsHeader));

  const auto& cols = record_columns();
  std::vector<TunnelingRecord> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li + 1;
    if (trim(lines[li]).empty()) continue;
    const auto cells = split_cells(lines[li]);
    if (cells.size() != cols.size())
      throw ParseError(row, "", "expected " + std::to_string(cols.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    TunnelingRecord rec;
    rec.chainage = optional_number(cells[0], row, cols[0]);
    rec.rock.src = require_integer(cells[1], row, cols[1]);
    rec.rock.ucs = require_number(cells[2], row, cols[2]);
    rec.rock.rqd = require_number(cells[3], row, cols[3]);
    rec.rock.cai = require_number(cells[4], row, cols[4]);
    rec.rock.q = require_number(cells[5], row, cols[5]);
    rec.rock.ci = require_number(cells[6], row, cols[6]);
    rec.rock.m = require_number(cells[7], row, cols[7]);
    rec.rock.mgt = require_integer(cells[8], row, cols[8]);
    rec.machine.th = require_number(cells[9], row, cols[9]);
    rec.machine.tor = require_number(cells[10], row, cols[10]);
    rec.pr = optional_number(cells[11], row, cols[11]);
    rec.ef = optional_number(cells[12], row, cols[12]);
    try {
      validate(rec);
    } catch (const InvalidInput& e) {
      const std::string column = column_for_field(e.field());
      throw ParseError(row, column, std::string(e.what()) + " (column " + column + ")");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string emit_records_csv(std::span<const TunnelingRecord> records) {
  std::string out(kRecordsHeader);
  out += '\n';
  auto opt = [](const std::optional<double>& v) { return v ? shortest(*v) : std::string(); };
  for (const auto& r : records) {
    out += opt(r.chainage) + ',' + std::to_string(r.rock.src) + ',' + shortest(r.rock.ucs) + ',' +
           shortest(r.rock.rqd) + ',' + shortest(r.rock.cai) + ',' + shortest(r.rock.q) + ',' +
           shortest(r.rock.ci) + ',' + shortest(r.rock.m) + ',' + std::to_string(r.rock.mgt) + ',' +
           shortest(r.machine.th) + ',' + shortest(r.machine.tor) + ',' + opt(r.pr) + ',' +
           opt(r.ef) + '\n';
  }
  return out;
}

std::vector<SieveAnalysis> parse_sieve_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(1, "", "missing header row");
  if (trim(lines[0]) != kSieveHeader)
    throw ParseError(1, "", "header must be exactly: " + std::string(kSieveHeader));

  struct Group {
    SieveAnalysis analysis;
    std::size_t first_row = 0;
    bool has_pan = false;
    std::set<double> seen;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li + 1;
    if (trim(lines[li]).empty()) continue;
    const auto cells = split_cells(lines[li]);
    if (cells.size() != 3) throw ParseError(row, "", "expected 3 cells");
    if (cells[0].empty()) throw ParseError(row, "sample_id", "missing sample_id");
    const std::string id(cells[0]);
    const double sieve = require_number(cells[1], row, "sieve_mm");
    const double mass = require_number(cells[2], row, "retained_g");
    if (sieve < 0) throw ParseError(row, "sieve_mm", "sieve_mm must be >= 0");
    if (mass < 0) throw ParseError(row, "retained_g", "retained_g must be >= 0");

    auto [it, inserted] = index.try_emplace(id, groups.size());
    if (inserted) {
      groups.push_back({});
      groups.back().analysis.sample_id = id;
      groups.back().first_row = row;
    }
    Group& g = groups[it->second];
    if (sieve == 0) {
      if (g.has_pan) throw ParseError(row, "sieve_mm", "duplicate pan row for sample " + id);
      g.has_pan = true;
      g.analysis.pan_g = mass;
      continue;
    }
    if (!g.seen.insert(sieve).second)
      throw ParseError(row, "sieve_mm", "duplicate sieve " + std::string(cells[1]) + " for sample " + id);
    g.analysis.bins.push_back({sieve, mass});
  }

  std::vector<SieveAnalysis> out;
  for (auto& g : groups) {
    auto& bins = g.analysis.bins;
    std::sort(bins.begin(), bins.end(),
              [](const SieveBin& a, const SieveBin& b) { return a.opening_mm > b.opening_mm; });
    try {
      validate(g.analysis);
    } catch (const InvalidInput& e) {
      throw ParseError(g.first_row, e.field(), "sample " + g.analysis.sample_id + ": " + e.what());
    }
    out.push_back(std::move(g.analysis));
  }
  return out;
}

}  // namespace tbm
