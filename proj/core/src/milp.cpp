#include "milpsat/milp.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace milpsat {

MilpInstance encode(const Formula& f) {
  MilpInstance m;
  m.rows = f.clause_count();
  m.cols = f.var_count();
  m.k = f.k();
  m.a.assign(static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols), 0);
  m.b.reserve(static_cast<std::size_t>(m.rows));
  for (int i = 0; i < m.rows; ++i) {
    int negatives = 0;
    for (const Literal& l : f.clauses()[static_cast<std::size_t>(i)].literals()) {
      m.a[static_cast<std::size_t>(i) * static_cast<std::size_t>(m.cols) +
          static_cast<std::size_t>(l.var - 1)] = l.positive ? 1 : -1;
      if (!l.positive) ++negatives;
    }
    m.b.push_back(1 - negatives);
  }
  return m;
}

bool feasible_bruteforce(const MilpInstance& m, int var_cap) {
  const int cap = std::min(var_cap, 30);
  if (m.cols > cap)
    throw budget_error("feasibility check capped at " + std::to_string(cap) +
                       " variables, instance has " + std::to_string(m.cols));

  // Row value for assignment x is popcount(x & pos) - popcount(x & neg).
  std::vector<std::uint32_t> pos(static_cast<std::size_t>(m.rows), 0);
  std::vector<std::uint32_t> neg(static_cast<std::size_t>(m.rows), 0);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      const std::int8_t c = m.at(i, j);
      if (c > 0) pos[static_cast<std::size_t>(i)] |= 1u << j;
      if (c < 0) neg[static_cast<std::size_t>(i)] |= 1u << j;
    }
  }

  const std::uint64_t total = 1ull << m.cols;
  for (std::uint64_t x = 0; x < total; ++x) {
    const auto mask = static_cast<std::uint32_t>(x);
    bool ok = true;
    for (int i = 0; i < m.rows; ++i) {
      const int lhs = std::popcount(mask & pos[static_cast<std::size_t>(i)]) -
                      std::popcount(mask & neg[static_cast<std::size_t>(i)]);
      if (lhs < m.b[static_cast<std::size_t>(i)]) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

namespace {

// Classic fixed MPS fields: 2-3, 5-12, 15-22, 25-36, 40-47, 50-61 (1-based).
void field(std::string& line, std::size_t column, const std::string& text) {
  if (line.size() < column - 1 + text.size()) line.resize(column - 1 + text.size(), ' ');
  line.replace(column - 1, text.size(), text);
}

std::string record(const std::string& f1, const std::string& f2, const std::string& f3 = "",
                   const std::string& f4 = "", const std::string& f5 = "",
                   const std::string& f6 = "") {
  std::string line;
  if (!f1.empty()) field(line, 2, f1);
  if (!f2.empty()) field(line, 5, f2);
  if (!f3.empty()) field(line, 15, f3);
  if (!f4.empty()) field(line, 25, f4);
  if (!f5.empty()) field(line, 40, f5);
  if (!f6.empty()) field(line, 50, f6);
  return line + "\n";
}

} // namespace

std::string to_mps(const MilpInstance& m, const std::string& name) {
  std::ostringstream out;
  {
    std::string header;
    field(header, 1, "NAME");
    field(header, 15, name);
    out << header << "\n";
  }

  out << "ROWS\n";
  for (int i = 1; i <= m.rows; ++i) out << record("G", "c" + std::to_string(i));

  out << "COLUMNS\n";
  if (m.cols > 0) out << record("", "MARKER", "'MARKER'", "", "'INTORG'");
  for (int j = 1; j <= m.cols; ++j) {
    const std::string column = "x" + std::to_string(j);
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 1; i <= m.rows; ++i) {
      const std::int8_t c = m.at(i - 1, j - 1);
      if (c != 0) entries.emplace_back("c" + std::to_string(i), std::to_string(static_cast<int>(c)));
    }
    for (std::size_t e = 0; e < entries.size(); e += 2) {
      if (e + 1 < entries.size())
        out << record("", column, entries[e].first, entries[e].second, entries[e + 1].first,
                      entries[e + 1].second);
      else
        out << record("", column, entries[e].first, entries[e].second);
    }
  }
  if (m.cols > 0) out << record("", "MARKER", "'MARKER'", "", "'INTEND'");

  out << "RHS\n";
  for (int i = 1; i <= m.rows; i += 2) {
    if (i + 1 <= m.rows)
      out << record("", "RHS", "c" + std::to_string(i), std::to_string(m.b[static_cast<std::size_t>(i - 1)]),
                    "c" + std::to_string(i + 1), std::to_string(m.b[static_cast<std::size_t>(i)]));
    else
      out << record("", "RHS", "c" + std::to_string(i), std::to_string(m.b[static_cast<std::size_t>(i - 1)]));
  }

  out << "BOUNDS\n";
  for (int j = 1; j <= m.cols; ++j) out << record("BV", "BND", "x" + std::to_string(j));

  out << "ENDATA\n";
  return out.str();
}

} // namespace milpsat
