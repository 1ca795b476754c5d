#include "milpsat/dimacs.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace milpsat {

namespace {

struct Header {
  int n = 0;
  int m = 0;
};

Header parse_header(const std::string& line) {
  std::istringstream in(line);
  std::string p, fmt;
  Header h;
  if (!(in >> p >> fmt >> h.n >> h.m) || p != "p" || fmt != "cnf" || h.n < 0 || h.m < 0)
    throw parse_error("malformed DIMACS header: " + line);
  std::string trailing;
  if (in >> trailing) throw parse_error("trailing tokens after DIMACS header");
  return h;
}

} // namespace

Formula parse_dimacs(std::istream& in) {
  std::optional<Header> header;
  std::vector<std::string> comments;
  std::vector<std::vector<int>> raw_clauses;
  std::vector<int> current;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == 'c') {
      std::string text = line.substr(1);
      if (!text.empty() && text.front() == ' ') text.erase(text.begin());
      comments.push_back(std::move(text));
      continue;
    }
    if (line[0] == 'p') {
      if (header) throw parse_error("duplicate DIMACS header");
      header = parse_header(line);
      continue;
    }
    if (!header) throw parse_error("clause data before DIMACS header");
    if (line[0] == '%') break; // SATLIB-style trailer
    std::istringstream tokens(line);
    int lit = 0;
    while (tokens >> lit) {
      if (lit == 0) {
        raw_clauses.push_back(std::move(current));
        current.clear();
      } else {
        if (std::abs(lit) > header->n)
          throw parse_error("variable index " + std::to_string(std::abs(lit)) +
                            " exceeds declared n=" + std::to_string(header->n));
        current.push_back(lit);
      }
    }
    if (!tokens.eof()) throw parse_error("non-integer token in clause data");
  }
  if (!header) throw parse_error("missing DIMACS header");
  if (!current.empty()) throw parse_error("unterminated clause (missing 0)");
  if (static_cast<int>(raw_clauses.size()) != header->m)
    throw parse_error("declared m=" + std::to_string(header->m) + " but found " +
                      std::to_string(raw_clauses.size()) + " clauses");

  if (raw_clauses.empty()) {
    Formula f = Formula::empty(header->n);
    f.set_comments(std::move(comments));
    return f;
  }

  // Dense renumbering of the variables that actually occur.
  std::map<int, int> renumber;
  for (const auto& clause : raw_clauses)
    for (int lit : clause) renumber.emplace(std::abs(lit), 0);
  int next = 0;
  bool identity = true;
  std::vector<int> originals;
  originals.reserve(renumber.size());
  for (auto& [orig, dense] : renumber) {
    dense = ++next;
    identity = identity && orig == dense;
    originals.push_back(orig);
  }

  std::vector<Clause> clauses;
  clauses.reserve(raw_clauses.size());
  for (const auto& raw : raw_clauses) {
    std::vector<Literal> lits;
    lits.reserve(raw.size());
    for (int lit : raw) lits.emplace_back(renumber[std::abs(lit)], lit > 0);
    clauses.emplace_back(std::move(lits));
  }

  Formula f = Formula::from_clauses(std::move(clauses));
  f.set_comments(std::move(comments));
  if (!identity) f.set_original_vars(std::move(originals));
  return f;
}

Formula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

void emit_dimacs(const Formula& f, std::ostream& out) {
  for (const std::string& comment : f.comments())
    out << "c " << comment << "\n";
  out << "p cnf " << f.var_count() << " " << f.clause_count() << "\n";
  for (const Clause& c : f.clauses()) {
    for (const Literal& l : c.literals()) out << l.to_signed() << " ";
    out << "0\n";
  }
}

std::string emit_dimacs(const Formula& f) {
  std::ostringstream out;
  emit_dimacs(f, out);
  return out.str();
}

std::optional<int> read_label_comment(const Formula& f) {
  for (const std::string& comment : f.comments()) {
    std::istringstream in(comment);
    std::string key;
    int value = 0;
    if (in >> key >> value && key == "label" && (value == 0 || value == 1)) return value;
  }
  return std::nullopt;
}

void set_label_comment(Formula& f, int label) {
  std::vector<std::string> kept;
  for (const std::string& comment : f.comments()) {
    std::istringstream in(comment);
    std::string key;
    if (in >> key && key == "label") continue;
    kept.push_back(comment);
  }
  kept.insert(kept.begin(), "label " + std::to_string(label));
  f.set_comments(std::move(kept));
}

} // namespace milpsat
