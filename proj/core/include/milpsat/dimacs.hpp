#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "milpsat/cnf.hpp"

namespace milpsat {

// Strict DIMACS CNF reader for k-CNF inputs.
//
// Accepts "c" comment lines (preserved as formula metadata) and a single
// "p cnf <n> <m>" header followed by m zero-terminated clauses. Rejects
// non-uniform clause widths, repeated variables inside a clause, duplicate
// clauses and indices above the declared n. Sparse variable numberings are
// renumbered to a dense 1..n, with the renaming recorded on the formula.
Formula parse_dimacs(std::istream& in);
Formula parse_dimacs(const std::string& text);

// Inverse of parse_dimacs up to clause order: comments, header, one clause
// per line with the terminating 0. ASCII, LF line endings.
std::string emit_dimacs(const Formula& f);
void emit_dimacs(const Formula& f, std::ostream& out);

// Dataset label carried in a "label <0|1>" comment line.
std::optional<int> read_label_comment(const Formula& f);
void set_label_comment(Formula& f, int label);

} // namespace milpsat
