#pragma once

#include <stdexcept>
#include <string>

namespace milpsat {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed textual input (DIMACS, checkpoint JSON, ...).
struct parse_error : error {
  using error::error;
};

// Shapes, index sets or configuration fields that do not line up.
struct dimension_error : error {
  using error::error;
};

// A configured cap was exceeded (model enumeration, clause bound, retry budget).
struct budget_error : error {
  using error::error;
};

// Filesystem failures: missing paths, unwritable outputs.
struct io_error : error {
  using error::error;
};

} // namespace milpsat
