#include <doctest.h>

#include <sstream>

#include "milpsat/milp.hpp"
#include "milpsat/wl.hpp"
#include "helpers.hpp"

using namespace milpsat;
using namespace milpsat::testing;

TEST_CASE("encode reproduces the Krom formula matrix exactly") {
  const MilpInstance m = encode(example1());
  REQUIRE(m.rows == 3);
  REQUIRE(m.cols == 2);
  CHECK(m.k == 2);
  const std::vector<std::int8_t> expected_a = {1, 1, 1, -1, -1, 1};
  CHECK(m.a == expected_a);
  CHECK(m.b == std::vector<int>{1, 0, 0});
}

TEST_CASE("encode of single clauses") {
  const MilpInstance pos = encode(formula({{1, 2}}));
  CHECK(pos.a == std::vector<std::int8_t>{1, 1});
  CHECK(pos.b == std::vector<int>{1});

  const MilpInstance neg = encode(formula({{-1, -2, -3}}));
  CHECK(neg.a == std::vector<std::int8_t>{-1, -1, -1});
  CHECK(neg.b == std::vector<int>{-2});
}

TEST_CASE("row structure: k nonzeros per row, b within range") {
  Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    const int n = rng.uniform_int(3, 8);
    const Formula f = random_formula(rng, n, rng.uniform_int(1, 3 * n), 3);
    const MilpInstance m = encode(f);
    for (int r = 0; r < m.rows; ++r) {
      int nonzero = 0;
      for (int c = 0; c < m.cols; ++c)
        if (m.at(r, c) != 0) ++nonzero;
      CHECK(nonzero == f.k());
      CHECK(m.b[static_cast<std::size_t>(r)] >= 1 - f.k());
      CHECK(m.b[static_cast<std::size_t>(r)] <= 1);
    }
  }
}

TEST_CASE("feasibility matches satisfiability on the named instances") {
  CHECK(feasible_bruteforce(encode(example1())));
  const auto [phi, psi] = counterexample_pair();
  CHECK(feasible_bruteforce(encode(phi)));
  CHECK_FALSE(feasible_bruteforce(encode(psi)));
}

TEST_CASE("satisfiability carries over to feasibility on random formulae") {
  Rng rng(123);
  for (int i = 0; i < 100; ++i) {
    const int n = rng.uniform_int(3, 10);
    const int k = rng.uniform_int(2, 3);
    const int m = rng.uniform_int(1, 5 * n);
    const Formula f = random_formula(rng, n, std::min<int>(m, static_cast<int>(max_clause_count(n, k))), k);
    CHECK(has_model_bruteforce(f) == feasible_bruteforce(encode(f)));
  }
}

TEST_CASE("feasible vectors correspond to models bitwise") {
  const Formula f = formula({{1, 2}, {-1, 2}});
  const MilpInstance m = encode(f);
  // x = (x1, x2): row checks of A x >= b mirror evaluate on the same bits.
  for (int x1 = 0; x1 <= 1; ++x1) {
    for (int x2 = 0; x2 <= 1; ++x2) {
      bool feasible = true;
      for (int r = 0; r < m.rows; ++r) {
        const int lhs = m.at(r, 0) * x1 + m.at(r, 1) * x2;
        feasible = feasible && lhs >= m.b[static_cast<std::size_t>(r)];
      }
      CHECK(feasible == evaluate(f, world({x1 == 1, x2 == 1})));
    }
  }
}

TEST_CASE("feasible_bruteforce honours the cap") {
  Rng rng(5);
  const Formula f = random_formula(rng, 6, 9, 3);
  CHECK_THROWS_AS(feasible_bruteforce(encode(f), 5), budget_error);
}

TEST_CASE("MPS output for the Krom instance") {
  const std::string mps = to_mps(encode(example1()), "EX1");
  CHECK(mps.find("NAME") == 0);
  CHECK(mps.find(" G  c1") != std::string::npos);
  CHECK(mps.find(" G  c2") != std::string::npos);
  CHECK(mps.find(" G  c3") != std::string::npos);
  CHECK(mps.find("'INTORG'") != std::string::npos);
  CHECK(mps.find("'INTEND'") != std::string::npos);
  CHECK(mps.find(" BV BND") != std::string::npos);
  CHECK(mps.rfind("ENDATA\n") == mps.size() - 7);

  // RHS block carries 1, 0, 0 for c1..c3.
  std::istringstream in(mps);
  std::string line;
  bool in_rhs = false;
  std::vector<std::pair<std::string, std::string>> rhs;
  while (std::getline(in, line)) {
    if (line == "RHS") {
      in_rhs = true;
      continue;
    }
    if (in_rhs) {
      if (!line.empty() && line[0] != ' ') break;
      std::istringstream fields(line);
      std::string name, row, value;
      fields >> name;
      while (fields >> row >> value) rhs.emplace_back(row, value);
    }
  }
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"c1", "1"}, {"c2", "0"}, {"c3", "0"}};
  CHECK(rhs == expected);

  // Objective-free: no N row.
  CHECK(mps.find(" N ") == std::string::npos);
}

TEST_CASE("MPS fixed fields start at the classic columns") {
  const std::string mps = to_mps(encode(formula({{1, 2}})), "ONE");
  std::istringstream in(mps);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("x1") != std::string::npos && line.find("c1") != std::string::npos) {
      CHECK(line.substr(4, 2) == "x1");   // field 2 at column 5
      CHECK(line.substr(14, 2) == "c1");  // field 3 at column 15
      CHECK(line[24] == '1');             // field 4 at column 25
      return;
    }
  }
  FAIL("COLUMNS entry for x1/c1 not found");
}

TEST_CASE("empty instance still yields a parseable MPS skeleton") {
  const std::string mps = to_mps(encode(Formula()), "EMPTY");
  CHECK(mps.find("ROWS\n") != std::string::npos);
  CHECK(mps.find("COLUMNS\n") != std::string::npos);
  CHECK(mps.find("RHS\n") != std::string::npos);
  CHECK(mps.find("BOUNDS\n") != std::string::npos);
  CHECK(mps.find("ENDATA\n") != std::string::npos);
}
