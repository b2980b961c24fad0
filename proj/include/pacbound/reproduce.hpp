#pragma once

#include <string>
#include <vector>

namespace pacbound {

/// One row of the numerical regression table: a published value recomputed by
/// the library, with a pinned tolerance.
struct ReproRow {
  std::string id;
  std::string description;
  double expected = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  bool upper_only = false;  // pass when computed <= expected
  bool pass = false;
};

/// Recomputes every illustration row T1..T16. `only` filters by id
/// ("" keeps the full table).
std::vector<ReproRow> reproduce_rows(const std::string& only = "");

bool all_pass(const std::vector<ReproRow>& rows);

}  // namespace pacbound
