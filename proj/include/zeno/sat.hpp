#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace zeno::sat {

/// One disjunction. Variables are 0-based internally; `negated[i]` is true for
/// a literal ~b. The clause sign convention is l = -1 for negated, +1 otherwise.
struct Clause {
  std::vector<int> vars;
  std::vector<bool> negated;

  std::size_t size() const { return vars.size(); }
  int sign(std::size_t i) const { return negated[i] ? -1 : +1; }
  bool operator==(const Clause&) const = default;
};

/// Boolean assignment; values[i] is b_{i+1}.
struct Assignment {
  std::vector<bool> values;
  bool operator==(const Assignment&) const = default;
};

class SatInstance {
 public:
  /// Validates the instance invariants; throws RangeError.
  SatInstance(int num_vars, std::vector<Clause> clauses);

  int num_vars() const { return n_; }
  std::size_t num_clauses() const { return clauses_.size(); }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const Clause& clause(std::size_t a) const { return clauses_[a]; }
  /// Largest clause width.
  int k() const { return k_; }

  bool operator==(const SatInstance&) const = default;

 private:
  int n_;
  std::vector<Clause> clauses_;
  int k_;
};

enum class InstanceKind { ring2sat, single_solution_ring, random3sat };

InstanceKind parse_instance_kind(std::string_view name);
std::string to_string(InstanceKind kind);

SatInstance parse_dimacs(std::istream& in);
SatInstance parse_dimacs(std::string_view text);
std::string render_dimacs(const SatInstance& instance);

/// Maximum resampling attempts for random3sat before giving up.
inline constexpr int kRandom3SatRetryBudget = 10000;

SatInstance generate_instance(InstanceKind kind, int n, std::uint64_t seed,
                              int retry_budget = kRandom3SatRetryBudget);

bool evaluate(const SatInstance& instance, const Assignment& a);

/// Guard on the 2^n brute force.
inline constexpr int kMaxEnumerationVars = 24;

/// All satisfying assignments in lexicographic order (F < T, b_1 most
/// significant), matching the computational-basis index order.
std::vector<Assignment> enumerate_solutions(const SatInstance& instance);

/// Basis index of an assignment: qubit 1 is the most significant bit, T = 1.
std::size_t basis_index(const Assignment& a);

std::string to_string(const Assignment& a);

}  // namespace zeno::sat
