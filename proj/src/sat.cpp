#include "zeno/sat.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "zeno/error.hpp"
#include "zeno/rng.hpp"

namespace zeno::sat {

SatInstance::SatInstance(int num_vars, std::vector<Clause> clauses)
    : n_(num_vars), clauses_(std::move(clauses)), k_(0) {
  if (n_ < 1) throw RangeError("instance needs at least one variable");
  if (clauses_.empty()) throw RangeError("instance has zero clauses");
  for (std::size_t a = 0; a < clauses_.size(); ++a) {
    const Clause& c = clauses_[a];
    if (c.vars.empty() || c.vars.size() != c.negated.size())
      throw RangeError("clause " + std::to_string(a + 1) + " is empty or malformed");
    std::set<int> seen;
    for (int v : c.vars) {
      if (v < 0 || v >= n_)
        throw RangeError("clause " + std::to_string(a + 1) + ": variable " + std::to_string(v + 1) +
                         " outside 1.." + std::to_string(n_));
      if (!seen.insert(v).second)
        throw RangeError("clause " + std::to_string(a + 1) + ": variable " + std::to_string(v + 1) +
                         " appears twice");
    }
    k_ = std::max(k_, static_cast<int>(c.vars.size()));
  }
}

InstanceKind parse_instance_kind(std::string_view name) {
  if (name == "ring2sat") return InstanceKind::ring2sat;
  if (name == "single_solution_ring") return InstanceKind::single_solution_ring;
  if (name == "random3sat") return InstanceKind::random3sat;
  throw RangeError("unknown instance kind '" + std::string(name) + "'");
}

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::ring2sat: return "ring2sat";
    case InstanceKind::single_solution_ring: return "single_solution_ring";
    case InstanceKind::random3sat: return "random3sat";
  }
  return "?";
}

SatInstance parse_dimacs(std::istream& in) {
  std::string line;
  long declared_vars = -1;
  long declared_clauses = -1;
  std::vector<Clause> clauses;
  Clause current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok[0] == 'c') continue;
    if (tok[0] == '%') break;  // SATLIB trailer
    if (tok == "p") {
      std::string fmt;
      if (declared_vars >= 0) throw ParseError("line " + std::to_string(line_no) + ": second header");
      if (!(ls >> fmt >> declared_vars >> declared_clauses) || fmt != "cnf" || declared_vars < 1 ||
          declared_clauses < 0)
        throw ParseError("line " + std::to_string(line_no) + ": malformed header, expected 'p cnf <n> <m>'");
      continue;
    }
    if (declared_vars < 0) throw ParseError("line " + std::to_string(line_no) + ": clause before header");
    ls.clear();
    ls.str(line);
    long lit = 0;
    while (ls >> lit) {
      if (lit == 0) {
        if (current.vars.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty clause");
        clauses.push_back(std::move(current));
        current = Clause{};
        continue;
      }
      const long var = std::labs(lit);
      if (var > declared_vars)
        throw RangeError("line " + std::to_string(line_no) + ": literal " + std::to_string(lit) +
                         " outside 1.." + std::to_string(declared_vars));
      current.vars.push_back(static_cast<int>(var - 1));
      current.negated.push_back(lit < 0);
    }
    if (!ls.eof()) throw ParseError("line " + std::to_string(line_no) + ": non-integer token");
  }
  if (declared_vars < 0) throw ParseError("missing 'p cnf' header");
  if (!current.vars.empty()) clauses.push_back(std::move(current));
  if (clauses.empty()) throw RangeError("instance has zero clauses");
  if (static_cast<long>(clauses.size()) != declared_clauses)
    throw ParseError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                     std::to_string(clauses.size()));
  return SatInstance(static_cast<int>(declared_vars), std::move(clauses));
}

SatInstance parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in);
}

std::string render_dimacs(const SatInstance& instance) {
  std::ostringstream out;
  out << "p cnf " << instance.num_vars() << ' ' << instance.num_clauses() << '\n';
  for (const Clause& c : instance.clauses()) {
    for (std::size_t i = 0; i < c.size(); ++i) out << (c.negated[i] ? "-" : "") << c.vars[i] + 1 << ' ';
    out << "0\n";
  }
  return out.str();
}

namespace {

// (b_i or ~b_{i+1 mod n}) for i = 1..n.
std::vector<Clause> ring_clauses(int n) {
  std::vector<Clause> clauses;
  for (int i = 0; i < n; ++i) clauses.push_back(Clause{{i, (i + 1) % n}, {false, true}});
  return clauses;
}

std::size_t count_solutions(const SatInstance& instance, std::size_t stop_after) {
  const int n = instance.num_vars();
  std::size_t count = 0;
  Assignment a{std::vector<bool>(n)};
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    for (int i = 0; i < n; ++i) a.values[i] = (bits >> (n - 1 - i)) & 1U;
    if (evaluate(instance, a) && ++count >= stop_after) break;
  }
  return count;
}

SatInstance random_unique_3sat(int n, std::uint64_t seed, int retry_budget) {
  // Distinct clauses over 3 distinct variables; leave room for one solution.
  const long distinct = 8L * n * (n - 1) * (n - 2) / 6;
  const int m = static_cast<int>(std::min<long>(static_cast<long>(std::ceil(4.26 * n)), distinct - 1));
  for (int attempt = 0; attempt < retry_budget; ++attempt) {
    Rng rng = substream(seed, 0x3a7, static_cast<std::uint64_t>(attempt));
    std::set<std::pair<std::vector<int>, std::vector<bool>>> used;
    std::vector<Clause> clauses;
    while (static_cast<int>(clauses.size()) < m) {
      std::vector<int> vars;
      while (vars.size() < 3) {
        const int v = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
      }
      std::sort(vars.begin(), vars.end());
      std::vector<bool> neg{static_cast<bool>(rng() & 1U), static_cast<bool>(rng() & 1U),
                            static_cast<bool>(rng() & 1U)};
      if (used.insert({vars, neg}).second) clauses.push_back(Clause{vars, neg});
    }
    SatInstance inst(n, std::move(clauses));
    if (count_solutions(inst, 2) == 1) return inst;
  }
  throw NumericalError("random3sat: no unique-solution instance within " + std::to_string(retry_budget) +
                       " draws");
}

}  // namespace

SatInstance generate_instance(InstanceKind kind, int n, std::uint64_t seed, int retry_budget) {
  switch (kind) {
    case InstanceKind::ring2sat:
      if (n < 2) throw RangeError("ring2sat needs n >= 2");
      return SatInstance(n, ring_clauses(n));
    case InstanceKind::single_solution_ring: {
      if (n < 2) throw RangeError("single_solution_ring needs n >= 2");
      auto clauses = ring_clauses(n);
      clauses.push_back(Clause{{0, 1}, {false, false}});
      return SatInstance(n, std::move(clauses));
    }
    case InstanceKind::random3sat:
      if (n < 3) throw RangeError("random3sat needs n >= 3");
      if (n > kMaxEnumerationVars) throw RangeError("random3sat uniqueness check limited to n <= 24");
      return random_unique_3sat(n, seed, retry_budget);
  }
  throw RangeError("unknown instance kind");
}

bool evaluate(const SatInstance& instance, const Assignment& a) {
  if (static_cast<int>(a.values.size()) != instance.num_vars())
    throw RangeError("assignment length " + std::to_string(a.values.size()) + " != n = " +
                     std::to_string(instance.num_vars()));
  for (const Clause& c : instance.clauses()) {
    bool satisfied = false;
    for (std::size_t i = 0; i < c.size() && !satisfied; ++i) satisfied = a.values[c.vars[i]] != c.negated[i];
    if (!satisfied) return false;
  }
  return true;
}

std::vector<Assignment> enumerate_solutions(const SatInstance& instance) {
  const int n = instance.num_vars();
  if (n > kMaxEnumerationVars)
    throw RangeError("enumeration limited to n <= " + std::to_string(kMaxEnumerationVars));
  std::vector<Assignment> out;
  Assignment a{std::vector<bool>(n)};
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    for (int i = 0; i < n; ++i) a.values[i] = (bits >> (n - 1 - i)) & 1U;
    if (evaluate(instance, a)) out.push_back(a);
  }
  return out;
}

std::size_t basis_index(const Assignment& a) {
  std::size_t idx = 0;
  for (bool v : a.values) idx = (idx << 1) | (v ? 1U : 0U);
  return idx;
}

std::string to_string(const Assignment& a) {
  std::string s;
  for (bool v : a.values) s.push_back(v ? 'T' : 'F');
  return s;
}

}  // namespace zeno::sat
