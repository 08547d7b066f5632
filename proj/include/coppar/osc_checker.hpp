#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "coppar/history.hpp"

namespace coppar {

inline constexpr std::uint64_t kDefaultBudget = 1'000'000;
inline constexpr std::size_t kMaxExtensions = 4096;

/// Which operations the real-time condition applies to. All recovers
/// linearizability, Empty recovers plain sequential consistency, WritesOnly
/// models linearizable writes with possibly stale reads. Explicit names an
/// arbitrary subset of completed op ids.
struct SubsetPolicy {
  enum class Mode { All, Empty, WritesOnly, Explicit };

  Mode mode = Mode::All;
  std::set<OpId> explicit_ids;

  static SubsetPolicy all() { return {Mode::All, {}}; }
  static SubsetPolicy empty() { return {Mode::Empty, {}}; }
  static SubsetPolicy writes_only() { return {Mode::WritesOnly, {}}; }
  static SubsetPolicy explicit_set(std::set<OpId> ids) {
    return {Mode::Explicit, std::move(ids)};
  }

  /// The concrete op-id subset for a given operation table. Explicit ids
  /// must all name completed operations of the table.
  std::set<OpId> resolve(const std::vector<Operation>& ops) const;

  std::string name() const;
};

/// A candidate total order over the completed operations, together with the
/// subset the real-time condition was checked against.
struct Serialization {
  std::vector<OpId> order;
  std::set<OpId> subset_a;
};

struct Verdict {
  enum class Outcome { Consistent, Violation, Inconclusive };

  Outcome outcome = Outcome::Violation;
  std::optional<Serialization> witness;     // set when Consistent
  std::optional<History> extension_used;    // the extension the verdict is about
  std::string reason;                       // human-oriented explanation
  std::uint64_t states_explored = 0;

  bool consistent() const { return outcome == Outcome::Consistent; }
  bool violation() const { return outcome == Outcome::Violation; }
  bool inconclusive() const { return outcome == Outcome::Inconclusive; }
};

/// Decides whether h admits an extension and a serialization satisfying the
/// three conditions: every object subhistory legal, process order preserved,
/// and real-time order into the policy's subset preserved per object.
/// Backtracking search over operation orderings with eager legality and
/// ordering pruning; budget bounds explored states, and running out yields
/// Inconclusive, never a silent answer.
Verdict check_osc(const History& h, const SubsetPolicy& a,
                  std::uint64_t budget = kDefaultBudget);

/// check_osc with the subset fixed to all operations.
Verdict check_linearizable(const History& h, std::uint64_t budget = kDefaultBudget);

/// check_osc with the empty subset: the real-time condition is vacuous.
Verdict check_sequentially_consistent(const History& h,
                                      std::uint64_t budget = kDefaultBudget);

/// Brute force over every extension and every permutation of the completed
/// operations. Ground truth for small inputs; throws PreconditionError when
/// any extension completes to more than 10 operations.
Verdict check_exhaustive(const History& h, const SubsetPolicy& a);

/// Independently re-checks a witness against the three conditions. The
/// serialization must cover exactly the completed operations of extension.
bool validate_witness(const History& extension, const Serialization& s);

}  // namespace coppar
