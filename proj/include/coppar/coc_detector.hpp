#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coppar/history.hpp"
#include "coppar/order_engine.hpp"
#include "coppar/osc_checker.hpp"

namespace coppar {

/// Result of composition-order-cycle detection.
///
/// ContainsCoc means every choice of legal per-object serialization, over
/// every extension, closes a cycle once composed with process order; witness
/// holds the cycle found in one such choice. NoCoc means some choice is
/// acyclic and object_orders holds that certificate. L4Unsatisfiable means
/// no extension gives every object a legal serialization at all, so the
/// cycle condition never gets off the ground.
struct CocReport {
  enum class Outcome { ContainsCoc, NoCoc, L4Unsatisfiable, Inconclusive };

  Outcome outcome = Outcome::NoCoc;
  std::optional<CycleWitness> witness;
  std::map<ObjectId, std::vector<OpId>> object_orders;
  std::optional<History> extension_used;
  ObjectId unsatisfiable_object;
  std::uint64_t assignments_examined = 0;
  std::string note;

  bool contains_coc() const { return outcome == Outcome::ContainsCoc; }
  bool no_coc() const { return outcome == Outcome::NoCoc; }
};

/// Full detection over all extensions and all legal per-object orders.
/// budget bounds the number of order assignments composed and tested.
CocReport detect_coc(const History& h, std::uint64_t budget = kDefaultBudget);

/// Detection for one caller-supplied serialization per object, e.g. the
/// order actually produced by a protocol run. Orders must cover exactly the
/// completed operations of h and each must be legal for its object.
CocReport detect_coc_with_fixed_orders(
    const History& h, const std::map<ObjectId, std::vector<OpId>>& orders);

/// True when h admits per-object serializations that are compatible with the
/// given total order over its completed writes and whose composition with
/// process order is acyclic. write_order must list exactly the completed
/// writes of h.
bool verify_lemma2_instance(const History& h,
                            const std::vector<OpId>& write_order,
                            std::uint64_t budget = kDefaultBudget);

}  // namespace coppar
