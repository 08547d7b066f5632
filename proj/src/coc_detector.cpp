#include "coppar/coc_detector.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "coppar/errors.hpp"
#include "coppar/register_spec.hpp"

namespace coppar {

namespace {

constexpr std::size_t kMaxOpsPerObjectForEnumeration = 9;

std::map<ObjectId, std::vector<Operation>> group_by_object(
    const std::vector<Operation>& ops) {
  std::map<ObjectId, std::vector<Operation>> grouped;
  for (const Operation& op : ops) grouped[op.object].push_back(op);
  return grouped;
}

}  // namespace

CocReport detect_coc(const History& h, std::uint64_t budget) {
  if (!h.is_well_formed())
    throw WellFormednessError("history is not well formed");

  ExtensionSet exts = extensions(h, kMaxExtensions);

  CocReport report;
  report.assignments_examined = 0;
  bool budget_out = false;
  bool any_satisfiable_extension = false;
  std::optional<CycleWitness> first_witness;
  std::map<ObjectId, std::vector<OpId>> witness_orders;
  std::optional<History> witness_extension;

  for (const History& ext : exts.items) {
    History c = ext.complete();
    std::vector<Operation> ops = c.operations();
    auto grouped = group_by_object(ops);

    for (const auto& [object, object_ops] : grouped) {
      if (object_ops.size() > kMaxOpsPerObjectForEnumeration) {
        report.outcome = CocReport::Outcome::Inconclusive;
        report.note = "object " + object + " has " +
                      std::to_string(object_ops.size()) +
                      " operations; per-object order enumeration refused";
        return report;
      }
    }

    std::vector<ObjectId> object_names;
    std::vector<std::vector<std::vector<OpId>>> orders_per_object;
    bool satisfiable = true;
    for (const auto& [object, object_ops] : grouped) {
      auto orders = legal_serializations_of_object(object_ops);
      if (orders.empty()) {
        satisfiable = false;
        if (report.unsatisfiable_object.empty())
          report.unsatisfiable_object = object;
        break;
      }
      object_names.push_back(object);
      orders_per_object.push_back(std::move(orders));
    }
    if (!satisfiable) continue;
    any_satisfiable_extension = true;

    std::vector<std::size_t> choice(object_names.size(), 0);
    bool more = true;
    while (more) {
      if (report.assignments_examined >= budget) {
        budget_out = true;
        break;
      }
      ++report.assignments_examined;

      std::map<ObjectId, std::vector<OpId>> assignment;
      for (std::size_t k = 0; k < object_names.size(); ++k)
        assignment[object_names[k]] = orders_per_object[k][choice[k]];

      DependencyGraph graph = build_union_graph(c, assignment);
      std::optional<CycleWitness> cycle = find_cycle(graph);
      if (!cycle) {
        report.outcome = CocReport::Outcome::NoCoc;
        report.object_orders = std::move(assignment);
        report.extension_used = ext;
        report.note = "acyclic composition certificate found";
        return report;
      }
      if (!first_witness) {
        first_witness = std::move(*cycle);
        witness_orders = std::move(assignment);
        witness_extension = ext;
      }

      more = false;
      for (std::size_t k = 0; k < choice.size(); ++k) {
        if (++choice[k] < orders_per_object[k].size()) {
          more = true;
          break;
        }
        choice[k] = 0;
      }
    }
    if (budget_out) break;
  }

  if (budget_out) {
    report.outcome = CocReport::Outcome::Inconclusive;
    report.note = "assignment budget of " + std::to_string(budget) +
                  " exhausted before reaching a decision";
    return report;
  }
  if (!any_satisfiable_extension) {
    report.outcome = CocReport::Outcome::L4Unsatisfiable;
    report.note = "no extension admits a legal serialization for object " +
                  report.unsatisfiable_object;
    return report;
  }

  report.outcome = CocReport::Outcome::ContainsCoc;
  report.witness = std::move(first_witness);
  report.object_orders = std::move(witness_orders);
  report.extension_used = std::move(witness_extension);
  report.note = "every legal composition of per-object orders is cyclic";
  return report;
}

CocReport detect_coc_with_fixed_orders(
    const History& h, const std::map<ObjectId, std::vector<OpId>>& orders) {
  if (!h.is_well_formed())
    throw WellFormednessError("history is not well formed");

  History c = h.complete();
  std::vector<Operation> ops = c.operations();
  auto grouped = group_by_object(ops);

  for (const auto& [object, order] : orders)
    if (!grouped.count(object))
      throw PreconditionError("order supplied for unknown object " + object);

  for (const auto& [object, object_ops] : grouped) {
    auto it = orders.find(object);
    if (it == orders.end())
      throw PreconditionError("no order supplied for object " + object);
    std::set<OpId> expected;
    for (const Operation& op : object_ops) expected.insert(op.op_id);
    std::set<OpId> given(it->second.begin(), it->second.end());
    if (expected != given || it->second.size() != expected.size())
      throw PreconditionError("order for object " + object +
                              " does not name its operations exactly");
    if (!is_legal_object_history(materialize(object_ops, it->second)))
      throw PreconditionError("order for object " + object +
                              " is not a legal serialization");
  }

  CocReport report;
  report.object_orders = orders;
  report.extension_used = h;
  report.assignments_examined = 1;

  if (ops.empty()) {
    report.outcome = CocReport::Outcome::NoCoc;
    report.note = "no completed operations";
    return report;
  }

  DependencyGraph graph = build_union_graph(c, orders);
  std::optional<CycleWitness> cycle = find_cycle(graph);
  if (cycle) {
    report.outcome = CocReport::Outcome::ContainsCoc;
    report.witness = std::move(cycle);
    report.note = "supplied per-object orders compose into a cycle";
  } else {
    report.outcome = CocReport::Outcome::NoCoc;
    report.note = "supplied per-object orders compose acyclically";
  }
  return report;
}

bool verify_lemma2_instance(const History& h,
                            const std::vector<OpId>& write_order,
                            std::uint64_t budget) {
  if (!h.is_well_formed())
    throw WellFormednessError("history is not well formed");

  History c = h.complete();
  std::vector<Operation> ops = c.operations();

  std::map<OpId, const Operation*> op_by_id;
  std::set<OpId> completed_writes;
  for (const Operation& op : ops) {
    op_by_id[op.op_id] = &op;
    if (op.is_write()) completed_writes.insert(op.op_id);
  }
  std::set<OpId> given(write_order.begin(), write_order.end());
  if (given != completed_writes || write_order.size() != given.size())
    throw PreconditionError(
        "write_order must list exactly the completed writes of the history");

  // Write skeleton per object, in write_order sequence.
  std::map<ObjectId, std::vector<OpId>> writes_of;
  for (OpId id : write_order) writes_of[op_by_id.at(id)->object].push_back(id);

  // Candidate slots per read: slot 0 precedes every write of the object,
  // slot k follows the k-th write. A slot is admissible when the value the
  // read returned is what the register holds there.
  struct ReadSite {
    const Operation* op;
    std::vector<int> slots;
  };
  std::vector<ReadSite> reads;
  for (const Operation& op : ops) {
    if (!op.is_read()) continue;
    ReadSite site{&op, {}};
    const auto& chain = writes_of[op.object];
    if (*op.read_value == kInitialValue) site.slots.push_back(0);
    for (std::size_t k = 0; k < chain.size(); ++k)
      if (*op_by_id.at(chain[k])->written_value == *op.read_value)
        site.slots.push_back(static_cast<int>(k) + 1);
    if (site.slots.empty()) return false;
    reads.push_back(std::move(site));
  }

  std::vector<GraphEdge> process_edges = process_order_edges(c);
  std::vector<OpId> node_ids;
  for (const Operation& op : ops) node_ids.push_back(op.op_id);

  std::vector<std::size_t> choice(reads.size(), 0);
  std::uint64_t examined = 0;
  while (true) {
    if (examined >= budget)
      throw Error("verify_lemma2_instance: slot assignment budget exhausted");
    ++examined;

    DependencyGraph graph(node_ids);
    for (const GraphEdge& e : process_edges)
      graph.add_edge(e.from, e.to, e.label);
    for (const auto& [object, chain] : writes_of)
      for (std::size_t k = 0; k + 1 < chain.size(); ++k)
        graph.add_edge(chain[k], chain[k + 1], EdgeLabel::object_order(object));
    for (std::size_t r = 0; r < reads.size(); ++r) {
      const Operation& op = *reads[r].op;
      const auto& chain = writes_of[op.object];
      const int slot = reads[r].slots[choice[r]];
      if (slot > 0)
        graph.add_edge(chain[slot - 1], op.op_id,
                       EdgeLabel::object_order(op.object));
      if (slot < static_cast<int>(chain.size()))
        graph.add_edge(op.op_id, chain[slot],
                       EdgeLabel::object_order(op.object));
    }
    if (!find_cycle(graph)) return true;

    bool more = false;
    for (std::size_t r = 0; r < choice.size(); ++r) {
      if (++choice[r] < reads[r].slots.size()) {
        more = true;
        break;
      }
      choice[r] = 0;
    }
    if (!more) return false;
  }
}

}  // namespace coppar
