#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coppar/history.hpp"

namespace coppar {

/// Where an ordering edge comes from: the real-time order, one process's
/// program order, one object's serialization order, or the broadcast order.
struct EdgeLabel {
  enum class Kind { RealTime, ProcessOrder, ObjectOrder, Broadcast };

  Kind kind = Kind::RealTime;
  ProcessId process = -1;  // set for ProcessOrder
  ObjectId object;         // set for ObjectOrder

  static EdgeLabel real_time() { return {Kind::RealTime, -1, {}}; }
  static EdgeLabel process_order(ProcessId p) { return {Kind::ProcessOrder, p, {}}; }
  static EdgeLabel object_order(ObjectId x) { return {Kind::ObjectOrder, -1, std::move(x)}; }
  static EdgeLabel broadcast() { return {Kind::Broadcast, -1, {}}; }

  std::string describe() const;
  bool operator==(const EdgeLabel&) const = default;
};

struct GraphEdge {
  OpId from = 0;
  OpId to = 0;
  EdgeLabel label;
  bool operator==(const GraphEdge&) const = default;
};

/// A cyclic chain of operations, each step justified by an edge label.
/// ops[i] precedes ops[i+1] and the last entry closes back to ops[0];
/// labels[i] justifies step i, so labels.size() == ops.size().
struct CycleWitness {
  std::vector<OpId> ops;
  std::vector<EdgeLabel> labels;

  std::string describe(const std::vector<Operation>& op_table) const;
};

/// Directed graph over operations, identified by op id. Edges keep their
/// labels; no self-edges. Immutable once built, safe to share.
class DependencyGraph {
 public:
  DependencyGraph() = default;
  explicit DependencyGraph(std::vector<OpId> nodes);

  void add_edge(OpId from, OpId to, EdgeLabel label);

  const std::vector<OpId>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  bool has_node(OpId id) const;
  const std::vector<std::size_t>& out_edges(OpId id) const;  // indices into edges()

 private:
  std::vector<OpId> nodes_;  // ascending
  std::vector<GraphEdge> edges_;
  std::map<OpId, std::vector<std::size_t>> adjacency_;
};

/// res(a) precedes inv(b): the real-time order of the history holding both.
bool real_time_precedes(const History& h, const Operation& a, const Operation& b);

/// Edges between consecutive completed operations of each process, i.e. the
/// transitive reduction of every process order.
std::vector<GraphEdge> process_order_edges(const History& h);

/// Union of the process-order edges of h with the chain of each supplied
/// per-object total order. object_orders must give one order per object of
/// h's complete operations, naming exactly those operations.
DependencyGraph build_union_graph(const History& h,
                                  const std::map<ObjectId, std::vector<OpId>>& object_orders);

/// A cycle in g, or nothing when g is acyclic. Deterministic: nodes and
/// edges are explored in a fixed order.
std::optional<CycleWitness> find_cycle(const DependencyGraph& g);

/// True iff the witness's steps all exist as edges of g with their labels.
bool cycle_exists_in(const DependencyGraph& g, const CycleWitness& w);

/// A total order of g's nodes consistent with every edge, or nothing when g
/// is cyclic. Ties break by ascending op id, so the result is reproducible.
std::optional<std::vector<OpId>> topological_extension(const DependencyGraph& g);

/// Graphviz rendering; op_table (when given) provides node captions.
std::string to_dot(const DependencyGraph& g, const std::vector<Operation>* op_table = nullptr);

}  // namespace coppar
