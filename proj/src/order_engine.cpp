#include "coppar/order_engine.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

#include "coppar/errors.hpp"

namespace coppar {

std::string EdgeLabel::describe() const {
  switch (kind) {
    case Kind::RealTime: return "real-time";
    case Kind::ProcessOrder: return "process " + std::to_string(process);
    case Kind::ObjectOrder: return "object " + object;
    case Kind::Broadcast: return "broadcast";
  }
  return "?";
}

std::string CycleWitness::describe(const std::vector<Operation>& op_table) const {
  std::map<OpId, const Operation*> by_id;
  for (const Operation& op : op_table) by_id[op.op_id] = &op;
  const auto render = [&](OpId id) {
    std::string s = "op " + std::to_string(id);
    auto it = by_id.find(id);
    if (it != by_id.end())
      s += " [P" + std::to_string(it->second->process) + "] " + coppar::describe(*it->second);
    return s;
  };
  std::ostringstream out;
  out << "cycle of length " << ops.size() << ":\n";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    out << "  " << render(ops[i]) << "  --" << labels[i].describe() << "-->  "
        << render(ops[(i + 1) % ops.size()]) << "\n";
  }
  return out.str();
}

DependencyGraph::DependencyGraph(std::vector<OpId> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  for (OpId id : nodes_) adjacency_[id];
}

void DependencyGraph::add_edge(OpId from, OpId to, EdgeLabel label) {
  if (from == to)
    throw PreconditionError("self-edge on op " + std::to_string(from));
  if (!has_node(from) || !has_node(to))
    throw PreconditionError("edge endpoint is not a node of the graph");
  adjacency_[from].push_back(edges_.size());
  edges_.push_back(GraphEdge{from, to, std::move(label)});
}

bool DependencyGraph::has_node(OpId id) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

const std::vector<std::size_t>& DependencyGraph::out_edges(OpId id) const {
  static const std::vector<std::size_t> kNone;
  auto it = adjacency_.find(id);
  return it == adjacency_.end() ? kNone : it->second;
}

bool real_time_precedes(const History&, const Operation& a, const Operation& b) {
  return a.res_index.has_value() && *a.res_index < b.inv_index;
}

std::vector<GraphEdge> process_order_edges(const History& h) {
  std::map<ProcessId, std::vector<const Operation*>> per_process;
  const std::vector<Operation> ops = h.operations();
  for (const Operation& op : ops)
    if (op.is_complete()) per_process[op.process].push_back(&op);
  std::vector<GraphEdge> out;
  for (auto& [p, chain] : per_process) {
    // operations() yields invocation order, which is the process order
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
      out.push_back(GraphEdge{chain[i]->op_id, chain[i + 1]->op_id,
                              EdgeLabel::process_order(p)});
  }
  return out;
}

DependencyGraph build_union_graph(const History& h,
                                  const std::map<ObjectId, std::vector<OpId>>& object_orders) {
  std::map<ObjectId, std::set<OpId>> expected;
  std::vector<OpId> nodes;
  for (const Operation& op : h.operations())
    if (op.is_complete()) {
      expected[op.object].insert(op.op_id);
      nodes.push_back(op.op_id);
    }
  for (const auto& [x, ops] : expected) {
    auto it = object_orders.find(x);
    if (it == object_orders.end())
      throw PreconditionError("no serialization order supplied for object " + x);
    std::set<OpId> given(it->second.begin(), it->second.end());
    if (given.size() != it->second.size() || given != ops)
      throw PreconditionError("order for object " + x +
                              " does not name its complete operations exactly");
  }
  for (const auto& entry : object_orders)
    if (!expected.count(entry.first))
      throw PreconditionError("serialization order for unknown object " + entry.first);

  DependencyGraph g(std::move(nodes));
  for (const GraphEdge& e : process_order_edges(h)) g.add_edge(e.from, e.to, e.label);
  for (const auto& [x, ops] : expected) {
    const std::vector<OpId>& order = object_orders.at(x);
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
      g.add_edge(order[i], order[i + 1], EdgeLabel::object_order(x));
  }
  return g;
}

namespace {

enum class Mark { White, Gray, Black };

struct CycleSearch {
  const DependencyGraph& g;
  std::map<OpId, Mark> mark;
  std::vector<OpId> path;                 // gray nodes, DFS order
  std::vector<const GraphEdge*> path_in;  // edge that reached path[i] (null for root)
  std::optional<CycleWitness> found;

  bool visit(OpId v) {
    mark[v] = Mark::Gray;
    path.push_back(v);
    for (std::size_t ei : g.out_edges(v)) {
      const GraphEdge& e = g.edges()[ei];
      Mark m = mark[e.to];
      if (m == Mark::Gray) {
        // back edge: the cycle is the path segment from e.to down to v
        CycleWitness w;
        std::size_t start = 0;
        while (path[start] != e.to) ++start;
        for (std::size_t i = start; i < path.size(); ++i) {
          w.ops.push_back(path[i]);
          if (i + 1 < path.size()) w.labels.push_back(path_in[i + 1]->label);
        }
        w.labels.push_back(e.label);  // closing step back to e.to
        found = std::move(w);
        return true;
      }
      if (m == Mark::White) {
        path_in.push_back(&e);
        if (visit(e.to)) return true;
        path_in.pop_back();
      }
    }
    path.pop_back();
    mark[v] = Mark::Black;
    return false;
  }
};

}  // namespace

std::optional<CycleWitness> find_cycle(const DependencyGraph& g) {
  CycleSearch s{g, {}, {}, {}, std::nullopt};
  for (OpId v : g.nodes()) s.mark[v] = Mark::White;
  for (OpId v : g.nodes()) {
    if (s.mark[v] != Mark::White) continue;
    s.path_in.push_back(nullptr);
    if (s.visit(v)) return s.found;
    s.path_in.pop_back();
  }
  return std::nullopt;
}

bool cycle_exists_in(const DependencyGraph& g, const CycleWitness& w) {
  if (w.ops.empty() || w.ops.size() != w.labels.size()) return false;
  for (std::size_t i = 0; i < w.ops.size(); ++i) {
    const OpId from = w.ops[i];
    const OpId to = w.ops[(i + 1) % w.ops.size()];
    bool present = false;
    for (std::size_t ei : g.out_edges(from)) {
      const GraphEdge& e = g.edges()[ei];
      if (e.to == to && e.label == w.labels[i]) {
        present = true;
        break;
      }
    }
    if (!present) return false;
  }
  return true;
}

std::optional<std::vector<OpId>> topological_extension(const DependencyGraph& g) {
  std::map<OpId, int> indegree;
  for (OpId v : g.nodes()) indegree[v] = 0;
  for (const GraphEdge& e : g.edges()) ++indegree[e.to];

  std::priority_queue<OpId, std::vector<OpId>, std::greater<>> ready;
  for (auto& [v, d] : indegree)
    if (d == 0) ready.push(v);

  std::vector<OpId> order;
  while (!ready.empty()) {
    OpId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t ei : g.out_edges(v)) {
      const GraphEdge& e = g.edges()[ei];
      if (--indegree[e.to] == 0) ready.push(e.to);
    }
  }
  if (order.size() != g.nodes().size()) return std::nullopt;  // cycle
  return order;
}

std::string to_dot(const DependencyGraph& g, const std::vector<Operation>* op_table) {
  std::map<OpId, const Operation*> by_id;
  if (op_table)
    for (const Operation& op : *op_table) by_id[op.op_id] = &op;
  std::ostringstream out;
  out << "digraph deps {\n";
  for (OpId v : g.nodes()) {
    out << "  n" << v << " [label=\"op " << v;
    auto it = by_id.find(v);
    if (it != by_id.end())
      out << " P" << it->second->process << " " << describe(*it->second);
    out << "\"];\n";
  }
  for (const GraphEdge& e : g.edges())
    out << "  n" << e.from << " -> n" << e.to << " [label=\"" << e.label.describe()
        << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace coppar
