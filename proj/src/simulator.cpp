#include "coppar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "coppar/errors.hpp"
#include "coppar/register_spec.hpp"

namespace coppar {

NodeId TreeTopology::root() const {
  for (int i = 0; i < node_count(); ++i)
    if (parent[i] < 0) return i;
  return -1;
}

bool TreeTopology::valid() const {
  const int n = node_count();
  if (n == 0) return false;
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (parent[i] < 0) {
      ++roots;
      continue;
    }
    if (parent[i] >= n) return false;
  }
  if (roots != 1) return false;
  for (int i = 0; i < n; ++i) {
    int cur = i, hops = 0;
    while (parent[cur] >= 0) {
      cur = parent[cur];
      if (++hops > n) return false;  // cycle
    }
  }
  if (process_node.empty()) return false;
  for (NodeId pn : process_node)
    if (pn < 0 || pn >= n) return false;
  return true;
}

TreeTopology TreeTopology::heap_shaped(int nodes, int processes) {
  if (nodes < 1 || processes < 1)
    throw PreconditionError("topology needs at least one node and one process");
  TreeTopology t;
  t.parent.resize(nodes);
  for (int i = 0; i < nodes; ++i) t.parent[i] = i == 0 ? -1 : (i - 1) / 2;
  t.process_node.resize(processes);
  for (int p = 0; p < processes; ++p) t.process_node[p] = p % nodes;
  return t;
}

bool apply_change_node(ObjectMapping& m, const Payload& p) {
  if (p.kind != Payload::Kind::ChangeNode)
    throw PreconditionError("payload is not a change-node request");
  auto it = m.owner.find(p.object);
  if (it == m.owner.end() || it->second != p.source) return false;
  it->second = p.destination;
  ++m.version;
  return true;
}

void SimConfig::validate() const {
  if (process_count < 1)
    throw PreconditionError("process_count must be positive");
  if (object_count < 1)
    throw PreconditionError("object_count must be positive");
  if (op_count < 0) throw PreconditionError("op_count must be non-negative");
  if (!(read_probability >= 0.0 && read_probability <= 1.0))
    throw PreconditionError("read_probability must lie in [0,1]");
  if (!(change_node_rate >= 0.0 && change_node_rate <= 1.0))
    throw PreconditionError("change_node_rate must lie in [0,1]");
  if (max_staleness < 0)
    throw PreconditionError("max_staleness must be non-negative");
}

namespace {

ObjectId object_name(int i) {
  constexpr const char* kShort = "xyzuvw";
  if (i >= 0 && i < 6) return std::string(1, kShort[i]);
  return "o" + std::to_string(i);
}

struct NodeState {
  std::map<ObjectId, Value> replica;
  std::map<ObjectId, int> last_client_write;  // msg id of the value's writer
  ObjectMapping mapping;
};

}  // namespace

SimRun run_simulation(const SimConfig& cfg) {
  cfg.validate();

  SimRun run;
  run.config = cfg;
  const int nodes = cfg.process_count;  // one node per process
  run.topology = TreeTopology::heap_shaped(nodes, cfg.process_count);
  run.log = BroadcastLog(nodes);

  std::mt19937_64 rng(cfg.seed);
  const int read_threshold =
      static_cast<int>(std::lround(cfg.read_probability * 1000.0));
  const int change_threshold =
      static_cast<int>(std::lround(cfg.change_node_rate * 1000.0));

  ObjectMapping canonical;
  for (int i = 0; i < cfg.object_count; ++i)
    canonical.owner[object_name(i)] = i % nodes;
  run.mapping_trace.push_back(canonical);

  std::vector<NodeState> node(nodes);
  for (NodeState& ns : node) ns.mapping = canonical;

  std::map<ObjectId, Value> cast_replica;  // replay of the full cast so far

  std::vector<Event> events;
  OpId next_op = 1;
  int next_msg = 0;
  int issued = 0;
  int change_issued = 0;
  long step = 0;

  struct PendingWrite {
    OpId op;
    ObjectId object;
    int msg;
  };
  std::vector<std::optional<PendingWrite>> pending(cfg.process_count);

  auto deliver_at = [&](int n_idx, int count) {
    const int before = run.log.cursor(n_idx);
    run.log.deliver_step(n_idx, count);
    const int after = run.log.cursor(n_idx);
    NodeState& ns = node[n_idx];
    for (int k = before; k < after; ++k) {
      const Message& m = run.log.global_sequence()[k];
      if (m.payload.kind == Payload::Kind::Write) {
        auto [it, fresh] = ns.replica.try_emplace(m.payload.object, kInitialValue);
        if (m.payload.transfer && it->second != m.payload.value)
          throw SimulatorBug("transfer write would change the value of " +
                             m.payload.object + " at node " +
                             std::to_string(n_idx));
        it->second = m.payload.value;
        if (!m.payload.transfer)
          ns.last_client_write[m.payload.object] = m.msg_id;
      } else {
        apply_change_node(ns.mapping, m.payload);
      }
    }
  };

  auto do_broadcast = [&](const Message& m) {
    run.log.broadcast(m);
    run.cast_order.push_back(m.msg_id);
    if (m.payload.kind == Payload::Kind::Write) {
      cast_replica[m.payload.object] = m.payload.value;
    } else {
      apply_change_node(canonical, m.payload);
      run.mapping_trace.push_back(canonical);
    }
  };

  const long step_cap = static_cast<long>(cfg.op_count) * 256 + 1024;
  int rr = 0;
  auto any_pending = [&] {
    return std::any_of(pending.begin(), pending.end(),
                       [](const auto& p) { return p.has_value(); });
  };

  while (issued < cfg.op_count || any_pending()) {
    if (++step > step_cap)
      throw SimulatorBug("scheduler failed to converge");

    int p = rr;
    rr = (rr + 1) % cfg.process_count;
    if (rng() % 10 < 3) p = static_cast<int>(rng() % cfg.process_count);
    const int n_idx = run.topology.process_node[p];

    if (rng() % 10 < 4) {
      const int dn = static_cast<int>(rng() % nodes);
      deliver_at(dn, 1 + static_cast<int>(rng() % 3));
    }

    if (pending[p]) {
      deliver_at(n_idx, 1 + static_cast<int>(rng() % 2));
      if (run.log.cursor(n_idx) > pending[p]->msg) {
        events.push_back(res_write(pending[p]->op, p, pending[p]->object));
        pending[p].reset();
      }
      continue;
    }
    if (issued >= cfg.op_count) continue;

    const bool do_change = change_threshold > 0 && change_issued < cfg.op_count &&
                           static_cast<int>(rng() % 1000) < change_threshold;
    if (do_change) {
      ++change_issued;
      const ObjectId x = object_name(static_cast<int>(rng() % cfg.object_count));
      const NodeId src = node[n_idx].mapping.owner.at(x);  // may be stale
      const NodeId dst = static_cast<NodeId>(rng() % nodes);
      auto vit = cast_replica.find(x);
      const Value tv = vit == cast_replica.end() ? kInitialValue : vit->second;
      const Message transfer{next_msg++, p, Payload::transfer_write(x, tv)};
      const Message move{next_msg++, p, Payload::change_node(x, src, dst)};
      do_broadcast(transfer);
      do_broadcast(move);
      run.transfer_remap_pairs.emplace_back(transfer.msg_id, move.msg_id);
      continue;
    }

    ++issued;
    const ObjectId x = object_name(static_cast<int>(rng() % cfg.object_count));
    if (static_cast<int>(rng() % 1000) < read_threshold) {
      const int total = static_cast<int>(run.log.global_sequence().size());
      const int floor = total - cfg.max_staleness;
      if (run.log.cursor(n_idx) < floor)
        deliver_at(n_idx, floor - run.log.cursor(n_idx));
      if (rng() % 4 == 0) deliver_at(n_idx, static_cast<int>(rng() % 3));

      const OpId id = next_op++;
      auto vit = node[n_idx].replica.find(x);
      const Value v =
          vit == node[n_idx].replica.end() ? kInitialValue : vit->second;
      auto wit = node[n_idx].last_client_write.find(x);
      const int vw =
          wit == node[n_idx].last_client_write.end() ? -1 : wit->second;
      events.push_back(inv_read(id, p, x));
      events.push_back(res_read(id, p, x, v));
      run.read_info[id] =
          ReadInfo{run.log.cursor(n_idx), static_cast<int>(step), vw};
    } else {
      const OpId id = next_op++;
      const Value v = 1 + static_cast<Value>(rng() % 9);
      events.push_back(inv_write(id, p, x, v));
      const Message m{next_msg++, p, Payload::write(x, v)};
      do_broadcast(m);
      run.write_msg[id] = m.msg_id;
      pending[p] = PendingWrite{id, x, m.msg_id};
    }
  }

  run.history = History(std::move(events));
  if (!run.history.is_well_formed())
    throw SimulatorBug("generated history is not well formed");
  if (!check_integrity(run.log))
    throw SimulatorBug("broadcast log fails the integrity check");
  if (!check_total_order(run.log))
    throw SimulatorBug("broadcast log fails the total order check");
  return run;
}

std::map<ObjectId, std::vector<OpId>> extract_object_orders(const SimRun& run) {
  std::vector<Operation> ops = run.history.complete().operations();

  // Writes take their broadcast positions. Each read slots in right after
  // the client write whose value it returned (slot -1 when it read the
  // initial value), reads in a slot ordered by how far their node had
  // caught up, then by time.
  struct Placed {
    int slot;    // msg id of the value's write, -1 for initial
    int cursor;  // tie break for reads in the same slot
    int step;
    OpId op;
    bool is_write;
  };
  std::map<ObjectId, std::vector<Placed>> by_object;

  for (const Operation& op : ops) {
    if (op.is_write()) {
      auto it = run.write_msg.find(op.op_id);
      if (it == run.write_msg.end())
        throw SimulatorBug("write op " + std::to_string(op.op_id) +
                           " has no broadcast record");
      by_object[op.object].push_back(Placed{it->second, 0, 0, op.op_id, true});
    } else {
      auto it = run.read_info.find(op.op_id);
      if (it == run.read_info.end())
        throw SimulatorBug("read op " + std::to_string(op.op_id) +
                           " has no read record");
      by_object[op.object].push_back(Placed{it->second.value_write,
                                            it->second.cursor, it->second.step,
                                            op.op_id, false});
    }
  }

  std::map<ObjectId, std::vector<OpId>> orders;
  for (auto& [object, placed] : by_object) {
    std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
      if (a.slot != b.slot) return a.slot < b.slot;
      if (a.is_write != b.is_write) return a.is_write;  // write opens its slot
      if (a.cursor != b.cursor) return a.cursor < b.cursor;
      return a.step < b.step;
    });
    std::vector<OpId>& order = orders[object];
    for (const Placed& pl : placed) order.push_back(pl.op);
  }

  // The extracted orders must replay legally; anything else is a bug in the
  // protocol model, not in the caller's input.
  auto grouped = [&] {
    std::map<ObjectId, std::vector<Operation>> g;
    for (const Operation& op : ops) g[op.object].push_back(op);
    return g;
  }();
  for (const auto& [object, order] : orders) {
    if (!is_legal_object_history(materialize(grouped.at(object), order)))
      throw SimulatorBug("extracted order for object " + object +
                         " does not replay legally");
  }
  return orders;
}

}  // namespace coppar
