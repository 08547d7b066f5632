#include "coppar/register_spec.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "coppar/errors.hpp"

namespace coppar {

bool is_legal_object_history(const History& s) {
  if (!s.is_sequential())
    throw PreconditionError("legality is defined on sequential histories");
  if (s.objects().size() > 1)
    throw PreconditionError("object legality takes a single-object history");
  RegisterState reg;
  for (const Operation& op : s.operations()) {
    if (op.is_write()) {
      reg.write(*op.written_value);
    } else if (op.is_complete()) {
      if (*op.read_value != reg.read()) return false;
    }
    // a trailing pending operation constrains nothing
  }
  return true;
}

bool is_legal(const History& s) {
  if (!s.is_sequential())
    throw PreconditionError("legality is defined on sequential histories");
  for (const ObjectId& x : s.objects())
    if (!is_legal_object_history(s.project_object(x))) return false;
  return true;
}

History materialize(const std::vector<Operation>& ops, const std::vector<OpId>& order) {
  std::map<OpId, const Operation*> by_id;
  for (const Operation& op : ops) by_id[op.op_id] = &op;
  if (order.size() != by_id.size())
    throw PreconditionError("order must name every op exactly once");
  std::set<OpId> seen;
  std::vector<Event> events;
  events.reserve(order.size() * 2);
  for (OpId id : order) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw PreconditionError("order names unknown op " + std::to_string(id));
    if (!seen.insert(id).second)
      throw PreconditionError("order names op " + std::to_string(id) + " twice");
    const Operation& op = *it->second;
    if (!op.is_complete())
      throw PreconditionError("cannot materialize pending op " + std::to_string(id));
    if (op.is_write()) {
      events.push_back(inv_write(op.op_id, op.process, op.object, *op.written_value));
      events.push_back(res_write(op.op_id, op.process, op.object));
    } else {
      events.push_back(inv_read(op.op_id, op.process, op.object));
      events.push_back(res_read(op.op_id, op.process, op.object, *op.read_value));
    }
  }
  return History(std::move(events));
}

namespace {

void search_orders(const std::vector<Operation>& ops, std::vector<bool>& placed,
                   std::vector<OpId>& prefix, Value current,
                   std::vector<std::vector<OpId>>& out) {
  if (prefix.size() == ops.size()) {
    out.push_back(prefix);
    return;
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (placed[i]) continue;
    const Operation& op = ops[i];
    if (op.is_read() && *op.read_value != current) continue;  // prune
    placed[i] = true;
    prefix.push_back(op.op_id);
    search_orders(ops, placed, prefix, op.is_write() ? *op.written_value : current, out);
    prefix.pop_back();
    placed[i] = false;
  }
}

}  // namespace

std::vector<std::vector<OpId>> legal_serializations_of_object(std::vector<Operation> ops) {
  if (ops.empty()) return {{}};
  for (const Operation& op : ops) {
    if (!op.is_complete())
      throw PreconditionError("serialization enumeration takes complete ops only");
    if (op.object != ops.front().object)
      throw PreconditionError("serialization enumeration takes ops on one object");
  }
  // Canonical input order makes the output independent of presentation order.
  std::sort(ops.begin(), ops.end(),
            [](const Operation& a, const Operation& b) { return a.op_id < b.op_id; });
  std::vector<std::vector<OpId>> out;
  std::vector<bool> placed(ops.size(), false);
  std::vector<OpId> prefix;
  search_orders(ops, placed, prefix, kInitialValue, out);
  return out;
}

}  // namespace coppar
