#include "coppar/history.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "coppar/errors.hpp"

namespace coppar {

Event inv_write(OpId id, ProcessId p, ObjectId obj, Value v) {
  return Event{EventKind::Invocation, id, p, Action::Write, std::move(obj), v};
}

Event res_write(OpId id, ProcessId p, ObjectId obj) {
  return Event{EventKind::Response, id, p, Action::Write, std::move(obj), std::nullopt};
}

Event inv_read(OpId id, ProcessId p, ObjectId obj) {
  return Event{EventKind::Invocation, id, p, Action::Read, std::move(obj), std::nullopt};
}

Event res_read(OpId id, ProcessId p, ObjectId obj, Value v) {
  return Event{EventKind::Response, id, p, Action::Read, std::move(obj), v};
}

std::string describe(const Operation& op) {
  std::string s;
  if (op.is_write()) {
    s = "w(" + op.object + "," +
        (op.written_value ? std::to_string(*op.written_value) : std::string("?")) + ")";
  } else {
    s = "r(" + op.object + ")=" +
        (op.read_value ? std::to_string(*op.read_value) : std::string("?"));
  }
  return s;
}

std::vector<ProcessId> History::processes() const {
  std::set<ProcessId> seen;
  for (const Event& e : events_) seen.insert(e.process);
  return {seen.begin(), seen.end()};
}

std::vector<ObjectId> History::objects() const {
  std::set<ObjectId> seen;
  for (const Event& e : events_) seen.insert(e.object);
  return {seen.begin(), seen.end()};
}

History History::project_process(ProcessId p) const {
  std::vector<Event> out;
  for (const Event& e : events_)
    if (e.process == p) out.push_back(e);
  return History(std::move(out));
}

History History::project_object(const ObjectId& x) const {
  std::vector<Event> out;
  for (const Event& e : events_)
    if (e.object == x) out.push_back(e);
  return History(std::move(out));
}

bool History::is_sequential() const {
  // inv, res, inv, res, ... with matching pairs; only the last invocation
  // may lack its response.
  std::size_t i = 0;
  while (i < events_.size()) {
    const Event& inv = events_[i];
    if (inv.kind != EventKind::Invocation) return false;
    if (i + 1 == events_.size()) return true;  // trailing pending invocation
    const Event& res = events_[i + 1];
    if (res.kind != EventKind::Response) return false;
    if (res.op_id != inv.op_id || res.process != inv.process ||
        res.action != inv.action || res.object != inv.object)
      return false;
    i += 2;
  }
  return true;
}

bool History::is_well_formed() const {
  for (ProcessId p : processes())
    if (!project_process(p).is_sequential()) return false;
  // op ids name operations globally: at most one invocation each, and a
  // response only ever follows its own invocation (the per-process check
  // already pairs them up within a process).
  std::set<OpId> invoked;
  for (const Event& e : events_) {
    if (e.kind == EventKind::Invocation && !invoked.insert(e.op_id).second)
      return false;
  }
  return true;
}

History History::complete() const {
  std::set<OpId> responded;
  for (const Event& e : events_)
    if (e.kind == EventKind::Response) responded.insert(e.op_id);
  std::vector<Event> out;
  for (const Event& e : events_)
    if (e.kind == EventKind::Response || responded.count(e.op_id)) out.push_back(e);
  return History(std::move(out));
}

std::vector<Operation> History::operations() const {
  std::vector<Operation> ops;
  std::map<OpId, std::size_t> open;  // op_id -> index into ops, response still missing
  std::set<OpId> used;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.kind == EventKind::Invocation) {
      if (!used.insert(e.op_id).second)
        throw WellFormednessError("op id " + std::to_string(e.op_id) + " invoked twice");
      Operation op;
      op.op_id = e.op_id;
      op.process = e.process;
      op.action = e.action;
      op.object = e.object;
      op.inv_index = static_cast<int>(i);
      if (e.action == Action::Write) {
        if (!e.value)
          throw WellFormednessError("write invocation without a value (op " +
                                    std::to_string(e.op_id) + ")");
        op.written_value = e.value;
      }
      open[e.op_id] = ops.size();
      ops.push_back(std::move(op));
    } else {
      auto it = open.find(e.op_id);
      if (it == open.end())
        throw WellFormednessError("response without invocation (op " +
                                  std::to_string(e.op_id) + ")");
      Operation& op = ops[it->second];
      if (op.process != e.process || op.action != e.action || op.object != e.object)
        throw WellFormednessError("response does not match invocation (op " +
                                  std::to_string(e.op_id) + ")");
      op.res_index = static_cast<int>(i);
      if (e.action == Action::Read) {
        if (!e.value)
          throw WellFormednessError("read response without a value (op " +
                                    std::to_string(e.op_id) + ")");
        op.read_value = e.value;
      }
      open.erase(it);
    }
  }
  return ops;
}

bool equivalent_histories(const History& a, const History& b) {
  std::set<ProcessId> ps;
  for (ProcessId p : a.processes()) ps.insert(p);
  for (ProcessId p : b.processes()) ps.insert(p);
  for (ProcessId p : ps)
    if (!(a.project_process(p) == b.project_process(p))) return false;
  return true;
}

ExtensionSet extensions(const History& h, std::size_t max) {
  std::vector<Operation> pending;
  for (const Operation& op : h.operations())
    if (!op.is_complete()) pending.push_back(op);
  std::sort(pending.begin(), pending.end(),
            [](const Operation& a, const Operation& b) { return a.op_id < b.op_id; });

  // Candidate values a pending read may return: the initial value plus
  // everything written to its object anywhere in h.
  std::map<ObjectId, std::vector<Value>> candidates;
  for (const Operation& op : pending)
    if (op.is_read()) candidates.emplace(op.object, std::vector<Value>{});
  if (!candidates.empty()) {
    for (const Event& e : h.events())
      if (e.kind == EventKind::Invocation && e.action == Action::Write && e.value) {
        auto it = candidates.find(e.object);
        if (it != candidates.end()) it->second.push_back(*e.value);
      }
    for (auto& [obj, vals] : candidates) {
      vals.push_back(kInitialValue);
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    }
  }

  ExtensionSet out;
  const std::size_t n = pending.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<const Operation*> chosen;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) chosen.push_back(&pending[i]);

    // Odometer over the candidate values of the chosen pending reads.
    std::vector<std::size_t> idx(chosen.size(), 0);
    const auto advance = [&]() {
      for (std::size_t k = chosen.size(); k-- > 0;) {
        if (chosen[k]->is_write()) continue;  // single setting
        if (++idx[k] < candidates[chosen[k]->object].size()) return true;
        idx[k] = 0;
      }
      return false;
    };
    do {
      std::vector<Event> events = h.events();
      for (std::size_t i = 0; i < chosen.size(); ++i) {
        const Operation& op = *chosen[i];
        if (op.is_write()) {
          events.push_back(res_write(op.op_id, op.process, op.object));
        } else {
          events.push_back(
              res_read(op.op_id, op.process, op.object, candidates[op.object][idx[i]]));
        }
      }
      if (out.items.size() >= max) {
        out.truncated = true;
        return out;
      }
      out.items.emplace_back(std::move(events));
    } while (advance());
  }
  return out;
}

}  // namespace coppar
