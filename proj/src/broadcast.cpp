#include "coppar/broadcast.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "coppar/errors.hpp"

namespace coppar {

Payload Payload::write(ObjectId object, Value value) {
  Payload p;
  p.kind = Kind::Write;
  p.object = std::move(object);
  p.value = value;
  return p;
}

Payload Payload::transfer_write(ObjectId object, Value value) {
  Payload p = write(std::move(object), value);
  p.transfer = true;
  return p;
}

Payload Payload::change_node(ObjectId object, NodeId source, NodeId destination) {
  Payload p;
  p.kind = Kind::ChangeNode;
  p.object = std::move(object);
  p.source = source;
  p.destination = destination;
  return p;
}

std::string describe(const Message& m) {
  std::string out = "msg " + std::to_string(m.msg_id) + " from P" +
                    std::to_string(m.sender) + ": ";
  if (m.payload.kind == Payload::Kind::Write) {
    if (m.payload.transfer) out += "transfer ";
    out += "w(" + m.payload.object + "," + std::to_string(m.payload.value) + ")";
  } else {
    out += "move " + m.payload.object + ": node " +
           std::to_string(m.payload.source) + " -> node " +
           std::to_string(m.payload.destination);
  }
  return out;
}

BroadcastLog::BroadcastLog(int endpoint_count) {
  if (endpoint_count < 1)
    throw PreconditionError("broadcast log needs at least one endpoint");
  delivered_.resize(endpoint_count);
}

void BroadcastLog::broadcast(const Message& m) {
  for (const Message& existing : global_)
    if (existing.msg_id == m.msg_id)
      throw ProtocolError("duplicate broadcast of msg_id " +
                          std::to_string(m.msg_id));
  global_.push_back(m);
}

void BroadcastLog::deliver_step(int endpoint, int count) {
  if (endpoint < 0 || endpoint >= endpoint_count())
    throw PreconditionError("unknown endpoint " + std::to_string(endpoint));
  if (count < 0) throw PreconditionError("negative delivery count");
  auto& list = delivered_[endpoint];
  while (count-- > 0 && list.size() < global_.size())
    list.push_back(global_[list.size()].msg_id);
}

const std::vector<int>& BroadcastLog::delivered(int endpoint) const {
  if (endpoint < 0 || endpoint >= endpoint_count())
    throw PreconditionError("unknown endpoint " + std::to_string(endpoint));
  return delivered_[endpoint];
}

int BroadcastLog::cursor(int endpoint) const {
  return static_cast<int>(delivered(endpoint).size());
}

BroadcastLog BroadcastLog::from_parts(std::vector<Message> global,
                                      std::vector<std::vector<int>> delivered) {
  BroadcastLog log;
  log.global_ = std::move(global);
  log.delivered_ = std::move(delivered);
  return log;
}

bool check_integrity(const BroadcastLog& log) {
  std::set<int> broadcast_ids;
  for (const Message& m : log.global_sequence())
    if (!broadcast_ids.insert(m.msg_id).second) return false;

  for (int e = 0; e < log.endpoint_count(); ++e) {
    std::set<int> seen;
    for (int id : log.delivered(e)) {
      if (!broadcast_ids.count(id)) return false;
      if (!seen.insert(id).second) return false;
    }
  }
  return true;
}

bool check_total_order(const BroadcastLog& log) {
  std::vector<std::map<int, int>> pos(log.endpoint_count());
  for (int e = 0; e < log.endpoint_count(); ++e) {
    const auto& list = log.delivered(e);
    for (int k = 0; k < static_cast<int>(list.size()); ++k)
      pos[e].emplace(list[k], k);
  }

  for (int p = 0; p < log.endpoint_count(); ++p) {
    const auto& list = log.delivered(p);
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        for (int q = 0; q < log.endpoint_count(); ++q) {
          auto later = pos[q].find(list[j]);
          if (later == pos[q].end()) continue;
          auto earlier = pos[q].find(list[i]);
          if (earlier == pos[q].end() || earlier->second > later->second)
            return false;
        }
      }
    }
  }
  return true;
}

}  // namespace coppar
