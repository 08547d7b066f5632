#pragma once

#include <string>
#include <vector>

#include "coppar/history.hpp"

namespace coppar {

using NodeId = int;

/// What a broadcast message carries. Write applies a value to an object's
/// replica; ChangeNode moves an object's home to another node. A Write with
/// transfer set is the handoff write issued while moving an object, not a
/// client operation.
struct Payload {
  enum class Kind { Write, ChangeNode };

  Kind kind = Kind::Write;
  ObjectId object;
  Value value = 0;
  bool transfer = false;
  NodeId source = -1;
  NodeId destination = -1;

  static Payload write(ObjectId object, Value value);
  static Payload transfer_write(ObjectId object, Value value);
  static Payload change_node(ObjectId object, NodeId source, NodeId destination);

  bool operator==(const Payload&) const = default;
};

struct Message {
  int msg_id = -1;
  ProcessId sender = -1;
  Payload payload;

  bool operator==(const Message&) const = default;
};

std::string describe(const Message& m);

/// Record of a total-order broadcast run: one global sequence of messages
/// plus, per endpoint, the order in which messages were delivered there.
/// Endpoints deliver a prefix of the global sequence, in sequence order;
/// deliver_step advances an endpoint's cursor. from_parts bypasses that
/// discipline so checkers can be fed forged runs.
class BroadcastLog {
 public:
  BroadcastLog() = default;  // empty log with no endpoints
  explicit BroadcastLog(int endpoint_count);

  void broadcast(const Message& m);
  void deliver_step(int endpoint, int count);

  const std::vector<Message>& global_sequence() const { return global_; }
  const std::vector<int>& delivered(int endpoint) const;
  int cursor(int endpoint) const;
  int endpoint_count() const { return static_cast<int>(delivered_.size()); }

  static BroadcastLog from_parts(std::vector<Message> global,
                                 std::vector<std::vector<int>> delivered);

 private:
  std::vector<Message> global_;
  std::vector<std::vector<int>> delivered_;  // msg ids, in delivery order
};

/// Integrity: every delivered id names a message that was broadcast, and no
/// endpoint delivers the same id twice.
bool check_integrity(const BroadcastLog& log);

/// Strict total order: any two endpoints deliver their common messages in
/// the same relative order, with no gaps between them. Concretely, if p
/// delivers m before m', then any q that delivers m' delivered m first.
bool check_total_order(const BroadcastLog& log);

}  // namespace coppar
