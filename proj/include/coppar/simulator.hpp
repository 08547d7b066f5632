#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "coppar/broadcast.hpp"
#include "coppar/history.hpp"

namespace coppar {

/// Node tree the replicas form. parent[i] is i's parent, -1 for the root.
/// process_node maps each client process to the node that serves it.
struct TreeTopology {
  std::vector<NodeId> parent;
  std::vector<NodeId> process_node;

  int node_count() const { return static_cast<int>(parent.size()); }
  NodeId root() const;
  bool valid() const;

  static TreeTopology heap_shaped(int nodes, int processes);
};

/// Which node currently owns each object. version counts applied moves.
struct ObjectMapping {
  std::map<ObjectId, NodeId> owner;
  int version = 0;

  bool operator==(const ObjectMapping&) const = default;
};

/// Applies a ChangeNode payload. A move only takes effect when the object's
/// current owner still matches the payload's source; a stale move is a
/// sequenced no-op and does not bump the version. Returns whether it applied.
bool apply_change_node(ObjectMapping& m, const Payload& p);

struct SimConfig {
  int process_count = 2;
  int object_count = 2;
  int op_count = 20;
  std::uint64_t seed = 0;
  double read_probability = 0.5;
  double change_node_rate = 0.0;
  int max_staleness = 4;

  void validate() const;
};

/// Where a read got its value: the node's delivery cursor and global step at
/// read time, and the msg id of the client write the value came from (-1
/// when the register still held its initial value).
struct ReadInfo {
  int cursor = 0;
  int step = 0;
  int value_write = -1;
};

struct SimRun {
  History history;
  BroadcastLog log;
  std::vector<int> cast_order;  // msg ids in global sequence order
  std::vector<ObjectMapping> mapping_trace;
  TreeTopology topology;
  SimConfig config;
  std::map<OpId, int> write_msg;        // client write op -> its msg id
  std::map<OpId, ReadInfo> read_info;
  std::vector<std::pair<int, int>> transfer_remap_pairs;  // (transfer, move)
};

/// Deterministic run of the protocol: processes issue register operations
/// against their node's replica, every write goes through the shared
/// total-order broadcast, every node applies the delivered prefix in order.
/// A write responds only after the issuing process's own node has delivered
/// it; a read is served locally once the node is within max_staleness of the
/// broadcast tail. Same config, same run.
SimRun run_simulation(const SimConfig& cfg);

/// The serialization each object's operations received in the run: writes in
/// broadcast order, each read immediately after the write whose value it
/// returned. Validates the result against the register semantics.
std::map<ObjectId, std::vector<OpId>> extract_object_orders(const SimRun& run);

}  // namespace coppar
