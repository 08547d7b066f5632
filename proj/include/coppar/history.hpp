#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace coppar {

using ProcessId = int;
using OpId = int;
using ObjectId = std::string;
using Value = long long;

/// Every register starts at 0; a read may legally return 0 before any write.
inline constexpr Value kInitialValue = 0;

enum class EventKind { Invocation, Response };
enum class Action { Read, Write };

/// One invocation or response event. A write invocation carries the written
/// value and a read response carries the returned value; every other value
/// slot stays empty.
struct Event {
  EventKind kind = EventKind::Invocation;
  OpId op_id = 0;
  ProcessId process = 0;
  Action action = Action::Read;
  ObjectId object;
  std::optional<Value> value;

  bool operator==(const Event&) const = default;
};

Event inv_write(OpId id, ProcessId p, ObjectId obj, Value v);
Event res_write(OpId id, ProcessId p, ObjectId obj);
Event inv_read(OpId id, ProcessId p, ObjectId obj);
Event res_read(OpId id, ProcessId p, ObjectId obj, Value v);

/// An invocation paired with its response. res_index and read_value stay
/// empty while the operation is pending.
struct Operation {
  OpId op_id = 0;
  ProcessId process = 0;
  Action action = Action::Read;
  ObjectId object;
  std::optional<Value> written_value;
  std::optional<Value> read_value;
  int inv_index = -1;
  std::optional<int> res_index;

  bool is_complete() const { return res_index.has_value(); }
  bool is_write() const { return action == Action::Write; }
  bool is_read() const { return action == Action::Read; }
};

/// Short render, e.g. "w(x,1)", "r(y)=0", "r(y)=?" while pending.
std::string describe(const Operation& op);

/// A finite sequence of events. Immutable once constructed; every member is
/// a pure query, so histories can be shared freely across threads.
class History {
 public:
  History() = default;
  explicit History(std::vector<Event> events) : events_(std::move(events)) {}

  const std::vector<Event>& events() const { return events_; }
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }

  /// Processes and objects occurring in the history, sorted, deduplicated.
  std::vector<ProcessId> processes() const;
  std::vector<ObjectId> objects() const;

  /// Subsequence of events belonging to process p (H|P).
  History project_process(ProcessId p) const;

  /// Subsequence of events touching object x (H|x).
  History project_object(const ObjectId& x) const;

  /// Events alternate inv, res, inv, res with matching pairs; the last
  /// invocation may be left pending. The empty history is sequential.
  bool is_sequential() const;

  /// Every process subhistory is sequential and no op id is reused.
  bool is_well_formed() const;

  /// The history with every pending invocation removed.
  History complete() const;

  /// Pairs invocations with responses in invocation order. Pending
  /// operations keep an empty res_index. Throws WellFormednessError on
  /// broken pairing (response without invocation, reused op id, ...).
  std::vector<Operation> operations() const;

  bool operator==(const History&) const = default;

 private:
  std::vector<Event> events_;
};

/// H and H' are equivalent when H|P = H'|P for every process P.
bool equivalent_histories(const History& a, const History& b);

/// Extensions of h: every history obtained by appending response events for
/// a subset of h's pending invocations. Pending reads take each candidate
/// value in turn (the values written to their object in h, plus the initial
/// value). h itself is always the first entry.
struct ExtensionSet {
  std::vector<History> items;
  bool truncated = false;  // enumeration stopped at max entries
};

ExtensionSet extensions(const History& h, std::size_t max);

}  // namespace coppar
