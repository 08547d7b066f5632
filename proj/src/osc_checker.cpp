#include "coppar/osc_checker.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coppar/errors.hpp"
#include "coppar/register_spec.hpp"

namespace coppar {

std::set<OpId> SubsetPolicy::resolve(const std::vector<Operation>& ops) const {
  std::set<OpId> out;
  switch (mode) {
    case Mode::All:
      for (const Operation& op : ops)
        if (op.is_complete()) out.insert(op.op_id);
      break;
    case Mode::Empty:
      break;
    case Mode::WritesOnly:
      for (const Operation& op : ops)
        if (op.is_write() && op.is_complete()) out.insert(op.op_id);
      break;
    case Mode::Explicit: {
      std::set<OpId> known;
      for (const Operation& op : ops)
        if (op.is_complete()) known.insert(op.op_id);
      for (OpId id : explicit_ids)
        if (!known.count(id))
          throw PreconditionError("subset names no completed operation (id " +
                                  std::to_string(id) + ")");
      out = explicit_ids;
      break;
    }
  }
  return out;
}

std::string SubsetPolicy::name() const {
  switch (mode) {
    case Mode::All: return "all";
    case Mode::Empty: return "none";
    case Mode::WritesOnly: return "writes";
    case Mode::Explicit: return "explicit(" + std::to_string(explicit_ids.size()) + ")";
  }
  return "?";
}

namespace {

// Ordering constraints over operation indices (ops sorted by invocation).
// Both kinds of edge always point from a lower index to a higher one, so the
// constraint graph alone is never cyclic; only register legality can make a
// history unserializable.
struct Constraints {
  std::vector<std::vector<int>> preds;
};

Constraints build_constraints(const std::vector<Operation>& ops,
                              const std::set<OpId>& subset_a) {
  const int n = static_cast<int>(ops.size());
  std::vector<std::set<int>> pred_sets(n);

  std::map<ProcessId, int> last_of_process;
  for (int i = 0; i < n; ++i) {
    auto it = last_of_process.find(ops[i].process);
    if (it != last_of_process.end()) pred_sets[i].insert(it->second);
    last_of_process[ops[i].process] = i;
  }

  for (int j = 0; j < n; ++j) {
    if (!subset_a.count(ops[j].op_id)) continue;
    for (int i = 0; i < n; ++i) {
      if (i == j || ops[i].object != ops[j].object) continue;
      if (ops[i].res_index && *ops[i].res_index < ops[j].inv_index)
        pred_sets[j].insert(i);
    }
  }

  Constraints c;
  c.preds.resize(n);
  for (int i = 0; i < n; ++i)
    c.preds[i].assign(pred_sets[i].begin(), pred_sets[i].end());
  return c;
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 14695981039346656037ull;
    for (std::uint64_t w : v) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

// Backtracking placement of operations one by one. A state is the set of
// placed operations plus the identity of the last write per object; states
// already proven dead are memoized and never re-expanded.
class Searcher {
 public:
  Searcher(const std::vector<Operation>& ops, const Constraints& cons,
           std::uint64_t budget)
      : ops_(ops), cons_(cons), budget_(budget) {
    const int n = static_cast<int>(ops_.size());
    std::map<ObjectId, int> object_index;
    for (const Operation& op : ops_)
      object_index.emplace(op.object, static_cast<int>(object_index.size()));
    object_of_.resize(n);
    for (int i = 0; i < n; ++i) object_of_[i] = object_index.at(ops_[i].object);
    reg_.assign(object_index.size(), kInitialValue);
    last_write_.assign(object_index.size(), -1);
    mask_.assign((n + 63) / 64, 0);
    order_.reserve(n);
  }

  bool run() { return dfs(); }

  std::uint64_t explored() const { return explored_; }
  bool budget_out() const { return budget_out_; }
  const std::vector<int>& order() const { return order_; }

 private:
  bool placed(int i) const { return (mask_[i >> 6] >> (i & 63)) & 1; }

  bool ready(int i) const {
    if (placed(i)) return false;
    for (int p : cons_.preds[i])
      if (!placed(p)) return false;
    return true;
  }

  std::vector<std::uint64_t> state_key() const {
    std::vector<std::uint64_t> key = mask_;
    for (int w : last_write_)
      key.push_back(static_cast<std::uint64_t>(w + 1));
    return key;
  }

  bool dfs() {
    const int n = static_cast<int>(ops_.size());
    if (static_cast<int>(order_.size()) == n) return true;
    if (explored_ >= budget_) {
      budget_out_ = true;
      return false;
    }
    ++explored_;
    if (!dead_.insert(state_key()).second) return false;

    for (int i = 0; i < n; ++i) {
      if (!ready(i)) continue;
      const Operation& op = ops_[i];
      const int obj = object_of_[i];
      if (op.is_read() && reg_[obj] != *op.read_value) continue;

      mask_[i >> 6] |= 1ull << (i & 63);
      order_.push_back(i);
      const Value saved_value = reg_[obj];
      const int saved_writer = last_write_[obj];
      if (op.is_write()) {
        reg_[obj] = *op.written_value;
        last_write_[obj] = i;
      }

      if (dfs()) return true;

      reg_[obj] = saved_value;
      last_write_[obj] = saved_writer;
      order_.pop_back();
      mask_[i >> 6] &= ~(1ull << (i & 63));
      if (budget_out_) return false;
    }
    return false;
  }

  const std::vector<Operation>& ops_;
  const Constraints& cons_;
  std::vector<int> object_of_;
  std::vector<Value> reg_;
  std::vector<int> last_write_;
  std::vector<std::uint64_t> mask_;
  std::vector<int> order_;
  std::unordered_set<std::vector<std::uint64_t>, KeyHash> dead_;
  std::uint64_t explored_ = 0;
  std::uint64_t budget_ = 0;
  bool budget_out_ = false;
};

}  // namespace

Verdict check_osc(const History& h, const SubsetPolicy& a, std::uint64_t budget) {
  if (!h.is_well_formed())
    throw WellFormednessError("history is not well formed");

  ExtensionSet exts = extensions(h, kMaxExtensions);
  std::uint64_t total_explored = 0;
  bool out_of_budget = false;

  for (const History& ext : exts.items) {
    History c = ext.complete();
    std::vector<Operation> ops = c.operations();
    std::set<OpId> subset = a.resolve(ops);
    Constraints cons = build_constraints(ops, subset);

    Searcher search(ops, cons,
                    budget > total_explored ? budget - total_explored : 0);
    const bool found = search.run();
    total_explored += search.explored();

    if (found) {
      Serialization witness;
      witness.subset_a = subset;
      for (int idx : search.order()) witness.order.push_back(ops[idx].op_id);
      if (!validate_witness(ext, witness))
        throw std::logic_error("internal error: serialization failed revalidation");
      Verdict v;
      v.outcome = Verdict::Outcome::Consistent;
      v.witness = std::move(witness);
      v.extension_used = ext;
      v.reason = "found a legal serialization of " + std::to_string(ops.size()) +
                 " operations (subset " + a.name() + ")";
      v.states_explored = total_explored;
      return v;
    }
    if (search.budget_out()) {
      out_of_budget = true;
      break;
    }
  }

  Verdict v;
  v.states_explored = total_explored;
  if (out_of_budget) {
    v.outcome = Verdict::Outcome::Inconclusive;
    v.reason = "state budget of " + std::to_string(budget) +
               " exhausted before reaching a decision";
  } else if (exts.truncated) {
    v.outcome = Verdict::Outcome::Inconclusive;
    v.reason = "too many candidate extensions; search truncated at " +
               std::to_string(kMaxExtensions);
  } else {
    v.outcome = Verdict::Outcome::Violation;
    v.reason = "no legal serialization preserves process order and the " +
               a.name() + " real-time subset in any of " +
               std::to_string(exts.items.size()) + " extensions";
  }
  return v;
}

Verdict check_linearizable(const History& h, std::uint64_t budget) {
  return check_osc(h, SubsetPolicy::all(), budget);
}

Verdict check_sequentially_consistent(const History& h, std::uint64_t budget) {
  return check_osc(h, SubsetPolicy::empty(), budget);
}

Verdict check_exhaustive(const History& h, const SubsetPolicy& a) {
  if (!h.is_well_formed())
    throw WellFormednessError("history is not well formed");

  ExtensionSet exts = extensions(h, 1u << 20);
  if (exts.truncated)
    throw PreconditionError("too many extensions for exhaustive checking");

  std::uint64_t tried = 0;
  for (const History& ext : exts.items) {
    History c = ext.complete();
    std::vector<Operation> ops = c.operations();
    if (ops.size() > 10)
      throw PreconditionError("exhaustive check supports at most 10 operations, got " +
                              std::to_string(ops.size()));
    std::set<OpId> subset = a.resolve(ops);
    const int n = static_cast<int>(ops.size());

    std::vector<std::pair<int, int>> realtime_pairs;
    for (int j = 0; j < n; ++j) {
      if (!subset.count(ops[j].op_id)) continue;
      for (int i = 0; i < n; ++i) {
        if (i == j || ops[i].object != ops[j].object) continue;
        if (ops[i].res_index && *ops[i].res_index < ops[j].inv_index)
          realtime_pairs.emplace_back(i, j);
      }
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> pos(n);
    do {
      ++tried;
      for (int k = 0; k < n; ++k) pos[perm[k]] = k;

      bool ok = true;
      for (int i = 0; i < n && ok; ++i)
        for (int j = i + 1; j < n && ok; ++j)
          if (ops[i].process == ops[j].process && pos[i] > pos[j]) ok = false;
      for (const auto& [i, j] : realtime_pairs)
        if (pos[i] > pos[j]) {
          ok = false;
          break;
        }
      if (ok) {
        std::map<ObjectId, Value> reg;
        for (int k = 0; k < n && ok; ++k) {
          const Operation& op = ops[perm[k]];
          auto [it, inserted] = reg.try_emplace(op.object, kInitialValue);
          if (op.is_read()) {
            if (it->second != *op.read_value) ok = false;
          } else {
            it->second = *op.written_value;
          }
        }
      }
      if (ok) {
        Serialization witness;
        witness.subset_a = subset;
        for (int k = 0; k < n; ++k) witness.order.push_back(ops[perm[k]].op_id);
        Verdict v;
        v.outcome = Verdict::Outcome::Consistent;
        v.witness = std::move(witness);
        v.extension_used = ext;
        v.reason = "permutation search found a legal serialization";
        v.states_explored = tried;
        return v;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  Verdict v;
  v.outcome = Verdict::Outcome::Violation;
  v.reason = "all permutations of all extensions fail the conditions";
  v.states_explored = tried;
  return v;
}

bool validate_witness(const History& extension, const Serialization& s) {
  History c = extension.complete();
  std::vector<Operation> ops = c.operations();
  if (s.order.size() != ops.size()) return false;

  std::map<OpId, int> index_of;
  for (int i = 0; i < static_cast<int>(ops.size()); ++i)
    index_of[ops[i].op_id] = i;

  std::map<OpId, int> pos;
  for (int k = 0; k < static_cast<int>(s.order.size()); ++k) {
    OpId id = s.order[k];
    if (!index_of.count(id) || pos.count(id)) return false;
    pos[id] = k;
  }
  for (OpId id : s.subset_a)
    if (!index_of.count(id)) return false;

  const int n = static_cast<int>(ops.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (ops[i].process == ops[j].process &&
          pos[ops[i].op_id] > pos[ops[j].op_id])
        return false;

  for (int j = 0; j < n; ++j) {
    if (!s.subset_a.count(ops[j].op_id)) continue;
    for (int i = 0; i < n; ++i) {
      if (i == j || ops[i].object != ops[j].object) continue;
      if (ops[i].res_index && *ops[i].res_index < ops[j].inv_index &&
          pos[ops[i].op_id] > pos[ops[j].op_id])
        return false;
    }
  }

  return is_legal(materialize(ops, s.order));
}

}  // namespace coppar
