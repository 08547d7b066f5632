#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "coppar/errors.hpp"
#include "coppar/register_spec.hpp"
#include "generators.hpp"

using namespace coppar;

namespace {

History seq(std::initializer_list<std::pair<Action, Value>> steps,
            const ObjectId& obj = "x") {
  std::vector<Event> events;
  OpId id = 1;
  for (auto [action, v] : steps) {
    if (action == Action::Write) {
      events.push_back(inv_write(id, 0, obj, v));
      events.push_back(res_write(id, 0, obj));
    } else {
      events.push_back(inv_read(id, 0, obj));
      events.push_back(res_read(id, 0, obj, v));
    }
    ++id;
  }
  return History(std::move(events));
}

// brute-force oracle: try every permutation, replay each one directly
std::set<std::vector<OpId>> all_legal_orders_oracle(std::vector<Operation> ops) {
  std::vector<OpId> ids;
  for (const Operation& op : ops) ids.push_back(op.op_id);
  std::sort(ids.begin(), ids.end());
  std::set<std::vector<OpId>> found;
  do {
    RegisterState reg;
    bool ok = true;
    for (OpId id : ids) {
      auto it = std::find_if(ops.begin(), ops.end(),
                             [&](const Operation& op) { return op.op_id == id; });
      if (it->is_write()) {
        reg.write(*it->written_value);
      } else if (reg.read() != *it->read_value) {
        ok = false;
        break;
      }
    }
    if (ok) found.insert(ids);
  } while (std::next_permutation(ids.begin(), ids.end()));
  return found;
}

}  // namespace

TEST_SUITE("register_spec") {

TEST_CASE("RegisterState starts at the initial value and tracks writes") {
  RegisterState reg;
  CHECK(reg.read() == kInitialValue);
  reg.write(7);
  CHECK(reg.read() == 7);
}

TEST_CASE("is_legal_object_history accepts reads of the last write") {
  CHECK(is_legal_object_history(seq({{Action::Write, 1}, {Action::Read, 1}})));
  CHECK(is_legal_object_history(seq({{Action::Read, 0}})));
  CHECK(is_legal_object_history(History()));
  CHECK_FALSE(is_legal_object_history(
      seq({{Action::Write, 1}, {Action::Write, 2}, {Action::Read, 1}})));
  CHECK_FALSE(is_legal_object_history(seq({{Action::Read, 5}})));
}

TEST_CASE("is_legal_object_history rejects unusable input") {
  History two_objects({inv_write(1, 0, "x", 1), res_write(1, 0, "x"),
                       inv_write(2, 0, "y", 1), res_write(2, 0, "y")});
  CHECK_THROWS_AS(is_legal_object_history(two_objects), PreconditionError);

  History concurrent({inv_write(1, 0, "x", 1), inv_read(2, 1, "x"),
                      res_write(1, 0, "x"), res_read(2, 1, "x", 1)});
  CHECK_THROWS_AS(is_legal_object_history(concurrent), PreconditionError);
}

TEST_CASE("is_legal checks each object independently") {
  History good({inv_write(1, 0, "x", 1), res_write(1, 0, "x"),
                inv_write(2, 0, "y", 2), res_write(2, 0, "y"),
                inv_read(3, 0, "x"), res_read(3, 0, "x", 1),
                inv_read(4, 0, "y"), res_read(4, 0, "y", 2)});
  CHECK(is_legal(good));
  CHECK(is_legal(History()));

  History cross({inv_write(1, 0, "x", 1), res_write(1, 0, "x"),
                 inv_read(2, 0, "y"), res_read(2, 0, "y", 1)});
  CHECK_FALSE(is_legal(cross));
}

TEST_CASE("materialize lays operations out in the requested order") {
  History h({inv_write(1, 0, "x", 1), inv_read(2, 1, "x"), res_write(1, 0, "x"),
             res_read(2, 1, "x", 0)});
  auto ops = h.operations();
  History s = materialize(ops, {2, 1});
  CHECK(s.is_sequential());
  CHECK(s == History({inv_read(2, 1, "x"), res_read(2, 1, "x", 0),
                      inv_write(1, 0, "x", 1), res_write(1, 0, "x")}));
  CHECK(is_legal(s));
  CHECK_FALSE(is_legal(materialize(ops, {1, 2})));

  CHECK_THROWS_AS(materialize(ops, {1}), PreconditionError);
  CHECK_THROWS_AS(materialize(ops, {1, 2, 2}), PreconditionError);
  CHECK_THROWS_AS(materialize(ops, {1, 7}), PreconditionError);

  History pend({inv_write(1, 0, "x", 1)});
  CHECK_THROWS_AS(materialize(pend.operations(), {1}), PreconditionError);
}

TEST_CASE("legal_serializations_of_object finds exactly the legal orders") {
  History wr({inv_write(1, 0, "x", 1), res_write(1, 0, "x"), inv_read(2, 1, "x"),
              res_read(2, 1, "x", 1)});
  auto orders = legal_serializations_of_object(wr.operations());
  REQUIRE(orders.size() == 1);
  CHECK(orders[0] == std::vector<OpId>{1, 2});

  History lone({inv_write(1, 0, "x", 1), res_write(1, 0, "x")});
  CHECK(legal_serializations_of_object(lone.operations()).size() == 1);

  History wwr({inv_write(1, 0, "x", 1), res_write(1, 0, "x"),
               inv_write(2, 0, "x", 2), res_write(2, 0, "x"), inv_read(3, 1, "x"),
               res_read(3, 1, "x", 2)});
  auto two = legal_serializations_of_object(wwr.operations());
  std::set<std::vector<OpId>> got(two.begin(), two.end());
  std::set<std::vector<OpId>> want{{1, 2, 3}, {2, 3, 1}};
  CHECK(got == want);
  CHECK(got == all_legal_orders_oracle(wwr.operations()));

  History impossible({inv_read(1, 0, "x"), res_read(1, 0, "x", 5)});
  CHECK(legal_serializations_of_object(impossible.operations()).empty());
}

TEST_CASE("serialization search agrees with brute force on random inputs") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 200; ++round) {
    int n = 1 + static_cast<int>(rng() % 5);
    std::vector<Event> events;
    for (OpId id = 1; id <= n; ++id) {
      ProcessId p = static_cast<ProcessId>(rng() % 2);
      if (rng() % 2 == 0) {
        Value v = static_cast<Value>(rng() % 3);
        events.push_back(inv_write(id, p, "x", v));
        events.push_back(res_write(id, p, "x"));
      } else {
        Value v = static_cast<Value>(rng() % 3);
        events.push_back(inv_read(id, p, "x"));
        events.push_back(res_read(id, p, "x", v));
      }
    }
    auto ops = History(std::move(events)).operations();
    // presentation order must not matter
    auto shuffled = ops;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto fast = legal_serializations_of_object(shuffled);
    std::set<std::vector<OpId>> got(fast.begin(), fast.end());
    CHECK(got.size() == fast.size());
    CHECK(got == all_legal_orders_oracle(ops));
  }
}

TEST_CASE("every prefix of a legal object history is legal") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 100; ++round) {
    int n = 1 + static_cast<int>(rng() % 6);
    std::vector<std::pair<Action, Value>> steps;
    RegisterState reg;
    for (int i = 0; i < n; ++i) {
      if (rng() % 2 == 0) {
        Value v = static_cast<Value>(rng() % 4);
        reg.write(v);
        steps.push_back({Action::Write, v});
      } else {
        steps.push_back({Action::Read, reg.read()});
      }
    }
    for (std::size_t len = 0; len <= steps.size(); ++len) {
      std::vector<Event> events;
      OpId id = 1;
      for (std::size_t i = 0; i < len; ++i) {
        auto [action, v] = steps[i];
        if (action == Action::Write) {
          events.push_back(inv_write(id, 0, "x", v));
          events.push_back(res_write(id, 0, "x"));
        } else {
          events.push_back(inv_read(id, 0, "x"));
          events.push_back(res_read(id, 0, "x", v));
        }
        ++id;
      }
      CHECK(is_legal_object_history(History(std::move(events))));
    }
  }
}

}  // TEST_SUITE
