// Acceptance gate: one line of verdict per criterion, exit 0 only if all
// hold. Run with the cli binary and the fixtures directory as arguments.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "coppar/coc_detector.hpp"
#include "coppar/errors.hpp"
#include "coppar/io.hpp"
#include "coppar/osc_checker.hpp"
#include "coppar/simulator.hpp"
#include "generators.hpp"

using namespace coppar;

namespace {

std::string g_cli;
std::string g_fixtures;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion
            << ": " << what << "\n";
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int run_cli(const std::string& args) {
  std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void shell(const char* cmd) {
  int rc = std::system(cmd);
  (void)rc;
}

// Every well-formed complete two-process history with the given operation
// split: P0 runs ops 1..a, P1 runs ops a+1..a+b, each op drawing action,
// object and value from two-element sets. visit receives each history once.
template <typename Fn>
void enumerate_histories(int a, int b, Fn&& visit) {
  const int n = a + b;
  const int total_events = 2 * n;
  std::vector<unsigned> merges;
  // bitmask over event positions: bit set = the position holds a P0 event
  for (unsigned mask = 0; mask < (1u << total_events); ++mask)
    if (__builtin_popcount(mask) == 2 * a) merges.push_back(mask);

  const long attr_total = 1L << (3 * n);  // action, object, value per op
  std::vector<Event> events;
  events.reserve(total_events);

  for (long attr = 0; attr < attr_total; ++attr) {
    struct OpShape {
      bool is_read;
      ObjectId object;
      Value value;
    };
    std::vector<OpShape> shape(n);
    for (int k = 0; k < n; ++k) {
      long bits = attr >> (3 * k);
      shape[k] = {(bits & 1) != 0, (bits & 2) ? "y" : "x",
                  (bits & 4) ? Value{1} : Value{0}};
    }

    auto stream_event = [&](int proc, int within) -> Event {
      const int local_op = within / 2;
      const int k = proc == 0 ? local_op : a + local_op;
      const OpId id = k + 1;
      const OpShape& s = shape[k];
      const bool is_inv = within % 2 == 0;
      if (s.is_read)
        return is_inv ? inv_read(id, proc, s.object)
                      : res_read(id, proc, s.object, s.value);
      return is_inv ? inv_write(id, proc, s.object, s.value)
                    : res_write(id, proc, s.object);
    };

    for (unsigned mask : merges) {
      events.clear();
      int p0_seen = 0, p1_seen = 0;
      for (int pos = 0; pos < total_events; ++pos) {
        if (mask & (1u << pos))
          events.push_back(stream_event(0, p0_seen++));
        else
          events.push_back(stream_event(1, p1_seen++));
      }
      visit(History(events));
    }
  }
}

void criterion_1_and_2() {
  auto t0 = std::chrono::steady_clock::now();
  const SubsetPolicy policies[] = {SubsetPolicy::all(), SubsetPolicy::writes_only(),
                                   SubsetPolicy::empty()};
  long histories = 0;
  long skipped_l4 = 0;
  long mismatches_1 = 0;
  long mismatches_2 = 0;
  std::string first_bad_1, first_bad_2;

  auto visit = [&](const History& h) {
    ++histories;
    bool sc_consistent = false;
    for (const SubsetPolicy& policy : policies) {
      Verdict truth = check_exhaustive(h, policy);
      Verdict fast = check_osc(h, policy);
      if (fast.inconclusive() || truth.consistent() != fast.consistent()) {
        ++mismatches_1;
        if (first_bad_1.empty())
          first_bad_1 = " e.g. policy " + policy.name() + " on:\n" +
                        history_to_jsonl(h);
      }
      if (policy.mode == SubsetPolicy::Mode::Empty)
        sc_consistent = truth.consistent();
    }
    CocReport coc = detect_coc(h);
    if (coc.outcome == CocReport::Outcome::L4Unsatisfiable) {
      ++skipped_l4;
      return;
    }
    if (coc.outcome == CocReport::Outcome::Inconclusive ||
        sc_consistent != coc.no_coc()) {
      ++mismatches_2;
      if (first_bad_2.empty()) first_bad_2 = " e.g.:\n" + history_to_jsonl(h);
    }
  };

  for (int n = 0; n <= 4; ++n)
    for (int a = 0; a <= n; ++a) enumerate_histories(a, n - a, visit);

  std::ostringstream what1;
  what1 << "search agrees with brute force on all " << histories
        << " enumerated histories, three policies each ("
        << static_cast<int>(seconds_since(t0)) << "s)";
  report(1, mismatches_1 == 0, what1.str() + first_bad_1);

  std::ostringstream what2;
  what2 << "sequential consistency coincides with cycle freedom on the same "
           "enumeration ("
        << histories - skipped_l4 << " satisfiable, " << skipped_l4
        << " skipped)";
  report(2, mismatches_2 == 0, what2.str() + first_bad_2);
}

void criterion_3() {
  std::mt19937_64 rng(301);
  histgen::Params params;
  params.max_ops = 8;
  params.max_value = 2;
  long certificates = 0;
  long bad = 0;
  for (int round = 0; round < 1000; ++round) {
    History h = histgen::random_history(rng, params);
    CocReport r = detect_coc(h);
    if (!r.no_coc()) continue;
    ++certificates;
    DependencyGraph g = build_union_graph(r.extension_used->complete(),
                                          r.object_orders);
    auto order = topological_extension(g);
    if (!order) {
      ++bad;
      continue;
    }
    // the linear extension must survive independent legality and process
    // order re-validation; the real-time clause is deliberately vacuous here
    if (!validate_witness(*r.extension_used, {*order, {}})) ++bad;
  }
  std::ostringstream what;
  what << certificates
       << " acyclic certificates all extend to serializations passing "
          "legality and process order re-validation";
  report(3, bad == 0 && certificates > 500, what.str());
}

void criterion_4() {
  long bad = 0;
  for (unsigned seed = 0; seed < 1000; ++seed) {
    SimConfig cfg;
    cfg.process_count = 2 + static_cast<int>(seed % 3);
    cfg.object_count = 1 + static_cast<int>(seed % 4);
    cfg.op_count = 4 + static_cast<int>(seed % 13);
    cfg.seed = seed;
    cfg.read_probability = 0.5;
    cfg.max_staleness = static_cast<int>(seed % 5);
    SimRun run = run_simulation(cfg);
    History done = run.history.complete();

    std::vector<std::pair<int, OpId>> writes;
    for (const Operation& op : done.operations())
      if (op.is_write()) writes.push_back({run.write_msg.at(op.op_id), op.op_id});
    std::sort(writes.begin(), writes.end());
    std::vector<OpId> order;
    for (const auto& [msg, id] : writes) order.push_back(id);

    try {
      if (!verify_lemma2_instance(done, order)) ++bad;
    } catch (const Error&) {
      ++bad;  // a blown search budget is a failure, not a pass
    }
  }
  report(4, bad == 0,
         "1000 runs: the broadcast order of writes always embeds in an "
         "acyclic composition");
}

void criterion_5() {
  std::mt19937_64 rng(501);
  long bad = 0;
  for (int round = 0; round < 10000; ++round) {
    int endpoints = 1 + static_cast<int>(rng() % 5);
    int messages = static_cast<int>(rng() % 14);
    BroadcastLog log(endpoints);
    int next_id = 0;
    int steps = messages + endpoints * 2 + static_cast<int>(rng() % 8);
    for (int s = 0; s < steps; ++s) {
      if (next_id < messages && rng() % 2 == 0) {
        log.broadcast(Message{next_id, static_cast<ProcessId>(rng() % endpoints),
                              Payload::write("x", static_cast<Value>(rng() % 4))});
        ++next_id;
      } else {
        log.deliver_step(static_cast<int>(rng() % endpoints),
                         static_cast<int>(rng() % 4));
      }
    }
    if (!check_integrity(log) || !check_total_order(log)) ++bad;
  }

  bool forged_rejected = true;
  for (const char* name : {"broadcast_swapped_pair.log",
                           "broadcast_missing_middle.log",
                           "broadcast_phantom_id.log"}) {
    BroadcastLog forged = parse_broadcast_log_file(g_fixtures + "/" + name);
    if (check_integrity(forged) && check_total_order(forged))
      forged_rejected = false;
    if (run_cli("verify-broadcast " + g_fixtures + "/" + name) != 1)
      forged_rejected = false;
  }
  bool honest_ok =
      run_cli("verify-broadcast " + g_fixtures + "/broadcast_ok.log") == 0;

  report(5, bad == 0 && forged_rejected && honest_ok,
         "10000 random schedules satisfy integrity and total order; all "
         "three forged logs are rejected");
}

void run_protocol_batch(int criterion, const std::vector<double>& rates,
                        const char* label) {
  auto t0 = std::chrono::steady_clock::now();
  long coc_bad = 0, osc_bad = 0, order_bad = 0, checked_osc = 0;
  for (unsigned i = 0; i < 1000; ++i) {
    SimConfig cfg;
    cfg.process_count = 2 + static_cast<int>(i % 3);
    cfg.object_count = 1 + static_cast<int>(i % 3);
    cfg.op_count = 1 + static_cast<int>(i % 40);
    cfg.seed = 40000u + criterion * 1000u + i;
    cfg.read_probability = 0.3 + 0.05 * static_cast<double>(i % 9);
    cfg.change_node_rate = rates[i % rates.size()];
    cfg.max_staleness = static_cast<int>(i % 6);
    SimRun run = run_simulation(cfg);

    auto orders = extract_object_orders(run);
    CocReport r = detect_coc_with_fixed_orders(run.history.complete(), orders);
    if (!r.no_coc()) ++coc_bad;

    if (cfg.op_count <= 10) {
      ++checked_osc;
      History done = run.history.complete();
      if (!check_osc(done, SubsetPolicy::writes_only()).consistent()) ++osc_bad;
      if (!check_osc(done, SubsetPolicy::empty()).consistent()) ++osc_bad;
    }

    // every state transfer must ride the cast strictly before its remap
    std::map<int, int> pos;
    for (int k = 0; k < static_cast<int>(run.cast_order.size()); ++k)
      pos[run.cast_order[k]] = k;
    for (const auto& [transfer_msg, move_msg] : run.transfer_remap_pairs)
      if (pos.at(transfer_msg) >= pos.at(move_msg)) ++order_bad;
  }
  std::ostringstream what;
  what << "1000 runs (" << label << "): every extracted composition is "
       << "acyclic";
  if (checked_osc > 0)
    what << "; " << checked_osc
         << " short runs consistent under the writes and none subsets";
  what << "; transfers precede their remaps ("
       << static_cast<int>(seconds_since(t0)) << "s)";
  report(criterion, coc_bad == 0 && osc_bad == 0 && order_bad == 0, what.str());
}

void criterion_8() {
  const std::string fixture = g_fixtures + "/store_buffer.jsonl";
  History h = parse_history_file(fixture);

  bool cli_sequential = run_cli("check " + fixture + " --mode sequential") == 1;

  CocReport r = detect_coc(h);
  bool coc_witness = r.contains_coc() && r.witness && r.witness->ops.size() == 4;
  bool cli_detect = run_cli("detect-coc " + fixture) == 1;

  bool projections_linearizable = true;
  std::string note;
  for (const ObjectId& x : h.objects()) {
    Verdict v = check_linearizable(h.project_object(x));
    if (!v.consistent()) {
      projections_linearizable = false;
      Verdict sc = check_sequentially_consistent(h.project_object(x));
      note += "  note: the projection onto " + x +
              " is sequentially consistent (" +
              (sc.consistent() ? "verified" : "unexpectedly not") +
              ") but not linearizable: its read completes strictly after "
              "the write yet returns the initial value\n";
    }
  }

  bool pass = cli_sequential && coc_witness && cli_detect &&
              projections_linearizable;
  report(8, pass,
         "store-buffer fixture: sequential check vetoes it, the detector "
         "finds a length-4 cycle, and each single-object projection is "
         "individually linearizable");
  if (!note.empty()) std::cout << note;
}

void criterion_9() {
  shell("rm -rf acc_sim_a acc_sim_b");
  const std::string args =
      " --seed 2026 --ops 30 --processes 3 --objects 3 --change-rate 0.1";
  bool ran = run_cli("simulate" + args + " --out acc_sim_a") == 0 &&
             run_cli("simulate" + args + " --out acc_sim_b") == 0;
  bool identical = ran;
  for (const char* name : {"history.jsonl", "broadcast.log", "manifest.json"}) {
    std::string a = slurp(std::string("acc_sim_a/") + name);
    std::string b = slurp(std::string("acc_sim_b/") + name);
    if (a.empty() || a != b) identical = false;
  }
  shell("rm -rf acc_sim_a acc_sim_b");
  report(9, identical,
         "two simulate invocations with one seed produce byte-identical "
         "artifacts");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: coppar_acceptance <cli-binary> <fixtures-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_fixtures = argv[2];

  criterion_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  run_protocol_batch(6, {0.0}, "fixed mapping");
  run_protocol_batch(7, {0.05, 0.2}, "object moves enabled");
  criterion_8();
  criterion_9();

  if (g_failures == 0) {
    std::cout << "all criteria hold\n";
    return 0;
  }
  std::cout << g_failures << " criterion(s) failed\n";
  return 1;
}
