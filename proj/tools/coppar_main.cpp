#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coppar/coc_detector.hpp"
#include "coppar/errors.hpp"
#include "coppar/io.hpp"
#include "coppar/order_engine.hpp"
#include "coppar/osc_checker.hpp"
#include "coppar/simulator.hpp"

namespace {

using namespace coppar;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;
constexpr int kInconclusive = 3;

int worse(int a, int b) {
  auto rank = [](int c) {
    switch (c) {
      case kUsage: return 3;
      case kInconclusive: return 2;
      case kViolation: return 1;
      default: return 0;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

std::set<OpId> read_subset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open subset file: " + path);
  std::set<OpId> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    long long v = 0;
    while (tokens >> v) ids.insert(static_cast<OpId>(v));
    if (tokens.fail() && !tokens.eof())
      throw Error("subset file has a non-integer token: " + path);
  }
  return ids;
}

struct CheckOptions {
  std::string mode = "osc";
  std::string subset = "all";
  std::set<OpId> explicit_ids;
  bool use_explicit = false;
  std::uint64_t budget = kDefaultBudget;
};

SubsetPolicy to_policy(const CheckOptions& opt) {
  if (opt.mode == "linearizable") return SubsetPolicy::all();
  if (opt.mode == "sequential") return SubsetPolicy::empty();
  if (opt.use_explicit) return SubsetPolicy::explicit_set(opt.explicit_ids);
  if (opt.subset == "writes") return SubsetPolicy::writes_only();
  if (opt.subset == "none") return SubsetPolicy::empty();
  return SubsetPolicy::all();
}

std::pair<int, std::string> check_one(const std::string& path,
                                      const CheckOptions& opt) {
  std::ostringstream out;
  try {
    History h = parse_history_file(path);
    if (!h.is_well_formed()) {
      out << path << ": history is not well formed\n";
      return {kUsage, out.str()};
    }
    Verdict v = check_osc(h, to_policy(opt), opt.budget);
    const char* label = v.consistent()     ? "consistent"
                        : v.violation()    ? "violation"
                                           : "inconclusive";
    out << path << ": " << label << " (mode " << opt.mode << ", states "
        << v.states_explored << ")\n";
    if (v.witness && v.extension_used) {
      std::map<OpId, Operation> table;
      for (const Operation& op : v.extension_used->complete().operations())
        table.emplace(op.op_id, op);
      out << "  witness:";
      for (OpId id : v.witness->order) out << " " << describe(table.at(id));
      out << "\n";
    } else {
      out << "  " << v.reason << "\n";
    }
    int code = v.consistent() ? kOk : v.violation() ? kViolation : kInconclusive;
    return {code, out.str()};
  } catch (const ParseError& e) {
    out << path << ": parse error at line " << e.line() << ": " << e.what()
        << "\n";
    return {kUsage, out.str()};
  } catch (const std::exception& e) {
    out << path << ": error: " << e.what() << "\n";
    return {kUsage, out.str()};
  }
}

int run_check(const std::vector<std::string>& paths, const CheckOptions& opt,
              int jobs) {
  std::vector<std::pair<int, std::string>> results(paths.size());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(paths.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < paths.size(); ++i)
      results[i] = check_one(paths[i], opt);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < paths.size();)
          results[i] = check_one(paths[i], opt);
      });
    }
    for (std::thread& w : workers) w.join();
  }
  int code = kOk;
  for (const auto& [file_code, text] : results) {
    std::cout << text;
    code = worse(code, file_code);
  }
  return code;
}

int run_detect(const std::string& path, std::uint64_t budget,
               const std::string& dump_path) {
  try {
    History h = parse_history_file(path);
    if (!h.is_well_formed()) {
      std::cerr << path << ": history is not well formed\n";
      return kUsage;
    }
    CocReport r = detect_coc(h, budget);

    int code = kOk;
    switch (r.outcome) {
      case CocReport::Outcome::ContainsCoc: {
        std::cout << path << ": contains a composition order cycle ("
                  << r.assignments_examined << " assignments examined)\n";
        if (r.witness && r.extension_used) {
          std::vector<Operation> table = r.extension_used->complete().operations();
          std::cout << r.witness->describe(table);
        }
        code = kViolation;
        break;
      }
      case CocReport::Outcome::NoCoc:
        std::cout << path << ": no composition order cycle; " << r.note << "\n";
        code = kOk;
        break;
      case CocReport::Outcome::L4Unsatisfiable:
        std::cout << path << ": no legal per-object serialization exists (object "
                  << r.unsatisfiable_object << ")\n";
        code = kViolation;
        break;
      case CocReport::Outcome::Inconclusive:
        std::cout << path << ": inconclusive; " << r.note << "\n";
        code = kInconclusive;
        break;
    }

    if (!dump_path.empty() && r.extension_used && !r.object_orders.empty()) {
      History c = r.extension_used->complete();
      DependencyGraph g = build_union_graph(c, r.object_orders);
      std::vector<Operation> table = c.operations();
      std::ofstream out(dump_path);
      if (!out) throw Error("cannot open file for writing: " + dump_path);
      out << to_dot(g, &table);
    }
    return code;
  } catch (const ParseError& e) {
    std::cerr << path << ": parse error at line " << e.line() << ": " << e.what()
              << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return kUsage;
  }
}

int run_verify_broadcast(const std::string& path) {
  try {
    BroadcastLog log = parse_broadcast_log_file(path);
    const bool integrity = check_integrity(log);
    const bool total = check_total_order(log);
    std::cout << path << ": integrity " << (integrity ? "ok" : "VIOLATED")
              << ", total order " << (total ? "ok" : "VIOLATED") << "\n";
    return integrity && total ? kOk : kViolation;
  } catch (const ParseError& e) {
    std::cerr << path << ": parse error at line " << e.line() << ": " << e.what()
              << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return kUsage;
  }
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error("config file must hold a JSON object: " + path);
  SimConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "process_count")
      cfg.process_count = val.get<int>();
    else if (key == "object_count")
      cfg.object_count = val.get<int>();
    else if (key == "op_count")
      cfg.op_count = val.get<int>();
    else if (key == "seed")
      cfg.seed = val.get<std::uint64_t>();
    else if (key == "read_probability")
      cfg.read_probability = val.get<double>();
    else if (key == "change_node_rate")
      cfg.change_node_rate = val.get<double>();
    else if (key == "max_staleness")
      cfg.max_staleness = val.get<int>();
    else
      throw Error("unknown config key: " + key);
  }
  return cfg;
}

int run_simulate(const SimConfig& cfg, const std::string& out_dir,
                 bool self_check) {
  try {
    SimRun run = run_simulation(cfg);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string history_text = history_to_jsonl(run.history);
    const std::string log_text = broadcast_log_to_jsonl(run.log);

    auto write_file = [](const fs::path& p, const std::string& text) {
      std::ofstream out(p);
      if (!out) throw Error("cannot open file for writing: " + p.string());
      out << text;
      if (!out) throw Error("failed writing " + p.string());
    };
    const fs::path dir(out_dir);
    write_file(dir / "history.jsonl", history_text);
    write_file(dir / "broadcast.log", log_text);
    write_file(dir / "manifest.json", manifest_json(run, history_text, log_text));

    std::cout << "wrote " << (dir / "history.jsonl").string() << " ("
              << run.history.size() << " events), "
              << (dir / "broadcast.log").string() << " ("
              << run.log.global_sequence().size() << " messages), "
              << (dir / "manifest.json").string() << "\n";

    if (self_check) {
      auto orders = extract_object_orders(run);
      CocReport r = detect_coc_with_fixed_orders(run.history, orders);
      if (!r.no_coc() || !check_integrity(run.log) ||
          !check_total_order(run.log)) {
        std::cout << "self-check FAILED: " << r.note << "\n";
        return kViolation;
      }
      std::cout << "self-check ok: run orders compose acyclically\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"register history consistency checking and replicated-register simulation"};
  app.require_subcommand(1);

  // check
  auto* check_cmd = app.add_subcommand(
      "check", "Check history files for consistency");
  std::vector<std::string> check_paths;
  CheckOptions check_opt;
  std::string subset_file;
  int jobs = 1;
  check_cmd->add_option("paths", check_paths, "History files (JSON lines)")
      ->required()
      ->expected(-1);
  check_cmd
      ->add_option("--mode", check_opt.mode,
                   "Consistency model: linearizable, sequential, or osc")
      ->check(CLI::IsMember({"linearizable", "sequential", "osc"}))
      ->capture_default_str();
  check_cmd
      ->add_option("--subset", check_opt.subset,
                   "Real-time subset for osc mode: all, writes, none, or file")
      ->check(CLI::IsMember({"all", "writes", "none", "file"}))
      ->capture_default_str();
  check_cmd->add_option("--subset-file", subset_file,
                        "Op-id list used when --subset file");
  check_cmd->add_option("--budget", check_opt.budget, "Search state budget")
      ->capture_default_str();
  check_cmd->add_option("--jobs", jobs, "Worker threads across input files")
      ->capture_default_str();

  // detect-coc
  auto* detect_cmd = app.add_subcommand(
      "detect-coc", "Detect composition order cycles in a history file");
  std::string detect_path;
  std::uint64_t detect_budget = kDefaultBudget;
  std::string dump_path;
  detect_cmd->add_option("path", detect_path, "History file (JSON lines)")
      ->required();
  detect_cmd->add_option("--budget", detect_budget, "Assignment budget")
      ->capture_default_str();
  detect_cmd->add_option("--dump-graph", dump_path,
                         "Write the decisive dependency graph as DOT");

  // simulate
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Run the replicated-register protocol simulator");
  std::string config_path;
  std::string out_dir = "sim-out";
  bool self_check = false;
  SimConfig cfg;
  sim_cmd->add_option("--config", config_path, "JSON config file");
  sim_cmd->add_option("--processes", cfg.process_count, "Client process count")
      ->capture_default_str();
  sim_cmd->add_option("--objects", cfg.object_count, "Register count")
      ->capture_default_str();
  sim_cmd->add_option("--ops", cfg.op_count, "Client operations to issue")
      ->capture_default_str();
  sim_cmd->add_option("--seed", cfg.seed, "Scheduler seed")
      ->capture_default_str();
  sim_cmd->add_option("--read-prob", cfg.read_probability,
                      "Probability an operation is a read")
      ->capture_default_str();
  sim_cmd->add_option("--change-rate", cfg.change_node_rate,
                      "Rate of object moves between nodes")
      ->capture_default_str();
  sim_cmd->add_option("--max-staleness", cfg.max_staleness,
                      "Messages a reading node may lag the broadcast tail")
      ->capture_default_str();
  sim_cmd->add_option("--out", out_dir, "Output directory")
      ->capture_default_str();
  sim_cmd->add_flag("--self-check", self_check,
                    "Validate the run's per-object orders before exiting");

  // verify-broadcast
  auto* verify_cmd = app.add_subcommand(
      "verify-broadcast", "Check a broadcast log dump for integrity and total order");
  std::string verify_path;
  verify_cmd->add_option("path", verify_path, "Broadcast log dump")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (app.got_subcommand(check_cmd)) {
    const bool subset_given = check_cmd->count("--subset") > 0;
    const bool file_given = check_cmd->count("--subset-file") > 0;
    if (subset_given && check_opt.mode != "osc") {
      std::cerr << "error: --subset only applies to --mode osc\n";
      return kUsage;
    }
    if (check_opt.subset == "file" && !file_given) {
      std::cerr << "error: --subset file requires --subset-file\n";
      return kUsage;
    }
    if (file_given && check_opt.subset != "file") {
      std::cerr << "error: --subset-file requires --subset file\n";
      return kUsage;
    }
    if (check_opt.subset == "file") {
      try {
        check_opt.explicit_ids = read_subset_file(subset_file);
        check_opt.use_explicit = true;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
      }
    }
    return run_check(check_paths, check_opt, jobs);
  }
  if (app.got_subcommand(detect_cmd))
    return run_detect(detect_path, detect_budget, dump_path);
  if (app.got_subcommand(sim_cmd)) {
    SimConfig effective = cfg;
    if (sim_cmd->count("--config") > 0) {
      try {
        effective = load_config_file(config_path);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
      }
      if (sim_cmd->count("--processes")) effective.process_count = cfg.process_count;
      if (sim_cmd->count("--objects")) effective.object_count = cfg.object_count;
      if (sim_cmd->count("--ops")) effective.op_count = cfg.op_count;
      if (sim_cmd->count("--seed")) effective.seed = cfg.seed;
      if (sim_cmd->count("--read-prob"))
        effective.read_probability = cfg.read_probability;
      if (sim_cmd->count("--change-rate"))
        effective.change_node_rate = cfg.change_node_rate;
      if (sim_cmd->count("--max-staleness"))
        effective.max_staleness = cfg.max_staleness;
    }
    return run_simulate(effective, out_dir, self_check);
  }
  if (app.got_subcommand(verify_cmd)) return run_verify_broadcast(verify_path);

  std::cerr << "error: no subcommand\n";
  return kUsage;
}
