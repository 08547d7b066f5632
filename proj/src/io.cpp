#include "coppar/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coppar/errors.hpp"

namespace coppar {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

json parse_json_line(const std::string& line, int line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON", line_no);
  if (!j.is_object()) throw ParseError("expected a JSON object", line_no);
  return j;
}

const json& field(const json& j, const char* name, int line_no) {
  auto it = j.find(name);
  if (it == j.end())
    throw ParseError(std::string("missing field \"") + name + "\"", line_no);
  return *it;
}

long long int_field(const json& j, const char* name, int line_no) {
  const json& f = field(j, name, line_no);
  if (!f.is_number_integer())
    throw ParseError(std::string("field \"") + name + "\" must be an integer",
                     line_no);
  return f.get<long long>();
}

std::string string_field(const json& j, const char* name, int line_no) {
  const json& f = field(j, name, line_no);
  if (!f.is_string())
    throw ParseError(std::string("field \"") + name + "\" must be a string",
                     line_no);
  return f.get<std::string>();
}

bool skippable(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

History parse_history_stream(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  int line_no = 0;
  long long prev_index = 0;
  bool have_prev = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    json j = parse_json_line(line, line_no);

    const long long index = int_field(j, "index", line_no);
    if (have_prev && index <= prev_index)
      throw ParseError("index " + std::to_string(index) +
                           " does not increase over " +
                           std::to_string(prev_index),
                       line_no);
    prev_index = index;
    have_prev = true;

    Event e;
    const std::string kind = string_field(j, "kind", line_no);
    if (kind == "inv")
      e.kind = EventKind::Invocation;
    else if (kind == "res")
      e.kind = EventKind::Response;
    else
      throw ParseError("kind must be \"inv\" or \"res\", got \"" + kind + "\"",
                       line_no);

    e.op_id = static_cast<OpId>(int_field(j, "op_id", line_no));
    e.process = static_cast<ProcessId>(int_field(j, "process", line_no));
    if (e.process < 0) throw ParseError("process must be non-negative", line_no);

    const std::string action = string_field(j, "action", line_no);
    if (action == "r")
      e.action = Action::Read;
    else if (action == "w")
      e.action = Action::Write;
    else
      throw ParseError("action must be \"r\" or \"w\", got \"" + action + "\"",
                       line_no);

    e.object = string_field(j, "object", line_no);
    if (e.object.empty()) throw ParseError("object must be non-empty", line_no);

    auto vit = j.find("value");
    const bool has_value = vit != j.end() && !vit->is_null();
    if (has_value && !vit->is_number_integer())
      throw ParseError("value must be an integer or null", line_no);
    const bool needs_value =
        (e.kind == EventKind::Invocation && e.action == Action::Write) ||
        (e.kind == EventKind::Response && e.action == Action::Read);
    if (needs_value && !has_value)
      throw ParseError(kind + " " + action + " event requires a value", line_no);
    if (!needs_value && has_value)
      throw ParseError(kind + " " + action + " event must not carry a value",
                       line_no);
    if (has_value) e.value = vit->get<long long>();

    events.push_back(std::move(e));
  }
  return History(std::move(events));
}

History parse_history_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open history file: " + path);
  return parse_history_stream(in);
}

std::string history_to_jsonl(const History& h) {
  std::ostringstream out;
  int index = 0;
  for (const Event& e : h.events()) {
    ordered j;
    j["index"] = index++;
    j["kind"] = e.kind == EventKind::Invocation ? "inv" : "res";
    j["op_id"] = e.op_id;
    j["process"] = e.process;
    j["action"] = e.action == Action::Read ? "r" : "w";
    j["object"] = e.object;
    if (e.value)
      j["value"] = *e.value;
    else
      j["value"] = nullptr;
    out << j.dump() << "\n";
  }
  return out.str();
}

void write_history_file(const std::string& path, const History& h) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << history_to_jsonl(h);
  if (!out) throw Error("failed writing history file: " + path);
}

BroadcastLog parse_broadcast_log_stream(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_meta = false;
  std::vector<Message> global;
  std::vector<std::vector<int>> delivered;
  long long expected_seq = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    json j = parse_json_line(line, line_no);
    const std::string type = string_field(j, "type", line_no);

    if (type == "meta") {
      if (have_meta) throw ParseError("duplicate meta record", line_no);
      const long long endpoints = int_field(j, "endpoints", line_no);
      if (endpoints < 1 || endpoints > 1'000'000)
        throw ParseError("endpoints out of range", line_no);
      delivered.assign(static_cast<std::size_t>(endpoints), {});
      have_meta = true;
    } else if (type == "bcast") {
      if (!have_meta) throw ParseError("bcast record before meta", line_no);
      const long long seq = int_field(j, "seq", line_no);
      if (seq != expected_seq)
        throw ParseError("bcast out of sequence: expected " +
                             std::to_string(expected_seq) + ", got " +
                             std::to_string(seq),
                         line_no);
      ++expected_seq;

      Message m;
      m.msg_id = static_cast<int>(int_field(j, "msg_id", line_no));
      m.sender = static_cast<ProcessId>(int_field(j, "sender", line_no));
      const json& pj = field(j, "payload", line_no);
      if (!pj.is_object())
        throw ParseError("payload must be an object", line_no);
      const std::string kind = string_field(pj, "kind", line_no);
      if (kind == "write") {
        m.payload.kind = Payload::Kind::Write;
        m.payload.object = string_field(pj, "object", line_no);
        m.payload.value = int_field(pj, "value", line_no);
        auto t = pj.find("transfer");
        if (t != pj.end() && !t->is_null()) {
          if (!t->is_boolean())
            throw ParseError("transfer must be a boolean", line_no);
          m.payload.transfer = t->get<bool>();
        }
      } else if (kind == "change_node") {
        m.payload.kind = Payload::Kind::ChangeNode;
        m.payload.object = string_field(pj, "object", line_no);
        m.payload.source = static_cast<NodeId>(int_field(pj, "source", line_no));
        m.payload.destination =
            static_cast<NodeId>(int_field(pj, "destination", line_no));
      } else {
        throw ParseError("unknown payload kind \"" + kind + "\"", line_no);
      }
      global.push_back(std::move(m));
    } else if (type == "deliver") {
      if (!have_meta) throw ParseError("deliver record before meta", line_no);
      const long long endpoint = int_field(j, "endpoint", line_no);
      if (endpoint < 0 || endpoint >= static_cast<long long>(delivered.size()))
        throw ParseError("endpoint " + std::to_string(endpoint) +
                             " out of range",
                         line_no);
      delivered[static_cast<std::size_t>(endpoint)].push_back(
          static_cast<int>(int_field(j, "msg_id", line_no)));
    } else {
      throw ParseError("unknown record type \"" + type + "\"", line_no);
    }
  }
  if (!have_meta)
    throw ParseError("missing meta record", line_no > 0 ? line_no : 1);
  return BroadcastLog::from_parts(std::move(global), std::move(delivered));
}

BroadcastLog parse_broadcast_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open broadcast log: " + path);
  return parse_broadcast_log_stream(in);
}

std::string broadcast_log_to_jsonl(const BroadcastLog& log) {
  std::ostringstream out;
  {
    ordered j;
    j["type"] = "meta";
    j["endpoints"] = log.endpoint_count();
    out << j.dump() << "\n";
  }
  int seq = 0;
  for (const Message& m : log.global_sequence()) {
    ordered j;
    j["type"] = "bcast";
    j["seq"] = seq++;
    j["msg_id"] = m.msg_id;
    j["sender"] = m.sender;
    ordered p;
    if (m.payload.kind == Payload::Kind::Write) {
      p["kind"] = "write";
      p["object"] = m.payload.object;
      p["value"] = m.payload.value;
      p["transfer"] = m.payload.transfer;
    } else {
      p["kind"] = "change_node";
      p["object"] = m.payload.object;
      p["source"] = m.payload.source;
      p["destination"] = m.payload.destination;
    }
    j["payload"] = p;
    out << j.dump() << "\n";
  }
  for (int e = 0; e < log.endpoint_count(); ++e) {
    for (int mid : log.delivered(e)) {
      ordered j;
      j["type"] = "deliver";
      j["endpoint"] = e;
      j["msg_id"] = mid;
      out << j.dump() << "\n";
    }
  }
  return out.str();
}

void write_broadcast_log_file(const std::string& path, const BroadcastLog& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << broadcast_log_to_jsonl(log);
  if (!out) throw Error("failed writing broadcast log: " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << "0x" << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

std::string manifest_json(const SimRun& run, const std::string& history_text,
                          const std::string& log_text) {
  ordered m;

  ordered cfg;
  cfg["process_count"] = run.config.process_count;
  cfg["object_count"] = run.config.object_count;
  cfg["op_count"] = run.config.op_count;
  cfg["seed"] = run.config.seed;
  cfg["read_probability"] = run.config.read_probability;
  cfg["change_node_rate"] = run.config.change_node_rate;
  cfg["max_staleness"] = run.config.max_staleness;
  m["config"] = cfg;

  ordered topo;
  topo["nodes"] = run.topology.node_count();
  topo["parent"] = run.topology.parent;
  topo["process_node"] = run.topology.process_node;
  m["topology"] = topo;

  ordered stats;
  stats["events"] = run.history.size();
  stats["operations"] = run.history.operations().size();
  stats["messages"] = run.log.global_sequence().size();
  stats["moves"] = run.transfer_remap_pairs.size();
  stats["mapping_version"] = run.mapping_trace.back().version;
  m["stats"] = stats;

  ordered artifacts;
  {
    ordered a;
    a["bytes"] = history_text.size();
    a["fnv1a64"] = hex64(fnv1a64(history_text));
    artifacts["history.jsonl"] = a;
  }
  {
    ordered a;
    a["bytes"] = log_text.size();
    a["fnv1a64"] = hex64(fnv1a64(log_text));
    artifacts["broadcast.log"] = a;
  }
  m["artifacts"] = artifacts;

  return m.dump(2) + "\n";
}

}  // namespace coppar
