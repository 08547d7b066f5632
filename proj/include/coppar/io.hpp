#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "coppar/broadcast.hpp"
#include "coppar/history.hpp"
#include "coppar/simulator.hpp"

namespace coppar {

/// History files are JSON lines, one event per line:
///   {"index":0,"kind":"inv","op_id":1,"process":0,"action":"w","object":"x","value":1}
/// kind is "inv" or "res", action is "r" or "w". value must be an integer on
/// write invocations and read responses and null (or absent) elsewhere.
/// Blank lines and lines starting with # are skipped. index must strictly
/// increase down the file. Parsing is purely syntactic; call is_well_formed
/// on the result to validate it semantically.
History parse_history_stream(std::istream& in);
History parse_history_file(const std::string& path);

std::string history_to_jsonl(const History& h);
void write_history_file(const std::string& path, const History& h);

/// Broadcast logs are JSON lines. The first record is
///   {"type":"meta","endpoints":N}
/// followed, in any interleaving, by
///   {"type":"bcast","seq":K,"msg_id":M,"sender":P,"payload":{...}}
///   {"type":"deliver","endpoint":E,"msg_id":M}
/// where seq must equal the number of earlier bcast records. A write payload
/// is {"kind":"write","object":"x","value":V,"transfer":B}; a move is
/// {"kind":"change_node","object":"x","source":S,"destination":D}.
/// The delivered lists are taken as-is so invariant checkers can be fed
/// arbitrary logs.
BroadcastLog parse_broadcast_log_stream(std::istream& in);
BroadcastLog parse_broadcast_log_file(const std::string& path);

std::string broadcast_log_to_jsonl(const BroadcastLog& log);
void write_broadcast_log_file(const std::string& path, const BroadcastLog& log);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

/// The manifest written next to a simulation's artifacts: the configuration
/// that produced them, where the run ended up, and a digest per file.
std::string manifest_json(const SimRun& run, const std::string& history_text,
                          const std::string& log_text);

}  // namespace coppar
