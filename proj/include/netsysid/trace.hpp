#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace netsysid {

/// One recorded error sample: the spectral error of agent `agent`'s
/// tail-averaged estimate after `samples` raw samples (buffer index
/// `buffer` for buffered algorithms, synthetic stride index otherwise).
struct TraceRow {
  long long buffer = 0;
  long long samples = 0;
  int agent = 0;
  double error = 0.0;
};

/// Error-vs-time record of one (algorithm, seed) run. `label` names the
/// sweep group the run belongs to (e.g. "m5" or "net-b") and doubles as
/// the CSV base name; `algo` is the algorithm tag stored per row.
struct ErrorTrace {
  std::string algo;
  std::string label;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<TraceRow> rows;
};

/// CSV schema: header `algo,seed,buffer,samples,agent,error`, error at 17
/// significant digits so values round-trip exactly.
std::string trace_to_csv(const ErrorTrace& trace);

/// Parses one trace back from CSV text. The label is not stored in the
/// CSV; callers pass it (normally recovered from the file name).
ErrorTrace trace_from_csv(const std::string& csv, const std::string& label);

/// File names encode the group: `<label>__seed<seed>.csv`.
std::string trace_file_name(const ErrorTrace& trace);
std::string label_from_file_name(const std::string& path);

void save_trace(const ErrorTrace& trace, const std::string& dir);
ErrorTrace load_trace(const std::string& path);

/// Writes content to `path` atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace netsysid
