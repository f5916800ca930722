#include "netsysid/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace netsysid {

std::string trace_to_csv(const ErrorTrace& trace) {
  std::string out = "algo,seed,buffer,samples,agent,error\n";
  char line[256];
  for (const TraceRow& r : trace.rows) {
    std::snprintf(line, sizeof(line), "%s,%" PRIu64 ",%lld,%lld,%d,%.17g\n",
                  trace.algo.c_str(), trace.seed, r.buffer, r.samples, r.agent, r.error);
    out += line;
  }
  return out;
}

ErrorTrace trace_from_csv(const std::string& csv, const std::string& label) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "algo,seed,buffer,samples,agent,error")
    throw std::runtime_error("trace csv: missing or unexpected header");
  ErrorTrace trace;
  trace.label = label;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    std::string algo = field;
    TraceRow r;
    std::uint64_t seed = 0;
    auto next_field = [&](const char* what) {
      if (!std::getline(row, field, ',')) throw std::runtime_error(std::string("trace csv: missing ") + what);
      return field;
    };
    seed = std::stoull(next_field("seed"));
    r.buffer = std::stoll(next_field("buffer"));
    r.samples = std::stoll(next_field("samples"));
    r.agent = std::stoi(next_field("agent"));
    r.error = std::stod(next_field("error"));
    if (first) {
      trace.algo = algo;
      trace.seed = seed;
      first = false;
    } else if (algo != trace.algo || seed != trace.seed) {
      throw std::runtime_error("trace csv: mixed algo/seed rows in one file");
    }
    trace.rows.push_back(r);
  }
  return trace;
}

std::string trace_file_name(const ErrorTrace& trace) {
  return trace.label + "__seed" + std::to_string(trace.seed) + ".csv";
}

std::string label_from_file_name(const std::string& path) {
  std::string stem = std::filesystem::path(path).stem().string();
  auto pos = stem.rfind("__seed");
  if (pos == std::string::npos) return stem;
  return stem.substr(0, pos);
}

void save_trace(const ErrorTrace& trace, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic((std::filesystem::path(dir) / trace_file_name(trace)).string(),
                    trace_to_csv(trace));
}

ErrorTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trace csv: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return trace_from_csv(buf.str(), label_from_file_name(path));
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace netsysid
