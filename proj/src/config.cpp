#include "netsysid/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace netsysid {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number '" + s + "' for " + key);
  }
}

long long parse_int(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer '" + s + "' for " + key);
  }
}

void apply_system_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto parts = split_ws(value);
  if (key == "d") {
    c.system.d = int(parse_int(value, key));
  } else if (key == "eigenvalues") {
    if (parts.empty()) throw ConfigError("config: eigenvalues needs values");
    c.system.eigenvalues.clear();
    for (const auto& p : parts) c.system.eigenvalues.push_back(parse_double(p, key));
  } else if (key == "sigma") {
    if (parts.empty()) throw ConfigError("config: sigma needs a value");
    if (parts[0] == "identity") {
      if (parts.size() != 1) throw ConfigError("config: sigma identity takes no arguments");
      c.system.sigma_diag.clear();
    } else if (parts[0] == "diag") {
      if (parts.size() < 2) throw ConfigError("config: sigma diag needs entries");
      c.system.sigma_diag.clear();
      for (size_t i = 1; i < parts.size(); ++i)
        c.system.sigma_diag.push_back(parse_double(parts[i], key));
    } else {
      throw ConfigError("config: unknown sigma form '" + parts[0] + "'");
    }
  } else if (key == "system_seed") {
    c.system.system_seed = std::uint64_t(parse_int(value, key));
  } else {
    throw ConfigError("config: unknown key '" + key + "' in [system]");
  }
}

void apply_run_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto parts = split_ws(value);
  if (key == "T") {
    c.horizon = parse_int(value, key);
  } else if (key == "u") {
    c.gap = value == "auto" ? -1 : parse_int(value, key);
  } else if (key == "B") {
    c.update_count = value == "auto" ? -1 : parse_int(value, key);
  } else if (key == "B_multiplier") {
    c.update_multiplier = parse_int(value, key);
  } else if (key == "m") {
    c.m = int(parse_int(value, key));
  } else if (key == "topology") {
    if (parts.empty()) throw ConfigError("config: topology needs a kind");
    c.topology_file.clear();
    if (parts[0] == "identity" && parts.size() == 1) {
      c.topology.kind = TopologySpec::Kind::identity;
    } else if (parts[0] == "complete" && parts.size() == 1) {
      c.topology.kind = TopologySpec::Kind::complete;
    } else if (parts[0] == "cyclic" && parts.size() == 3) {
      c.topology.kind = TopologySpec::Kind::cyclic;
      c.topology.degree = int(parse_int(parts[1], key));
      c.topology.self_weight = parse_double(parts[2], key);
    } else if (parts[0] == "custom" && parts.size() == 2) {
      c.topology.kind = TopologySpec::Kind::custom;
      c.topology_file = parts[1];
    } else {
      throw ConfigError("config: bad topology '" + value + "'");
    }
  } else if (key == "step_mode") {
    if (parts.size() == 1 && parts[0] == "per_agent") {
      c.step_mode = StepSizePolicy::Mode::per_agent;
    } else if (parts.size() == 2 && parts[0] == "global") {
      c.step_mode = StepSizePolicy::Mode::global;
      c.global_gamma = parse_double(parts[1], key);
    } else {
      throw ConfigError("config: bad step_mode '" + value + "'");
    }
  } else if (key == "noise") {
    if (value == "gaussian") c.noise = NoiseKind::gaussian;
    else if (value == "bounded") c.noise = NoiseKind::bounded;
    else throw ConfigError("config: bad noise kind '" + value + "'");
  } else if (key == "x0") {
    if (value == "zero") c.x0_mode = InitialStateMode::zero;
    else if (value == "stationary") c.x0_mode = InitialStateMode::stationary;
    else throw ConfigError("config: bad x0 mode '" + value + "'");
  } else if (key == "seeds") {
    if (parts.empty()) throw ConfigError("config: seeds list is empty");
    c.seeds.clear();
    for (const auto& p : parts) c.seeds.push_back(std::uint64_t(parse_int(p, key)));
  } else if (key == "record") {
    if (value == "per_buffer") c.record = RecordGranularity::per_buffer;
    else if (value == "final") c.record = RecordGranularity::final;
    else throw ConfigError("config: bad record granularity '" + value + "'");
  } else if (key == "burn_in") {
    c.burn_in = parse_int(value, key);
  } else if (key == "algos") {
    if (parts.empty()) throw ConfigError("config: algos list is empty");
    for (const auto& p : parts)
      if (p != "dsgd-rer" && p != "vanilla-dsgd" && p != "ols")
        throw ConfigError("config: unknown algorithm '" + p + "'");
    c.algos = parts;
  } else {
    throw ConfigError("config: unknown key '" + key + "' in [run]");
  }
}

void apply_output_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "dir") c.out_dir = value;
  else throw ConfigError("config: unknown key '" + key + "' in [output]");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: bad section at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      if (section != "system" && section != "run" && section != "output")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section == "system") apply_system_key(config, key, value);
    else if (section == "run") apply_run_key(config, key, value);
    else if (section == "output") apply_output_key(config, key, value);
    else throw ConfigError("config: key outside any section at line " + std::to_string(lineno));
  }
  if (config.system.d < 1) throw ConfigError("config: d must be positive");
  if (config.horizon < 2) throw ConfigError("config: T must be >= 2");
  if (config.m < 1) throw ConfigError("config: m must be >= 1");
  if (config.seeds.empty()) throw ConfigError("config: seeds list is empty");
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_config_text(const ExperimentConfig& c) {
  std::string out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out += "[system]\n";
  out += "d = " + std::to_string(c.system.d) + "\n";
  out += "eigenvalues =";
  for (double v : c.system.eigenvalues) out += " " + num(v);
  out += "\n";
  if (c.system.sigma_diag.empty()) {
    out += "sigma = identity\n";
  } else {
    out += "sigma = diag";
    for (double v : c.system.sigma_diag) out += " " + num(v);
    out += "\n";
  }
  out += "system_seed = " + std::to_string(c.system.system_seed) + "\n";
  out += "\n[run]\n";
  out += "T = " + std::to_string(c.horizon) + "\n";
  out += "u = " + (c.gap < 0 ? std::string("auto") : std::to_string(c.gap)) + "\n";
  out += "B = " + (c.update_count < 0 ? std::string("auto") : std::to_string(c.update_count)) + "\n";
  out += "B_multiplier = " + std::to_string(c.update_multiplier) + "\n";
  out += "m = " + std::to_string(c.m) + "\n";
  out += "topology = ";
  switch (c.topology.kind) {
    case TopologySpec::Kind::identity: out += "identity"; break;
    case TopologySpec::Kind::complete: out += "complete"; break;
    case TopologySpec::Kind::cyclic:
      out += "cyclic " + std::to_string(c.topology.degree) + " " + num(c.topology.self_weight);
      break;
    case TopologySpec::Kind::custom: out += "custom " + c.topology_file; break;
  }
  out += "\n";
  out += "step_mode = ";
  out += c.step_mode == StepSizePolicy::Mode::per_agent ? "per_agent"
                                                        : "global " + num(c.global_gamma);
  out += "\n";
  out += std::string("noise = ") + (c.noise == NoiseKind::gaussian ? "gaussian" : "bounded") + "\n";
  out += std::string("x0 = ") + (c.x0_mode == InitialStateMode::zero ? "zero" : "stationary") + "\n";
  out += "seeds =";
  for (std::uint64_t s : c.seeds) out += " " + std::to_string(s);
  out += "\n";
  out += std::string("record = ") +
         (c.record == RecordGranularity::per_buffer ? "per_buffer" : "final") + "\n";
  out += "burn_in = " + std::to_string(c.burn_in) + "\n";
  out += "algos =";
  for (const auto& a : c.algos) out += " " + a;
  out += "\n";
  out += "\n[output]\n";
  out += "dir = " + c.out_dir + "\n";
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::string text = canonical_config_text(config);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.topology.kind = TopologySpec::Kind::cyclic;
  c.topology.degree = 2;
  c.topology.self_weight = 0.3;
  if (name == "desk") {
    c.horizon = 200000;
    c.out_dir = "out/desk";
  } else if (name == "full") {
    c.horizon = 10000000;
    c.out_dir = "out/full";
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or full)");
  }
  return c;
}

BufferLayout layout_for(const ExperimentConfig& config) {
  long long gap = config.gap >= 0 ? config.gap : default_gap(config.horizon);
  long long update = config.update_count >= 0 ? config.update_count
                                              : config.update_multiplier * gap;
  return plan_buffers(config.horizon, update, gap);
}

LtiSystem system_for(const ExperimentConfig& config) {
  Matrix sigma;
  if (config.system.sigma_diag.empty()) {
    sigma = Matrix::identity(config.system.d);
  } else {
    if (int(config.system.sigma_diag.size()) != config.system.d)
      throw ConfigError("config: sigma diag size != d");
    sigma = Matrix::diagonal(config.system.sigma_diag);
  }
  return make_system(config.system.d, config.system.eigenvalues, sigma,
                     config.system.system_seed);
}

Topology topology_for(const ExperimentConfig& config) {
  if (config.topology.kind == TopologySpec::Kind::custom) {
    Topology t = load_topology_file(config.topology_file);
    if (t.m != config.m) throw ConfigError("config: custom topology size != m");
    return t;
  }
  return make_topology(config.topology, config.m);
}

StepSizePolicy policy_for(const ExperimentConfig& config) {
  if (config.step_mode == StepSizePolicy::Mode::global)
    return StepSizePolicy::global(config.global_gamma);
  return StepSizePolicy::per_agent();
}

}  // namespace netsysid
