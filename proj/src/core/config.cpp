#include "core/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qpmsa {

using nlohmann::json;

json RunConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["dim"] = dim;
  j["epsilon"] = epsilon;
  j["potential"] = potential;
  j["omega"] = omega;
  j["tau"] = tau;
  j["gamma"] = gamma;
  j["frequency_verify_radius"] = frequency_verify_radius;
  j["theta_star"] = theta_star;
  j["e_star"] = e_star;
  j["e_star_mode"] = e_star_mode;
  j["radius"] = radius;
  j["region_shape"] = region_shape;
  if (!explicit_sites.empty()) j["sites"] = explicit_sites;
  j["stages"] = stages;
  j["schedule"] = {{"l1", l1},
                   {"delta0", delta0},
                   {"delta_ratio", delta_ratio},
                   {"delta_floor", delta_floor},
                   {"length_cap", length_cap}};
  j["ids"] = {{"eta_min", ids_eta_min}, {"eta_max", ids_eta_max}, {"eta_count", ids_eta_count}};
  j["moments"] = {{"q", moment_q},
                  {"A", moment_a},
                  {"arith_radius", moment_arith_radius},
                  {"radius", moment_radius},
                  {"theta", moment_theta}};
  j["curve"] = {{"grid", curve_grid}};
  j["verify"] = {{"resolvent_triples", resolvent_triples},
                 {"derivative_blocks", derivative_blocks},
                 {"blockgeo_configs", blockgeo_configs},
                 {"counting_instances", counting_instances},
                 {"trial_instances", trial_instances}};
  j["out_dir"] = out_dir;
  j["seed"] = seed;
  j["threads"] = threads;
  return j;
}

namespace {
template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  read_if(j, "experiment", c.experiment);
  read_if(j, "dim", c.dim);
  read_if(j, "epsilon", c.epsilon);
  read_if(j, "potential", c.potential);
  read_if(j, "omega", c.omega);
  read_if(j, "tau", c.tau);
  read_if(j, "gamma", c.gamma);
  read_if(j, "frequency_verify_radius", c.frequency_verify_radius);
  read_if(j, "theta_star", c.theta_star);
  read_if(j, "e_star", c.e_star);
  read_if(j, "e_star_mode", c.e_star_mode);
  read_if(j, "radius", c.radius);
  read_if(j, "region_shape", c.region_shape);
  read_if(j, "sites", c.explicit_sites);
  read_if(j, "stages", c.stages);
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    read_if(s, "l1", c.l1);
    read_if(s, "delta0", c.delta0);
    read_if(s, "delta_ratio", c.delta_ratio);
    read_if(s, "delta_floor", c.delta_floor);
    read_if(s, "length_cap", c.length_cap);
  }
  if (j.contains("ids")) {
    const json& s = j.at("ids");
    read_if(s, "eta_min", c.ids_eta_min);
    read_if(s, "eta_max", c.ids_eta_max);
    read_if(s, "eta_count", c.ids_eta_count);
  }
  if (j.contains("moments")) {
    const json& s = j.at("moments");
    read_if(s, "q", c.moment_q);
    read_if(s, "A", c.moment_a);
    read_if(s, "arith_radius", c.moment_arith_radius);
    read_if(s, "radius", c.moment_radius);
    read_if(s, "theta", c.moment_theta);
  }
  if (j.contains("curve")) read_if(j.at("curve"), "grid", c.curve_grid);
  if (j.contains("verify")) {
    const json& s = j.at("verify");
    read_if(s, "resolvent_triples", c.resolvent_triples);
    read_if(s, "derivative_blocks", c.derivative_blocks);
    read_if(s, "blockgeo_configs", c.blockgeo_configs);
    read_if(s, "counting_instances", c.counting_instances);
    read_if(s, "trial_instances", c.trial_instances);
  }
  read_if(j, "out_dir", c.out_dir);
  read_if(j, "seed", c.seed);
  read_if(j, "threads", c.threads);
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
    return from_json(toml_subset_to_json(text));
  return from_json(json::parse(text));
}

void RunConfig::set_key(const std::string& key, const std::string& value) {
  json j = to_json();
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare string
  }
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    j[key] = parsed;
  } else {
    j[key.substr(0, dot)][key.substr(dot + 1)] = parsed;
  }
  *this = from_json(j);
}

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

json toml_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw std::runtime_error("toml: empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw std::runtime_error("toml: unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw std::runtime_error("toml: unterminated array");
    json arr = json::array();
    std::string body = v.substr(1, v.size() - 2);
    std::string item;
    std::stringstream ss(body);
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;
      arr.push_back(toml_value(item));
    }
    return arr;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  return json::parse(v);  // number
}
}  // namespace

json toml_subset_to_json(const std::string& text) {
  json out = json::object();
  json* section = &out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("toml: bad section at line " + std::to_string(lineno));
      out[trim(line.substr(1, line.size() - 2))] = json::object();
      section = &out[trim(line.substr(1, line.size() - 2))];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("toml: expected key = value at line " + std::to_string(lineno));
    (*section)[trim(line.substr(0, eq))] = toml_value(line.substr(eq + 1));
  }
  return out;
}

}  // namespace qpmsa
