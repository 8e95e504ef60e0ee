#include "bbm/harness.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace bbm {

Space make_space(const std::string& name) {
  if (name == "interval") return Space::interval(0.0, 1.0);
  if (name == "square") return Space::unit_cube(2);
  if (name == "weighted")
    return Space::weighted_interval({0.1, 0.9}, [](double t) { return 1.0 / t; }, "1/x");
  if (name == "circle") return Space::circle(1.0);
  if (name == "product")
    return Space::product({0.0, 1.0}, [](double t) { return 1.0 + t; }, {0.0, 1.0}, {}, "(1+x1)");
  throw InputError("unknown space '" + name + "'");
}

MapSpec make_map(const std::string& name, int dim) {
  if (name == "identity") return MapSpec::identity(dim);
  if (name == "square") return MapSpec::power(2.0, dim, 0);
  if (name == "angle") return MapSpec::angle_wrap(1.0, dim);
  if (name == "constant") return MapSpec::constant(1.0, dim, 1);
  if (name == "x1") return MapSpec::coordinate(0, dim);
  if (name == "x2") return MapSpec::coordinate(1, dim);
  throw InputError("unknown map '" + name + "'");
}

TargetSpace make_target(const std::string& name, const MapSpec& map) {
  if (name == "auto") {
    if (map.codomain == TargetKind::circle) return TargetSpace::circle();
    return TargetSpace::euclidean(map.target_dim);
  }
  if (name == "euclidean") return TargetSpace::euclidean(map.target_dim);
  if (name == "circle") return TargetSpace::circle();
  if (name == "discrete") return TargetSpace::discrete(map.target_dim);
  if (name.rfind("snowflake:", 0) == 0) {
    double alpha = 0.0;
    try {
      alpha = std::stod(name.substr(10));
    } catch (const std::exception&) {
      throw InputError("bad snowflake exponent in '" + name + "'");
    }
    return TargetSpace::snowflake(alpha, map.target_dim);
  }
  throw InputError("unknown target '" + name + "'");
}

void ScenarioConfig::validate() const {
  if (deltas.empty()) throw InputError("config: empty delta grid");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] < 1.0)) throw InputError("config: deltas must lie in (0, 1)");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw InputError("config: deltas must be strictly decreasing");
  }
  if (!(tolerance > 0.0)) throw InputError("config: tolerance must be positive");
  if (!(p >= 1.0)) throw InputError("config: p must be at least 1");
  if (model != "linear" && model != "free_gamma") throw InputError("config: model must be linear or free_gamma");
  if (quadrature.outer_samples < 2 || quadrature.inner_samples < 1 || quadrature.shells < 1)
    throw InputError("config: sample counts must be positive");
  parse_mollifier(family);
  const Space s = make_space(space);
  make_target(target, make_map(map, s.dim()));
}

namespace {

const std::set<std::string> kTopKeys{"space", "map",   "map_scale", "target", "p",         "family",
                                     "deltas", "model", "seed",      "tolerance", "output_dir", "quadrature"};
const std::set<std::string> kQuadKeys{"method",     "outer_samples",   "inner_samples", "shells",
                                      "outer_order", "outer_max_panel", "radial_order",  "workers"};

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError("config: bad value for '" + key + "'");
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  ScenarioConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  if (!root.IsMap()) throw InputError("config: top level must be a mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (!kTopKeys.count(key)) throw InputError("config: unknown key '" + key + "'");
    if (key == "space") cfg.space = scalar<std::string>(v, key);
    else if (key == "map") cfg.map = scalar<std::string>(v, key);
    else if (key == "map_scale") cfg.map_scale = scalar<double>(v, key);
    else if (key == "target") cfg.target = scalar<std::string>(v, key);
    else if (key == "p") cfg.p = scalar<double>(v, key);
    else if (key == "family") cfg.family = scalar<std::string>(v, key);
    else if (key == "model") cfg.model = scalar<std::string>(v, key);
    else if (key == "seed") cfg.seed = scalar<std::uint64_t>(v, key);
    else if (key == "tolerance") cfg.tolerance = scalar<double>(v, key);
    else if (key == "output_dir") cfg.output_dir = scalar<std::string>(v, key);
    else if (key == "deltas") {
      if (!v.IsSequence()) throw InputError("config: deltas must be a list");
      cfg.deltas.clear();
      for (const auto& d : v) cfg.deltas.push_back(scalar<double>(d, key));
    } else if (key == "quadrature") {
      if (!v.IsMap()) throw InputError("config: quadrature must be a mapping");
      for (const auto& q : v) {
        const std::string k = q.first.as<std::string>();
        if (!kQuadKeys.count(k)) throw InputError("config: unknown quadrature key '" + k + "'");
        auto& qc = cfg.quadrature;
        if (k == "method") {
          const auto m = scalar<std::string>(q.second, k);
          if (m == "quadrature") qc.method = EnergyMethod::quadrature;
          else if (m == "monte_carlo") qc.method = EnergyMethod::monte_carlo;
          else throw InputError("config: method must be quadrature or monte_carlo");
        } else if (k == "outer_samples") qc.outer_samples = scalar<int>(q.second, k);
        else if (k == "inner_samples") qc.inner_samples = scalar<int>(q.second, k);
        else if (k == "shells") qc.shells = scalar<int>(q.second, k);
        else if (k == "outer_order") qc.outer_order = scalar<int>(q.second, k);
        else if (k == "outer_max_panel") qc.outer_max_panel = scalar<double>(q.second, k);
        else if (k == "radial_order") qc.radial_order = scalar<int>(q.second, k);
        else if (k == "workers") qc.workers = scalar<unsigned>(q.second, k);
      }
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["space"] = cfg.space;
  j["map"] = cfg.map;
  j["map_scale"] = cfg.map_scale;
  j["target"] = cfg.target;
  j["p"] = cfg.p;
  j["family"] = cfg.family;
  j["deltas"] = cfg.deltas;
  j["model"] = cfg.model;
  j["seed"] = cfg.seed;
  j["tolerance"] = cfg.tolerance;
  const auto& q = cfg.quadrature;
  nlohmann::json jq;
  jq["method"] = to_string(q.method);
  if (q.method == EnergyMethod::monte_carlo) {
    jq["outer_samples"] = q.outer_samples;
    jq["inner_samples"] = q.inner_samples;
    jq["shells"] = q.shells;
  } else {
    jq["outer_order"] = q.outer_order;
    jq["outer_max_panel"] = q.outer_max_panel;
    jq["radial_order"] = q.radial_order;
  }
  j["quadrature"] = jq;
  return j.dump();
}

std::string fingerprint(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace bbm
