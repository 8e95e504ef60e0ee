#include "bbm/harness.hpp"

#include "bbm/random.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace bbm {

bool verdict(double extrapolated, double predicted, double tolerance) {
  return std::abs(extrapolated - predicted) <= tolerance * std::max(predicted, 1e-12);
}

Report run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Report rep;
  rep.fingerprint = fingerprint(cfg);
  rep.family = cfg.family;
  rep.model = cfg.model;
  rep.tolerance = cfg.tolerance;
  try {
    const Space space = make_space(cfg.space);
    MapSpec map = make_map(cfg.map, space.dim());
    if (cfg.map_scale != 1.0) map = MapSpec::scaled(map, cfg.map_scale);
    const TargetSpace target = make_target(cfg.target, map);
    const MollifierKind kind = parse_mollifier(cfg.family);
    const EnergyProblem pb{{kind, cfg.p, space}, map, target};

    const bool real_valued = target.kind == TargetKind::euclidean && target.dim == 1 && map.target_dim == 1;
    if (real_valued) {
      const double e = cheeger_energy_smooth(space, map, target, cfg.p);
      if (e > 0.0) rep.cheeger = e;
    }

    std::vector<ExtrapolationSample> samples;
    for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
      ReportRow row;
      row.delta = cfg.deltas[i];
      row.estimate = nonlocal_energy(pb, row.delta, cfg.quadrature, derive_seed(cfg.seed, i));
      if (rep.cheeger) row.cheeger_ratio = row.estimate.value / *rep.cheeger;
      samples.push_back({row.delta, row.estimate.value, row.estimate.std_error});
      rep.rows.push_back(row);
    }
    rep.extrapolation =
        extrapolate(samples, cfg.model == "free_gamma" ? ExtrapolationModel::free_gamma : ExtrapolationModel::linear);
    rep.predicted = predicted_limit(space, map, target, cfg.p, kind);
    rep.rel_dev = std::abs(rep.extrapolation.limit - rep.predicted) / std::max(rep.predicted, 1e-12);
    rep.pass = verdict(rep.extrapolation.limit, rep.predicted, cfg.tolerance);
  } catch (const std::exception& e) {
    rep.error = e.what();
    rep.pass = false;
  }
  return rep;
}

namespace {

/// Shortest representation that round-trips.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string energy_csv(const Report& report) {
  std::string out = "delta,value,stderr,n_samples\n";
  for (const auto& r : report.rows)
    out += num(r.delta) + "," + num(r.estimate.value) + "," + num(r.estimate.std_error) + "," +
           std::to_string(r.estimate.n_samples) + "\n";
  return out;
}

std::string report_jsonl(const Report& report) {
  std::string out;
  const bool rho0 = report.family == "rho0";
  for (const auto& r : report.rows) {
    nlohmann::json j;
    j["record"] = "row";
    j["delta"] = r.delta;
    if (rho0) j["s"] = 1.0 - r.delta;
    j["value"] = r.estimate.value;
    j["stderr"] = r.estimate.std_error;
    j["n_samples"] = r.estimate.n_samples;
    j["seed"] = r.estimate.seed;
    j["method"] = r.estimate.method;
    if (r.cheeger_ratio) j["cheeger_ratio"] = *r.cheeger_ratio;
    out += j.dump() + "\n";
  }
  nlohmann::json s;
  s["record"] = "summary";
  s["predicted"] = report.predicted;
  s["extrapolated"] = report.extrapolation.limit;
  s["uncertainty"] = report.extrapolation.uncertainty;
  s["smallest_delta_value"] = report.extrapolation.smallest_delta_value;
  s["model"] = report.model;
  s["gamma"] = report.extrapolation.gamma;
  s["rel_dev"] = report.rel_dev;
  s["tolerance"] = report.tolerance;
  s["verdict"] = report.pass ? "pass" : "fail";
  s["fingerprint"] = report.fingerprint;
  s["version"] = report.version;
  if (report.cheeger) s["cheeger"] = *report.cheeger;
  if (!report.error.empty()) s["error"] = report.error;
  out += s.dump() + "\n";
  return out;
}

void emit(const Report& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  auto write = [&](const std::string& name, const std::string& body) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << body;
    out.close();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  };
  write("energy.csv", energy_csv(report));
  write("report.jsonl", report_jsonl(report));
}

}  // namespace bbm
