// Command-line front end: scenario runs, admissibility checks and the
// individual evaluators.

#include "bbm/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw bbm::InputError("not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw bbm::InputError("empty list");
  return out;
}

bbm::Point parse_point(const std::string& text, int dim) {
  const auto v = parse_list(text);
  if (static_cast<int>(v.size()) != dim)
    throw bbm::InputError("expected " + std::to_string(dim) + " coordinates, got '" + text + "'");
  return dim == 1 ? bbm::make_point(v[0]) : bbm::make_point(v[0], v[1]);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Common {
  std::string space = "interval";
  std::string map = "identity";
  std::string target = "auto";
  std::string family = "rho1";
  double p = 2.0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bbm: nonlocal energies, mollifier checks and limit scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a scenario file and write energy.csv and report.jsonl");
  run->add_option("--config", config_path, "Scenario file (YAML)")->required();
  run->add_option("--out-dir", out_dir, "Output directory (overrides the file)");
  auto* seed_opt = run->add_option("--seed", seed, "Seed (overrides the file)");

  Common c;
  auto* check = app.add_subcommand("check", "Certify a mollifier family");
  check->add_option("--family", c.family)->required();
  check->add_option("--space", c.space);
  check->add_option("--p", c.p);

  std::string x_text;
  std::string radii_text = "0.1,0.05,0.025";
  auto* ks_cmd = app.add_subcommand("ks", "Korevaar-Schoen densities and the fitted energy density");
  ks_cmd->add_option("--space", c.space);
  ks_cmd->add_option("--map", c.map);
  ks_cmd->add_option("--target", c.target);
  ks_cmd->add_option("--p", c.p);
  ks_cmd->add_option("--x", x_text)->required();
  ks_cmd->add_option("--radii", radii_text);

  double delta = 0.05;
  auto* inner = app.add_subcommand("inner", "Inner integral at one point");
  inner->add_option("--space", c.space);
  inner->add_option("--map", c.map);
  inner->add_option("--target", c.target);
  inner->add_option("--family", c.family);
  inner->add_option("--p", c.p);
  inner->add_option("--delta", delta);
  inner->add_option("--x", x_text)->required();

  std::string method = "quadrature";
  int outer = 100000;
  std::uint64_t energy_seed = 1;
  auto* energy = app.add_subcommand("energy", "Double integral at one delta");
  energy->add_option("--space", c.space);
  energy->add_option("--map", c.map);
  energy->add_option("--target", c.target);
  energy->add_option("--family", c.family);
  energy->add_option("--p", c.p);
  energy->add_option("--delta", delta);
  energy->add_option("--method", method)->check(CLI::IsMember({"quadrature", "monte_carlo"}));
  energy->add_option("--outer-samples", outer);
  energy->add_option("--seed", energy_seed);

  double r = 0.05;
  std::string fn = "identity";
  int points = 21;
  auto* smooth = app.add_subcommand("smooth", "Partition-of-unity smoothing of a sample function");
  smooth->add_option("--space", c.space);
  smooth->add_option("--function", fn)->check(CLI::IsMember({"identity", "step", "constant"}));
  smooth->add_option("--r", r);
  smooth->add_option("--points", points);

  std::string doubling_radii = "0.2,0.1,0.05,0.025";
  auto* doubling = app.add_subcommand("doubling", "Doubling constant over a radius grid");
  doubling->add_option("--space", c.space)->required();
  doubling->add_option("--radii", doubling_radii);

  double h = 2.0;
  std::string dim_radii = "0.1,0.05,0.025,0.0125";
  auto* dimension = app.add_subcommand("dimension", "Local dimension estimate");
  dimension->add_option("--space", c.space)->required();
  dimension->add_option("--x", x_text)->required();
  dimension->add_option("--radii", dim_radii);
  dimension->add_option("--ratio", h, "Radius ratio h > 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      bbm::ScenarioConfig cfg = bbm::load_config(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (*seed_opt) cfg.seed = seed;
      const bbm::Report rep = bbm::run_scenario(cfg);
      bbm::emit(rep, cfg.output_dir);
      const std::string lines = bbm::report_jsonl(rep);
      std::cout << lines.substr(lines.rfind('{'));
      if (!rep.error.empty()) std::cerr << "error: " << rep.error << "\n";
      return rep.pass ? 0 : 1;
    }
    const bbm::Space space = bbm::make_space(c.space);
    const int dim = space.dim();
    if (*check) {
      const bbm::MollifierFamily fam{bbm::parse_mollifier(c.family), c.p, space};
      const bbm::AdmissibilityReport rep = bbm::check_admissibility(fam);
      std::cout << "condition,pass,margin,detail\n";
      for (const auto& v : rep.conditions)
        std::cout << v.name << "," << (v.pass ? "pass" : "fail") << "," << num(v.margin) << ",\"" << v.detail
                  << "\"\n";
      std::cout << "# theta " << num(rep.theta) << " limit_lower " << num(rep.theta_limit_lower) << " limit_upper "
                << num(rep.theta_limit_upper) << " c_m " << num(rep.c_m_upper) << "\n";
      std::cout << "# admissible " << (rep.admissible() ? "yes" : "no") << " strongly "
                << (rep.strongly_admissible() ? "yes" : "no") << "\n";
      return rep.admissible() ? 0 : 1;
    }
    if (*doubling) {
      const auto rep = bbm::estimate_doubling(space, space.domain(), parse_list(doubling_radii));
      std::cout << "c_d,worst_radius\n" << num(rep.c_d) << "," << num(rep.worst_radius) << "\n";
      return 0;
    }
    if (*dimension) {
      const auto est = bbm::dimension_at(space, parse_point(x_text, dim), parse_list(dim_radii), h);
      std::cout << "radius,dimension\n";
      for (std::size_t i = 0; i < est.radii.size(); ++i)
        std::cout << num(est.radii[i]) << "," << num(est.per_radius[i]) << "\n";
      std::cout << "# estimate " << num(est.value) << (est.converged ? "" : " (not converged)") << "\n";
      return 0;
    }
    if (*smooth) {
      std::function<double(const bbm::Point&)> u;
      std::vector<double> jumps;
      const double mid = 0.5 * (space.domain().axis[0].lo + space.domain().axis[0].hi);
      if (fn == "identity") u = [](const bbm::Point& x) { return x[0]; };
      if (fn == "constant") u = [](const bbm::Point&) { return 1.0; };
      if (fn == "step") {
        u = [mid](const bbm::Point& x) { return x[0] < mid ? 0.0 : 1.0; };
        jumps.push_back(mid);
      }
      const auto ur = bbm::pou_smooth(space, u, r, jumps);
      std::cout << "x,u,smoothed\n";
      const auto& iv = space.domain().axis[0];
      for (int i = 0; i < points; ++i) {
        const double t = iv.lo + iv.length() * i / std::max(1, points - 1);
        const bbm::Point x = dim == 1 ? bbm::make_point(t) : bbm::make_point(t, mid);
        std::cout << num(t) << "," << num(u(x)) << "," << num(ur(x)) << "\n";
      }
      return 0;
    }
    const bbm::MapSpec map = bbm::make_map(c.map, dim);
    const bbm::TargetSpace target = bbm::make_target(c.target, map);
    if (*ks_cmd) {
      const auto prof = bbm::density_estimate(space, map, target, c.p, parse_point(x_text, dim), parse_list(radii_text));
      std::cout << "radius,ks\n";
      for (std::size_t i = 0; i < prof.radii.size(); ++i)
        std::cout << num(prof.radii[i]) << "," << num(prof.values[i]) << "\n";
      std::cout << "# density " << num(prof.density) << " residual " << num(prof.residual) << "\n";
      if (!prof.warning.empty()) std::cerr << "warning: " << prof.warning << "\n";
      return 0;
    }
    const bbm::EnergyProblem pb{{bbm::parse_mollifier(c.family), c.p, space}, map, target};
    if (*inner) {
      std::cout << num(bbm::inner_integral(pb, delta, parse_point(x_text, dim))) << "\n";
      return 0;
    }
    if (*energy) {
      bbm::QuadratureConfig qc;
      qc.method = method == "quadrature" ? bbm::EnergyMethod::quadrature : bbm::EnergyMethod::monte_carlo;
      qc.outer_samples = outer;
      const auto est = bbm::nonlocal_energy(pb, delta, qc, energy_seed);
      std::cout << "delta,value,stderr,n_samples\n"
                << num(delta) << "," << num(est.value) << "," << num(est.std_error) << "," << est.n_samples << "\n";
      return 0;
    }
  } catch (const bbm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const bbm::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
