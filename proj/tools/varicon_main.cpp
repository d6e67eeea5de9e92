#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "varicon/errors.hpp"
#include "varicon/scenario.hpp"
#include "varicon/skate.hpp"

#ifndef VARICON_SCENARIO_DIR
#define VARICON_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int report_outcome(const varicon::ScenarioOutcome& out) {
  if (out.exit_code == varicon::kExitOk)
    std::printf("[ok] %s: %s\n", out.name.c_str(), out.summary.c_str());
  else
    std::fprintf(stderr, "[exit %d] %s: %s\n", out.exit_code, out.name.c_str(),
                 out.summary.c_str());
  for (const auto& a : out.artifacts) std::printf("  wrote %s\n", a.c_str());
  return out.exit_code;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw varicon::SchemaError(std::string(what) + ": \"" + s + "\" is not a number");
  return v;
}

varicon::SkateParams skate_params_from(const std::string& spec) {
  varicon::SkateParams p;
  if (spec.empty()) return p;
  for (const std::string& tok : split(spec, ',')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw varicon::SchemaError("--params entries look like m=1,I=1,geff=9.81");
    const std::string key = tok.substr(0, eq);
    const double v = parse_number(tok.substr(eq + 1), "--params");
    if (key == "m")
      p.mass = v;
    else if (key == "I")
      p.inertia = v;
    else if (key == "geff")
      p.gravity = v;
    else
      throw varicon::SchemaError("--params keys are m, I, geff (got \"" + key + "\")");
  }
  return p;
}

varicon::MechState skate_init_from(const std::string& spec) {
  const auto toks = split(spec, ',');
  if (toks.size() != 6 && toks.size() != 7)
    throw varicon::SchemaError("--init lists x,y,theta,vx,vy,omega and optionally lambda");
  std::vector<double> v;
  for (const auto& t : toks) v.push_back(parse_number(t, "--init"));
  varicon::MechState s;
  s.t = 0.0;
  s.x = v[0];
  s.y = v[1];
  s.theta = v[2];
  s.vx = v[3];
  s.vy = v[4];
  s.omega = v[5];
  s.lambda = toks.size() == 7 ? v[6] : 0.0;
  return s;
}

int run_skate_cli(const std::string& method, const std::string& params_spec,
                  const std::string& init_spec, double dt, double horizon,
                  const std::string& out_path) {
  varicon::SkateParams p;
  varicon::MechState s0;
  int steps = 0;
  try {
    p = skate_params_from(params_spec);
    s0 = skate_init_from(init_spec);
    if (!(dt > 0.0) || !(horizon > 0.0))
      throw varicon::SchemaError("--dt and --T must be positive");
    steps = static_cast<int>(std::max<long long>(1, std::llround(horizon / dt)));
  } catch (const varicon::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return varicon::kExitSchema;
  }
  try {
    const varicon::Trajectory tr = method == "vak" ? integrate_vak(p, s0, dt, steps)
                                                   : integrate_nh(p, s0, dt, steps);
    varicon::write_trajectory_csv(out_path, tr);
    const auto& last = tr.samples.back();
    if (tr.stop == varicon::StopReason::singular_speed) {
      std::fprintf(stderr, "[exit 2] singular halt after %zu samples at t = %.17g\n",
                   tr.samples.size(), last.t);
      std::printf("  wrote %s\n", out_path.c_str());
      return varicon::kExitSingular;
    }
    double drift = 0.0, constraint = 0.0;
    const double e0 = tr.samples.front().energy;
    for (const auto& s : tr.samples) {
      drift = std::max(drift, std::abs(s.energy - e0));
      constraint = std::max(constraint, std::abs(s.phi_residual));
    }
    std::printf("[ok] %s: %zu samples; energy drift %.3g; constraint drift %.3g\n",
                method.c_str(), tr.samples.size(), drift, constraint);
    std::printf("  wrote %s\n", out_path.c_str());
    return varicon::kExitOk;
  } catch (const varicon::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return varicon::kExitComputation;
  }
}

// Reads a config file and hands it to the scenario runner, optionally forcing
// the kind.  allowed lists acceptable kinds for the subcommand; empty means
// any.
int run_config_cli(const std::string& path, const std::string& out_dir,
                   const std::string& inject_kind, const std::vector<std::string>& allowed) {
  const std::string name = fs::path(path).stem().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
    return varicon::kExitSchema;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "[exit 3] %s: schema violation: %s\n", name.c_str(), e.what());
    return varicon::kExitSchema;
  }
  if (!inject_kind.empty() && (!j.is_object() || !j.contains("kind"))) {
    j["kind"] = inject_kind;
    text = j.dump();
  }
  if (!allowed.empty()) {
    const std::string kind =
        j.is_object() && j.contains("kind") && j.at("kind").is_string()
            ? j.at("kind").get<std::string>()
            : "";
    if (std::find(allowed.begin(), allowed.end(), kind) == allowed.end()) {
      std::fprintf(stderr, "[exit 3] %s: schema violation: this subcommand handles", name.c_str());
      for (const auto& k : allowed) std::fprintf(stderr, " %s", k.c_str());
      std::fprintf(stderr, " configurations\n");
      return varicon::kExitSchema;
    }
  }
  const std::string dir = out_dir.empty() ? "out/" + name : out_dir;
  return report_outcome(varicon::run_scenario_text(text, name, dir));
}

std::vector<std::string> catalog_dirs(const std::vector<std::string>& extra) {
  std::vector<std::string> dirs{VARICON_SCENARIO_DIR};
  dirs.insert(dirs.end(), extra.begin(), extra.end());
  return dirs;
}

int run_named_cli(const std::string& target, const std::string& out_dir,
                  const std::vector<std::string>& extra_dirs) {
  std::string path;
  if (fs::is_regular_file(target)) {
    path = target;
  } else {
    try {
      for (const auto& entry : varicon::list_scenarios(catalog_dirs(extra_dirs)))
        if (entry.name == target) path = entry.path;
    } catch (const varicon::Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return varicon::kExitSchema;
    }
    if (path.empty()) {
      std::fprintf(stderr, "error: no scenario file or catalog entry named \"%s\" (try `varicon list`)\n",
                   target.c_str());
      return varicon::kExitSchema;
    }
  }
  const std::string name = fs::path(path).stem().string();
  const std::string dir = out_dir.empty() ? "out/" + name : out_dir;
  return report_outcome(varicon::run_scenario_file(path, dir));
}

int list_cli(const std::vector<std::string>& extra_dirs) {
  std::vector<varicon::CatalogEntry> entries;
  try {
    entries = varicon::list_scenarios(catalog_dirs(extra_dirs));
  } catch (const varicon::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return varicon::kExitSchema;
  }
  std::size_t width = 4;
  for (const auto& e : entries) width = std::max(width, e.name.size());
  for (const auto& e : entries)
    std::printf("%-*s  %-13s  %s\n", static_cast<int>(width), e.name.c_str(), e.kind.c_str(),
                e.description.c_str());
  if (entries.empty()) std::printf("no scenarios found\n");
  return varicon::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varicon: constrained variational mechanics and field theory"};
  app.require_subcommand(1);

  auto* skate = app.add_subcommand("skate", "integrate the blade system directly");
  std::string method, params_spec, init_spec, skate_out = "traj.csv";
  double dt = 0.0, horizon = 0.0;
  skate->add_option("--method", method, "nh or vak")
      ->required()
      ->check(CLI::IsMember({"nh", "vak"}));
  skate->add_option("--params", params_spec, "comma list m=...,I=...,geff=...");
  skate->add_option("--init", init_spec, "x,y,theta,vx,vy,omega[,lambda]")->required();
  skate->add_option("--dt", dt, "time step")->required();
  skate->add_option("--T", horizon, "integration horizon")->required();
  skate->add_option("--out", skate_out, "trajectory csv path");

  auto* fluid = app.add_subcommand("fluid", "run a fluid check configuration");
  std::string fluid_config, fluid_out;
  fluid->add_option("--config", fluid_config, "fluid-check json file")->required();
  fluid->add_option("--out", fluid_out, "output directory (default out/<name>)");

  auto* check = app.add_subcommand("check", "run an admissibility, paramcheck or equivalence configuration");
  std::string check_config, check_out;
  check->add_option("--config", check_config, "configuration json file")->required();
  check->add_option("--out", check_out, "output directory (default out/<name>)");

  auto* run = app.add_subcommand("run", "run a scenario file or bundled scenario by name");
  std::string run_target, run_out;
  std::vector<std::string> run_dirs;
  run->add_option("scenario", run_target, "scenario json path or catalog name")->required();
  run->add_option("--out", run_out, "output directory (default out/<name>)");
  run->add_option("--dir", run_dirs, "extra scenario directories to search");

  auto* list = app.add_subcommand("list", "list the scenario catalog");
  std::vector<std::string> list_dirs;
  list->add_option("--dir", list_dirs, "extra scenario directories to include");

  CLI11_PARSE(app, argc, argv);

  if (skate->parsed()) return run_skate_cli(method, params_spec, init_spec, dt, horizon, skate_out);
  if (fluid->parsed()) return run_config_cli(fluid_config, fluid_out, "fluid-check", {"fluid-check"});
  if (check->parsed())
    return run_config_cli(check_config, check_out, "",
                          {"admissibility", "paramcheck", "equivalence"});
  if (run->parsed()) return run_named_cli(run_target, run_out, run_dirs);
  if (list->parsed()) return list_cli(list_dirs);
  return varicon::kExitOk;
}
