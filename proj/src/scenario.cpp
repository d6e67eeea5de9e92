#include "varicon/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "varicon/admissibility.hpp"
#include "varicon/errors.hpp"
#include "varicon/fluid.hpp"
#include "varicon/paramvar.hpp"
#include "varicon/parser.hpp"
#include "varicon/quadrature.hpp"
#include "varicon/rng.hpp"
#include "varicon/section.hpp"

namespace varicon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 0x5eed;

// Any engine error raised while a configuration is being interpreted is a
// configuration problem, not a computation failure.
template <class F>
auto checked(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(e.what());
  }
}

// --- JSON field access -------------------------------------------------------

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw SchemaError(std::string("missing field \"") + key + '"');
  return j.at(key);
}

double need_num(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) throw SchemaError(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

double opt_num(const json& j, const char* key, double dflt) {
  if (!j.is_object() || !j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number()) throw SchemaError(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

int opt_int(const json& j, const char* key, int dflt) {
  if (!j.is_object() || !j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw SchemaError(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

std::string need_str(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_string()) throw SchemaError(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::uint64_t opt_seed(const json& j) {
  if (!j.is_object() || !j.contains("seed")) return kDefaultSeed;
  const json& v = j.at("seed");
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw SchemaError("field \"seed\" must be an integer");
  return v.get<std::uint64_t>();
}

std::vector<ExprPtr> parse_list(const json& arr, const Space& s, std::size_t n,
                                const char* what) {
  if (!arr.is_array() || arr.size() != n)
    throw SchemaError(std::string("field \"") + what + "\" must list " + std::to_string(n) +
                      " expression strings");
  std::vector<ExprPtr> out;
  out.reserve(n);
  for (const json& v : arr) {
    if (!v.is_string())
      throw SchemaError(std::string("field \"") + what + "\" must list expression strings");
    out.push_back(parse(v.get<std::string>(), s));
  }
  return out;
}

SpacePtr space_from(const json& j) {
  const json& bj = need(j, "base_dim");
  if (!bj.is_number_integer()) throw SchemaError("field \"base_dim\" must be an integer");
  const json& fj = need(j, "fields");
  if (!fj.is_array() || fj.empty()) throw SchemaError("field \"fields\" must list field names");
  std::vector<std::string> fields, params;
  for (const json& v : fj) {
    if (!v.is_string()) throw SchemaError("field \"fields\" must list field names");
    fields.push_back(v.get<std::string>());
  }
  if (j.contains("params")) {
    const json& pj = j.at("params");
    if (!pj.is_array()) throw SchemaError("field \"params\" must list parameter names");
    for (const json& v : pj) {
      if (!v.is_string()) throw SchemaError("field \"params\" must list parameter names");
      params.push_back(v.get<std::string>());
    }
  }
  return make_space(bj.get<int>(), std::move(fields), std::move(params));
}

std::vector<double> param_values_from(const json& j, const Space& s) {
  std::vector<double> vals;
  if (j.contains("param_values")) {
    const json& pj = j.at("param_values");
    if (!pj.is_array()) throw SchemaError("field \"param_values\" must be a number array");
    for (const json& v : pj) {
      if (!v.is_number()) throw SchemaError("field \"param_values\" must be a number array");
      vals.push_back(v.get<double>());
    }
  }
  if (static_cast<int>(vals.size()) != s.param_count())
    throw SchemaError("\"param_values\" must supply one value per space parameter");
  return vals;
}

// Base points, either explicit ("points": arrays of base_dim numbers, plain
// numbers allowed on one-dimensional bases) or sampled ("sample": {count,
// lo, hi} with the scenario seed).
std::vector<std::vector<double>> base_points_from(const json& j, int base_dim,
                                                  std::uint64_t seed) {
  std::vector<std::vector<double>> pts;
  if (j.contains("points")) {
    const json& pj = j.at("points");
    if (!pj.is_array()) throw SchemaError("field \"points\" must be an array");
    for (const json& v : pj) {
      if (v.is_number() && base_dim == 1) {
        pts.push_back({v.get<double>()});
        continue;
      }
      if (!v.is_array() || static_cast<int>(v.size()) != base_dim)
        throw SchemaError("each probe point must list " + std::to_string(base_dim) +
                          " coordinates");
      std::vector<double> x;
      for (const json& c : v) {
        if (!c.is_number()) throw SchemaError("probe point coordinates must be numbers");
        x.push_back(c.get<double>());
      }
      pts.push_back(std::move(x));
    }
  }
  if (j.contains("sample")) {
    const json& sj = j.at("sample");
    const int count = opt_int(sj, "count", 50);
    const double lo = opt_num(sj, "lo", -2.0), hi = opt_num(sj, "hi", 2.0);
    if (count < 1 || !(lo < hi)) throw SchemaError("\"sample\" needs count >= 1 and lo < hi");
    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
      std::vector<double> x(static_cast<std::size_t>(base_dim));
      for (double& c : x) c = rng.uniform(lo, hi);
      pts.push_back(std::move(x));
    }
  }
  if (pts.empty()) throw SchemaError("scenario needs probe points (\"points\" or \"sample\")");
  return pts;
}

// --- artifact output ---------------------------------------------------------

void write_text_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << body;
  if (!out) throw Error("cannot write " + p.string());
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Emitter {
  fs::path dir;
  std::vector<std::string> written;

  void text(const std::string& name, const std::string& body) {
    fs::create_directories(dir);
    const fs::path p = dir / name;
    write_text_file(p, body);
    written.push_back(p.string());
  }
  void csv(const std::string& name, const Trajectory& tr) {
    fs::create_directories(dir);
    const fs::path p = dir / name;
    write_trajectory_csv(p.string(), tr);
    written.push_back(p.string());
  }
};

// --- skate kinds -------------------------------------------------------------

struct SkateConfig {
  SkateParams params;
  MechState init;
  double dt = 0.0;
  double horizon = 0.0;
  int steps = 0;
};

SkateConfig skate_config_from(const json& j, bool with_multiplier) {
  SkateConfig c;
  const json empty = json::object();
  const json& pj = j.contains("params") ? j.at("params") : empty;
  if (!pj.is_object()) throw SchemaError("field \"params\" must be an object");
  c.params.mass = opt_num(pj, "m", 1.0);
  c.params.inertia = opt_num(pj, "I", 1.0);
  c.params.gravity = opt_num(pj, "geff", 9.81);
  const json& ij = need(j, "init");
  if (!ij.is_object()) throw SchemaError("field \"init\" must be an object");
  c.init.x = opt_num(ij, "x", 0.0);
  c.init.y = opt_num(ij, "y", 0.0);
  c.init.theta = opt_num(ij, "theta", 0.0);
  c.init.vx = opt_num(ij, "vx", 0.0);
  c.init.vy = opt_num(ij, "vy", 0.0);
  c.init.omega = opt_num(ij, "omega", 0.0);
  c.init.lambda = with_multiplier ? opt_num(ij, "lambda", 0.0) : 0.0;
  c.dt = need_num(j, "dt");
  c.horizon = need_num(j, "T");
  if (!(c.dt > 0.0) || !(c.horizon > 0.0)) throw SchemaError("\"dt\" and \"T\" must be positive");
  c.steps = static_cast<int>(std::llround(c.horizon / c.dt));
  if (c.steps < 1) c.steps = 1;
  return c;
}

json trajectory_summary(const char* kind, const SkateConfig& c, const Trajectory& tr) {
  double drift = 0.0, constraint = 0.0;
  const double e0 = tr.samples.front().energy;
  for (const auto& s : tr.samples) {
    drift = std::max(drift, std::abs(s.energy - e0));
    constraint = std::max(constraint, std::abs(s.phi_residual));
  }
  const auto& last = tr.samples.back();
  json out;
  out["kind"] = kind;
  out["dt"] = c.dt;
  out["T"] = c.horizon;
  out["steps"] = c.steps;
  out["samples"] = tr.samples.size();
  out["stop"] = tr.stop == StopReason::completed ? "completed" : "singular_speed";
  out["energy_drift"] = drift;
  out["max_constraint_drift"] = constraint;
  out["final"] = {{"t", last.t},         {"x", last.x},   {"y", last.y},
                  {"theta", last.theta}, {"vx", last.vx}, {"vy", last.vy},
                  {"omega", last.omega}, {"lambda", last.lambda}};
  return out;
}

ScenarioOutcome run_skate(const json& j, const std::string& name, const std::string& out_dir,
                          bool vak) {
  const SkateConfig c = checked([&] { return skate_config_from(j, vak); });

  const Trajectory tr = vak ? integrate_vak(c.params, c.init, c.dt, c.steps)
                            : integrate_nh(c.params, c.init, c.dt, c.steps);
  const json summary = trajectory_summary(vak ? "skate-vak" : "skate-nh", c, tr);

  Emitter em{out_dir, {}};
  em.csv("traj.csv", tr);
  em.text("summary.json", dump_report(summary));

  ScenarioOutcome out;
  out.name = name;
  out.artifacts = em.written;
  if (tr.stop == StopReason::singular_speed) {
    out.exit_code = kExitSingular;
    out.summary = "singular halt after " + std::to_string(tr.samples.size()) +
                  " samples at t = " + g17(tr.samples.back().t);
  } else {
    out.summary = "completed " + std::to_string(tr.samples.size()) +
                  " samples; energy drift " + g17(summary.at("energy_drift").get<double>()) +
                  "; constraint drift " +
                  g17(summary.at("max_constraint_drift").get<double>());
  }
  return out;
}

ScenarioOutcome run_skate_compare(const json& j, const std::string& name,
                                  const std::string& out_dir) {
  const SkateConfig c = checked([&] { return skate_config_from(j, true); });
  const double threshold = checked([&] { return opt_num(j, "threshold", 1e-3); });
  if (!(threshold > 0.0)) throw SchemaError("\"threshold\" must be positive");

  const Trajectory nh = integrate_nh(c.params, c.init, c.dt, c.steps);
  const Trajectory vak = integrate_vak(c.params, c.init, c.dt, c.steps);
  const TrajectoryComparison cmp = compare_trajectories(nh, vak, threshold);

  json rep;
  rep["kind"] = "skate-compare";
  rep["threshold"] = threshold;
  rep["common_samples"] = std::min(nh.samples.size(), vak.samples.size());
  rep["nh_stop"] = nh.stop == StopReason::completed ? "completed" : "singular_speed";
  rep["vak_stop"] = vak.stop == StopReason::completed ? "completed" : "singular_speed";
  rep["sup_x"] = cmp.sup_x;
  rep["sup_y"] = cmp.sup_y;
  rep["sup_theta"] = cmp.sup_theta;
  rep["sup_overall"] = cmp.sup_overall;
  rep["crossed"] = cmp.crossed;
  rep["first_crossing_time"] = cmp.first_crossing_time;  // null when not crossed

  Emitter em{out_dir, {}};
  em.csv("nh_traj.csv", nh);
  em.csv("vak_traj.csv", vak);
  em.text("compare.json", dump_report(rep));

  ScenarioOutcome out;
  out.name = name;
  out.artifacts = em.written;
  out.summary = cmp.crossed
                    ? "prescriptions diverged at t = " + g17(cmp.first_crossing_time) +
                          " (sup " + g17(cmp.sup_overall) + ")"
                    : "no per-coordinate divergence above " + g17(threshold);
  return out;
}

// --- fluid kind ----------------------------------------------------------------

struct FluidConfig {
  Metric metric;
  FluidField field;
  std::string check;
};

FluidConfig fluid_config_from(const json& j) {
  auto S = fluid_space();
  const json& mj = need(j, "metric");
  std::vector<ExprPtr> entries;
  if (mj.is_array() && mj.size() == 4 && mj.front().is_array()) {
    for (const json& row : mj) {
      if (!row.is_array() || row.size() != 4)
        throw SchemaError("field \"metric\" must be 4 rows of 4 expression strings");
      for (const json& v : row) {
        if (!v.is_string())
          throw SchemaError("field \"metric\" must carry expression strings");
        entries.push_back(parse(v.get<std::string>(), *S));
      }
    }
  } else {
    entries = parse_list(mj, *S, 16, "metric");
  }
  Metric g(S, std::move(entries));
  FluidField f(S, parse_list(need(j, "J"), *S, 4, "J"), parse(need_str(j, "eos"), *eos_space()));
  std::string check = need_str(j, "check");
  if (check != "continuity" && check != "euler" && check != "variation" && check != "chetaev")
    throw SchemaError("\"check\" must be continuity, euler, variation or chetaev");
  return FluidConfig{std::move(g), std::move(f), std::move(check)};
}

std::vector<std::array<double, 4>> fluid_points_from(const json& j, std::uint64_t seed) {
  std::vector<std::array<double, 4>> out;
  for (const auto& x : base_points_from(j, 4, seed))
    out.push_back({x[0], x[1], x[2], x[3]});
  return out;
}

ScenarioOutcome run_fluid(const json& j, const std::string& name, const std::string& out_dir) {
  const std::uint64_t seed = checked([&] { return opt_seed(j); });
  FluidConfig c = checked([&] { return fluid_config_from(j); });

  json rep;
  rep["kind"] = "fluid-check";
  rep["check"] = c.check;
  std::string line;

  if (c.check == "continuity" || c.check == "euler") {
    const auto pts = checked([&] { return fluid_points_from(j, seed); });
    const double tolerance = checked([&] { return opt_num(j, "tolerance", 0.0); });
    double worst = 0.0;
    json records = json::array();
    if (c.check == "continuity") {
      const auto res = continuity_residual(c.field, pts);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        records.push_back({{"x", pts[k]}, {"residual", res[k]}});
        worst = std::max(worst, std::abs(res[k]));
      }
    } else {
      const auto res = euler_residual(c.field, c.metric, pts);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto st = extract_state(c.field, c.metric, pts[k]);
        records.push_back({{"x", pts[k]},
                           {"residual", res[k]},
                           {"rho", st.rho},
                           {"pressure", st.pressure}});
        for (double r : res[k]) worst = std::max(worst, std::abs(r));
      }
    }
    rep["points"] = std::move(records);
    rep["max_abs_residual"] = worst;
    if (tolerance > 0.0) {
      rep["tolerance"] = tolerance;
      rep["pass"] = worst <= tolerance;
    }
    line = "max |residual| = " + g17(worst) + " at " + std::to_string(pts.size()) + " points";
  } else if (c.check == "chetaev") {
    const json empty = json::object();
    const json& sj = j.contains("sample") ? j.at("sample") : empty;
    const int count = checked([&] { return opt_int(sj, "count", 50); });
    const double lo = checked([&] { return opt_num(sj, "lo", -2.0); });
    const double hi = checked([&] { return opt_num(sj, "hi", 2.0); });
    if (count < 1 || !(lo < hi)) throw SchemaError("\"sample\" needs count >= 1 and lo < hi");
    auto S = fluid_space();
    Rng rng(seed);
    std::vector<JetPoint> pts;
    for (int k = 0; k < count; ++k) {
      JetPoint p(4, 4, 1);
      for (int mu = 0; mu < 4; ++mu) p.set_base(mu, rng.uniform(lo, hi));
      for (int i = 0; i < 4; ++i) {
        p.set_coord({i, {}}, rng.uniform(lo, hi));
        for (int mu = 0; mu < 4; ++mu) p.set_coord({i, {mu}}, rng.uniform(lo, hi));
      }
      pts.push_back(std::move(p));
    }
    ConstraintSet div_set(S, {jet(*S, "J0", {0}) + jet(*S, "J1", {1}) + jet(*S, "J2", {2}) +
                              jet(*S, "J3", {3})});
    const auto verdict = chetaev_triviality(div_set, pts);
    rep["points_probed"] = count;
    rep["kernel_dimension"] = verdict.kernel_dimension;
    rep["variations_trivial"] = verdict.variations_trivial;
    rep["verdict"] = verdict.verdict;
    line = "kernel dimension " + std::to_string(verdict.kernel_dimension) + " at " +
           std::to_string(count) + " probe points";
  } else {  // variation
    const auto X = checked([&] { return parse_list(need(j, "X"), *fluid_space(), 4, "X"); });
    const json& bj = checked([&]() -> const json& { return need(j, "box"); });
    auto bounds = [&](const char* key) {
      const json& v = need(bj, key);
      if (!v.is_array() || v.size() != 4)
        throw SchemaError("\"box\" bounds must list four numbers");
      std::vector<double> out;
      for (const json& c2 : v) {
        if (!c2.is_number()) throw SchemaError("\"box\" bounds must list four numbers");
        out.push_back(c2.get<double>());
      }
      return out;
    };
    const auto lo = checked([&] { return bounds("lo"); });
    const auto hi = checked([&] { return bounds("hi"); });
    const int cells = checked([&] { return opt_int(j, "quadrature", 6); });
    const bool consistency = checked([&] {
      if (!j.contains("consistency")) return false;
      if (!j.at("consistency").is_boolean())
        throw SchemaError("field \"consistency\" must be a boolean");
      return j.at("consistency").get<bool>();
    });

    const RefinedIntegral fv = fluid_first_variation(c.field, c.metric, X, lo, hi, cells);
    rep["quadrature"] = cells;
    rep["coarse"] = fv.coarse;
    rep["fine"] = fv.fine;
    rep["value"] = fv.value;
    line = "first variation = " + g17(fv.value);
    if (consistency) {
      // The pairing identity moves the drag derivatives onto the residual by
      // parts; it needs a divergence-free current, so the report carries a
      // probe of the continuity residual inside the box.
      std::vector<std::array<double, 4>> probes;
      for (int k = 0; k < 16; ++k) {
        std::array<double, 4> x;
        for (int mu = 0; mu < 4; ++mu) {
          const double frac = ((k >> mu) & 1) ? 2.0 / 3.0 : 1.0 / 3.0;
          x[static_cast<std::size_t>(mu)] = lo[static_cast<std::size_t>(mu)] +
                                            frac * (hi[static_cast<std::size_t>(mu)] -
                                                    lo[static_cast<std::size_t>(mu)]);
        }
        probes.push_back(x);
      }
      double div_max = 0.0;
      for (double r : continuity_residual(c.field, probes)) div_max = std::max(div_max, std::abs(r));
      rep["max_continuity_residual"] = div_max;
      const auto R = euler_residual_exprs(c.field, c.metric);
      ExprPtr paired = lit(0.0);
      for (int m = 0; m < 4; ++m)
        paired = add(std::move(paired), mul(R[static_cast<std::size_t>(m)],
                                            X[static_cast<std::size_t>(m)]));
      SectionExpr sigma(c.field.space, c.field.J);
      const RefinedIntegral direct = integrate_refined(paired, sigma, lo, hi, cells, {});
      const double gap = std::abs(fv.value + direct.value) /
                         std::max({1e-30, std::abs(fv.value), std::abs(direct.value)});
      rep["residual_pairing"] = -direct.value;
      rep["relative_gap"] = gap;
      line += "; residual pairing " + g17(-direct.value) + " (relative gap " + g17(gap) + ")";
    }
  }

  Emitter em{out_dir, {}};
  em.text("report.json", dump_report(rep));
  return {kExitOk, name, line, em.written};
}

// --- check kinds ---------------------------------------------------------------

ScenarioOutcome run_admissibility(const json& j, const std::string& name,
                                  const std::string& out_dir) {
  struct Cfg {
    SpacePtr space;
    ConstraintSet set;
    SectionExpr sigma;
    std::vector<double> params;
    std::vector<std::vector<double>> points;
  };
  const std::uint64_t seed = checked([&] { return opt_seed(j); });
  Cfg c = checked([&] {
    SpacePtr sp = space_from(need(j, "space"));
    const json& cj = need(j, "constraints");
    if (!cj.is_array() || cj.empty())
      throw SchemaError("field \"constraints\" must list expression strings");
    std::vector<ExprPtr> cons;
    for (const json& v : cj) {
      if (!v.is_string())
        throw SchemaError("field \"constraints\" must list expression strings");
      cons.push_back(parse(v.get<std::string>(), *sp));
    }
    ConstraintSet set(sp, std::move(cons));
    SectionExpr sigma(sp, parse_list(need(j, "section"), *sp,
                                     static_cast<std::size_t>(sp->field_count()), "section"));
    std::vector<double> params = param_values_from(j, *sp);
    auto points = base_points_from(j, sp->base_dim(), seed);
    return Cfg{std::move(sp), std::move(set), std::move(sigma), std::move(params),
               std::move(points)};
  });

  const AdmissibilityReport report =
      admissibility_residual(c.set, c.sigma, c.points, c.params);
  Prolongation j1(c.sigma, 1, c.params);
  std::vector<int> ranks, dims;
  for (const auto& pt : c.points) {
    const ChetaevKernel kern = chetaev_kernel(c.set, j1.at(pt), c.params);
    ranks.push_back(kern.rank);
    dims.push_back(static_cast<int>(kern.basis.cols()));
  }

  json rep;
  rep["kind"] = "admissibility";
  json records = json::array();
  const int r = c.set.count();
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& rec = report.records[i];
    const std::size_t pt_index = i / static_cast<std::size_t>(r);
    records.push_back({{"point", rec.point},
                       {"alpha", rec.alpha},
                       {"residual", rec.residual},
                       {"rank", ranks[pt_index]},
                       {"kernel_dim", dims[pt_index]}});
  }
  rep["records"] = std::move(records);
  rep["max_abs_residual"] = report.max_abs_residual;

  Emitter em{out_dir, {}};
  em.text("report.json", dump_report(rep));
  return {kExitOk, name,
          "max |constraint residual| = " + g17(report.max_abs_residual) + " at " +
              std::to_string(c.points.size()) + " points",
          em.written};
}

ScenarioOutcome run_paramcheck(const json& j, const std::string& name,
                               const std::string& out_dir) {
  struct Cfg {
    SpacePtr space;
    ExprPtr lagrangian;
    Parametrization family;
    SectionExpr sigma;
    std::vector<double> params;
    std::vector<std::vector<double>> points;
    bool emit = false;
  };
  const std::uint64_t seed = checked([&] { return opt_seed(j); });
  Cfg c = checked([&] {
    SpacePtr sp = space_from(need(j, "space"));
    ExprPtr L = parse(need_str(j, "lagrangian"), *sp);
    const json& fj = need(j, "family");
    const json& vj = need(fj, "value");
    const std::size_t n = static_cast<std::size_t>(sp->field_count());
    if (!vj.is_array() || vj.size() != n)
      throw SchemaError("\"family.value\" must have one row per field");
    const std::size_t slots = vj.front().is_array() ? vj.front().size() : 0;
    if (slots == 0) throw SchemaError("\"family.value\" rows must list slot expressions");
    std::vector<std::vector<ExprPtr>> value;
    for (const json& row : vj) value.push_back(parse_list(row, *sp, slots, "family.value"));
    const std::size_t m = static_cast<std::size_t>(sp->base_dim());
    std::vector<std::vector<std::vector<ExprPtr>>> deriv(
        n, std::vector<std::vector<ExprPtr>>(slots, std::vector<ExprPtr>(m, lit(0.0))));
    if (fj.contains("deriv")) {
      const json& dj = fj.at("deriv");
      if (!dj.is_array() || dj.size() != n)
        throw SchemaError("\"family.deriv\" must have one row per field");
      for (std::size_t a = 0; a < n; ++a) {
        const json& row = dj.at(a);
        if (!row.is_array() || row.size() != slots)
          throw SchemaError("\"family.deriv\" rows must match the slot count");
        for (std::size_t A = 0; A < slots; ++A)
          deriv[a][A] = parse_list(row.at(A), *sp, m, "family.deriv");
      }
    }
    Parametrization P(sp, std::move(value), std::move(deriv));
    SectionExpr sigma(sp, parse_list(need(j, "section"), *sp, n, "section"));
    std::vector<double> params = param_values_from(j, *sp);
    auto points = base_points_from(j, sp->base_dim(), seed);
    bool emit = j.contains("emit_equations") && j.at("emit_equations").is_boolean() &&
                j.at("emit_equations").get<bool>();
    return Cfg{std::move(sp), std::move(L),     std::move(P),     std::move(sigma),
               std::move(params), std::move(points), emit};
  });

  const ELForm form = assemble_el_form(c.lagrangian, c.family);
  Prolongation j3(c.sigma, 3, c.params);
  json records = json::array();
  double worst = 0.0;
  for (const auto& pt : c.points) {
    const JetPoint p = j3.at(pt);
    for (std::size_t A = 0; A < form.reduced.size(); ++A) {
      const double r = eval(form.reduced[A], p, c.params);
      records.push_back({{"point", pt}, {"slot", A}, {"residual", r}});
      worst = std::max(worst, std::abs(r));
    }
  }

  json rep;
  rep["kind"] = "paramcheck";
  rep["records"] = std::move(records);
  rep["max_abs_residual"] = worst;
  if (c.emit) {
    json eq;
    json reduced = json::array();
    for (const auto& e : form.reduced) reduced.push_back(to_string(e));
    json flux = json::array();
    for (const auto& row : form.flux) {
      json r2 = json::array();
      for (const auto& e : row) r2.push_back(to_string(e));
      flux.push_back(std::move(r2));
    }
    json flux2 = json::array();
    for (const auto& row : form.flux2) {
      json r2 = json::array();
      for (const auto& col : row) {
        json r3 = json::array();
        for (const auto& e : col) r3.push_back(to_string(e));
        r2.push_back(std::move(r3));
      }
      flux2.push_back(std::move(r2));
    }
    eq["reduced"] = std::move(reduced);
    eq["flux"] = std::move(flux);
    eq["flux2"] = std::move(flux2);
    rep["equations"] = std::move(eq);
  }

  Emitter em{out_dir, {}};
  em.text("report.json", dump_report(rep));
  std::string line = "max |reduced row| = " + g17(worst) + " at " +
                     std::to_string(c.points.size()) + " points";
  if (c.emit) line += "; equations emitted";
  return {kExitOk, name, line, em.written};
}

ScenarioOutcome run_equivalence(const json& j, const std::string& name,
                                const std::string& out_dir) {
  struct Cfg {
    SpacePtr space;
    ExprPtr f;
    SectionExpr sigma;
    std::vector<double> params;
    int trials = 0, grid_points = 0;
    double a = 0.0, b = 0.0;
    std::uint64_t seed = 0;
  };
  Cfg c = checked([&] {
    SpacePtr sp = space_from(need(j, "space"));
    if (sp->base_dim() != 1)
      throw SchemaError("equivalence checks run on a one-dimensional base");
    ExprPtr f = parse(need_str(j, "f"), *sp);
    SectionExpr sigma(sp, parse_list(need(j, "section"), *sp,
                                     static_cast<std::size_t>(sp->field_count()), "section"));
    std::vector<double> params = param_values_from(j, *sp);
    int trials = opt_int(j, "trials", 100);
    int grid = opt_int(j, "grid_points", 41);
    double a = 0.0, b = 1.0;
    if (j.contains("interval")) {
      const json& iv = j.at("interval");
      if (!iv.is_array() || iv.size() != 2 || !iv.at(0).is_number() || !iv.at(1).is_number())
        throw SchemaError("\"interval\" must list two numbers");
      a = iv.at(0).get<double>();
      b = iv.at(1).get<double>();
    }
    if (trials < 1 || grid < 3 || !(a < b))
      throw SchemaError("equivalence needs trials >= 1, grid_points >= 3 and a < b");
    return Cfg{std::move(sp), std::move(f), std::move(sigma), std::move(params),
               trials,        grid,         a,           b,
               opt_seed(j)};
  });

  const EquivalenceReport rep = linear_integrable_equivalence_check(
      c.f, c.sigma, c.trials, c.a, c.b, c.grid_points, c.params, c.seed);

  json out;
  out["kind"] = "equivalence";
  out["trials"] = c.trials;
  out["max_tangential_vak_residual"] = rep.max_tangential_vak_residual;
  out["max_boundary_chetaev_quantity"] = rep.max_boundary_chetaev_quantity;
  out["boundary_vanishing_count"] = rep.boundary_vanishing_count;

  Emitter em{out_dir, {}};
  em.text("report.json", dump_report(out));
  return {kExitOk, name,
          "tangential residual <= " + g17(rep.max_tangential_vak_residual) +
              "; boundary contraction <= " + g17(rep.max_boundary_chetaev_quantity) + " over " +
              std::to_string(c.trials) + " trials each way",
          em.written};
}

ScenarioOutcome dispatch(const json& j, const std::string& name, const std::string& out_dir) {
  const std::string kind = checked([&] { return need_str(j, "kind"); });
  if (kind == "skate-nh") return run_skate(j, name, out_dir, false);
  if (kind == "skate-vak") return run_skate(j, name, out_dir, true);
  if (kind == "skate-compare") return run_skate_compare(j, name, out_dir);
  if (kind == "fluid-check") return run_fluid(j, name, out_dir);
  if (kind == "admissibility") return run_admissibility(j, name, out_dir);
  if (kind == "paramcheck") return run_paramcheck(j, name, out_dir);
  if (kind == "equivalence") return run_equivalence(j, name, out_dir);
  throw SchemaError("unknown scenario kind \"" + kind + '"');
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  std::string body = "t,x,y,theta,vx,vy,omega,lambda,phi_residual,energy\n";
  char buf[400];
  for (const auto& s : tr.samples) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.x,
                  s.y, s.theta, s.vx, s.vy, s.omega, s.lambda, s.phi_residual, s.energy);
    body += buf;
  }
  write_text_file(path, body);
}

ScenarioOutcome run_scenario_text(const std::string& json_text, const std::string& name,
                                  const std::string& out_dir) {
  ScenarioOutcome out;
  out.name = name;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    out.exit_code = kExitSchema;
    out.summary = std::string("schema violation: ") + e.what();
    return out;
  }
  try {
    return dispatch(j, name, out_dir);
  } catch (const json::exception& e) {
    out.exit_code = kExitSchema;
    out.summary = std::string("schema violation: ") + e.what();
  } catch (const SchemaError& e) {
    out.exit_code = kExitSchema;
    out.summary = std::string("schema violation: ") + e.what();
  } catch (const Error& e) {
    out.exit_code = kExitComputation;
    out.summary = std::string("computation error: ") + e.what();
  } catch (const std::exception& e) {
    out.exit_code = kExitComputation;
    out.summary = std::string("computation error: ") + e.what();
  }
  return out;
}

ScenarioOutcome run_scenario_file(const std::string& path, const std::string& out_dir) {
  const std::string name = fs::path(path).stem().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ScenarioOutcome out;
    out.exit_code = kExitSchema;
    out.name = name;
    out.summary = "schema violation: cannot read " + path;
    return out;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_scenario_text(ss.str(), name, out_dir);
}

std::vector<CatalogEntry> list_scenarios(const std::vector<std::string>& dirs) {
  std::vector<CatalogEntry> out;
  std::set<std::string> seen;
  for (const auto& dir : dirs) {
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      const std::string name = p.stem().string();
      if (!seen.insert(name).second)
        throw SchemaError("duplicate scenario name \"" + name + '"');
      std::ifstream in(p, std::ios::binary);
      if (!in) throw SchemaError("cannot read scenario " + p.string());
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw SchemaError("scenario " + p.string() + " is not valid JSON: " + e.what());
      }
      CatalogEntry entry;
      entry.name = name;
      entry.path = p.string();
      if (j.is_object() && j.contains("kind") && j.at("kind").is_string())
        entry.kind = j.at("kind").get<std::string>();
      if (j.is_object() && j.contains("description") && j.at("description").is_string())
        entry.description = j.at("description").get<std::string>();
      out.push_back(std::move(entry));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CatalogEntry& a, const CatalogEntry& b) { return a.name < b.name; });
  return out;
}

}  // namespace varicon
