#include "pinchlab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pinchlab/curvature.hpp"
#include "pinchlab/geodesics.hpp"
#include "pinchlab/profile_json.hpp"
#include "pinchlab/variation.hpp"
#include "pinchlab/verify.hpp"

namespace pinchlab {

namespace {

struct RunConfig {
  std::string model = "family";
  std::string from;
  int n = 3;
  std::optional<double> eps;
  double delta = 0.02;
  std::string scale = "ricci";
  int grid = kDefaultGrid;
  std::string out;
  std::string dir;
  std::string format;
  std::vector<double> deltas;
  std::optional<double> length;
  std::optional<double> loop_length;
  double r0 = 0.0;
  double alpha = 0.0;
  double upper = 1.0;
};

class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FieldMode parse_mode(const std::string& s) {
  if (s == "ricci") return FieldMode::Ricci;
  if (s == "sec") return FieldMode::Sec;
  throw InvalidInput("--scale must be ricci or sec");
}

ModelParams model_params(const RunConfig& cfg) {
  ModelParams p;
  p.n = cfg.n;
  p.eps = cfg.eps.value_or(1.0);
  p.delta = cfg.delta;
  p.scale = parse_mode(cfg.scale);
  return p;
}

ManifoldWithDensity load_model(const RunConfig& cfg) {
  if (!cfg.from.empty()) {
    std::ifstream in(cfg.from);
    if (!in) throw InvalidInput("cannot read model file " + cfg.from);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::exception& e) {
      throw InvalidInput("model file " + cfg.from + " is not valid JSON: " + e.what());
    }
    return manifold_from_json(doc);
  }
  if (cfg.model == "family" && !cfg.eps) throw InvalidInput("--eps is required for the family");
  return build_model(parse_model_kind(cfg.model), model_params(cfg));
}

Json params_json(const RunConfig& cfg, const ManifoldWithDensity& m) {
  Json p = {{"model", cfg.from.empty() ? cfg.model : "file:" + cfg.from},
            {"n", m.n()},
            {"scale", cfg.scale},
            {"grid", cfg.grid}};
  if (const auto e = cfg.eps ? cfg.eps : m.meta().eps) p["eps"] = *e;
  if (m.meta().delta) p["delta"] = *m.meta().delta;
  return p;
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::filesystem::path path(cfg.out);
  if (!cfg.dir.empty() && path.is_relative()) {
    std::filesystem::create_directories(cfg.dir);
    path = std::filesystem::path(cfg.dir) / path;
  }
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f << text;
}

void require_format(const RunConfig& cfg, const std::string& allowed) {
  if (!cfg.format.empty() && cfg.format != allowed) {
    throw InvalidInput("this subcommand emits " + allowed + " only");
  }
}

double required_eps(const RunConfig& cfg, const ManifoldWithDensity& m) {
  if (cfg.eps) return *cfg.eps;
  if (m.meta().eps) return *m.meta().eps;
  throw InvalidInput("--eps is required for this model");
}

int exit_for(const Json& report) {
  return report.at("violations").empty() ? kExitPass : kExitViolations;
}

// ---------------------------------------------------------------------------

int cmd_build(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "json");
  const ManifoldWithDensity m = load_model(cfg);
  emit(cfg, out, dump_json(manifold_to_json(m)));
  return kExitPass;
}

int cmd_curvature(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "csv");
  const ManifoldWithDensity m = load_model(cfg);
  std::ostringstream os;
  write_curvature_csv(os, m, pinch_grid(m, cfg.grid));
  emit(cfg, out, os.str());
  return kExitPass;
}

int cmd_pinch(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "json");
  const ManifoldWithDensity m = load_model(cfg);
  const PinchReport rep =
      verify_pinch(m, parse_mode(cfg.scale), required_eps(cfg, m), cfg.upper, cfg.grid);
  Json margins = pinch_to_json(rep);
  margins.erase("violations");
  const Json report = suite_report(
      "pinch", m, params_json(cfg, m), rep.pass, margins, rep.violations,
      {{"grid", cfg.grid}, {"grid_points", rep.grid_points}, {"band_refinement", kBandRefinement}},
      {{"lower", rep.tol_lower}, {"upper", rep.tol_upper}});
  emit(cfg, out, dump_json(report));
  return exit_for(report);
}

GeodesicPath cli_path(const RunConfig& cfg, const ManifoldWithDensity& m) {
  const double length = cfg.length.value_or(m.domain_max());
  if (!(length > 0.0)) throw InvalidInput("--length must be positive");
  return shoot(m, cfg.r0, cfg.alpha, length);
}

int cmd_geodesic(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "csv");
  const ManifoldWithDensity m = load_model(cfg);
  std::ostringstream os;
  cli_path(cfg, m).write_csv(os);
  emit(cfg, out, os.str());
  return kExitPass;
}

int cmd_index(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "json");
  const ManifoldWithDensity m = load_model(cfg);
  const GeodesicPath path = cli_path(cfg, m);
  Json doc = index_to_json(geodesic_index(m, path));
  if (cfg.loop_length) {
    const GeodesicPath loop = shoot(m, 0.0, 0.0, *cfg.loop_length);
    doc["loop_check"] = loop_to_json(loop_index_check(m, loop));
  }
  emit(cfg, out, dump_json(doc));
  const bool ok = doc.at("cross_check_agree").get<bool>() &&
                  (!doc.contains("loop_check") || doc["loop_check"]["lemma_satisfied"].get<bool>());
  return ok ? kExitPass : kExitViolations;
}

int cmd_gap(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "json");
  const ManifoldWithDensity m = load_model(cfg);
  const double eps = required_eps(cfg, m);
  const Point pole{0.0, 0.0};
  const GapReport gap = diameter_gap(m, pole, eps);
  const InjGap inj = inj_gap_hypothesis(m, pole, eps);
  const PinchReport pinch = verify_pinch(m, FieldMode::Ricci, eps, cfg.upper, cfg.grid);
  std::vector<Violation> violations;
  // The diameter bound is only claimed for models that satisfy the pinching.
  if (pinch.pass && !gap.within_bound) {
    violations.push_back({gap.farthest.point.r, "farthest_distance", gap.farthest.length, gap.bound});
  }
  if (!gap.berger_ok) {
    violations.push_back({gap.farthest.point.r, "berger_inner", gap.berger_inner, 0.0});
  }
  Json margins = gap_to_json(gap);
  margins["pinch_pass"] = pinch.pass;
  margins["bound_margin"] = gap.bound - gap.farthest.length;
  margins["injectivity"] = {{"inj", inj.inj},
                            {"threshold", inj.threshold},
                            {"hypothesis_met", inj.hypothesis_met},
                            {"boundary", inj.boundary}};
  const Json report = suite_report("gap", m, params_json(cfg, m), violations.empty(), margins,
                                   violations, {{"grid", cfg.grid}}, {{"bound", 1e-6}});
  emit(cfg, out, dump_json(report));
  return exit_for(report);
}

int cmd_family_limit(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "csv");
  if (!cfg.from.empty()) throw InvalidInput("family-limit builds its own models");
  if (!cfg.eps) throw InvalidInput("--eps is required");
  if (cfg.deltas.empty()) throw InvalidInput("--deltas needs at least one value");
  const double eps = *cfg.eps;
  std::ostringstream os;
  write_csv_header(os, {"delta", "half_length", "L_delta", "pi_over_eps", "inj_p", "lower_margin",
                        "upper_margin", "pinch_pass"});
  bool all_pass = true;
  for (double d : cfg.deltas) {
    if (!(d > 0.0)) throw InvalidInput("--deltas entries must be positive");
    RunConfig one = cfg;
    one.model = "family";
    one.delta = d;
    const ManifoldWithDensity m = load_model(one);
    const PinchReport rep = verify_pinch(m, parse_mode(cfg.scale), eps, cfg.upper, cfg.grid);
    all_pass = all_pass && rep.pass;
    write_csv_row(os, {d, m.half_length(), m.domain_max(), std::numbers::pi / eps, inj_at_pole(m),
                       rep.achieved_lower - rep.lower_required,
                       rep.upper_target - rep.achieved_upper, rep.pass ? 1.0 : 0.0});
    if (!cfg.dir.empty()) {
      const std::filesystem::path dir(cfg.dir);
      std::filesystem::create_directories(dir);
      const std::string tag = "delta_" + format_double(d);
      std::ofstream(dir / (tag + "_model.json")) << dump_json(manifold_to_json(m));
      Json margins = pinch_to_json(rep);
      margins.erase("violations");
      std::ofstream(dir / (tag + "_pinch.json"))
          << dump_json(suite_report("pinch", m, params_json(one, m), rep.pass, margins,
                                    rep.violations, {{"grid", cfg.grid}},
                                    {{"lower", rep.tol_lower}, {"upper", rep.tol_upper}}));
    }
  }
  RunConfig table = cfg;
  table.dir.clear();
  if (!cfg.out.empty() && !cfg.dir.empty() && std::filesystem::path(cfg.out).is_relative()) {
    table.out = (std::filesystem::path(cfg.dir) / cfg.out).string();
  }
  emit(table, out, os.str());
  return all_pass ? kExitPass : kExitViolations;
}

int cmd_klingenberg(const RunConfig& cfg, std::ostream& out) {
  require_format(cfg, "json");
  if (!cfg.loop_length) throw InvalidInput("--loop-length is required");
  const ManifoldWithDensity m = load_model(cfg);
  const double eps = required_eps(cfg, m);
  const DeltaSearch d = klingenberg_delta_search(m, eps, *cfg.loop_length);
  std::vector<Violation> violations;
  if (d.status != DeltaStatus::Ok) {
    violations.push_back({0.0, std::string(to_string(d.status)), d.delta_max, 0.0});
  }
  Json params = params_json(cfg, m);
  params["loop_length"] = *cfg.loop_length;
  const Json report = suite_report("klingenberg", m, params, d.status == DeltaStatus::Ok,
                                   delta_search_to_json(d), violations, {}, {{"bisection", 1e-14}});
  emit(cfg, out, dump_json(report));
  return exit_for(report);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Curvature, geodesic and pinching checks for rotationally symmetric "
               "manifolds with density",
               "pinchlab"};
  app.require_subcommand(1, 1);

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "builtin model: gaussian, sphere, family")
        ->check(CLI::IsMember({"gaussian", "sphere", "round_sphere", "family"}));
    sub->add_option("--from", cfg.from, "profile JSON written by build");
    sub->add_option("--n", cfg.n, "dimension")->check(CLI::Range(2, 1000));
    sub->add_option("--eps", cfg.eps, "pinching constant")->check(CLI::PositiveNumber);
    sub->add_option("--delta", cfg.delta, "smoothing width")->check(CLI::PositiveNumber);
    sub->add_option("--scale,--mode", cfg.scale, "potential scale / pinch mode")
        ->check(CLI::IsMember({"ricci", "sec"}));
    sub->add_option("--grid", cfg.grid, "radial grid size")->check(CLI::Range(100, 100000000));
    sub->add_option("--out", cfg.out, "output path (default: standard output)");
    sub->add_option("--dir", cfg.dir, "output directory");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const std::vector<Sub> subs = {
      {"build", "write the model as profile JSON", cmd_build},
      {"curvature", "curvature fields as CSV", cmd_curvature},
      {"pinch", "pinching report", cmd_pinch},
      {"geodesic", "integrate a geodesic, CSV", cmd_geodesic},
      {"index", "index of a geodesic, JSON", cmd_index},
      {"gap", "diameter and injectivity gaps at the pole", cmd_gap},
      {"family-limit", "delta sweep of the smoothed family, CSV", cmd_family_limit},
      {"klingenberg", "admissible delta for a loop at the pole", cmd_klingenberg},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_model(sub);
    registered.push_back({sub, &s});
  }
  for (auto& [sub, s] : registered) {
    const std::string name = s->name;
    if (name == "geodesic" || name == "index") {
      sub->add_option("--length", cfg.length, "arclength")->check(CLI::PositiveNumber);
      sub->add_option("--r0", cfg.r0, "launch radius")->check(CLI::NonNegativeNumber);
      sub->add_option("--alpha", cfg.alpha, "launch angle from the outward radial direction");
    }
    if (name == "index" || name == "klingenberg") {
      sub->add_option("--loop-length", cfg.loop_length, "loop length at the pole")
          ->check(CLI::PositiveNumber);
    }
    if (name == "family-limit") {
      sub->add_option("--deltas", cfg.deltas, "comma separated widths")->delimiter(',');
    }
    if (name == "pinch" || name == "gap" || name == "family-limit") {
      sub->add_option("--upper", cfg.upper, "upper curvature bound per direction")
          ->check(CLI::PositiveNumber);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitPass;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  for (auto& [sub, s] : registered) {
    if (!sub->parsed()) continue;
    try {
      return s->run(cfg, out);
    } catch (const InvalidInput& e) {
      err << "error: " << e.what() << "\n";
    } catch (const DomainError& e) {
      err << "error: " << e.what() << "\n";
    } catch (const ConstructionError& e) {
      err << "construction failed: " << e.what() << "\n";
    } catch (const PreconditionError& e) {
      err << "precondition failed: " << e.what() << "\n";
    } catch (const IntegrationError& e) {
      err << "integration failed at arclength " << format_double(e.reached()) << ": " << e.what()
          << "\n";
    } catch (const SearchError& e) {
      err << "search failed (best " << format_double(e.best_candidate()) << "): " << e.what()
          << "\n";
    }
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace pinchlab
