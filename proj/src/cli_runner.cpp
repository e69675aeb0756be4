#include "fsub/cli_runner.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

namespace finsub {

namespace {

using ordered_json = nlohmann::ordered_json;

Vec to_vec(const std::vector<double>& v) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void emit(const ordered_json& j, const std::string& path, std::ostream& out) {
  std::string text = j.dump(2) + "\n";
  if (path.empty())
    out << text;
  else
    write_text(path, text);
}

void write_ode_csv(const OdeSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  int n = sol.states.front().size();
  out << "t";
  for (int i = 0; i < n; ++i) out << ",x" << i + 1;
  out << "\n";
  out.precision(17);
  for (size_t k = 0; k < sol.times.size(); ++k) {
    out << sol.times[k];
    for (int i = 0; i < n; ++i) out << "," << sol.states[k][i];
    out << "\n";
  }
}

}  // namespace

Fixture resolve_fixture(const RunConfig& cfg) {
  Fixture f;
  if (!cfg.spec_path.empty())
    f = load_fixture_spec(cfg.spec_path);
  else
    f = fixture_by_name(cfg.fixture);
  if (cfg.profile == "fd") f = fixture_fd_variant(f);
  return f;
}

int cmd_list(std::ostream& out) {
  out << "built-in fixtures:\n";
  for (const auto& name : fixture_names()) {
    Fixture f = fixture_by_name(name);
    out << "  " << name << "  [dim " << f.chart.total_dim() << " -> "
        << f.chart.base_dim() << "]"
        << (f.flags.riemannian ? " riemannian" : " finsler")
        << (f.flags.flat ? " flat" : "")
        << (f.flags.totally_geodesic ? " totally-geodesic" : "")
        << (f.flags.horizontally_regular ? " horizontally-regular" : "")
        << (f.base_induced ? " induced-base" : "") << "\n"
        << "      " << f.notes << "\n";
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  Fixture f;
  try {
    f = resolve_fixture(cfg);
  } catch (const FixtureInvalid& e) {
    out << "fixture invalid: " << e.what() << "\n";
    return 2;
  }

  SuiteOptions opts;
  opts.n_samples = cfg.samples;
  opts.seed = cfg.seed;
  opts.profile =
      cfg.profile == "fd" ? ToleranceProfile::fd() : ToleranceProfile::ad();
  opts.jobs = cfg.jobs;
  opts.corruption = corruption_from_name(cfg.corruption);
  opts.identity_filter = cfg.identities;
  opts.per_sample_csv = cfg.csv_path;
  if (!cfg.identities.empty()) {
    for (const auto& id : cfg.identities) {
      bool known = false;
      for (const auto& ic : identity_catalogue())
        if (ic.id == id) known = true;
      if (!known) {
        out << "unknown identity id: " << id << "\n";
        return 3;
      }
    }
  }

  VerificationReport rep;
  try {
    rep = run_suite(f, opts);
  } catch (const FixtureInvalid& e) {
    out << "fixture invalid: " << e.what() << "\n";
    return 2;
  }

  for (const auto& st : rep.identities) {
    out << "  " << st.id << ": ";
    if (!st.applicable) {
      out << "not applicable\n";
      continue;
    }
    out << "max " << st.max << " mean " << st.mean << " (n=" << st.count
        << ", skipped " << st.skipped << ")";
    if (st.diagnostic)
      out << " [diagnostic]";
    else
      out << " tol " << st.tolerance << (st.pass ? " PASS" : " FAIL");
    out << "\n";
  }
  out << (rep.all_passed() ? "suite PASS" : "suite FAIL") << " in "
      << rep.wall_time_ms << " ms\n";

  if (!cfg.out_path.empty()) {
    try {
      write_text(cfg.out_path, rep.to_json());
    } catch (const std::runtime_error& e) {
      out << "io error: " << e.what() << "\n";
      return 3;
    }
  }
  return rep.all_passed() ? 0 : 1;
}

int cmd_geodesic(const RunConfig& cfg, std::ostream& out) {
  Fixture f = resolve_fixture(cfg);
  const MetricField& metric =
      cfg.space == "base" ? f.chart.base : f.chart.total;
  if (static_cast<int>(cfg.x0.size()) != metric.dim ||
      static_cast<int>(cfg.v0.size()) != metric.dim)
    throw std::invalid_argument("x0/v0 must have the chart dimension");
  GeodesicArc arc = integrate_geodesic(metric, to_vec(cfg.x0), to_vec(cfg.v0),
                                       0.0, cfg.t1);
  if (!cfg.csv_path.empty()) arc.write_csv(cfg.csv_path);
  ordered_json j;
  j["fixture"] = f.chart.label;
  j["space"] = cfg.space;
  j["t_end"] = arc.t_end();
  j["steps"] = arc.stats.steps;
  j["rejected_steps"] = arc.stats.rejected;
  j["complete"] = arc.complete;
  j["stop_reason"] = arc.stop_reason;
  j["energy_drift"] = arc.energy_drift(metric);
  emit(j, cfg.out_path, out);
  return 0;
}

int cmd_lift(const RunConfig& cfg, std::ostream& out) {
  Fixture f = resolve_fixture(cfg);
  const SubmersionChart& S = f.chart;
  if (static_cast<int>(cfg.x0.size()) != S.total_dim())
    throw std::invalid_argument("x0 must have the total dimension");
  if (static_cast<int>(cfg.v0.size()) != S.base_dim())
    throw std::invalid_argument("v0 must have the base dimension");
  Vec p0 = to_vec(cfg.x0), vt = to_vec(cfg.v0);

  GeodesicArc base = integrate_geodesic(S.base, S.project(p0), vt, 0, cfg.t1);
  base.require_complete();
  GeodesicArc lifted = lift_geodesic(S, base, p0);
  LiftResult l0 = horizontal_lift_vector(S, p0, vt);
  GeodesicArc direct = integrate_geodesic(S.total, p0, l0.v, 0, cfg.t1);
  direct.require_complete();

  double sup = 0;
  for (int k = 0; k <= 50; ++k) {
    double t = cfg.t1 * k / 50.0;
    sup = std::max(sup, (lifted.x_at(t) - direct.x_at(t)).norm());
  }
  if (!cfg.csv_path.empty()) lifted.write_csv(cfg.csv_path);

  ordered_json j;
  j["fixture"] = f.chart.label;
  j["t_end"] = cfg.t1;
  j["sup_deviation"] = sup;
  j["horizontality_persistence"] = horizontality_persistence(S, direct);
  j["lift_unique_warning"] = l0.unique_warning;
  emit(j, cfg.out_path, out);
  return 0;
}

int cmd_transport(const RunConfig& cfg, std::ostream& out) {
  Fixture f = resolve_fixture(cfg);
  const SubmersionChart& S = f.chart;
  if (static_cast<int>(cfg.x0.size()) != S.total_dim())
    throw std::invalid_argument("x0 must have the total dimension");
  Vec p0 = to_vec(cfg.x0);
  Vec xt0 = S.project(p0);
  int m = S.base_dim();

  CurveFn curve, curve_dot;
  if (cfg.loop == "coordinate") {
    if (cfg.loop_coord < 1 || cfg.loop_coord > m)
      throw std::invalid_argument("loop coordinate out of range");
    int k = cfg.loop_coord - 1;
    curve = [xt0, k, m](double t) {
      Vec p = xt0;
      p[k] += 2 * M_PI * t;
      return p;
    };
    curve_dot = [k, m](double) {
      Vec d = Vec::Zero(m);
      d[k] = 2 * M_PI;
      return d;
    };
  } else if (cfg.loop == "circle") {
    double r = cfg.loop_radius;
    curve = [xt0, r](double t) {
      Vec p = xt0;
      p[0] += r * std::sin(2 * M_PI * t);
      p[1] += r * (std::cos(2 * M_PI * t) - 1.0);
      return p;
    };
    curve_dot = [r, m](double t) {
      Vec d = Vec::Zero(m);
      d[0] = 2 * M_PI * r * std::cos(2 * M_PI * t);
      d[1] = -2 * M_PI * r * std::sin(2 * M_PI * t);
      return d;
    };
  } else {
    throw std::invalid_argument("loop must be 'coordinate' or 'circle'");
  }

  TransportResult tr = holonomy_transport(S, curve, curve_dot, 0, 1, p0);
  if (!cfg.csv_path.empty()) write_ode_csv(tr.path, cfg.csv_path);

  Mat U = vertical_basis(S, p0);
  Vec disp = U.colPivHouseholderQr().solve(Vec(tr.endpoint - p0));

  ordered_json j;
  j["fixture"] = f.chart.label;
  j["endpoint"] = std::vector<double>(tr.endpoint.data(),
                                      tr.endpoint.data() + tr.endpoint.size());
  j["fiber_displacement"] =
      std::vector<double>(disp.data(), disp.data() + disp.size());
  j["projection_drift"] = tr.projection_drift;
  if (f.chart.label == "hopf" && cfg.loop == "coordinate" &&
      cfg.loop_coord == 2) {
    double dpsi = tr.endpoint[2] - p0[2];
    double angle = std::fmod(0.5 * dpsi + M_PI + 4 * M_PI, 2 * M_PI);
    j["holonomy_angle"] = angle;
    j["enclosed_area_oracle"] = hopf_oracle::rotation_angle(p0[0]);
  }
  emit(j, cfg.out_path, out);
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"numerical laboratory for pseudo-Finsler submersions"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* list = app.add_subcommand("list", "list built-in fixtures");

  auto add_fixture_opts = [&](CLI::App* sub) {
    sub->add_option("--fixture", cfg.fixture, "built-in fixture label");
    sub->add_option("--spec", cfg.spec_path, "custom fixture spec file");
    sub->add_option("--profile", cfg.profile, "evaluation profile: ad | fd")
        ->check(CLI::IsMember({"ad", "fd"}));
  };

  auto* verify = app.add_subcommand("verify", "run the identity suite");
  add_fixture_opts(verify);
  verify->add_option("--samples", cfg.samples, "sample count");
  verify->add_option("--seed", cfg.seed, "sampling seed");
  verify->add_option("--identities", cfg.identities,
                     "comma-separated identity filter")
      ->delimiter(',');
  verify->add_option("--out", cfg.out_path, "report JSON path");
  verify->add_option("--csv", cfg.csv_path, "per-sample residual CSV path");
  verify->add_option("--jobs", cfg.jobs, "worker threads");
  verify->add_option("--corrupt", cfg.corruption,
                     "negative-control corruption (testing)")
      ->check(CLI::IsMember(
          {"none", "base-rescale", "flip-a-sign", "drop-qtilde-term"}));

  auto* geo = app.add_subcommand("geodesic", "integrate a geodesic");
  add_fixture_opts(geo);
  geo->add_option("--space", cfg.space, "total | base")
      ->check(CLI::IsMember({"total", "base"}));
  geo->add_option("--x0", cfg.x0, "start point")->delimiter(',');
  geo->add_option("--v0", cfg.v0, "start direction")->delimiter(',');
  geo->add_option("--t1", cfg.t1, "end time");
  geo->add_option("--csv", cfg.csv_path, "arc CSV path");
  geo->add_option("--out", cfg.out_path, "summary JSON path");

  auto* lift = app.add_subcommand("lift", "lift a base geodesic");
  add_fixture_opts(lift);
  lift->add_option("--x0", cfg.x0, "total-space start point")->delimiter(',');
  lift->add_option("--v0", cfg.v0, "base direction")->delimiter(',');
  lift->add_option("--t1", cfg.t1, "end time");
  lift->add_option("--csv", cfg.csv_path, "lifted arc CSV path");
  lift->add_option("--out", cfg.out_path, "summary JSON path");

  auto* tr = app.add_subcommand("transport", "holonomy transport along a loop");
  add_fixture_opts(tr);
  tr->add_option("--x0", cfg.x0, "total-space start point")->delimiter(',');
  tr->add_option("--loop", cfg.loop, "coordinate | circle")
      ->check(CLI::IsMember({"coordinate", "circle"}));
  tr->add_option("--coord", cfg.loop_coord, "base coordinate for the loop");
  tr->add_option("--radius", cfg.loop_radius, "circle loop radius");
  tr->add_option("--csv", cfg.csv_path, "path CSV");
  tr->add_option("--out", cfg.out_path, "summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::stringstream ss;
    int code = app.exit(e, ss, ss);
    (code == 0 ? out : err) << ss.str();
    return code == 0 ? 0 : 3;
  }

  try {
    if (list->parsed()) return cmd_list(out);
    if (verify->parsed()) return cmd_verify(cfg, out);
    if (geo->parsed()) return cmd_geodesic(cfg, out);
    if (lift->parsed()) return cmd_lift(cfg, out);
    if (tr->parsed()) return cmd_transport(cfg, out);
  } catch (const FixtureInvalid& e) {
    err << "fixture invalid: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}

}  // namespace finsub
