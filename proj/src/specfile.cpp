#include "fsub/specfile.hpp"

#include <fstream>
#include <json.hpp>

#include "fsub/expr.hpp"

namespace finsub {

namespace {

using nlohmann::json;

Mat parse_projection(const json& j, int n, int m) {
  Mat J = Mat::Zero(m, n);
  if (j.contains("coords")) {
    auto coords = j.at("coords").get<std::vector<int>>();
    if (static_cast<int>(coords.size()) != m)
      throw FixtureInvalid("projection needs exactly base_dim coordinates");
    for (int a = 0; a < m; ++a) {
      int c = coords[a];
      if (c < 1 || c > n)
        throw FixtureInvalid("projection coordinate out of range");
      J(a, c - 1) = 1.0;
    }
    return J;
  }
  if (j.contains("matrix")) {
    auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != m)
      throw FixtureInvalid("projection matrix must have base_dim rows");
    for (int a = 0; a < m; ++a) {
      if (static_cast<int>(rows[a].size()) != n)
        throw FixtureInvalid("projection matrix must have dim columns");
      for (int i = 0; i < n; ++i) J(a, i) = rows[a][i];
    }
    return J;
  }
  throw FixtureInvalid("projection needs 'coords' or 'matrix'");
}

}  // namespace

Fixture load_fixture_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FixtureInvalid(std::string("spec file is not valid JSON: ") +
                         e.what());
  }

  Fixture f;
  int n = j.at("dim").get<int>();
  int m = j.at("base_dim").get<int>();
  if (n < 2 || n > 4 || m < 1 || m >= n)
    throw FixtureInvalid("dimensions out of the supported range");
  std::string label = j.value("label", std::string("custom"));

  const json& metric = j.at("metric");
  auto arows = metric.at("a").get<std::vector<std::vector<std::string>>>();
  if (static_cast<int>(arows.size()) != n)
    throw FixtureInvalid("coefficient matrix must be dim x dim");
  std::vector<Expr> a_exprs;
  for (const auto& row : arows) {
    if (static_cast<int>(row.size()) != n)
      throw FixtureInvalid("coefficient matrix must be dim x dim");
    for (const auto& cell : row) a_exprs.push_back(Expr::parse(cell, n));
  }
  std::vector<Expr> b_exprs;
  bool has_beta = metric.contains("beta");
  if (has_beta) {
    auto brow = metric.at("beta").get<std::vector<std::string>>();
    if (static_cast<int>(brow.size()) != n)
      throw FixtureInvalid("one-form must have dim entries");
    for (const auto& cell : brow) b_exprs.push_back(Expr::parse(cell, n));
  }

  Box box;
  for (const auto& r : j.at("box")) {
    if (r.size() != 2) throw FixtureInvalid("box entries are [lo, hi] pairs");
    box.range.push_back({r[0].get<double>(), r[1].get<double>()});
  }
  if (box.dim() != n) throw FixtureInvalid("box must have dim entries");

  std::string cone = j.value("cone", std::string("nonzero"));
  if (cone != "nonzero")
    throw FixtureInvalid("unsupported cone predicate: " + cone);

  MatrixFieldFn afn = [a_exprs, n](const JetVec& x) {
    std::vector<Jet> A;
    A.reserve(n * n);
    for (const Expr& e : a_exprs) A.push_back(e.eval(x));
    return A;
  };
  MetricField total;
  if (has_beta) {
    OneFormFieldFn bfn = [b_exprs](const JetVec& x) {
      JetVec B;
      for (const Expr& e : b_exprs) B.push_back(e.eval(x));
      return B;
    };
    total = make_randers_metric(n, label, afn, bfn, box);
  } else {
    total = make_quadratic_metric(n, label, afn, box);
  }

  Mat J = parse_projection(j.at("projection"), n, m);

  Vec section = Vec::Zero(n);
  if (j.contains("section")) {
    auto sec = j.at("section").get<std::vector<double>>();
    if (static_cast<int>(sec.size()) != n)
      throw FixtureInvalid("section must have dim entries");
    for (int i = 0; i < n; ++i) section[i] = sec[i];
  }

  Box base_box;
  for (int a = 0; a < m; ++a) {
    // image of the sampling box under a coordinate-style projection; for a
    // general linear map fall back to a conservative interval
    double lo = 0, hi = 0;
    for (int i = 0; i < n; ++i) {
      double c = J(a, i);
      lo += std::min(c * box.range[i][0], c * box.range[i][1]);
      hi += std::max(c * box.range[i][0], c * box.range[i][1]);
    }
    base_box.range.push_back({lo, hi});
  }

  f.chart.total = total;
  try {
    f.chart.base =
        induce_base_metric(total, J, section, base_box, label + "-base");
  } catch (const RankDeficient& e) {
    throw FixtureInvalid(std::string("differential rank invariant failed: ") +
                         e.what());
  }
  f.chart.sigma_lin = J;
  f.chart.sigma = [J, m, n](const JetVec& x) {
    JetVec out;
    for (int a = 0; a < m; ++a) {
      Jet acc = x[0] * J(a, 0);
      for (int i = 1; i < n; ++i) acc += J(a, i) * x[i];
      out.push_back(acc);
    }
    return out;
  };
  f.chart.fiber_section = section;
  f.chart.label = label;
  f.base_induced = true;
  f.flags.riemannian = !has_beta;
  // conservative: derived properties are not assumed for custom fixtures
  f.flags.totally_geodesic = false;
  f.flags.horizontally_regular = false;
  f.flags.flat = false;
  f.notes = "custom fixture from " + path;
  return f;
}

Fixture fixture_fd_variant(const Fixture& f) {
  Fixture out = f;
  MetricField orig_total = f.chart.total;
  out.chart.total.eval = fd_metric_eval(
      [orig_total](const Vec& x, const Vec& v) { return orig_total.value(x, v); },
      orig_total.dim);
  if (f.base_induced) {
    out.chart.base = induce_base_metric(
        out.chart.total, f.chart.sigma_lin, f.chart.fiber_section,
        f.chart.base.chart_domain, f.chart.base.label);
  } else {
    MetricField orig_base = f.chart.base;
    out.chart.base.eval = fd_metric_eval(
        [orig_base](const Vec& x, const Vec& v) { return orig_base.value(x, v); },
        orig_base.dim);
  }
  return out;
}

}  // namespace finsub
