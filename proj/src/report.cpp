#include "spinorbit/report.hpp"

#include <cmath>
#include <sstream>

#include "spinorbit/csv.hpp"

namespace spinorbit {

namespace {

void write(std::ostringstream& out, const Json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  const std::string inner(static_cast<std::size_t>(2 * depth + 2), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& [key, value] : v.items()) {
        if (!first) out << ",\n";
        first = false;
        out << inner << Json(key).dump() << ": ";
        write(out, value, depth + 1);
      }
      out << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // short arrays of scalars stay on one line
      bool scalars = v.size() <= 4;
      for (const auto& x : v) scalars = scalars && !x.is_structured();
      out << (scalars ? "[" : "[\n");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << (scalars ? ", " : ",\n");
        if (!scalars) out << inner;
        write(out, v[i], depth + 1);
      }
      if (!scalars) out << "\n" << pad;
      out << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (std::isfinite(d))
        out << format_double(d);
      else
        out << "null";
      return;
    }
    default:
      out << v.dump();
  }
}

Json complex_matrix(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

Json points(const std::vector<Vec2>& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(to_json(p));
  return a;
}

}  // namespace

std::string dump_json(const Json& value) {
  std::ostringstream out;
  write(out, value, 0);
  out << "\n";
  return out.str();
}

Json to_json(const Vec2& p) { return Json::array({p.x, p.y}); }

Json to_json(const ExtremumSet& e) {
  Json j;
  j["kappa"] = e.kappa;
  j["shape"] = to_string(e.shape);
  if (e.shape == ShapeKind::Circle) j["radius"] = e.circle_radius;
  j["point_count"] = e.points.size();
  j["tol_extremum"] = e.tol_extremum;
  j["search_radius"] = e.search_radius;
  j["grid_min"] = e.grid_min;
  if (e.curvature_constant) j["curvature_constant"] = *e.curvature_constant;
  if (e.shape != ShapeKind::Circle) j["points"] = points(e.points);
  return j;
}

Json to_json(const DefinitenessCertificate& c) {
  Json j;
  j["verdict"] = to_string(c.verdict);
  j["max_eigenvalue"] = c.max_eigenvalue;
  j["tol_def"] = c.tol_def;
  j["anchors"] = points(c.anchors);
  j["eigenvalues"] = std::vector<double>(c.eigenvalues.data(), c.eigenvalues.data() + c.eigenvalues.size());
  j["matrix"] = complex_matrix(c.matrix);
  return j;
}

Json to_json(const CountPrediction& p) {
  Json j;
  j["predicted_count"] = p.count;
  j["method"] = p.method;
  j["certificate"] = to_json(p.certificate);
  return j;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["kappa"] = r.kappa;
  j["a_used"] = r.a_used;
  j["anchors"] = points(r.anchors);
  j["certified_count"] = r.certified_count;
  j["margin"] = r.margin;
  j["cond_G"] = r.cond_G;
  j["nu"] = r.nu;
  j["mu"] = r.mu;
  j["nu_potential_only"] = r.mu_potential_only;
  return j;
}

Json to_json(const SweepResult& s) {
  Json j;
  j["best"] = to_json(s.best);
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    Json x;
    x["a"] = e.a;
    x["status"] = e.status;
    if (e.report) {
      x["certified_count"] = e.report->certified_count;
      x["cond_G"] = e.report->cond_G;
      x["margin"] = e.report->margin;
      x["nu"] = e.report->nu;
    }
    entries.push_back(x);
  }
  j["sweep"] = entries;
  return j;
}

Json to_json(const OracleSpectrum& s) {
  Json j;
  j["kappa"] = s.kappa;
  j["kappa_h"] = s.kappa_h;
  j["margin"] = s.margin;
  j["grid_points"] = s.n;
  j["box_width"] = s.box_width;
  j["tail_mass"] = s.tail_mass;
  j["count"] = s.count;
  j["level_count"] = s.level_count;
  j["level_multiplicities"] = s.level_multiplicities;
  j["eigenvalues"] = s.eigenvalues;
  j["residuals"] = s.residuals;
  j["first_above"] = s.first_above;
  j["complete"] = s.complete;
  j["converged"] = s.converged;
  j["grid_checked"] = s.grid_checked;
  if (s.grid_checked) {
    j["coarse_count"] = s.coarse_count;
    j["drift"] = s.drift;
  }
  j["note"] = s.note;
  return j;
}

Json to_json(const BoundValidation& v) {
  Json j;
  j["verdict"] = v.pass ? "pass" : "fail";
  j["tol_oracle"] = v.tol_oracle;
  j["message"] = v.message;
  Json rows = Json::array();
  for (const auto& r : v.rows)
    rows.push_back({{"n", r.n},
                    {"nu_minus_kappa", r.nu_minus_kappa},
                    {"oracle_minus_kappa_h", r.oracle_minus_kappa_h},
                    {"allowance", r.allowance},
                    {"ok", r.ok}});
  j["rows"] = rows;
  return j;
}

}  // namespace spinorbit
