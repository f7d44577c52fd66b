#include "spinorbit/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "spinorbit/errors.hpp"

namespace spinorbit {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::Config, field + ": " + what);
}

// Read-only view of one JSON object that rejects keys it was not asked about.
class Section {
 public:
  Section(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) allowed_.insert(k);
    for (const auto& [key, value] : node_.items())
      if (!allowed_.count(key)) fail(field(key), "unknown key");
  }

  // Narrower check once a discriminating field is known.
  void only(std::initializer_list<const char*> keys, const std::string& context) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [key, value] : node_.items())
      if (!ok.count(key)) fail(field(key), "not a parameter of " + context);
  }

  bool has(const char* key) const { return node_.contains(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const Json& at(const char* key) const { return node_.at(key); }

  void get(const char* key, double& out) const {
    if (!has(key)) return;
    const Json& v = node_.at(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(field(key), "must be finite");
  }
  void get(const char* key, int& out) const {
    if (!has(key)) return;
    const Json& v = node_.at(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    out = v.get<int>();
  }
  void get(const char* key, bool& out) const {
    if (!has(key)) return;
    const Json& v = node_.at(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) const {
    if (!has(key)) return;
    const Json& v = node_.at(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    out = v.get<std::string>();
  }
  void get(const char* key, std::array<double, 2>& out) const {
    if (!has(key)) return;
    const Json& v = node_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(field(key), "expected [x, y]");
    out = {v[0].get<double>(), v[1].get<double>()};
  }
  void get(const char* key, std::vector<double>& out) const {
    if (!has(key)) return;
    const Json& v = node_.at(key);
    if (!v.is_array() || v.empty()) fail(field(key), "expected a non-empty array of numbers");
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number()) fail(field(key), "expected a non-empty array of numbers");
      out.push_back(x.get<double>());
    }
  }

 private:
  const Json& node_;
  std::string path_;
  std::set<std::string> allowed_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) fail(field, what);
}

TermConfig parse_term(const Section& s, bool with_shape) {
  TermConfig t;
  if (with_shape) {
    s.get("shape", t.shape);
    require(t.shape == "gaussian" || t.shape == "circular", s.field("shape"), "expected gaussian or circular");
  }
  s.get("depth", t.depth);
  s.get("radius", t.radius);
  s.get("center", t.center);
  require(t.radius > 0.0, s.field("radius"), "must be positive");
  return t;
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).lexically_normal().string();
}

}  // namespace

std::string to_string(Task task) {
  switch (task) {
    case Task::Dispersion: return "dispersion";
    case Task::Extrema: return "extrema";
    case Task::Certify: return "certify";
    case Task::Bounds: return "bounds";
    case Task::Solve: return "solve";
    case Task::Full: return "full";
  }
  return "full";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::Dispersion, Task::Extrema, Task::Certify, Task::Bounds, Task::Solve, Task::Full})
    if (to_string(t) == name) return t;
  fail("task", "unknown task '" + name + "' (dispersion|extrema|certify|bounds|solve|full)");
}

RunConfig parse_config(const Json& doc, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  Section root(doc, "");
  root.allow({"units", "task", "coupling", "potential", "search", "dispersion", "certify", "variational", "oracle",
              "output"});
  root.get("units", c.units);
  require(c.units == "natural", "units", "only \"natural\" (hbar = 2m = 1) is supported");
  if (root.has("task")) {
    std::string t;
    root.get("task", t);
    c.task = parse_task(t);
  }

  if (root.has("coupling")) {
    Section s(root.at("coupling"), "coupling");
    s.allow({"kind", "alpha", "alpha_r", "alpha_d", "path"});
    s.get("kind", c.coupling.kind);
    const auto& k = c.coupling.kind;
    if (k == "none") {
      s.only({"kind"}, "coupling 'none'");
    } else if (k == "rashba" || k == "dresselhaus") {
      s.only({"kind", "alpha"}, "coupling '" + k + "'");
      s.get("alpha", c.coupling.alpha);
      require(c.coupling.alpha != 0.0, "coupling.alpha", "must be non-zero");
    } else if (k == "mixed") {
      s.only({"kind", "alpha_r", "alpha_d"}, "coupling 'mixed'");
      s.get("alpha_r", c.coupling.alpha_r);
      s.get("alpha_d", c.coupling.alpha_d);
    } else if (k == "tabulated") {
      s.only({"kind", "path"}, "coupling 'tabulated'");
      require(s.has("path"), "coupling.path", "required for a tabulated coupling");
      s.get("path", c.coupling.path);
      c.coupling.path = resolve(base_dir, c.coupling.path);
    } else {
      fail("coupling.kind", "expected none|rashba|dresselhaus|mixed|tabulated");
    }
  }

  if (root.has("potential")) {
    Section s(root.at("potential"), "potential");
    s.allow({"kind", "depth", "radius", "center", "terms", "path", "scale"});
    s.get("kind", c.potential.kind);
    const auto& k = c.potential.kind;
    if (k == "zero") {
      s.only({"kind"}, "potential 'zero'");
    } else if (k == "gaussian" || k == "circular") {
      s.only({"kind", "depth", "radius", "center"}, "potential '" + k + "'");
      c.potential.term = parse_term(s, false);
      c.potential.term.shape = k;
    } else if (k == "sum") {
      s.only({"kind", "terms"}, "potential 'sum'");
      require(s.has("terms") && s.at("terms").is_array() && !s.at("terms").empty(), "potential.terms",
              "expected a non-empty array");
      int i = 0;
      for (const auto& node : s.at("terms")) {
        Section ts(node, "potential.terms[" + std::to_string(i++) + "]");
        ts.allow({"shape", "depth", "radius", "center"});
        c.potential.terms.push_back(parse_term(ts, true));
      }
    } else if (k == "grid") {
      s.only({"kind", "path", "scale"}, "potential 'grid'");
      require(s.has("path"), "potential.path", "required for a grid potential");
      s.get("path", c.potential.path);
      s.get("scale", c.potential.scale);
      c.potential.path = resolve(base_dir, c.potential.path);
    } else {
      fail("potential.kind", "expected zero|gaussian|circular|sum|grid");
    }
  }

  if (root.has("search")) {
    Section s(root.at("search"), "search");
    s.allow({"angles", "radii", "tol_extremum_rel", "growth_margin"});
    s.get("angles", c.search.angles);
    s.get("radii", c.search.radii);
    s.get("tol_extremum_rel", c.search.tol_extremum_rel);
    s.get("growth_margin", c.search.growth_margin);
    require(c.search.angles >= 8, "search.angles", "must be >= 8");
    require(c.search.radii >= 8, "search.radii", "must be >= 8");
    require(c.search.tol_extremum_rel > 0.0, "search.tol_extremum_rel", "must be positive");
    require(c.search.growth_margin > 0.0 && c.search.growth_margin < 1.0, "search.growth_margin", "must lie in (0, 1)");
  }

  if (root.has("dispersion")) {
    Section s(root.at("dispersion"), "dispersion");
    s.allow({"p_max", "points"});
    s.get("p_max", c.dispersion.p_max);
    s.get("points", c.dispersion.points);
    require(c.dispersion.p_max > 0.0, "dispersion.p_max", "must be positive");
    require(c.dispersion.points >= 1 && c.dispersion.points <= 4096, "dispersion.points", "must be in [1, 4096]");
  }

  if (root.has("certify")) {
    Section s(root.at("certify"), "certify");
    s.allow({"n_max", "tol_def_rel", "angle_offset"});
    s.get("n_max", c.certify.n_max);
    s.get("tol_def_rel", c.certify.tol_def_rel);
    s.get("angle_offset", c.certify.angle_offset);
    require(c.certify.n_max >= 1, "certify.n_max", "must be >= 1");
    require(c.certify.tol_def_rel >= 0.0, "certify.tol_def_rel", "must be non-negative");
  }

  if (root.has("variational")) {
    Section s(root.at("variational"), "variational");
    s.allow({"anchors", "a_grid", "cond_max", "sep_min_rel", "angle_offset"});
    s.get("anchors", c.variational.anchors);
    s.get("a_grid", c.variational.a_grid);
    s.get("cond_max", c.variational.cond_max);
    s.get("sep_min_rel", c.variational.sep_min_rel);
    s.get("angle_offset", c.variational.angle_offset);
    require(c.variational.anchors >= 1, "variational.anchors", "must be >= 1");
    for (std::size_t i = 0; i < c.variational.a_grid.size(); ++i) {
      require(c.variational.a_grid[i] > 0.0, "variational.a_grid", "exponents must be positive");
      require(i == 0 || c.variational.a_grid[i] < c.variational.a_grid[i - 1], "variational.a_grid",
              "exponents must be strictly descending");
    }
    require(c.variational.cond_max > 1.0, "variational.cond_max", "must exceed 1");
    require(c.variational.sep_min_rel >= 0.0, "variational.sep_min_rel", "must be non-negative");
  }

  if (root.has("oracle")) {
    Section s(root.at("oracle"), "oracle");
    s.allow({"box_width", "grid_points", "resid_tol", "margin", "doubling_check", "drift_tol", "tol_oracle",
             "initial_count", "max_count"});
    auto& o = c.oracle;
    s.get("box_width", o.box_width);
    s.get("grid_points", o.grid_points);
    s.get("resid_tol", o.resid_tol);
    s.get("margin", o.margin);
    s.get("doubling_check", o.doubling_check);
    s.get("drift_tol", o.drift_tol);
    s.get("tol_oracle", o.tol_oracle);
    s.get("initial_count", o.initial_count);
    s.get("max_count", o.max_count);
    require(o.box_width > 0.0, "oracle.box_width", "must be positive");
    require(o.grid_points >= 64, "oracle.grid_points", "must be >= 64");
    require(o.resid_tol > 0.0, "oracle.resid_tol", "must be positive");
    require(o.margin >= 0.0, "oracle.margin", "must be non-negative");
    require(o.drift_tol > 0.0, "oracle.drift_tol", "must be positive");
    require(o.tol_oracle >= 0.0, "oracle.tol_oracle", "must be non-negative");
    require(o.initial_count >= 1, "oracle.initial_count", "must be >= 1");
    require(o.max_count >= o.initial_count, "oracle.max_count", "must be >= initial_count");
  }

  if (root.has("output")) {
    Section s(root.at("output"), "output");
    s.allow({"dir"});
    s.get("dir", c.output_dir);
    require(!c.output_dir.empty(), "output.dir", "must not be empty");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    // the message carries "at line L, column C"
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
  const auto base = std::filesystem::path(path).parent_path().string();
  return parse_config(doc, base.empty() ? "." : base);
}

Json to_json(const RunConfig& c) {
  auto term = [](const TermConfig& t, bool with_shape) {
    Json j;
    if (with_shape) j["shape"] = t.shape;
    j["depth"] = t.depth;
    j["radius"] = t.radius;
    j["center"] = {t.center[0], t.center[1]};
    return j;
  };
  Json j;
  j["units"] = c.units;
  j["task"] = to_string(c.task);

  Json cp;
  cp["kind"] = c.coupling.kind;
  if (c.coupling.kind == "rashba" || c.coupling.kind == "dresselhaus") cp["alpha"] = c.coupling.alpha;
  if (c.coupling.kind == "mixed") {
    cp["alpha_r"] = c.coupling.alpha_r;
    cp["alpha_d"] = c.coupling.alpha_d;
  }
  if (c.coupling.kind == "tabulated") cp["path"] = c.coupling.path;
  j["coupling"] = cp;

  Json pt;
  pt["kind"] = c.potential.kind;
  if (c.potential.kind == "gaussian" || c.potential.kind == "circular") pt.update(term(c.potential.term, false));
  if (c.potential.kind == "sum") {
    pt["terms"] = Json::array();
    for (const auto& t : c.potential.terms) pt["terms"].push_back(term(t, true));
  }
  if (c.potential.kind == "grid") {
    pt["path"] = c.potential.path;
    pt["scale"] = c.potential.scale;
  }
  j["potential"] = pt;

  j["search"] = {{"angles", c.search.angles},
                 {"radii", c.search.radii},
                 {"tol_extremum_rel", c.search.tol_extremum_rel},
                 {"growth_margin", c.search.growth_margin}};
  j["dispersion"] = {{"p_max", c.dispersion.p_max}, {"points", c.dispersion.points}};
  j["certify"] = {{"n_max", c.certify.n_max},
                  {"tol_def_rel", c.certify.tol_def_rel},
                  {"angle_offset", c.certify.angle_offset}};
  j["variational"] = {{"anchors", c.variational.anchors},
                      {"a_grid", c.variational.a_grid},
                      {"cond_max", c.variational.cond_max},
                      {"sep_min_rel", c.variational.sep_min_rel},
                      {"angle_offset", c.variational.angle_offset}};
  const auto& o = c.oracle;
  j["oracle"] = {{"box_width", o.box_width},         {"grid_points", o.grid_points},
                 {"resid_tol", o.resid_tol},         {"margin", o.margin},
                 {"doubling_check", o.doubling_check}, {"drift_tol", o.drift_tol},
                 {"tol_oracle", o.tol_oracle},       {"initial_count", o.initial_count},
                 {"max_count", o.max_count}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

Coupling make_coupling(const RunConfig& config) {
  const auto& c = config.coupling;
  if (c.kind == "none") return Coupling::none();
  if (c.kind == "rashba") return Coupling::rashba(c.alpha);
  if (c.kind == "dresselhaus") return Coupling::dresselhaus(c.alpha);
  if (c.kind == "mixed") return Coupling::mixed(c.alpha_r, c.alpha_d);
  return Coupling::tabulated(std::filesystem::path(c.path).filename().string(), TabulatedSymbol::load_csv(c.path));
}

Potential make_potential(const RunConfig& config) {
  const auto& p = config.potential;
  auto well = [](const TermConfig& t) {
    return WellTerm{t.shape == "circular" ? WellShape::Circular : WellShape::Gaussian, t.depth, t.radius,
                    Vec2{t.center[0], t.center[1]}};
  };
  if (p.kind == "zero") return Potential::zero();
  if (p.kind == "gaussian" || p.kind == "circular") return Potential::sum({well(p.term)});
  if (p.kind == "sum") {
    std::vector<WellTerm> terms;
    for (const auto& t : p.terms) terms.push_back(well(t));
    return Potential::sum(std::move(terms));
  }
  return Potential::tabulated(TabulatedPotential::load_csv(p.path)).scaled(p.scale);
}

SearchConfig make_search_config(const RunConfig& config, unsigned threads) {
  SearchConfig s;
  s.angles = config.search.angles;
  s.radii = config.search.radii;
  s.tol_extremum_rel = config.search.tol_extremum_rel;
  s.growth.margin = config.search.growth_margin;
  s.threads = threads;
  return s;
}

}  // namespace spinorbit
