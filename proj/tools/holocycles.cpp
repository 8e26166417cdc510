// holocycles: command-line front end.
//
// Exit codes: 0 ok, 1 parse/config/IO error, 2 degenerate input, 3 numerical failure,
// 4 a certificate came back negative.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "holocycles/holocycles.hpp"
#include "holocycles/json_io.hpp"

namespace fs = std::filesystem;
using namespace holocycles;
using json_io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNegative = 4;

/// Failure outside the library: files, formats, command-line values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return kExitConfig;
    case ErrorCode::NotComplexHyperbolic:
    case ErrorCode::DegenerateField:
    case ErrorCode::NotInvariantLine:
    case ErrorCode::InvariantLine: return kExitDegenerate;
    default: return kExitNumeric;
  }
}

struct Options {
  std::string input;
  std::string out = ".";
  std::string format = "json";
  std::string preset;
  std::string method = "multiplier";
  int count = 10;
  double tol_ode = 0.0;
  double tol_fixed = 0.0;
};

NumericConfig make_config(const Options& o) {
  NumericConfig cfg;
  if (o.tol_ode != 0.0) {
    cfg.ode_rel_tol = o.tol_ode;
    cfg.ode_abs_tol = std::min(cfg.ode_abs_tol, 1e-2 * o.tol_ode);
  }
  if (o.tol_fixed != 0.0) cfg.fixed_point_tol = o.tol_fixed;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

Json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return json_io::parse(ss.str(), path);
}

fs::path output_path(const Options& o, const std::string& name) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + o.out + ": " + ec.message());
  return fs::path(o.out) / name;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json maybe_number(std::optional<Complex> c) { return c ? json_io::complex_json(*c) : Json(nullptr); }

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

Line get_line(const Json& j, const std::string& path) {
  if (j.contains("a") || j.contains("b")) {
    return Line::graph(json_io::get_complex(json_io::member(j, path, "a"), path + ".a"),
                       json_io::get_complex(json_io::member(j, path, "b"), path + ".b"));
  }
  const auto& pt = json_io::member(j, path, "point");
  const auto& dir = json_io::member(j, path, "direction");
  if (!pt.is_array() || pt.size() != 2) json_io::bad(path + ".point", "expected [x, y]");
  if (!dir.is_array() || dir.size() != 2) json_io::bad(path + ".direction", "expected [dx, dy]");
  return {json_io::get_complex(pt[0], path + ".point[0]"), json_io::get_complex(pt[1], path + ".point[1]"),
          json_io::get_complex(dir[0], path + ".direction[0]"), json_io::get_complex(dir[1], path + ".direction[1]")};
}

int cmd_analyze(const Options& o) {
  const Json in = read_json(o.input);
  const auto field = json_io::get_field(in, "$");
  SearchBox box;
  if (in.contains("search")) {
    const auto& s = in["search"];
    if (s.contains("center")) {
      const auto& c = s["center"];
      if (!c.is_array() || c.size() != 2) json_io::bad("$.search.center", "expected [x, y]");
      box.center_x = json_io::get_complex(c[0], "$.search.center[0]");
      box.center_y = json_io::get_complex(c[1], "$.search.center[1]");
    }
    if (s.contains("radius")) box.radius = json_io::get_double(s["radius"], "$.search.radius");
    if (s.contains("grid")) box.grid = json_io::get_int(s["grid"], "$.search.grid");
    if (!(box.radius > 0) || box.grid < 1) json_io::bad("$.search", "radius and grid must be positive");
  }
  std::vector<Line> lines;
  if (in.contains("lines")) {
    const auto& ls = in["lines"];
    if (!ls.is_array()) json_io::bad("$.lines", "expected an array");
    for (std::size_t k = 0; k < ls.size(); ++k) lines.push_back(get_line(ls[k], "$.lines[" + std::to_string(k) + "]"));
  }

  const auto affine = singular_points(field, box);
  const auto infinity = infinity_singularities(field);
  std::vector<TangencyCount> tangencies;
  for (const auto& l : lines) tangencies.push_back(count_tangencies(field, l));

  Json report;
  report["degree"] = field.degree();
  Json pts = Json::array();
  for (const auto& s : affine) {
    Json p;
    p["x"] = json_io::complex_json(s.x);
    p["y"] = json_io::complex_json(s.y);
    p["residual"] = s.residual;
    p["eigenvalues"] = Json::array({json_io::complex_json(s.verdict.denominator_eigenvalue),
                                    json_io::complex_json(s.verdict.numerator_eigenvalue)});
    p["lambda"] = json_io::complex_json(s.verdict.ratio);
    p["hyperbolic"] = s.verdict.hyperbolic;
    pts.push_back(p);
  }
  report["affine_singular_points"] = pts;
  Json inf;
  inf["convention"] = kCharacteristicConvention;
  Json ipts = Json::array();
  Complex sum{};
  bool all_defined = true;
  for (const auto& s : infinity) {
    Json p;
    p["direction"] = Json::array({json_io::complex_json(s.direction_x), json_io::complex_json(s.direction_y)});
    p["chart"] = s.chart == InfinityChart::U ? "u=y/x" : "s=x/y";
    p["coordinate"] = json_io::complex_json(s.coordinate);
    p["line_eigenvalue"] = json_io::complex_json(s.line_eigenvalue);
    p["transversal_eigenvalue"] = json_io::complex_json(s.transversal_eigenvalue);
    p["lambda"] = maybe_number(s.lambda);
    p["multiplicity"] = s.multiplicity;
    p["non_generic"] = s.non_generic;
    p["hyperbolic"] = s.hyperbolic;
    ipts.push_back(p);
    // The index sum is only reported when every point is simple.
    if (s.lambda && s.multiplicity == 1) sum += *s.lambda;
    else all_defined = false;
  }
  inf["points"] = ipts;
  inf["count_with_multiplicity"] = std::accumulate(infinity.begin(), infinity.end(), 0,
                                                   [](int a, const InfinitySingularity& s) { return a + s.multiplicity; });
  inf["lambda_sum"] = all_defined ? json_io::complex_json(sum) : Json(nullptr);
  report["infinity"] = inf;
  Json tans = Json::array();
  for (std::size_t k = 0; k < tangencies.size(); ++k) {
    const auto& t = tangencies[k];
    Json e;
    e["line"] = Json{{"point", Json::array({json_io::complex_json(lines[k].px), json_io::complex_json(lines[k].py)})},
                     {"direction", Json::array({json_io::complex_json(lines[k].dx), json_io::complex_json(lines[k].dy)})}};
    e["affine"] = t.affine;
    e["at_infinity"] = t.at_infinity;
    e["projective_degree"] = t.projective_degree;
    e["b_class"] = t.b_class;
    Json tp = Json::array();
    for (const auto& p : t.points) tp.push_back(Json::array({json_io::complex_json(p[0]), json_io::complex_json(p[1])}));
    e["points"] = tp;
    tans.push_back(e);
  }
  report["tangencies"] = tans;

  if (o.format == "csv") {
    std::ostringstream os;
    os << "kind,re_x,im_x,re_y,im_y,re_lambda,im_lambda,multiplicity,hyperbolic\n";
    for (const auto& s : affine)
      os << "affine," << number(s.x.real()) << ',' << number(s.x.imag()) << ',' << number(s.y.real()) << ','
         << number(s.y.imag()) << ',' << number(s.verdict.ratio.real()) << ',' << number(s.verdict.ratio.imag()) << ",1,"
         << (s.verdict.hyperbolic ? 1 : 0) << '\n';
    for (const auto& s : infinity) {
      const Complex l = s.lambda.value_or(Complex{std::nan(""), std::nan("")});
      os << "infinity," << number(s.direction_x.real()) << ',' << number(s.direction_x.imag()) << ','
         << number(s.direction_y.real()) << ',' << number(s.direction_y.imag()) << ',' << number(l.real()) << ','
         << number(l.imag()) << ',' << s.multiplicity << ',' << (s.hyperbolic ? 1 : 0) << '\n';
    }
    write_file(output_path(o, "analyze.csv"), os.str());
  } else {
    write_file(output_path(o, "analyze.json"), json_io::to_text(report));
  }
  std::cout << "analyze: " << affine.size() << " affine singular point(s), " << infinity.size()
            << " point(s) at infinity, " << tangencies.size() << " line(s)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// holonomy
// ---------------------------------------------------------------------------

BaseCoordinate get_base(const Json& j, const std::string& path) {
  if (!j.contains("base")) return BaseCoordinate::First;
  const auto& b = j["base"];
  if (b == "x" || b == "z") return BaseCoordinate::First;
  if (b == "y" || b == "w") return BaseCoordinate::Second;
  json_io::bad(path + ".base", "expected \"x\" or \"y\"");
}

LocalLinearModel get_model(const Json& j, const std::string& path) {
  Complex lambda;
  if (j.contains("lambda")) {
    lambda = json_io::get_complex(j["lambda"], path + ".lambda");
  } else if (j.contains("jacobian")) {
    const auto& m = j["jacobian"];
    if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() || m[0].size() != 2 || m[1].size() != 2)
      json_io::bad(path + ".jacobian", "expected [[a, b], [c, d]]");
    const Matrix2 jac{json_io::get_complex(m[0][0], path + ".jacobian[0][0]"), json_io::get_complex(m[0][1], path + ".jacobian[0][1]"),
                      json_io::get_complex(m[1][0], path + ".jacobian[1][0]"), json_io::get_complex(m[1][1], path + ".jacobian[1][1]")};
    const auto v = is_complex_hyperbolic(jac);
    if (!v.hyperbolic) fail(ErrorCode::NotComplexHyperbolic, "the Jacobian at the singular point is not complex hyperbolic");
    lambda = v.ratio;
  } else {
    json_io::bad(path, "missing key \"lambda\" (or \"jacobian\")");
  }
  const double zr = j.contains("z_radius") ? json_io::get_double(j["z_radius"], path + ".z_radius") : 1.0;
  const double wr = j.contains("w_radius") ? json_io::get_double(j["w_radius"], path + ".w_radius") : 1.0;
  return LocalLinearModel(lambda, zr, wr);
}

int cmd_holonomy(const Options& o) {
  const NumericConfig cfg = make_config(o);
  const Json in = read_json(o.input);
  std::optional<Foliation> fol;
  if (in.contains("field")) fol = json_io::get_field(in["field"], "$.field");
  else if (in.contains("model")) fol = get_model(in["model"], "$.model");
  else json_io::bad("$", "missing key \"field\" (or \"model\")");
  const BasePath path = json_io::get_path(json_io::member(in, "$", "path"), "$.path");
  const BaseCoordinate base = get_base(in, "$");
  std::vector<Complex> points;
  if (in.contains("points")) {
    const auto& ps = in["points"];
    if (!ps.is_array()) json_io::bad("$.points", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k) points.push_back(json_io::get_complex(ps[k], "$.points[" + std::to_string(k) + "]"));
  } else {
    points.push_back(in.contains("anchor") ? json_io::get_complex(in["anchor"], "$.anchor") : Complex{});
  }

  Json rows = Json::array();
  std::ostringstream csv;
  csv << "re_w,im_w,re_value,im_value,re_derivative,im_derivative,estimated_error\n";
  for (Complex w : points) {
    const auto r = lift_path(*fol, path, w, cfg, {base, false});
    Json e;
    e["w"] = json_io::complex_json(w);
    e["value"] = json_io::complex_json(r.endpoint);
    e["derivative"] = json_io::complex_json(r.derivative);
    e["estimated_error"] = r.estimated_error;
    e["steps"] = r.steps;
    rows.push_back(e);
    csv << number(w.real()) << ',' << number(w.imag()) << ',' << number(r.endpoint.real()) << ','
        << number(r.endpoint.imag()) << ',' << number(r.derivative.real()) << ',' << number(r.derivative.imag()) << ','
        << number(r.estimated_error) << '\n';
  }
  if (o.format == "csv") {
    write_file(output_path(o, "holonomy.csv"), csv.str());
  } else {
    Json report;
    report["base"] = base == BaseCoordinate::First ? "x" : "y";
    report["points"] = rows;
    write_file(output_path(o, "holonomy.json"), json_io::to_text(report));
  }
  std::cout << "holonomy: " << points.size() << " point(s) transported\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cycles
// ---------------------------------------------------------------------------

struct CycleInput {
  LocalLinearModel model;
  GermMap germ;
  double radius;
};

CycleInput preset_input(const std::string& name) {
  if (name == "affine-demo") return {LocalLinearModel(kI), GermMap::affine(0.5, 0.2), 0.5};
  if (name == "moebius-demo") return {LocalLinearModel(kI), GermMap::moebius(0.2, 0.5, 0.3, 1.0), 0.5};
  throw ConfigError("unknown preset \"" + name + "\" (expected affine-demo or moebius-demo)");
}

GermMap get_germ(const Json& j, const std::string& path, double radius, const NumericConfig& cfg) {
  const auto& kind = json_io::member(j, path, "kind");
  auto c = [&](const char* key) { return json_io::get_complex(json_io::member(j, path, key), path + "." + key); };
  if (kind == "affine") return GermMap::affine(c("a"), c("b"));
  if (kind == "moebius") return GermMap::moebius(c("a"), c("b"), c("c"), c("d"));
  if (kind == "linear") return GermMap::linear(c("nu"));
  if (kind == "lifted") {
    const auto field = json_io::get_field(json_io::member(j, path, "field"), path + ".field");
    const auto bp = json_io::get_path(json_io::member(j, path, "path"), path + ".path");
    const Complex anchor = j.contains("anchor") ? json_io::get_complex(j["anchor"], path + ".anchor") : Complex{};
    return holonomy_germ(field, bp, CrossSection(radius, anchor), cfg, get_base(j, path));
  }
  json_io::bad(path + ".kind", "expected affine, moebius, linear or lifted");
}

Json certificate_json(const IndependenceCertificate& cert, const std::vector<int>& indices,
                      const std::vector<Complex>& integrals = {}, const std::vector<double>& errors = {}) {
  Json j;
  j["method"] = to_string(cert.method);
  Json entries = Json::array();
  for (std::size_t k = 0; k < cert.entries.size(); ++k) {
    const auto& e = cert.entries[k];
    Json r;
    r["j"] = e.j;
    r["n"] = indices[k];
    r["value"] = e.value;
    r["threshold"] = e.threshold;
    if (cert.method == CertificateMethod::Multiplier) {
      r["log_value"] = e.log_value;
      r["log_threshold"] = e.log_threshold;
      r["log_margin"] = e.margin;
    } else {
      r["integral"] = json_io::complex_json(integrals[k]);
      r["error"] = errors[k];
      r["margin"] = e.margin;
    }
    r["passed"] = e.passed;
    entries.push_back(r);
  }
  j["entries"] = entries;
  j["verdict"] = cert.certified ? "certified" : "not-certified";
  j["failing_j"] = cert.failing_j ? Json(*cert.failing_j) : Json(nullptr);
  j["caveats"] = cert.caveats;
  return j;
}

std::string certificate_csv(const IndependenceCertificate& cert, const std::vector<int>& indices) {
  std::ostringstream os;
  os << "j,n,value,threshold,margin,passed\n";
  for (std::size_t k = 0; k < cert.entries.size(); ++k) {
    const auto& e = cert.entries[k];
    os << e.j << ',' << indices[k] << ',' << number(e.value) << ',' << number(e.threshold) << ',' << number(e.margin)
       << ',' << (e.passed ? 1 : 0) << '\n';
  }
  return os.str();
}

IndependenceCertificate multiplier_certificate(const std::vector<double>& logs) {
  auto cert = certify_multipliers_log(logs);
  cert.caveats.push_back("moduli compared as sums of logarithms with margin 1e-6");
  return cert;
}

int cmd_cycles(const Options& o) {
  const NumericConfig cfg = make_config(o);
  if (o.count < 1) throw ConfigError("--count must be at least 1");
  std::string stage = "input";
  try {
    std::optional<CycleInput> input;
    if (!o.preset.empty()) {
      if (!o.input.empty()) throw ConfigError("give either a model file or --preset, not both");
      input = preset_input(o.preset);
    } else {
      if (o.input.empty()) throw ConfigError("cycles needs a model file or --preset");
      const Json in = read_json(o.input);
      const auto model = get_model(json_io::member(in, "$", "model"), "$.model");
      const double radius = in.contains("section_radius") ? json_io::get_double(in["section_radius"], "$.section_radius") : 0.5;
      if (!(radius > 0)) json_io::bad("$.section_radius", "must be positive");
      stage = "germ";
      input = CycleInput{model, get_germ(json_io::member(in, "$", "germ"), "$.germ", radius, cfg), radius};
    }
    const auto& [model, germ, radius] = *input;

    stage = "section";
    const auto section = shrink_section(germ, radius, model.nu(), cfg);
    stage = "contraction index";
    const auto restricted = restrict_germ(germ, germ.anchor(), section.radius);
    const int first = min_contracting_index(model.nu(), restricted, section.radius, cfg.boundary_samples);
    stage = "cycle construction";
    const auto fam = build_cycle_family(model, germ, radius, o.count, cfg, first);
    stage = "certification";
    const auto disjoint = certify_disjoint_family(fam, cfg);
    std::vector<double> logs;
    std::vector<int> indices;
    for (std::size_t k : fam.selected) {
      logs.push_back(fam.cycles[k].log_abs_mu);
      indices.push_back(fam.cycles[k].n);
    }
    const auto indep = multiplier_certificate(logs);

    Json out;
    out["model"] = Json{{"lambda", json_io::complex_json(model.lambda())},
                        {"nu", json_io::complex_json(model.nu())},
                        {"conjugated", model.conjugated()},
                        {"z_radius", model.z_radius()},
                        {"w_radius", model.w_radius()}};
    out["germ"] = germ.kind_name();
    out["section_radius"] = section.radius;
    out["section"] = Json{{"halvings", section.halvings},
                          {"log_margin", section.bound.log_margin},
                          {"univalence_winding", section.univalence.winding}};
    out["first_index"] = first;
    out["selected"] = indices;
    Json cycles = Json::array();
    for (const auto& c : fam.cycles) {
      Json e;
      e["n"] = c.n;
      e["p"] = json_io::complex_json(c.p);
      e["mu"] = json_io::complex_json(c.mu);
      e["log_abs_mu"] = c.log_abs_mu;
      e["residual"] = c.residual;
      e["iterations"] = c.iterations;
      e["closure_defect"] = c.curve.closure_defect;
      e["beta_samples"] = c.curve.beta_samples;
      Json ts = Json::array(), curve = Json::array();
      for (const auto& s : c.curve.samples) {
        ts.push_back(s.t);
        curve.push_back(Json::array({s.z.real(), s.z.imag(), s.w.real(), s.w.imag()}));
      }
      e["t"] = ts;
      e["curve"] = curve;
      cycles.push_back(e);
    }
    out["cycles"] = cycles;
    Json dc;
    dc["verdict"] = disjoint.verdict ? "passed" : "failed";
    Json clauses = Json::array();
    for (const auto& c : disjoint.clauses)
      clauses.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}, {"detail", c.detail}});
    dc["clauses"] = clauses;
    dc["caveats"] = disjoint.caveats;
    out["certificate"] = dc;

    write_file(output_path(o, "cycles.json"), json_io::to_text(out));
    if (o.format == "csv") write_file(output_path(o, "certificate.csv"), certificate_csv(indep, indices));
    else write_file(output_path(o, "certificate.json"), json_io::to_text(certificate_json(indep, indices)));

    std::cout << "cycles: " << fam.cycles.size() << " cycle(s) from n = " << first << ", section radius "
              << number(section.radius) << "\n"
              << "disjointness: " << (disjoint.verdict ? "passed" : "failed");
    if (const auto* bad = disjoint.failing()) std::cout << " (" << bad->name << ": " << bad->detail << ")";
    std::cout << "\nindependence (multiplier, " << indices.size() << " selected): "
              << (indep.certified ? "certified" : "not-certified") << "\n";
    return disjoint.verdict && indep.certified ? kExitOk : kExitNegative;
  } catch (const Error& e) {
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    std::string what = e.what();
    if (what.rfind(prefix, 0) == 0) what.erase(0, prefix.size());
    throw Error(e.code(), "stage " + stage + ": " + what);
  }
}

// ---------------------------------------------------------------------------
// certify / plotdata
// ---------------------------------------------------------------------------

std::vector<PathSample> read_curve(const Json& c, const std::string& path) {
  const auto& ts = json_io::member(c, path, "t");
  const auto& curve = json_io::member(c, path, "curve");
  if (!ts.is_array() || !curve.is_array() || ts.size() != curve.size())
    json_io::bad(path, "\"t\" and \"curve\" must be arrays of equal length");
  std::vector<PathSample> out;
  out.reserve(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const std::string p = path + ".curve[" + std::to_string(k) + "]";
    const auto& row = curve[k];
    if (!row.is_array() || row.size() != 4) json_io::bad(p, "expected [re z, im z, re w, im w]");
    const Complex z{json_io::get_double(row[0], p + "[0]"), json_io::get_double(row[1], p + "[1]")};
    const Complex w{json_io::get_double(row[2], p + "[2]"), json_io::get_double(row[3], p + "[3]")};
    out.push_back({json_io::get_double(ts[k], path + ".t[" + std::to_string(k) + "]"), z, w, outside_closed_unit_bidisc(z, w)});
  }
  return out;
}

const Json& read_cycles(const Json& in) {
  const auto& cycles = json_io::member(in, "$", "cycles");
  if (!cycles.is_array()) json_io::bad("$.cycles", "expected an array");
  return cycles;
}

int cmd_certify(const Options& o) {
  if (o.method != "multiplier" && o.method != "integral") throw ConfigError("--method must be multiplier or integral");
  const Json in = read_json(o.input);
  const auto& cycles = read_cycles(in);
  std::vector<double> logs;
  std::vector<int> ns;
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    const std::string p = "$.cycles[" + std::to_string(k) + "]";
    logs.push_back(json_io::get_double(json_io::member(cycles[k], p, "log_abs_mu"), p + ".log_abs_mu"));
    ns.push_back(json_io::get_int(json_io::member(cycles[k], p, "n"), p + ".n"));
  }
  const auto selected = select_subsequence_log(logs);
  std::vector<int> indices;
  for (std::size_t k : selected) indices.push_back(ns[k]);

  IndependenceCertificate cert;
  Json report;
  if (o.method == "multiplier") {
    std::vector<double> sel;
    for (std::size_t k : selected) sel.push_back(logs[k]);
    cert = multiplier_certificate(sel);
    report = certificate_json(cert, indices);
  } else {
    const auto& m = json_io::member(in, "$", "model");
    const LocalLinearModel model(json_io::get_complex(json_io::member(m, "$.model", "lambda"), "$.model.lambda"),
                                 m.contains("z_radius") ? json_io::get_double(m["z_radius"], "$.model.z_radius") : 1.0,
                                 m.contains("w_radius") ? json_io::get_double(m["w_radius"], "$.model.w_radius") : 1.0);
    std::vector<Complex> values;
    std::vector<double> errors;
    for (std::size_t k : selected) {
      Representative rep;
      rep.samples = read_curve(cycles[k], "$.cycles[" + std::to_string(k) + "]");
      const auto est = cycle_integral(rep, model);
      values.push_back(est.value);
      errors.push_back(est.error);
    }
    cert = certify_integrals(values, errors);
    cert.caveats.push_back("integrals of x dy - y dx in the ambient chart; allowance 10x the quadrature error estimate");
    report = certificate_json(cert, indices, values, errors);
  }
  if (o.format == "csv") write_file(output_path(o, "certificate.csv"), certificate_csv(cert, indices));
  else write_file(output_path(o, "certificate.json"), json_io::to_text(report));
  std::cout << "certify (" << o.method << ", " << indices.size() << " selected): "
            << (cert.certified ? "certified" : "not-certified") << "\n";
  return cert.certified ? kExitOk : kExitNegative;
}

int cmd_plotdata(const Options& o) {
  const Json in = read_json(o.input);
  const auto& cycles = read_cycles(in);
  for (std::size_t k = 0; k < cycles.size(); ++k) {
    const std::string p = "$.cycles[" + std::to_string(k) + "]";
    const int n = json_io::get_int(json_io::member(cycles[k], p, "n"), p + ".n");
    std::ostringstream os;
    write_samples_csv(os, read_curve(cycles[k], p));
    write_file(output_path(o, "cycle_" + std::to_string(n) + ".csv"), os.str());
  }
  std::cout << "plotdata: " << cycles.size() << " file(s)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limit cycles near complex hyperbolic singular points of polynomial foliations"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_tolerances = [&](CLI::App* sub) {
    sub->add_option("--tol-ode", o.tol_ode, "Relative tolerance of leaf integration");
    sub->add_option("--tol-fixed", o.tol_fixed, "Fixed point residual tolerance");
  };

  auto* analyze = app.add_subcommand("analyze", "Singular points, points at infinity and tangencies of a field");
  analyze->add_option("field", o.input, "Field JSON")->required();
  add_common(analyze);

  auto* holonomy = app.add_subcommand("holonomy", "Transport transversal points along a base path");
  holonomy->add_option("input", o.input, "Holonomy JSON")->required();
  add_common(holonomy);
  add_tolerances(holonomy);

  auto* cycles = app.add_subcommand("cycles", "Build a family of limit cycles and certify it");
  cycles->add_option("model", o.input, "Model JSON");
  cycles->add_option("--preset", o.preset, "Built-in germ: affine-demo or moebius-demo");
  cycles->add_option("--count", o.count, "Number of cycles");
  add_common(cycles);
  add_tolerances(cycles);

  auto* certify = app.add_subcommand("certify", "Re-run the independence certificate on cycles.json");
  certify->add_option("cycles", o.input, "cycles.json")->required();
  certify->add_option("--method", o.method, "multiplier or integral");
  add_common(certify);

  auto* plotdata = app.add_subcommand("plotdata", "One CSV of samples per cycle");
  plotdata->add_option("cycles", o.input, "cycles.json")->required();
  add_common(plotdata);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*analyze) return cmd_analyze(o);
    if (*holonomy) return cmd_holonomy(o);
    if (*cycles) return cmd_cycles(o);
    if (*certify) return cmd_certify(o);
    if (*plotdata) return cmd_plotdata(o);
  } catch (const Error& e) {
    std::cerr << "holocycles: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const ConfigError& e) {
    std::cerr << "holocycles: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "holocycles: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
