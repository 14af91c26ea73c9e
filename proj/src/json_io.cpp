#include "momidx/json_io.hpp"

#include <cmath>
#include <string_view>

#include "momidx/errors.hpp"

namespace momidx {

namespace {

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(child(path, key), "missing required field");
  return *it;
}

template <class T>
T optional_field(const Json& j, const char* key, const std::string& path, T fallback,
                 T (*read)(const Json&, const std::string&)) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : read(*it, child(path, key));
}

}  // namespace

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(child(path, key), "unknown field");
  }
}

double number_from_json(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

std::size_t count_from_json(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ConfigError(path, "expected a nonnegative integer");
  return static_cast<std::size_t>(j.get<long long>());
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {number_from_json(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a complex number [re, im]");
  return {number_from_json(j[0], item(path, 0)), number_from_json(j[1], item(path, 1))};
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------------------

DensitySpec density_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected a density object");
  if (j.contains("family")) {
    reject_unknown_keys(j, {"family", "params"}, path);
    const Json& name = j["family"];
    if (!name.is_string()) throw ConfigError(child(path, "family"), "expected a string");
    NamedDensity d{name.get<std::string>(), {}};
    if (j.contains("params")) {
      const Json& p = j["params"];
      if (!p.is_array()) throw ConfigError(child(path, "params"), "expected an array");
      for (std::size_t i = 0; i < p.size(); ++i)
        d.params.push_back(number_from_json(p[i], item(child(path, "params"), i)));
    }
    return DensitySpec(d);
  }
  if (j.contains("fourier")) {
    reject_unknown_keys(j, {"fourier"}, path);
    const Json& f = j["fourier"];
    const std::string fpath = child(path, "fourier");
    if (!f.is_object() || f.empty()) throw ConfigError(fpath, "expected a nonempty object of orders");
    std::map<int, Complex> coeffs;
    for (const auto& [key, value] : f.items()) {
      std::size_t used = 0;
      int order = 0;
      try {
        order = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || key.empty()) throw ConfigError(child(fpath, key), "order must be an integer");
      coeffs[order] = complex_from_json(value, child(fpath, key));
    }
    return DensitySpec::fourier(std::move(coeffs));
  }
  if (j.contains("samples")) {
    reject_unknown_keys(j, {"samples"}, path);
    const Json& s = j["samples"];
    if (!s.is_array()) throw ConfigError(child(path, "samples"), "expected an array");
    std::vector<double> values;
    values.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) values.push_back(number_from_json(s[i], item(child(path, "samples"), i)));
    return DensitySpec::sampled(std::move(values));
  }
  throw ConfigError(path, "density needs one of family, fourier or samples");
}

Json density_to_json(const DensitySpec& d) {
  return std::visit(
      [](const auto& f) -> Json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, NamedDensity>) {
          return Json{{"family", f.name}, {"params", f.params}};
        } else if constexpr (std::is_same_v<T, FourierDensity>) {
          Json c = Json::object();
          for (const auto& [k, v] : f.coeffs) c[std::to_string(k)] = complex_to_json(v);
          return Json{{"fourier", c}};
        } else {
          return Json{{"samples", f.values}};
        }
      },
      d.form());
}

// ---------------------------------------------------------------------------

CurveFamily curve_from_json(const Json& j, const std::string& path) {
  const Json& type = require(j, "type", path);
  if (!type.is_string()) throw ConfigError(child(path, "type"), "expected a string");
  const std::string t = type.get<std::string>();
  const Complex center = j.contains("center") ? complex_from_json(j["center"], child(path, "center")) : Complex{};
  const double rotation = optional_field<double>(j, "rotation", path, 0.0, number_from_json);
  if (t == "circle") {
    reject_unknown_keys(j, {"type", "center", "radius", "rotation"}, path);
    const double radius = optional_field<double>(j, "radius", path, 1.0, number_from_json);
    return CircleCurve{center, radius, rotation};
  }
  if (t == "ellipse") {
    reject_unknown_keys(j, {"type", "center", "semiaxes", "rotation"}, path);
    const Json& axes = require(j, "semiaxes", path);
    const std::string apath = child(path, "semiaxes");
    if (!axes.is_array() || axes.size() != 2) throw ConfigError(apath, "expected [a, b]");
    return EllipseCurve{center, number_from_json(axes[0], item(apath, 0)), number_from_json(axes[1], item(apath, 1)),
                        rotation};
  }
  throw ConfigError(child(path, "type"), "unknown curve type '" + t + "'");
}

Json curve_to_json(const CurveFamily& c) {
  if (const auto* circle = std::get_if<CircleCurve>(&c.shape()))
    return Json{{"type", "circle"},
                {"center", complex_to_json(circle->center)},
                {"radius", circle->radius},
                {"rotation", circle->rotation}};
  const auto& e = std::get<EllipseCurve>(c.shape());
  return Json{{"type", "ellipse"},
              {"center", complex_to_json(e.center)},
              {"semiaxes", Json::array({e.semi_a, e.semi_b})},
              {"rotation", e.rotation}};
}

// ---------------------------------------------------------------------------

MeasureSpec measure_from_json(const Json& j, const std::string& path) {
  const Json& type = require(j, "type", path);
  if (!type.is_string()) throw ConfigError(child(path, "type"), "expected a string");
  const std::string t = type.get<std::string>();

  if (t == "circle_density") {
    reject_unknown_keys(j, {"type", "density", "radius", "center", "rotation"}, path);
    CircleDensity c;
    c.density = density_from_json(require(j, "density", path), child(path, "density"));
    c.radius = optional_field<double>(j, "radius", path, 1.0, number_from_json);
    if (j.contains("center")) c.center = complex_from_json(j["center"], child(path, "center"));
    c.rotation = optional_field<double>(j, "rotation", path, 0.0, number_from_json);
    return c;
  }
  if (t == "curve_density") {
    reject_unknown_keys(j, {"type", "curve", "density"}, path);
    CurveDensity c;
    c.curve = curve_from_json(require(j, "curve", path), child(path, "curve"));
    c.density = density_from_json(require(j, "density", path), child(path, "density"));
    return c;
  }
  if (t == "atomic") {
    reject_unknown_keys(j, {"type", "atoms", "declared_tail_mass", "support_radius_bound"}, path);
    AtomicMeasure a;
    const Json& atoms = require(j, "atoms", path);
    const std::string apath = child(path, "atoms");
    if (!atoms.is_array()) throw ConfigError(apath, "expected an array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string p = item(apath, i);
      reject_unknown_keys(atoms[i], {"point", "weight"}, p);
      a.atoms.push_back({complex_from_json(require(atoms[i], "point", p), child(p, "point")),
                         number_from_json(require(atoms[i], "weight", p), child(p, "weight"))});
    }
    a.declared_tail_mass = optional_field<double>(j, "declared_tail_mass", path, 0.0, number_from_json);
    if (j.contains("support_radius_bound")) {
      a.support_radius_bound = number_from_json(j["support_radius_bound"], child(path, "support_radius_bound"));
    } else if (a.declared_tail_mass > 0.0) {
      throw ConfigError(child(path, "support_radius_bound"), "required when declared_tail_mass > 0");
    } else {
      double r = 0.0;
      for (const Atom& atom : a.atoms) r = std::max(r, std::abs(atom.point));
      a.support_radius_bound = std::max(r, 1e-300);
    }
    return a;
  }
  if (t == "sum") {
    reject_unknown_keys(j, {"type", "parts"}, path);
    SumMeasure s;
    const Json& parts = require(j, "parts", path);
    const std::string ppath = child(path, "parts");
    if (!parts.is_array()) throw ConfigError(ppath, "expected an array");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string p = item(ppath, i);
      reject_unknown_keys(parts[i], {"measure", "scale"}, p);
      s.parts.push_back({measure_from_json(require(parts[i], "measure", p), child(p, "measure")),
                         optional_field<double>(parts[i], "scale", p, 1.0, number_from_json)});
    }
    return s;
  }
  throw ConfigError(child(path, "type"), "unknown measure type '" + t + "'");
}

Json measure_to_json(const MeasureSpec& m) {
  if (const auto* c = m.as<CircleDensity>())
    return Json{{"type", "circle_density"},
                {"density", density_to_json(c->density)},
                {"radius", c->radius},
                {"center", complex_to_json(c->center)},
                {"rotation", c->rotation}};
  if (const auto* c = m.as<CurveDensity>())
    return Json{{"type", "curve_density"}, {"curve", curve_to_json(c->curve)}, {"density", density_to_json(c->density)}};
  if (const auto* a = m.as<AtomicMeasure>()) {
    Json atoms = Json::array();
    for (const Atom& atom : a->atoms) atoms.push_back(Json{{"point", complex_to_json(atom.point)}, {"weight", atom.weight}});
    return Json{{"type", "atomic"},
                {"atoms", atoms},
                {"declared_tail_mass", a->declared_tail_mass},
                {"support_radius_bound", a->support_radius_bound}};
  }
  const auto& s = std::get<SumMeasure>(m.variant());
  Json parts = Json::array();
  for (const SumPart& p : s.parts) parts.push_back(Json{{"measure", measure_to_json(p.measure)}, {"scale", p.scale}});
  return Json{{"type", "sum"}, {"parts", parts}};
}

// ---------------------------------------------------------------------------

HermitianSection matrix_from_json(const Json& j, const std::string& path) {
  reject_unknown_keys(j, {"entries"}, path);
  const Json& rows = require(j, "entries", path);
  const std::string epath = child(path, "entries");
  if (!rows.is_array() || rows.empty()) throw ConfigError(epath, "expected a nonempty array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Json& row = rows[static_cast<std::size_t>(r)];
    const std::string rpath = item(epath, static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw ConfigError(rpath, "expected a row of length " + std::to_string(n));
    for (Eigen::Index c = 0; c < n; ++c)
      m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)], item(rpath, static_cast<std::size_t>(c)));
  }
  try {
    return HermitianSection::from_matrix(m);
  } catch (const Error& e) {
    throw ConfigError(epath, e.what());
  }
}

Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace momidx
