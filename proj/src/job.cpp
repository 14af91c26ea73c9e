#include "momidx/job.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

#include "momidx/errors.hpp"

namespace momidx {

namespace fs = std::filesystem;

std::string to_string(Command c) {
  switch (c) {
    case Command::Indexes: return "indexes";
    case Command::Szego: return "szego";
    case Command::Density: return "density";
    case Command::Bpe: return "bpe";
    case Command::Map: return "map";
    case Command::Transform: return "transform";
    case Command::Moments: return "moments";
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::Indexes, Command::Szego, Command::Density, Command::Bpe, Command::Map,
                    Command::Transform, Command::Moments})
    if (to_string(c) == name) return c;
  throw ConfigError("command", "unknown command '" + name + "'");
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

Json read_json_file(const fs::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(field, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

bool bool_from_json(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::pair<double, double> range_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [min, max]");
  return {number_from_json(j[0], path + "[0]"), number_from_json(j[1], path + "[1]")};
}

GridSpec grid_from_json(const Json& j) {
  reject_unknown_keys(j, {"re_range", "im_range", "steps"}, "grid");
  for (const char* key : {"re_range", "im_range", "steps"})
    if (!j.contains(key)) throw ConfigError(std::string("grid.") + key, "missing required field");
  GridSpec g;
  std::tie(g.re_min, g.re_max) = range_from_json(j["re_range"], "grid.re_range");
  std::tie(g.im_min, g.im_max) = range_from_json(j["im_range"], "grid.im_range");
  const Json& steps = j["steps"];
  if (steps.is_array()) {
    if (steps.size() != 2) throw ConfigError("grid.steps", "expected n or [n_re, n_im]");
    g.re_steps = count_from_json(steps[0], "grid.steps[0]");
    g.im_steps = count_from_json(steps[1], "grid.steps[1]");
  } else {
    g.re_steps = g.im_steps = count_from_json(steps, "grid.steps");
  }
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("grid", e.what());
  }
  return g;
}

Tolerances tolerances_from_json(const Json& j) {
  reject_unknown_keys(j, {"zero_tol", "rel_stall_tol", "window", "pivot_tol", "audit_tol", "quadrature"},
                      "tolerances");
  Tolerances t;
  if (j.contains("zero_tol")) t.limits.zero_tol = number_from_json(j["zero_tol"], "tolerances.zero_tol");
  if (j.contains("rel_stall_tol"))
    t.limits.rel_stall_tol = number_from_json(j["rel_stall_tol"], "tolerances.rel_stall_tol");
  if (j.contains("window")) t.limits.window = count_from_json(j["window"], "tolerances.window");
  if (j.contains("pivot_tol")) t.pivot_tol = number_from_json(j["pivot_tol"], "tolerances.pivot_tol");
  if (j.contains("audit_tol")) t.audit_tol = number_from_json(j["audit_tol"], "tolerances.audit_tol");
  if (j.contains("quadrature")) {
    const Json& q = j["quadrature"];
    reject_unknown_keys(q, {"initial_nodes", "max_nodes", "rel_tol"}, "tolerances.quadrature");
    if (q.contains("initial_nodes"))
      t.quadrature.initial_nodes = count_from_json(q["initial_nodes"], "tolerances.quadrature.initial_nodes");
    if (q.contains("max_nodes"))
      t.quadrature.max_nodes = count_from_json(q["max_nodes"], "tolerances.quadrature.max_nodes");
    if (q.contains("rel_tol")) t.quadrature.rel_tol = number_from_json(q["rel_tol"], "tolerances.quadrature.rel_tol");
  }
  try {
    t.limits.validate();
  } catch (const Error& e) {
    // Messages lead with the offending key.
    const std::string msg = e.what();
    throw ConfigError("tolerances." + msg.substr(0, msg.find(' ')), msg);
  }
  try {
    t.quadrature.validate();
  } catch (const Error& e) {
    throw ConfigError("tolerances.quadrature", e.what());
  }
  if (!(t.pivot_tol >= 0.0)) throw ConfigError("tolerances.pivot_tol", "must be nonnegative");
  if (!(t.audit_tol >= 0.0)) throw ConfigError("tolerances.audit_tol", "must be nonnegative");
  return t;
}

Json tolerances_to_json(const Tolerances& t) {
  return Json{{"zero_tol", t.limits.zero_tol},
              {"rel_stall_tol", t.limits.rel_stall_tol},
              {"window", t.limits.window},
              {"pivot_tol", t.pivot_tol},
              {"audit_tol", t.audit_tol},
              {"quadrature",
               {{"initial_nodes", t.quadrature.initial_nodes},
                {"max_nodes", t.quadrature.max_nodes},
                {"rel_tol", t.quadrature.rel_tol}}}};
}

}  // namespace

JobConfig parse_config(const Json& doc, const fs::path& base_dir) {
  reject_unknown_keys(doc,
                      {"command", "measure", "toeplitz", "matrix", "N", "z0", "z_ref", "override_applicability",
                       "grid", "map", "tolerances", "crosscheck", "output_dir"},
                      "");
  JobConfig c;
  if (!doc.contains("command")) throw ConfigError("command", "missing required field");
  if (!doc["command"].is_string()) throw ConfigError("command", "expected a string");
  c.command = command_from_string(doc["command"].get<std::string>());

  const int sources = static_cast<int>(doc.contains("measure")) + static_cast<int>(doc.contains("toeplitz")) +
                      static_cast<int>(doc.contains("matrix"));
  if (sources != 1) throw ConfigError("measure", "give exactly one of measure, toeplitz or matrix");

  if (doc.contains("measure")) {
    c.measure = measure_from_json(doc["measure"], "measure");
    try {
      c.measure->validate();
    } catch (const Error& e) {
      throw ConfigError("measure", e.what());
    }
  } else if (doc.contains("toeplitz")) {
    c.toeplitz = density_from_json(doc["toeplitz"], "toeplitz");
    try {
      c.toeplitz->validate();
    } catch (const Error& e) {
      throw ConfigError("toeplitz", e.what());
    }
    if (c.toeplitz->is_sampled()) throw ConfigError("toeplitz", "a Toeplitz symbol needs a family or Fourier coefficients");
  } else {
    const Json& m = doc["matrix"];
    if (m.is_string()) {
      c.matrix_path = m.get<std::string>();
      fs::path p(c.matrix_path);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      c.matrix = matrix_from_json(read_json_file(p, "matrix"), "matrix");
    } else {
      c.matrix = matrix_from_json(m, "matrix");
    }
  }

  if (!doc.contains("N")) throw ConfigError("N", "missing required field");
  c.order = count_from_json(doc["N"], "N");
  if (c.order < 1) throw ConfigError("N", "must be at least 1");

  if (doc.contains("z0")) c.z0 = complex_from_json(doc["z0"], "z0");
  if (doc.contains("z_ref")) c.z_ref = complex_from_json(doc["z_ref"], "z_ref");
  if (doc.contains("override_applicability"))
    c.override_applicability = bool_from_json(doc["override_applicability"], "override_applicability");
  if (doc.contains("grid")) c.grid = grid_from_json(doc["grid"]);
  if (doc.contains("map")) {
    const Json& m = doc["map"];
    reject_unknown_keys(m, {"alpha", "beta"}, "map");
    const Complex alpha = m.contains("alpha") ? complex_from_json(m["alpha"], "map.alpha") : Complex(1.0, 0.0);
    const Complex beta = m.contains("beta") ? complex_from_json(m["beta"], "map.beta") : Complex(0.0, 0.0);
    try {
      c.map = AffineMap(alpha, beta);
    } catch (const InvalidArgument& e) {
      throw ConfigError("map.alpha", e.what());
    }
  }
  if (doc.contains("tolerances")) c.tolerances = tolerances_from_json(doc["tolerances"]);
  if (doc.contains("crosscheck")) c.crosscheck = bool_from_json(doc["crosscheck"], "crosscheck");
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }

  switch (c.command) {
    case Command::Bpe:
      if (!c.z0) throw ConfigError("z0", "required for bpe");
      break;
    case Command::Map:
      if (!c.grid) throw ConfigError("grid", "required for map");
      break;
    case Command::Transform:
      if (!c.map) throw ConfigError("map", "required for transform");
      break;
    case Command::Szego:
    case Command::Density:
    case Command::Moments:
      if (!c.measure) throw ConfigError("measure", "required for " + to_string(c.command));
      break;
    case Command::Indexes:
      break;
  }
  return c;
}

JobConfig load_config(const std::string& path) {
  if (path == "-") {
    try {
      return parse_config(Json::parse(std::cin), fs::current_path());
    } catch (const Json::exception& e) {
      throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
    }
  }
  const fs::path p(path);
  return parse_config(read_json_file(p, "config"), p.parent_path());
}

MatrixOracle JobConfig::oracle() const {
  if (measure) return MatrixOracle::moment(*measure, tolerances.quadrature);
  if (toeplitz) return MatrixOracle::toeplitz(*toeplitz);
  return MatrixOracle::explicit_matrix(*matrix);
}

Json JobConfig::echo() const {
  Json j;
  j["command"] = to_string(command);
  j["N"] = order;
  if (measure) j["measure"] = measure_to_json(*measure);
  if (toeplitz) j["toeplitz"] = density_to_json(*toeplitz);
  if (matrix) {
    if (!matrix_path.empty())
      j["matrix"] = matrix_path;
    else
      j["matrix"] = Json{{"entries", matrix_to_json(matrix->matrix())}};
  }
  if (z0) j["z0"] = complex_to_json(*z0);
  if (command == Command::Density) {
    j["z_ref"] = complex_to_json(z_ref);
    j["override_applicability"] = override_applicability;
  }
  if (grid)
    j["grid"] = Json{{"re_range", {grid->re_min, grid->re_max}},
                     {"im_range", {grid->im_min, grid->im_max}},
                     {"steps", {grid->re_steps, grid->im_steps}}};
  if (map) j["map"] = Json{{"alpha", complex_to_json(map->alpha())}, {"beta", complex_to_json(map->beta())}};
  j["tolerances"] = tolerances_to_json(tolerances);
  if (command == Command::Bpe) j["crosscheck"] = crosscheck;
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  return j;
}

// ---------------------------------------------------------------------------
// Serialization helpers
// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json estimate_to_json(const LimitEstimate& e) {
  return Json{{"value", number_or_null(e.value)},
              {"status", to_string(e.status)},
              {"window", e.window},
              {"residual", number_or_null(e.residual)}};
}

Json breakdown_to_json(const std::optional<Breakdown>& b) {
  if (!b) return nullptr;
  return Json{{"order", b->order}, {"pivot", b->pivot}, {"reason", b->reason}};
}

Json verdict_to_json(const Verdict& v) {
  Json j{{"question", to_string(v.question)},
         {"answer", to_string(v.answer)},
         {"value", number_or_null(v.basis.value)},
         {"status", to_string(v.basis.status)},
         {"window", v.basis.window},
         {"residual", number_or_null(v.basis.residual)},
         {"applicability_note", v.applicability_note},
         {"z0", complex_to_json(v.z0)},
         {"requested_order", v.requested_order},
         {"order_reached", v.order_reached},
         {"breakdown", breakdown_to_json(v.sequence.breakdown)},
         {"warnings", v.warnings}};
  j["certificate"] = v.certificate ? Json{{"lower_bound", v.certificate->lower_bound},
                                          {"reason", v.certificate->reason}}
                                   : Json(nullptr);
  j["evaluation_constant"] = v.evaluation_constant ? Json(*v.evaluation_constant) : Json(nullptr);
  return j;
}

Json audit_to_json(const AuditReport& a) {
  Json failures = Json::array();
  for (const AuditRow& r : a.rows)
    if (!r.lambda_le_gamma || !r.lambda_le_alpha)
      failures.push_back(Json{{"order", r.order},
                              {"lambda", r.lambda},
                              {"gamma", r.gamma},
                              {"alpha_inf", r.alpha_inf}});
  Json part_failures = Json::array();
  for (const PartCheck& c : a.part_checks)
    if (!c.passed)
      part_failures.push_back(Json{{"part", c.part},
                                   {"order", c.order},
                                   {"index", to_string(c.index)},
                                   {"sum_value", c.sum_value},
                                   {"part_value", c.part_value}});
  return Json{{"passed", a.passed},
              {"tol", a.tol},
              {"orders_checked", a.rows.size()},
              {"part_checks", a.part_checks.size()},
              {"failures", failures},
              {"part_failures", part_failures}};
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
  if (dynamic_cast<const NegativeDensity*>(&e)) return "NegativeDensity";
  if (dynamic_cast<const InvalidMeasure*>(&e)) return "InvalidMeasure";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
  if (dynamic_cast<const IndexOutOfRange*>(&e)) return "IndexOutOfRange";
  if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
  if (dynamic_cast<const NoConvergence*>(&e)) return "NoConvergence";
  if (dynamic_cast<const NonConvergedQuadrature*>(&e)) return "NonConvergedQuadrature";
  if (dynamic_cast<const Overflow*>(&e)) return "Overflow";
  if (dynamic_cast<const TooShort*>(&e)) return "TooShort";
  if (dynamic_cast<const SingularSystem*>(&e)) return "SingularSystem";
  if (dynamic_cast<const NotOnCircle*>(&e)) return "NotOnCircle";
  if (dynamic_cast<const NotApplicable*>(&e)) return "NotApplicable";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "InternalError";
}

Json error_to_json(const std::exception& e) {
  Json j{{"type", error_type(e)}, {"message", e.what()}};
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) j["field"] = c->field();
  return j;
}

Json base_document(const std::string& command) {
  return Json{{"schema_version", kReportSchemaVersion},
              {"tool", {{"name", "momidx"}, {"version", kToolVersion}}},
              {"command", command},
              {"estimates", Json::object()},
              {"verdicts", Json::array()},
              {"audit", nullptr},
              {"warnings", Json::array()},
              {"outputs", Json::array()},
              {"error", nullptr}};
}

// Accumulates the pieces of one run.
struct Context {
  const JobConfig& config;
  std::size_t order;
  std::uint64_t seed;
  Json doc;
  std::map<std::string, std::string> files;
  std::vector<std::string> warnings;
  std::vector<LimitStatus> statuses;
  std::size_t order_reached = 0;

  void warn(const std::vector<std::string>& ws) { warnings.insert(warnings.end(), ws.begin(), ws.end()); }

  void add_estimate(const std::string& name, const IndexSequence& s) {
    try {
      const LimitEstimate e = estimate_limit(s, config.tolerances.limits);
      doc["estimates"][name] = estimate_to_json(e);
      statuses.push_back(e.status);
    } catch (const TooShort& e) {
      doc["estimates"][name] = Json{{"value", s.empty() ? Json(nullptr) : number_or_null(s.last())},
                                    {"status", to_string(LimitStatus::Inconclusive)},
                                    {"window", config.tolerances.limits.window},
                                    {"residual", nullptr}};
      statuses.push_back(LimitStatus::Inconclusive);
      warnings.push_back(name + ": " + e.what());
    }
  }

  void add_verdict(const Verdict& v) {
    doc["verdicts"].push_back(verdict_to_json(v));
    warn(v.warnings);
    order_reached = v.order_reached;
  }

  // Verdict commands count as conclusive whenever the answer is.
  void add_answer(Answer a) {
    statuses.push_back(a == Answer::Inconclusive ? LimitStatus::Inconclusive : LimitStatus::ConvergedPositive);
  }

  void add_file(const std::string& name, std::string contents) { files[name] = std::move(contents); }
};

void note_breakdown(Context& ctx, const std::optional<Breakdown>& b, std::size_t reached) {
  if (!b) return;
  std::ostringstream msg;
  msg << "factorization stopped at order " << b->order << " (pivot " << b->pivot << "); results use orders up to "
      << reached;
  ctx.warnings.push_back(msg.str());
}

SweepOptions sweep_options(const JobConfig& c) { return {true, c.tolerances.pivot_tol}; }

VerdictOptions verdict_options(const JobConfig& c) {
  return {c.tolerances.limits, c.tolerances.quadrature, c.tolerances.pivot_tol};
}

void run_indexes(Context& ctx, const MatrixOracle& o) {
  const JobConfig& c = ctx.config;
  std::vector<Complex> points;
  if (c.z0) points.push_back(*c.z0);
  const FactorSweep sweep = factor_sweep(o, ctx.order, points, sweep_options(c));
  const IndexSequence lambda = lambda_sequence(o, ctx.order);
  ctx.order_reached = sweep.gamma.order_reached();
  note_breakdown(ctx, sweep.breakdown, ctx.order_reached);

  ctx.add_estimate("lambda", lambda);
  ctx.add_estimate("gamma", sweep.gamma);
  ctx.add_estimate("alpha", sweep.alpha);
  ctx.add_file("lambda.csv", sequence_csv(lambda));
  ctx.add_file("gamma.csv", sequence_csv(sweep.gamma));
  ctx.add_file("alpha.csv", sequence_csv(sweep.alpha));
  if (c.z0) {
    ctx.add_estimate("gamma_at", sweep.gamma_at.front());
    ctx.doc["estimates"]["gamma_at"]["z0"] = complex_to_json(*c.z0);
    ctx.add_file("gamma_at.csv", sequence_csv(sweep.gamma_at.front()));
  }

  const AuditReport audit = audit_inequalities(o, lambda, sweep, c.tolerances.audit_tol, c.tolerances.pivot_tol);
  ctx.doc["audit"] = audit_to_json(audit);
  if (!audit.passed) ctx.warnings.push_back("inequality audit failed at some order");
}

void run_szego(Context& ctx) {
  const JobConfig& c = ctx.config;
  const Verdict v = szego_verdict(*c.measure, ctx.order, verdict_options(c));
  ctx.add_verdict(v);
  ctx.add_answer(v.answer);
  ctx.doc["estimates"]["gamma"] = estimate_to_json(v.basis);
  ctx.add_file("gamma.csv", sequence_csv(v.sequence));
  const DensitySpec* d = nullptr;
  if (const auto* cd = c.measure->as<CircleDensity>()) d = &cd->density;
  if (const auto* cd = c.measure->as<CurveDensity>()) d = &cd->density;
  if (d) {
    const SzegoIntegral s = szego_integral(*d, c.tolerances.quadrature);
    ctx.doc["szego_integral"] = Json{{"value", s.value},
                                     {"error_bound", s.error_bound},
                                     {"nodes", s.nodes},
                                     {"zero_density", s.zero_density}};
  }
}

void run_density(Context& ctx) {
  const JobConfig& c = ctx.config;
  const Verdict v = density_verdict(*c.measure, c.z_ref, ctx.order, c.override_applicability, verdict_options(c));
  ctx.add_verdict(v);
  ctx.add_answer(v.answer);
  ctx.doc["estimates"]["gamma_at"] = estimate_to_json(v.basis);
  ctx.doc["estimates"]["gamma_at"]["z0"] = complex_to_json(c.z_ref);
  ctx.add_file("gamma_at.csv", sequence_csv(v.sequence));
}

void run_bpe(Context& ctx, const MatrixOracle& o) {
  const JobConfig& c = ctx.config;
  const Verdict v = bpe_verdict(o, *c.z0, ctx.order, verdict_options(c));
  ctx.add_verdict(v);
  ctx.add_answer(v.answer);
  ctx.doc["estimates"]["gamma_at"] = estimate_to_json(v.basis);
  ctx.doc["estimates"]["gamma_at"]["z0"] = complex_to_json(*c.z0);
  ctx.add_file("gamma_at.csv", sequence_csv(v.sequence));
  if (c.crosscheck) {
    const ShiftCrosscheck x = gamma_shift_crosscheck(o, *c.z0, ctx.order, c.tolerances.pivot_tol);
    ctx.doc["crosscheck"] = Json{{"z0", complex_to_json(x.z0)},
                                 {"orders_compared", x.orders_compared},
                                 {"max_rel_gap", x.max_rel_gap},
                                 {"warnings", x.warnings}};
    ctx.warn(x.warnings);
  }
}

void run_map(Context& ctx, const MatrixOracle& o) {
  const JobConfig& c = ctx.config;
  const BpeMap m = bpe_map(o, *c.grid, ctx.order, c.tolerances.pivot_tol);
  ctx.order_reached = m.order;
  std::ostringstream csv;
  csv << "re,im,value\n";
  for (std::size_t r = 0; r < m.grid.im_steps; ++r)
    for (std::size_t col = 0; col < m.grid.re_steps; ++col) {
      const Complex z = m.grid.point(r, col);
      csv << format_double(z.real()) << ',' << format_double(z.imag()) << ','
          << format_double(m.values[r * m.grid.re_steps + col]) << '\n';
    }
  ctx.add_file("gamma_map.csv", csv.str());
  const auto [lo, hi] = std::minmax_element(m.values.begin(), m.values.end());
  ctx.doc["map"] = Json{{"order", m.order},
                        {"re_steps", m.grid.re_steps},
                        {"im_steps", m.grid.im_steps},
                        {"overflow_points", m.overflow_points},
                        {"min", *lo},
                        {"max", *hi}};
  if (m.overflow_points > 0)
    ctx.warnings.push_back(std::to_string(m.overflow_points) + " grid points overflowed and were set to 0");
}

void run_transform(Context& ctx, const MatrixOracle& o) {
  const JobConfig& c = ctx.config;
  const AffineMap& map = *c.map;
  const MatrixOracle conj = MatrixOracle::conjugated(o, map.alpha(), map.beta());
  const HermitianSection s = conj.section(ctx.order);
  const BinomialMatrix a = binomial_matrix(ctx.order, map);
  ctx.add_file("transform.json", Json{{"alpha", complex_to_json(map.alpha())},
                                      {"beta", complex_to_json(map.beta())},
                                      {"order", ctx.order},
                                      {"binomial", matrix_to_json(a.upper)},
                                      {"section", {{"entries", matrix_to_json(s.matrix())}}}}
                                     .dump(2) +
                                     "\n");

  Json t{{"alpha", complex_to_json(map.alpha())}, {"beta", complex_to_json(map.beta())}};
  if (c.measure) {
    const MeasureSpec image = pushforward(*c.measure, map.alpha(), map.beta());
    const HermitianSection direct = MatrixOracle::moment(image, c.tolerances.quadrature).section(ctx.order);
    const double diff = (direct.matrix() - s.matrix()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, direct.matrix().cwiseAbs().maxCoeff());
    t["pushforward_measure"] = measure_to_json(image);
    t["pushforward_max_abs_diff"] = diff;
    t["pushforward_max_rel_diff"] = diff / scale;
  }
  ctx.doc["transform"] = t;

  const IndexSequence g = gamma_sequence(conj, ctx.order, sweep_options(c));
  ctx.order_reached = g.order_reached();
  note_breakdown(ctx, g.breakdown, ctx.order_reached);
  ctx.add_estimate("gamma", g);
  ctx.add_file("gamma.csv", sequence_csv(g));
  ctx.warn(conj.warnings());
}

void run_moments(Context& ctx) {
  const JobConfig& c = ctx.config;
  const MomentTriangle tri = moment_rows(*c.measure, 0, ctx.order, c.tolerances.quadrature);
  const auto size = static_cast<Eigen::Index>(ctx.order + 1);
  ComplexMatrix m(size, size);
  Json bounds = Json::array();
  for (std::size_t j = 0; j <= ctx.order; ++j) {
    Json row = Json::array();
    for (std::size_t k = 0; k <= ctx.order; ++k) {
      const MomentValue& v = j >= k ? tri.at(j, k) : tri.at(k, j);
      Complex value = j >= k ? v.value : std::conj(v.value);
      if (j == k) value = {value.real(), 0.0};
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = value;
      row.push_back(v.error_bound);
    }
    bounds.push_back(row);
  }
  ctx.order_reached = ctx.order;
  ctx.add_file("moments.json", Json{{"order", ctx.order},
                                    {"entries", matrix_to_json(m)},
                                    {"error_bounds", bounds},
                                    {"nonconverged", tri.nonconverged()}}
                                   .dump(2) +
                                   "\n");
  if (tri.nonconverged() > 0)
    ctx.warnings.push_back(std::to_string(tri.nonconverged()) + " moments did not reach the quadrature tolerance");

  // Random spot check of positive semidefiniteness.
  constexpr int kSamples = 32;
  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> normal;
  const double mass = m(0, 0).real();
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSamples; ++i) {
    ComplexVector v(size);
    for (Eigen::Index k = 0; k < size; ++k) v(k) = Complex(normal(rng), normal(rng));
    const double form = (v.transpose() * m * v.conjugate())(0, 0).real();
    worst = std::min(worst, form / (v.squaredNorm() * mass));
  }
  const bool psd = worst >= -1e-10;
  ctx.doc["psd_check"] = Json{{"seed", ctx.seed}, {"samples", kSamples}, {"min_normalized_form", worst}, {"passed", psd}};
  if (!psd) ctx.warnings.push_back("moment section failed the positive semidefinite spot check");
  ctx.doc["mass"] = mass;
}

std::vector<std::string> dedupe(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& w : in)
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  return out;
}

}  // namespace

std::string sequence_csv(const IndexSequence& s) {
  std::string out = "order,value\n";
  for (std::size_t n = 0; n < s.values.size(); ++n) out += std::to_string(n) + "," + format_double(s.values[n]) + "\n";
  return out;
}

Report run(const JobConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{config, config.order, options.seed, base_document(to_string(config.command)), {}, {}, {}, 0};
  ctx.doc["job"] = config.echo();
  ctx.doc["requested_order"] = config.order;
  ctx.doc["max_order"] = options.max_order ? Json(*options.max_order) : Json(nullptr);
  ctx.doc["seed"] = options.seed;

  Report report;
  try {
    const MatrixOracle o = config.oracle();
    if (options.max_order && *options.max_order < ctx.order) {
      ctx.order = *options.max_order;
      ctx.warnings.push_back("order capped at " + std::to_string(ctx.order) + " by --max-order");
    }
    if (const auto cap = o.max_order(); cap && *cap < ctx.order) {
      ctx.order = *cap;
      ctx.warnings.push_back("order capped at " + std::to_string(ctx.order) + " by the explicit matrix size");
    }
    if (ctx.order < 1) throw ConfigError("N", "effective order must be at least 1");

    switch (config.command) {
      case Command::Indexes: run_indexes(ctx, o); break;
      case Command::Szego: run_szego(ctx); break;
      case Command::Density: run_density(ctx); break;
      case Command::Bpe: run_bpe(ctx, o); break;
      case Command::Map: run_map(ctx, o); break;
      case Command::Transform: run_transform(ctx, o); break;
      case Command::Moments: run_moments(ctx); break;
    }
    if (config.command != Command::Szego && config.command != Command::Density) ctx.warn(o.warnings());

    const bool only_inconclusive =
        !ctx.statuses.empty() && std::all_of(ctx.statuses.begin(), ctx.statuses.end(),
                                             [](LimitStatus s) { return s == LimitStatus::Inconclusive; });
    report.exit_code = only_inconclusive ? 2 : 0;
  } catch (const std::exception& e) {
    ctx.doc["error"] = error_to_json(e);
    report.exit_code = 1;
  }

  ctx.doc["effective_order"] = ctx.order;
  ctx.doc["order_reached"] = ctx.order_reached;
  ctx.doc["warnings"] = dedupe(ctx.warnings);
  Json outputs = Json::array();
  for (const auto& [name, contents] : ctx.files) outputs.push_back(name);
  ctx.doc["outputs"] = outputs;
  ctx.doc["exit_code"] = report.exit_code;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ctx.doc["timing"] = Json{{"seconds", seconds}};

  report.document = std::move(ctx.doc);
  report.files = std::move(ctx.files);
  return report;
}

Report error_report(const std::string& command, const Error& error) {
  Report r;
  r.document = base_document(command);
  r.document["error"] = error_to_json(error);
  r.document["exit_code"] = 1;
  r.document["timing"] = Json{{"seconds", 0.0}};
  r.exit_code = 1;
  return r;
}

Json without_timing(const Json& report) {
  Json copy = report;
  copy.erase("timing");
  return copy;
}

void write_report(const Report& report, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, contents] : report.files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
    out << contents;
  }
  std::ofstream out(dir / "report.json", std::ios::binary);
  if (!out) throw Error("cannot write '" + (dir / "report.json").string() + "'");
  out << report.document.dump(2) << '\n';
}

}  // namespace momidx
