#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "functionals.hpp"
#include "parallel.hpp"

namespace cma {

namespace {

using json = nlohmann::json;

const std::set<std::string> kBoundSuites{"first", "nonb2", "second", "holo", "holo2"};

std::string fmt_u(unsigned long long v) { return std::to_string(v); }
std::string fmt_b(bool b) { return b ? "true" : "false"; }

template <class T>
std::vector<T> number_list(const json& v, const std::string& key) {
  if (!v.is_array()) {
    if (v.is_number()) return {v.get<T>()};
    fail(Status::parse, "config key '" + key + "' must be a number or an array of numbers");
  }
  std::vector<T> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(Status::parse, "config key '" + key + "' must hold numbers");
    if constexpr (std::is_same_v<T, unsigned>) {
      if (!x.is_number_integer() || x.get<long long>() <= 0)
        fail(Status::out_of_range, "n grid values must be positive integers");
    }
    out.push_back(x.get<T>());
  }
  return out;
}

std::string string_key(const json& v, const std::string& key) {
  if (!v.is_string()) fail(Status::parse, "config key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<OptimalityKind> kinds_for(const std::string& kind) {
  const std::vector<OptimalityKind> all{OptimalityKind::imaginary_first, OptimalityKind::positive_first,
                                        OptimalityKind::positive_second};
  if (kind.empty() || kind == "all") return all;
  for (auto k : all)
    if (kind == optimality_name(k)) return {k};
  fail(Status::parse, "unknown optimality kind '" + kind +
                          "'; available: imaginary_first positive_first positive_second all");
}

// Splits one CSV record honoring double quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

ExperimentResult run_bounds(const ExperimentConfig& cfg) {
  SuiteConfig sc;
  sc.suite = parse_suite(cfg.suite);
  sc.family = parse_family(cfg.scheme);
  sc.t = cfg.t;
  sc.n = cfg.n;
  sc.alpha = cfg.alpha;
  sc.jobs = cfg.jobs;
  sc.slack = cfg.slack;
  GeneratorMatrix A = parse_generator(cfg.generator);
  auto vectors = test_vectors(A, cfg.seed);
  BoundContext ctx(std::move(A), std::move(vectors));
  SuiteResult sr = run_suite(sc, ctx);
  ExperimentResult r;
  r.suite = cfg.suite;
  r.tables = {reports_table(sr.reports), fits_table(sr.fits), notes_table(sr.notes)};
  r.passed = sr.ok();
  return r;
}

ExperimentResult run_optimality(const ExperimentConfig& cfg) {
  FamilyPtr fam = parse_family(cfg.scheme);
  struct Job {
    OptimalityKind kind;
    double t, alpha;
  };
  std::vector<Job> jobs;
  for (auto k : kinds_for(cfg.kind)) {
    std::vector<double> alphas = cfg.alpha;
    if (alphas.empty())
      alphas = k == OptimalityKind::imaginary_first ? std::vector<double>{0.5, 1.0, 2.0}
                                                    : std::vector<double>{0.0, 0.5, 1.0};
    for (double t : cfg.t)
      for (double a : alphas) jobs.push_back({k, t, a});
  }
  std::vector<OptimalityReport> reps(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](size_t i) {
    reps[i] = optimality_lower(*fam, jobs[i].kind, jobs[i].t, jobs[i].alpha, cfg.n);
  });

  Table rows{"optimality", {"scheme", "kind", "t", "alpha", "n", "sup", "argmax", "rate", "ratio"}, {}};
  Table summary{"optimality_summary",
                {"tag", "scheme", "kind", "t", "alpha", "grid_count", "grid_min", "grid_max", "slope",
                 "target", "r2", "c_low", "upper_ok", "inconclusive", "pass"},
                {}};
  ExperimentResult r;
  r.suite = cfg.suite;
  for (const auto& rep : reps) {
    const std::string kind = optimality_name(rep.kind);
    for (const auto& row : rep.rows)
      rows.rows.push_back({rep.scheme, kind, format_number(rep.t), format_number(rep.alpha), fmt_u(row.n),
                           format_number(row.sup), format_number(row.argmax), format_number(row.rate),
                           format_number(row.ratio)});
    summary.rows.push_back({"optimality." + kind, rep.scheme, kind, format_number(rep.t),
                            format_number(rep.alpha), fmt_u(rep.grid_count), format_number(rep.grid_min),
                            format_number(rep.grid_max), format_number(rep.fit.slope),
                            format_number(rep.target), format_number(rep.fit.r2), format_number(rep.c_low),
                            fmt_b(rep.upper_ok), fmt_b(rep.inconclusive), fmt_b(rep.pass)});
    r.passed = r.passed && rep.pass;
  }
  r.tables = {std::move(rows), std::move(summary)};
  return r;
}

ExperimentResult run_sharpness(const ExperimentConfig& cfg) {
  std::vector<unsigned> euler_n = cfg.n_given ? cfg.n : dyadic(0, 14);
  std::vector<unsigned> shift_n;
  for (unsigned n : cfg.n_given ? cfg.n : dyadic(1, 10))
    if (n >= 2) shift_n.push_back(n);
  if (shift_n.empty()) fail(Status::out_of_range, "shift sharpness needs some n ≥ 2");
  const unsigned check_n = std::min(1024u, *std::max_element(shift_n.begin(), shift_n.end()));

  EulerSharpness e;
  ShiftSharpness s;
  parallel_for(2, cfg.jobs, [&](size_t i) {
    if (i == 0)
      e = euler_scalar_sharpness(euler_n);
    else
      s = shift_second_order_sharpness(shift_n, check_n);
  });

  Table rows{"sharpness", {"experiment", "n", "value", "argmax", "aux", "pass"}, {}};
  for (const auto& row : e.rows)
    rows.rows.push_back({"euler", fmt_u(row.n), format_number(row.value), format_number(row.argmax),
                         format_number(row.aux), fmt_b(row.pass)});
  for (const auto& row : s.rows)
    rows.rows.push_back({"shift", fmt_u(row.n), format_number(row.value), format_number(row.argmax),
                         format_number(row.aux), fmt_b(row.pass)});

  double i2_worst = 0;
  for (const auto& row : s.rows) i2_worst = std::max(i2_worst, double(row.n) * row.n * std::abs(row.aux));
  double shift_at_check = kNaN;
  for (const auto& row : s.rows)
    if (row.n == check_n) shift_at_check = row.value;

  Table summary{"sharpness_summary", {"tag", "quantity", "value", "threshold", "pass"}, {}};
  summary.rows.push_back({"sharpness.euler", "n_sup_limit_rel_err", format_number(e.limit_rel_err), "0.01",
                          fmt_b(e.limit_rel_err <= 0.01)});
  summary.rows.push_back({"sharpness.euler", "next_order_c_fit", format_number(e.c_fit), "finite",
                          fmt_b(std::isfinite(e.c_fit))});
  summary.rows.push_back({"sharpness.euler", "next_order_c_envelope", format_number(e.c_envelope), "finite",
                          fmt_b(std::isfinite(e.c_envelope))});
  summary.rows.push_back({"sharpness.shift", "max_n2_abs_I2", format_number(i2_worst), "2",
                          fmt_b(i2_worst <= 2)});
  summary.rows.push_back({"sharpness.shift", "n32_abs_I1_at_" + fmt_u(check_n), format_number(shift_at_check),
                          format_number(0.95 * s.target), fmt_b(s.pass)});

  ExperimentResult r;
  r.suite = cfg.suite;
  r.tables = {std::move(rows), std::move(summary)};
  r.passed = e.pass && s.pass;
  return r;
}

ExperimentResult run_functionals(const ExperimentConfig& cfg) {
  struct Job {
    size_t f;
    unsigned n;
    double alpha;
  };
  std::vector<CMPtr> fs;
  for (const auto& spec : cfg.functions) fs.push_back(parse_function(spec));
  std::vector<Job> jobs;
  for (size_t f = 0; f < fs.size(); ++f)
    for (unsigned n : cfg.n)
      for (double a : cfg.alpha) jobs.push_back({f, n, a});

  std::vector<std::vector<std::string>> rows(jobs.size());
  std::vector<char> ok(jobs.size(), 1);
  parallel_for(jobs.size(), cfg.jobs, [&](size_t i) {
    const Job& j = jobs[i];
    CMPtr gn = power_scale(fs[j.f], j.n);
    std::vector<std::string> flags;
    auto guarded = [&](const char* what, auto f) {
      try {
        return f();
      } catch (const Error& e) {
        flags.push_back(std::string(what) + "_" + status_name(e.code()));
        return kNaN;
      }
    };
    double L = kNaN;
    try {
      const LValue lv = functional_L(*gn);
      L = lv.L;
      if (!lv.exact) flags.push_back("L_fourier");
    } catch (const Error& e) {
      flags.push_back(std::string("L_") + status_name(e.code()));
    }
    const double a = guarded("a", [&] { return a_of(*gn); });
    const double b = guarded("b", [&] { return b_of(*gn); });
    const double d0 = guarded("d0", [&] { return d0_of(*gn); });
    const bool c0_finite = c_alpha_finite(*gn, 0);
    const double d1 = c0_finite ? guarded("d1", [&] { return d1_of(*gn); }) : kInf;
    if (!c0_finite) flags.push_back("d1_divergent");

    double cq = kInf, ce = kNaN;
    if (c_alpha_finite(*gn, j.alpha)) {
      cq = guarded("c_quadrature", [&] { return c_alpha_quadrature(*gn, j.alpha); });
      if (fs[j.f]->name() == "euler") {
        ce = euler_c_alpha_exact(j.n, j.alpha);
        flags.push_back("exact_digamma");
      } else if (gn->measure()) {
        ce = guarded("c_density", [&] { return c_alpha_density(gn, j.alpha); });
        flags.push_back("exact_density");
      }
    } else {
      flags.push_back("c_divergent");
    }
    if (std::isfinite(cq) && std::isfinite(ce) && std::abs(cq - ce) > 1e-8 * std::max(1.0, std::abs(ce))) {
      flags.push_back("c_mismatch");
      ok[i] = 0;
    }
    std::string joined;
    for (const auto& f : flags) joined += (joined.empty() ? "" : ";") + f;
    rows[i] = {fs[j.f]->name(), fmt_u(j.n), format_number(j.alpha), format_number(L), format_number(a),
               format_number(b), format_number(cq), format_number(ce), format_number(d0), format_number(d1),
               joined};
  });

  ExperimentResult r;
  r.suite = cfg.suite;
  r.tables = {Table{"functionals",
                    {"g", "n", "alpha", "L", "a", "b", "c_alpha_quadrature", "c_alpha_exact", "d0", "d1",
                     "residual_flags"},
                    std::move(rows)}};
  r.passed = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  return r;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Status::parse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Status::parse, "config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "suite") c.suite = string_key(v, key);
    else if (key == "scheme") c.scheme = string_key(v, key);
    else if (key == "generator") c.generator = string_key(v, key);
    else if (key == "kind") c.kind = string_key(v, key);
    else if (key == "g") {
      if (v.is_string()) c.functions = {v.get<std::string>()};
      else if (v.is_array()) for (const auto& s : v) c.functions.push_back(string_key(s, key));
      else fail(Status::parse, "config key 'g' must be a string or an array of strings");
    } else if (key == "t") c.t = number_list<double>(v, key);
    else if (key == "alpha") c.alpha = number_list<double>(v, key);
    else if (key == "n") {
      c.n = number_list<unsigned>(v, key);
      c.n_given = true;
    } else if (key == "tol_rel") c.slack.rel = v.get<double>();
    else if (key == "tol_abs") c.slack.abs = v.get<double>();
    else if (key == "jobs") c.jobs = v.get<unsigned>();
    else if (key == "seed") c.seed = v.get<unsigned long long>();
    else
      fail(Status::parse, "unknown config key '" + key +
                              "'; known: suite scheme g generator kind t n alpha tol_rel tol_abs jobs seed");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Status::io, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ExperimentConfig resolve_config(ExperimentConfig c) {
  const bool bound = kBoundSuites.count(c.suite) > 0;
  if (!bound && c.suite != "optimality" && c.suite != "sharpness" && c.suite != "functionals")
    fail(Status::parse, "unknown suite '" + c.suite +
                            "'; available: first nonb2 second holo holo2 optimality sharpness functionals");
  if (c.n_given && c.n.empty()) fail(Status::invalid_argument, "empty n grid");
  for (unsigned n : c.n)
    if (n == 0) fail(Status::out_of_range, "n grid values must be positive");
  for (double t : c.t)
    if (!(t > 0) || !std::isfinite(t)) fail(Status::out_of_range, "t grid values must be positive");
  if (!(c.slack.rel >= 0) || !(c.slack.abs >= 0)) fail(Status::out_of_range, "tolerances must be non-negative");

  if (c.suite == "functionals") {
    if (c.functions.empty()) fail(Status::invalid_argument, "functionals needs at least one function (g)");
    for (const auto& f : c.functions) parse_function(f);
    if (c.n.empty()) c.n = {1, 2, 4, 8};
    if (c.alpha.empty()) c.alpha = {0.0, 0.5, 1.0};
    for (double a : c.alpha)
      if (!(a >= 0 && a <= 1)) fail(Status::out_of_range, "functionals: alpha must be in [0, 1]");
    return c;
  }
  if (c.t.empty()) c.t = c.suite == "optimality" ? std::vector<double>{1.0} : std::vector<double>{0.25, 1.0, 4.0};
  if (c.suite == "sharpness") return c;
  if (c.suite == "optimality") {
    if (c.scheme.empty()) c.scheme = "euler";
    parse_family(c.scheme);
    kinds_for(c.kind);
    if (c.n.empty()) c.n = dyadic(4, 16);
    for (double a : c.alpha)
      if (!(a >= 0 && a <= 2)) fail(Status::out_of_range, "optimality: alpha must be in [0, 2]");
    return c;
  }
  if (c.scheme.empty()) fail(Status::invalid_argument, "suite " + c.suite + " needs a scheme");
  parse_family(c.scheme);
  if (c.generator.empty())
    c.generator = c.suite == "holo" || c.suite == "holo2" ? "laplacian:d=128" : "diag_imag:k=128,min=0.1,max=100";
  if (c.n.empty()) c.n = dyadic(2, 12);
  const Suite s = parse_suite(c.suite);
  for (double a : c.alpha) {
    bool ok = true;
    switch (s) {
      case Suite::first: ok = a > 0 && a <= 2; break;
      case Suite::non_b2: ok = a > 0 && a <= 1; break;
      case Suite::second: ok = a == 3; break;
      case Suite::holo:
      case Suite::holo2: ok = a >= 0 && a <= 1; break;
    }
    if (!ok) fail(Status::out_of_range, "alpha " + format_number(a) + " outside the range of suite " + c.suite);
  }
  return c;
}

const Table* ExperimentResult::find(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

ExperimentResult run_experiment(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolve_config(raw);
  if (kBoundSuites.count(cfg.suite)) return run_bounds(cfg);
  if (cfg.suite == "optimality") return run_optimality(cfg);
  if (cfg.suite == "sharpness") return run_sharpness(cfg);
  return run_functionals(cfg);
}

Table reports_table(const std::vector<BoundReport>& reports) {
  Table t{"reports",
          {"scheme", "generator", "t", "n", "alpha", "vector", "error", "bound", "slack", "theorem", "pass"},
          {}};
  for (const auto& r : reports)
    t.rows.push_back({r.scheme, r.generator, format_number(r.t), fmt_u(r.n), format_number(r.alpha), r.vector_id,
                      format_number(r.error), format_number(r.bound), format_number(r.slack), r.theorem,
                      fmt_b(r.pass)});
  return t;
}

Table fits_table(const std::vector<OrderCheck>& fits) {
  Table t{"fits",
          {"tag", "scheme", "generator", "t", "alpha", "slope", "intercept", "r2", "used", "exact", "lo", "hi",
           "pass"},
          {}};
  for (const auto& c : fits)
    t.rows.push_back({c.tag, c.scheme, c.generator, format_number(c.t), format_number(c.alpha),
                      format_number(c.fit.slope), format_number(c.fit.intercept), format_number(c.fit.r2),
                      fmt_u(c.fit.used), fmt_b(c.fit.exact), format_number(c.lo), format_number(c.hi),
                      fmt_b(c.pass)});
  return t;
}

Table notes_table(const std::vector<std::string>& notes) {
  Table t{"notes", {"note"}, {}};
  for (const auto& n : notes) t.rows.push_back({n});
  return t;
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_cell(cells[i]);
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::string to_json(const ExperimentResult& r) {
  json j;
  j["suite"] = r.suite;
  j["passed"] = r.passed;
  json tables = json::object();
  for (const auto& t : r.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json o = json::object();
      for (size_t i = 0; i < t.header.size() && i < row.size(); ++i) {
        const std::string& cell = row[i];
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell == "true" || cell == "false") o[t.header[i]] = cell == "true";
        else if (!cell.empty() && end && *end == '\0' && std::isfinite(v)) o[t.header[i]] = v;
        else o[t.header[i]] = cell;
      }
      rows.push_back(std::move(o));
    }
    tables[t.name] = std::move(rows);
  }
  j["tables"] = std::move(tables);
  return j.dump(2) + "\n";
}

ExperimentResult aggregate_reports(const std::vector<std::string>& csv_texts) {
  struct Tally {
    size_t rows = 0, failed = 0;
  };
  std::map<std::string, Tally> tally;
  for (const auto& text : csv_texts) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) fail(Status::parse, "empty CSV");
    const auto header = split_csv_line(line);
    auto col = [&](const std::string& name) -> long {
      auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? -1 : long(it - header.begin());
    };
    long key = col("theorem");
    if (key < 0) key = col("tag");
    const long pass = col("pass");
    if (key < 0 || pass < 0) fail(Status::parse, "CSV lacks a theorem/tag column or a pass column");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (long(cells.size()) <= std::max(key, pass)) fail(Status::parse, "short CSV row: " + line);
      Tally& t = tally[cells[key]];
      ++t.rows;
      if (cells[pass] != "true") ++t.failed;
    }
  }
  ExperimentResult r;
  r.suite = "report";
  Table t{"summary", {"tag", "rows", "failed", "status"}, {}};
  for (const auto& [tag, v] : tally) {
    t.rows.push_back({tag, fmt_u(v.rows), fmt_u(v.failed), v.failed ? "FAIL" : "PASS"});
    r.passed = r.passed && v.failed == 0;
  }
  r.tables = {std::move(t)};
  return r;
}

}  // namespace cma
