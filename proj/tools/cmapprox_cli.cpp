// Command-line front end over the C API.
#include <CLI11.hpp>
#include <cmapprox/cmapprox.h>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string config, out, scheme, generator, suite, kind;
  std::optional<std::string> t, n, alpha;
  std::vector<std::string> g;
  std::vector<std::string> inputs;
  bool json_out = false;
  std::optional<unsigned> jobs;
  std::optional<double> tol_rel, tol_abs;
  std::optional<unsigned long long> seed;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path);
}

json number_list(const std::string& text, bool integers) {
  json arr = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    size_t used = 0;
    try {
      if (integers) {
        const long long v = std::stoll(item, &used);
        if (used == item.size()) arr.push_back(v);
      } else {
        const double v = std::stod(item, &used);
        if (used == item.size()) arr.push_back(v);
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || used == 0) throw UsageError("not a number: '" + item + "'");
  }
  return arr;
}

// Config file first, then flags on top.
json build_config(const Options& o, const std::string& forced_suite) {
  json c = json::object();
  if (!o.config.empty()) {
    try {
      c = json::parse(read_file(o.config));
    } catch (const json::exception& e) {
      throw UsageError(o.config + ": " + e.what());
    }
    if (!c.is_object()) throw UsageError(o.config + ": config must be a JSON object");
  }
  if (!forced_suite.empty()) {
    if (c.contains("suite") && c["suite"] != forced_suite)
      throw UsageError("config suite '" + c["suite"].get<std::string>() + "' does not match subcommand");
    c["suite"] = forced_suite;
  }
  if (!o.suite.empty()) c["suite"] = o.suite;
  if (!o.scheme.empty()) c["scheme"] = o.scheme;
  if (!o.generator.empty()) c["generator"] = o.generator;
  if (!o.kind.empty()) c["kind"] = o.kind;
  if (!o.g.empty()) c["g"] = o.g;
  if (o.t) c["t"] = number_list(*o.t, false);
  if (o.n) c["n"] = number_list(*o.n, true);
  if (o.alpha) c["alpha"] = number_list(*o.alpha, false);
  if (o.jobs) c["jobs"] = *o.jobs;
  if (o.tol_rel) c["tol_rel"] = *o.tol_rel;
  if (o.tol_abs) c["tol_abs"] = *o.tol_abs;
  if (o.seed) c["seed"] = *o.seed;
  return c;
}

bool usage_status(cma_status s) {
  return s == CMA_INVALID_ARGUMENT || s == CMA_OUT_OF_RANGE || s == CMA_PARSE || s == CMA_REQUIRES_CLASS ||
         s == CMA_IO;
}

// "runs/x.csv" + "fits" -> "runs/x.fits.csv"
std::string sibling(const std::string& out, const std::string& table) {
  std::string base = out;
  if (base.size() > 4 && base.compare(base.size() - 4, 4, ".csv") == 0) base.resize(base.size() - 4);
  return base + "." + table + ".csv";
}

int emit(cma_result* r, const Options& o, const std::string& primary) {
  const size_t count = cma_result_table_count(r);
  size_t main = 0;
  for (size_t i = 0; i < count; ++i)
    if (primary == cma_result_table_name(r, i)) main = i;
  if (o.out.empty()) {
    std::cout << (o.json_out ? cma_result_json(r) : cma_result_csv(r, main));
  } else {
    write_file(o.out, cma_result_csv(r, main));
    for (size_t i = 0; i < count; ++i)
      if (i != main) write_file(sibling(o.out, cma_result_table_name(r, i)), cma_result_csv(r, i));
    if (o.json_out) {
      std::string base = o.out;
      if (base.size() > 4 && base.compare(base.size() - 4, 4, ".csv") == 0) base.resize(base.size() - 4);
      write_file(base + ".json", cma_result_json(r));
    }
  }
  const bool ok = cma_result_passed(r) != 0;
  std::cerr << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : kExitFail;
}

int report_error(cma_status s) {
  std::cerr << "error (" << cma_status_name(s) << "): " << cma_last_error() << '\n';
  return usage_status(s) ? kExitUsage : kExitFail;
}

int run_config(const Options& o, const std::string& forced_suite, const std::string& primary) {
  const json cfg = build_config(o, forced_suite);
  cma_result* r = nullptr;
  const cma_status s = cma_run(cfg.dump().c_str(), &r);
  if (s != CMA_OK) return report_error(s);
  std::string table = primary;
  if (table.empty() && cma_result_table_count(r)) table = cma_result_table_name(r, 0);
  const int code = emit(r, o, table);
  cma_result_free(r);
  return code;
}

int run_report(const Options& o) {
  if (o.inputs.empty()) throw UsageError("report needs at least one CSV file");
  std::vector<std::string> texts;
  for (const auto& p : o.inputs) texts.push_back(read_file(p));
  std::vector<const char*> ptrs;
  for (const auto& t : texts) ptrs.push_back(t.c_str());
  cma_result* r = nullptr;
  const cma_status s = cma_aggregate(ptrs.data(), ptrs.size(), &r);
  if (s != CMA_OK) return report_error(s);
  const int code = emit(r, o, "summary");
  cma_result_free(r);
  return code;
}

void common_flags(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON experiment config");
  sub->add_option("--out", o.out, "primary CSV path; other tables go next to it");
  sub->add_flag("--json", o.json_out, "JSON mirror (stdout without --out)");
  sub->add_option("--jobs", o.jobs, "worker threads (default: all cores)");
  sub->add_option("--tol-rel", o.tol_rel, "relative bound slack");
  sub->add_option("--tol-abs", o.tol_abs, "absolute bound slack");
  sub->add_option("--seed", o.seed, "test-vector seed");
}

void grid_flags(CLI::App* sub, Options& o) {
  sub->add_option("--t", o.t, "comma-separated t grid");
  sub->add_option("--n", o.n, "comma-separated n grid");
  sub->add_option("--alpha", o.alpha, "comma-separated alpha grid");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Completely monotone approximation of semigroups: bounds, rates and functionals"};
  app.require_subcommand(1);
  Options o;

  auto* functionals = app.add_subcommand("functionals", "L, a, b, c_alpha, d0, d1 of scaled functions");
  common_flags(functionals, o);
  grid_flags(functionals, o);
  functionals->add_option("--g", o.g, "function spec; repeat for several");

  auto* verify = app.add_subcommand("verify-bounds", "evaluate every bound of a suite; CSV of reports");
  auto* orders = app.add_subcommand("orders", "fitted convergence orders of a suite");
  for (auto* sub : {verify, orders}) {
    common_flags(sub, o);
    grid_flags(sub, o);
    sub->add_option("--suite", o.suite, "first | nonb2 | second | holo | holo2");
    sub->add_option("--scheme", o.scheme, "scheme, e.g. euler or kendall");
    sub->add_option("--generator", o.generator, "gallery generator, e.g. laplacian:d=128");
  }

  auto* optimality = app.add_subcommand("optimality", "lower-bound exponents on dense scalar spectra");
  common_flags(optimality, o);
  grid_flags(optimality, o);
  optimality->add_option("--scheme", o.scheme, "scheme (default euler)");
  optimality->add_option("--kind", o.kind, "imaginary_first | positive_first | positive_second | all");

  auto* sharpness = app.add_subcommand("sharpness", "Euler sharp constant and shift second-order integrals");
  common_flags(sharpness, o);
  sharpness->add_option("--n", o.n, "comma-separated n grid");

  auto* report = app.add_subcommand("report", "pass/fail summary per theorem tag over CSV outputs");
  report->add_option("files", o.inputs, "CSV files")->required();
  report->add_option("--out", o.out, "summary CSV path");
  report->add_flag("--json", o.json_out, "JSON mirror");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*functionals) return run_config(o, "functionals", "functionals");
    if (*verify) return run_config(o, "", "reports");
    if (*orders) return run_config(o, "", "fits");
    if (*optimality) return run_config(o, "optimality", "optimality_summary");
    if (*sharpness) return run_config(o, "sharpness", "sharpness_summary");
    if (*report) return run_report(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
