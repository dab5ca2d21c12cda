#pragma once

#include <string>
#include <vector>

#include "rates.hpp"

namespace cma {

// suite: first | nonb2 | second | holo | holo2 | optimality | sharpness | functionals
struct ExperimentConfig {
  std::string suite = "first";
  std::string scheme;                 // empty: suite default
  std::vector<std::string> functions; // functionals suite
  std::string generator;              // empty: suite default
  std::string kind;                   // optimality: imaginary_first | positive_first | positive_second | all
  std::vector<double> t;
  std::vector<unsigned> n;
  std::vector<double> alpha;
  SlackPolicy slack;
  unsigned jobs = 0;
  unsigned long long seed = 0x5EED;
  bool n_given = false;  // an explicit empty n grid is a usage error
};

// Keys: suite, scheme, g, generator, kind, t, n, alpha, tol_rel, tol_abs, jobs, seed.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
// Fills suite defaults and checks every grid; throws Error.
ExperimentConfig resolve_config(ExperimentConfig cfg);

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentResult {
  std::string suite;
  std::vector<Table> tables;  // the first table is the primary artifact
  bool passed = true;
  const Table* find(const std::string& name) const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string to_csv(const Table& t);
std::string to_json(const ExperimentResult& r);
std::string format_number(double v);

// Tables built from library results; column order is part of the CSV contract.
Table reports_table(const std::vector<BoundReport>& reports);
Table fits_table(const std::vector<OrderCheck>& fits);
Table notes_table(const std::vector<std::string>& notes);

// Pass/fail per theorem tag over CSVs carrying a "theorem" or "tag" column and a "pass" column.
ExperimentResult aggregate_reports(const std::vector<std::string>& csv_texts);

}  // namespace cma
