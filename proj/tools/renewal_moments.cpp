// renewal-moments: exact, simulated and matching-based moment experiments
// for partial-sum processes with positive mean-1 increments.
//
// Subcommands: exact | simulate | matching | scaling | verify.
// Identical configuration and seed produce byte-identical output files.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "renewal/distributions.hpp"
#include "renewal/io.hpp"
#include "renewal/matching.hpp"
#include "renewal/moments.hpp"
#include "renewal/montecarlo.hpp"
#include "renewal/verify.hpp"
#include "renewal/version.hpp"

namespace {

using json = nlohmann::json;
using namespace renewal;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string dist = "exp";
  double rate = 1.0;
  std::uint64_t seed = 42;
  long replications = 100000;
  std::string format = "csv";
  std::string out;
  int workers = 1;
  bool allow_large_a = false;
  bool allow_extreme_sigma = false;
};

void add_common_options(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--dist", common.dist,
                  "increment family: exp | uniform | gamma:s=<v> | lognormal:sigma=<v>");
  cmd->add_option("--rate", common.rate, "arrival rate lambda (> 0)");
  cmd->add_option("--seed", common.seed, "master seed (u64)");
  cmd->add_option("--replications", common.replications, "Monte Carlo replications");
  cmd->add_option("--format", common.format, "output format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", common.out, "output path (default: stdout)");
  cmd->add_option("--workers", common.workers,
                  "worker threads; results are identical for any count");
  cmd->add_flag("--allow-large-a", common.allow_large_a,
                "lift the default cap a <= 16 on the exact engine");
  cmd->add_flag("--allow-extreme-sigma", common.allow_extreme_sigma,
                "lift the default lognormal sigma cap of 1.5");
}

ProcessSpec resolve_spec(const CommonOptions& common, int max_order) {
  ProcessSpec spec = parse_family(common.dist, common.allow_extreme_sigma);
  if (!(common.rate > 0))
    throw CLI::ValidationError("--rate", "rate lambda must be positive");
  spec.rate = common.rate;
  spec.max_order = max_order;
  return spec;
}

// Canonical config line; hashed into every output row.
std::string config_line(const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string line = command;
  for (const auto& [key, value] : kv) {
    line += '|';
    line += key;
    line += '=';
    line += value;
  }
  return line;
}

class TableWriter {
 public:
  TableWriter(std::string command, Provenance provenance, std::string format)
      : command_(std::move(command)),
        provenance_(std::move(provenance)),
        format_(std::move(format)) {}

  void set_header(std::vector<std::string> columns) {
    columns_ = std::move(columns);
    columns_.emplace_back("config_hash");
    columns_.emplace_back("seed");
    columns_.emplace_back("version");
  }

  // values must match the header minus the provenance columns; json_row may
  // carry richer typed fields for the JSON rendering.
  void add_row(const std::vector<std::string>& values, json json_row) {
    json_row["config_hash"] = provenance_.config_hash;
    json_row["seed"] = provenance_.seed;
    json_row["version"] = provenance_.version;
    json_rows_.push_back(std::move(json_row));
    csv_rows_.push_back(values);
  }

  std::string render() const {
    if (format_ == "json") {
      json doc;
      doc["command"] = command_;
      doc["provenance"] = {{"config_hash", provenance_.config_hash},
                           {"seed", provenance_.seed},
                           {"version", provenance_.version}};
      doc["rows"] = json_rows_;
      return doc.dump(2) + "\n";
    }
    std::string text;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) text += ',';
      text += columns_[c];
    }
    text += '\n';
    for (const auto& row : csv_rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) text += ',';
        text += row[c];
      }
      text += ',';
      text += provenance_.config_hash;
      text += ',';
      text += format_u64(provenance_.seed);
      text += ',';
      text += provenance_.version;
      text += '\n';
    }
    return text;
  }

 private:
  std::string command_;
  Provenance provenance_;
  std::string format_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> csv_rows_;
  std::vector<json> json_rows_;
};

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file '" + out + "'");
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Provenance make_provenance(const std::string& command,
                           const std::vector<std::pair<std::string, std::string>>& kv,
                           std::uint64_t seed) {
  return Provenance{fnv1a_hex(config_line(command, kv)), seed, kVersion};
}

std::string grid_label(const std::string& mode) {
  return mode == "moment" ? "k" : "n";
}

// ---------------------------------------------------------------------------

int run_exact(const CommonOptions& common, int a, const std::vector<long>& k_grid) {
  if (a < 2 || a % 2 != 0)
    throw CLI::ValidationError("--a", "exponent a must be a positive even integer "
                                      "(odd or real exponents go through simulate)");
  const ProcessSpec spec = resolve_spec(common, a);
  const MomentProfile profile = analytic_profile(spec);

  std::vector<std::pair<std::string, std::string>> kv = {
      {"dist", spec.label()},
      {"rate", format_double(common.rate)},
      {"a", std::to_string(a)},
      {"k-grid", ""},
      {"format", common.format},
  };
  for (long k : k_grid) kv[3].second += std::to_string(k) + ";";
  TableWriter table("exact", make_provenance("exact", kv, common.seed),
                    common.format);
  table.set_header({"family", "rate", "a", "k", "value", "leading_term",
                    "remainder", "ill_conditioned"});

  const Rational rate_scale =
      rational_pow(Rational(common.rate), static_cast<unsigned>(a));
  for (long k : k_grid) {
    const ExactMomentResult result =
        exact_pair_moment(a, k, profile, common.allow_large_a);
    const auto at_rate = result.at_rate(common.rate);
    const Rational scaled = result.value / rate_scale;

    json row;
    row["family"] = spec.label();
    row["rate"] = common.rate;
    row["a"] = a;
    row["k"] = k;
    row["value"] = decimal_string(scaled);
    row["value_numerator"] = to_string(numerator(scaled));
    row["value_denominator"] = to_string(denominator(scaled));
    row["leading_term"] = at_rate.leading_term;
    row["remainder"] = at_rate.remainder;
    row["ill_conditioned"] = profile.ill_conditioned();
    table.add_row({spec.label(), format_double(common.rate), std::to_string(a),
                   std::to_string(k), format_double(at_rate.value),
                   format_double(at_rate.leading_term),
                   format_double(at_rate.remainder),
                   profile.ill_conditioned() ? "true" : "false"},
                  std::move(row));
  }
  write_output(table.render(), common.out);
  return kExitOk;
}

int run_simulate(const CommonOptions& common, double b, long r,
                 const std::vector<long>& k_grid, bool bootstrap) {
  if (!(b > 0)) throw CLI::ValidationError("--b", "exponent b must be positive");
  if (r < 0) throw CLI::ValidationError("--r", "shift r must be >= 0");
  if (common.replications < 100)
    throw CLI::ValidationError(
        "--replications",
        "must be >= 100; standard errors are meaningless below that");
  const ProcessSpec spec = resolve_spec(common, kDefaultMaxExponent);

  std::vector<std::pair<std::string, std::string>> kv = {
      {"dist", spec.label()},      {"rate", format_double(common.rate)},
      {"b", format_double(b)},     {"r", std::to_string(r)},
      {"k-grid", ""},              {"replications", std::to_string(common.replications)},
      {"bootstrap", bootstrap ? "true" : "false"},
      {"format", common.format},
  };
  for (long k : k_grid) kv[4].second += std::to_string(k) + ";";
  TableWriter table("simulate", make_provenance("simulate", kv, common.seed),
                    common.format);
  std::vector<std::string> columns = {"family", "rate",      "b",
                                      "k",      "r",         "mean",
                                      "std_error", "replications"};
  if (bootstrap) columns.emplace_back("bootstrap_std_error");
  table.set_header(std::move(columns));

  const auto grid = moment_sweep(
      spec, k_grid, [r](long) { return r; }, {b}, common.replications,
      SeedSpec{common.seed, 0}, common.workers);
  for (const MomentEstimate& e : grid[0]) {
    json row;
    row["family"] = spec.label();
    row["rate"] = common.rate;
    row["b"] = e.b;
    row["k"] = e.k;
    row["r"] = e.r;
    row["mean"] = e.mean;
    row["std_error"] = e.std_error;
    row["replications"] = e.replications;
    std::vector<std::string> cells = {
        spec.label(),           format_double(common.rate),
        format_double(e.b),     std::to_string(e.k),
        std::to_string(e.r),    format_double(e.mean),
        format_double(e.std_error), std::to_string(e.replications)};
    if (bootstrap) {
      const MomentQuery query{e.b, e.k, e.r, spec, common.replications};
      const double se = bootstrap_std_error(query, SeedSpec{common.seed, 0});
      row["bootstrap_std_error"] = se;
      cells.push_back(format_double(se));
    }
    table.add_row(cells, std::move(row));
  }
  write_output(table.render(), common.out);
  return kExitOk;
}

std::string permutation_text(const std::vector<int>& permutation) {
  std::string text;
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    if (i) text += ';';
    text += std::to_string(permutation[i] + 1);  // 1-based in output
  }
  return text;
}

int run_matching(const CommonOptions& common, double b,
                 const std::vector<long>& n_grid, bool permutation_table) {
  if (!(b > 0)) throw CLI::ValidationError("--b", "exponent b must be positive");
  const ProcessSpec spec = resolve_spec(common, kDefaultMaxExponent);

  std::vector<std::pair<std::string, std::string>> kv = {
      {"dist", spec.label()},
      {"rate", format_double(common.rate)},
      {"b", format_double(b)},
      {"n-grid", ""},
      {"replications", std::to_string(common.replications)},
      {"mode", permutation_table ? "permutation-table" : "identity-cost"},
      {"format", common.format},
  };
  for (long n : n_grid) kv[3].second += std::to_string(n) + ";";
  TableWriter table("matching", make_provenance("matching", kv, common.seed),
                    common.format);

  if (permutation_table) {
    if (n_grid.size() != 1)
      throw CLI::ValidationError("--n", "permutation table needs a single n (<= 6)");
    const int n = static_cast<int>(n_grid[0]);
    if (n < 1 || n > 6)
      throw CLI::ValidationError("--n", "permutation table requires 1 <= n <= 6");
    table.set_header({"n", "b", "family", "rate", "permutation", "mean_cost",
                      "std_error", "margin_vs_identity", "margin_std_error"});
    const auto rows =
        permutation_cost_table(n, b, spec, common.replications,
                                 SeedSpec{common.seed, 0}, common.workers);
    for (const PermutationRow& r : rows) {
      json row;
      row["n"] = n;
      row["b"] = b;
      row["family"] = spec.label();
      row["rate"] = common.rate;
      json perm = json::array();
      for (int j : r.permutation) perm.push_back(j + 1);
      row["permutation"] = perm;
      row["mean_cost"] = r.mean_cost;
      row["std_error"] = r.std_error;
      row["margin_vs_identity"] = r.margin;
      row["margin_std_error"] = r.margin_std_error;
      table.add_row({std::to_string(n), format_double(b), spec.label(),
                     format_double(common.rate), permutation_text(r.permutation),
                     format_double(r.mean_cost), format_double(r.std_error),
                     format_double(r.margin), format_double(r.margin_std_error)},
                    std::move(row));
    }
  } else {
    table.set_header(
        {"n", "b", "family", "rate", "mean", "std_error", "replications"});
    const auto grid = t_b_sweep(spec, n_grid, {b}, common.replications,
                                SeedSpec{common.seed, 0}, common.workers);
    for (const MomentEstimate& e : grid[0]) {
      json row;
      row["n"] = e.k;
      row["b"] = e.b;
      row["family"] = spec.label();
      row["rate"] = common.rate;
      row["mean"] = e.mean;
      row["std_error"] = e.std_error;
      row["replications"] = e.replications;
      table.add_row({std::to_string(e.k), format_double(e.b), spec.label(),
                     format_double(common.rate), format_double(e.mean),
                     format_double(e.std_error), std::to_string(e.replications)},
                    std::move(row));
    }
  }
  write_output(table.render(), common.out);
  return kExitOk;
}

int run_scaling(const CommonOptions& common, const std::string& mode, double b,
                long r, const std::vector<long>& grid) {
  if (!(b > 0)) throw CLI::ValidationError("--b", "exponent b must be positive");
  const ProcessSpec spec = resolve_spec(common, kDefaultMaxExponent);

  std::vector<std::pair<std::string, std::string>> kv = {
      {"dist", spec.label()},  {"rate", format_double(common.rate)},
      {"mode", mode},          {"b", format_double(b)},
      {"r", std::to_string(r)}, {"grid", ""},
      {"replications", std::to_string(common.replications)},
      {"format", common.format},
  };
  for (long g : grid) kv[5].second += std::to_string(g) + ";";
  TableWriter table("scaling", make_provenance("scaling", kv, common.seed),
                    common.format);
  table.set_header({"mode", "b", "family", "rate", grid_label(mode), "r", "mean",
                    "std_error", "replications", "slope", "intercept",
                    "r_squared"});

  SlopeFit fit;
  if (mode == "moment") {
    fit = fit_scaling_exponent(
        b, grid, [r](long) { return r; }, spec, common.replications,
        SeedSpec{common.seed, 0}, common.workers);
  } else {
    if (r != 0)
      throw CLI::ValidationError("--r", "shift applies to moment mode only");
    fit = fit_T_b_scaling(b, grid, spec, common.replications,
                          SeedSpec{common.seed, 0}, common.workers);
  }
  for (const MomentEstimate& e : fit.points) {
    json row;
    row["mode"] = mode;
    row["b"] = e.b;
    row["family"] = spec.label();
    row["rate"] = common.rate;
    row[grid_label(mode)] = e.k;
    row["r"] = e.r;
    row["mean"] = e.mean;
    row["std_error"] = e.std_error;
    row["replications"] = e.replications;
    row["slope"] = fit.slope;
    row["intercept"] = fit.intercept;
    row["r_squared"] = fit.r_squared;
    table.add_row({mode, format_double(e.b), spec.label(),
                   format_double(common.rate), std::to_string(e.k),
                   std::to_string(e.r), format_double(e.mean),
                   format_double(e.std_error), std::to_string(e.replications),
                   format_double(fit.slope), format_double(fit.intercept),
                   format_double(fit.r_squared)},
                  std::move(row));
  }
  write_output(table.render(), common.out);
  return kExitOk;
}

int run_verify_command(const CommonOptions& common) {
  parse_family(common.dist, common.allow_extreme_sigma);  // reject bad grammar
  VerifyOptions options;
  options.replications = common.replications;
  options.master_seed = common.seed;
  options.workers = common.workers;

  const std::vector<std::pair<std::string, std::string>> kv = {
      {"replications", std::to_string(options.replications)},
      {"workers-independent", "true"},
  };
  const Provenance prov = make_provenance("verify", kv, common.seed);

  const std::vector<CheckResult> results = run_verify(options);
  json doc;
  doc["command"] = "verify";
  doc["provenance"] = {{"config_hash", prov.config_hash},
                       {"seed", prov.seed},
                       {"version", prov.version},
                       {"replications", options.replications}};
  json checks = json::array();
  for (const CheckResult& r : results) {
    json check;
    check["name"] = r.name;
    check["band"] = r.band;
    check["status"] = r.status;
    json details;
    for (const auto& [key, value] : r.details) details[key] = value;
    check["details"] = details;
    checks.push_back(std::move(check));
  }
  doc["checks"] = checks;
  doc["overall"] = all_passed(results) ? "pass" : "fail";
  write_output(doc.dump(2) + "\n", common.out);
  return all_passed(results) ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moments of the gap between two identical renewal-type processes: "
               "exact identities, Monte Carlo estimates, and bicolored matching costs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat config file mirroring the flags");

  CommonOptions common;

  // exact
  int exact_a = 0;
  std::string exact_k_grid;
  long exact_k = 0;
  CLI::App* exact = app.add_subcommand("exact", "exact E|X_k - Y_k|^a for even a");
  add_common_options(exact, common);
  exact->add_option("--a", exact_a, "even positive exponent")->required();
  exact->add_option("--k", exact_k, "process index k");
  exact->add_option("--k-grid", exact_k_grid, "comma-separated k values");

  // simulate
  double sim_b = 0;
  long sim_k = 0;
  long sim_r = 0;
  std::string sim_k_grid;
  bool sim_bootstrap = false;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo E|X_{k+r} - Y_k|^b for real b > 0");
  add_common_options(simulate, common);
  simulate->add_option("--b", sim_b, "positive real exponent")->required();
  simulate->add_option("--k", sim_k, "process index k");
  simulate->add_option("--k-grid", sim_k_grid, "comma-separated k values");
  simulate->add_option("--r", sim_r, "non-negative index shift");
  simulate->add_flag("--bootstrap", sim_bootstrap,
                     "add a bootstrap standard-error column (diagnostic)");

  // matching
  double match_b = 0;
  long match_n = 0;
  std::string match_n_grid;
  bool permutation_table = false;
  CLI::App* matching = app.add_subcommand(
      "matching", "transportation cost of the bicolored sensor matching");
  add_common_options(matching, common);
  matching->add_option("--b", match_b, "positive real exponent")->required();
  matching->add_option("--n", match_n, "number of sensors per color");
  matching->add_option("--n-grid", match_n_grid, "comma-separated n values");
  matching->add_flag("--permutation-table", permutation_table,
                     "emit the mean cost of every permutation (n <= 6)");

  // scaling
  std::string scaling_mode;
  double scaling_b = 0;
  long scaling_r = 0;
  std::string scaling_k_grid;
  std::string scaling_n_grid;
  CLI::App* scaling =
      app.add_subcommand("scaling", "log-log slope of moments or matching cost");
  add_common_options(scaling, common);
  scaling->add_option("--mode", scaling_mode, "moment | matching")
      ->required()
      ->check(CLI::IsMember({"moment", "matching"}));
  scaling->add_option("--b", scaling_b, "positive real exponent")->required();
  scaling->add_option("--r", scaling_r, "shift for moment mode (r <= sqrt(k)/4)");
  scaling->add_option("--k-grid", scaling_k_grid, "k grid for moment mode");
  scaling->add_option("--n-grid", scaling_n_grid, "n grid for matching mode");

  // verify
  CLI::App* verify = app.add_subcommand(
      "verify", "run the verification suite and emit a JSON report");
  add_common_options(verify, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto resolve_grid = [](CLI::App* cmd, const char* single_flag, long single,
                           const char* grid_flag, const std::string& grid_text) {
      std::vector<long> grid;
      if (cmd->count(grid_flag)) grid = parse_grid(grid_text, grid_flag);
      if (cmd->count(single_flag)) {
        if (single < 1)
          throw CLI::ValidationError(single_flag, "must be >= 1");
        grid.insert(grid.begin(), single);
      }
      if (grid.empty())
        throw CLI::ValidationError(single_flag,
                                   std::string("provide ") + single_flag +
                                       " or a non-empty " + grid_flag);
      return grid;
    };
    if (exact->parsed()) {
      return run_exact(common, exact_a,
                       resolve_grid(exact, "--k", exact_k, "--k-grid", exact_k_grid));
    }
    if (simulate->parsed()) {
      return run_simulate(common, sim_b, sim_r,
                          resolve_grid(simulate, "--k", sim_k, "--k-grid", sim_k_grid),
                          sim_bootstrap);
    }
    if (matching->parsed()) {
      return run_matching(
          common, match_b,
          resolve_grid(matching, "--n", match_n, "--n-grid", match_n_grid),
          permutation_table);
    }
    if (scaling->parsed()) {
      std::vector<long> grid;
      if (scaling_mode == "moment") {
        if (scaling_k_grid.empty())
          throw CLI::ValidationError("--k-grid", "moment mode needs --k-grid");
        grid = parse_grid(scaling_k_grid, "--k-grid");
      } else {
        if (scaling_n_grid.empty())
          throw CLI::ValidationError("--n-grid", "matching mode needs --n-grid");
        grid = parse_grid(scaling_n_grid, "--n-grid");
      }
      return run_scaling(common, scaling_mode, scaling_b, scaling_r, grid);
    }
    if (verify->parsed()) return run_verify_command(common);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const OrderInsufficientError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  return kExitUsage;
}
