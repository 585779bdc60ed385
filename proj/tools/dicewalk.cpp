// Command-line front end: emits the L_k tables, scaled pdfs, characteristic
// roots, seeded simulations, heuristic fits, and the concentration
// experiment as CSV or JSON, each with a reproducibility manifest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dicewalk/asymptotics.hpp"
#include "dicewalk/die.hpp"
#include "dicewalk/exactdist.hpp"
#include "dicewalk/hitprob.hpp"
#include "dicewalk/montecarlo.hpp"
#include "dicewalk/targets.hpp"
#include "dicewalk/version.hpp"

namespace {

using nlohmann::json;

// Ten significant digits everywhere a float is printed, matching the
// precision of the reference tables.
std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

// JSON numbers round-tripped through the same 10-digit formatting so both
// output modes show identical values.
json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(fmt(x));
}

struct output_options {
  std::string out_path;  // empty = stdout
  bool as_json = false;
};

struct common_options {
  std::string die_arg = "fair:6";
  std::string targets_arg = "primes";
  double tail_eps = 0.0;  // 0 = per-k default
  long long max_horizon = 200000;
  output_options out;
};

void add_output_flags(CLI::App* cmd, output_options& o) {
  cmd->add_option("--out", o.out_path, "Write output to this file (default stdout)");
  cmd->add_flag("--json", o.as_json, "Emit JSON instead of CSV");
}

void add_common_flags(CLI::App* cmd, common_options& c) {
  cmd->add_option("--die", c.die_arg, "Die: fair:R or file:PATH (default fair:6)");
  cmd->add_option("--targets", c.targets_arg,
                  "Targets: primes or file:PATH (default primes)");
  cmd->add_option("--tail-eps", c.tail_eps,
                  "Truncation bound on unabsorbed mass (default 1e-13 for "
                  "k<=30, 1e-10 above)");
  cmd->add_option("--max-horizon", c.max_horizon,
                  "Abort if the pmf has not converged after this many rolls");
  add_output_flags(cmd, c.out);
}

// Deterministic manifest core; wall-clock duration is added only to the
// sidecar so the primary artifact stays byte-identical across reruns.
json manifest_core(const std::string& subcommand) {
  return json{{"subcommand", subcommand}, {"tool_version", dicewalk::kVersion}};
}

void write_output(const output_options& o, const std::string& body,
                  json manifest, std::chrono::steady_clock::time_point start) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  if (o.out_path.empty()) {
    std::fputs(body.c_str(), stdout);
    manifest["duration_ms"] = ms;
    std::fprintf(stderr, "manifest: %s\n", manifest.dump().c_str());
    return;
  }
  {
    std::ofstream f(o.out_path, std::ios::binary);
    if (!f)
      throw dicewalk::error(dicewalk::errc::invalid_input,
                            "cannot write " + o.out_path);
    f << body;
  }
  manifest["duration_ms"] = ms;
  std::ofstream mf(o.out_path + ".manifest.json", std::ios::binary);
  if (!mf)
    throw dicewalk::error(dicewalk::errc::invalid_input,
                          "cannot write " + o.out_path + ".manifest.json");
  mf << manifest.dump(1) << "\n";
}

dicewalk::target_set make_targets(const std::string& arg) {
  return dicewalk::parse_targets_arg(arg, 4096);
}

void progress_printer(long long step, double active) {
  if (step % 500 == 0)
    std::fprintf(stderr, "step %lld, active mass %.3e\n", step, active);
}

int cmd_table(const common_options& c, int k_max) {
  const auto start = std::chrono::steady_clock::now();
  const auto die = dicewalk::parse_die_arg(c.die_arg);
  const auto ts = make_targets(c.targets_arg);
  dicewalk::lk_options opt;
  opt.tail_eps = c.tail_eps;
  opt.max_horizon = c.max_horizon;
  opt.progress = progress_printer;
  const auto dists = dicewalk::compute_lk_sweep(die, ts, k_max, opt);

  json manifest = manifest_core("table");
  manifest["die"] = die;
  manifest["targets"] = c.targets_arg;
  manifest["k_max"] = k_max;
  manifest["tail_eps"] = jnum(dists.front().tail_eps);

  std::string body;
  json rows = json::array();
  body += "k,mean,std,skew,kurtosis,tail_mass,n_max\n";
  for (const auto& d : dists) {
    const auto m = dicewalk::moments(d);
    body += std::to_string(d.k) + "," + fmt(m.mean) + "," + fmt(m.stddev) + "," +
            fmt(m.skewness()) + "," + fmt(m.kurtosis()) + "," + fmt(d.tail_mass) +
            "," + std::to_string(d.n_max()) + "\n";
    if (c.out.as_json)
      rows.push_back({{"k", d.k},
                      {"mean", jnum(m.mean)},
                      {"std", jnum(m.stddev)},
                      {"skew", jnum(m.skewness())},
                      {"kurtosis", jnum(m.kurtosis())},
                      {"tail_mass", jnum(d.tail_mass)},
                      {"n_max", d.n_max()}});
  }
  if (c.out.as_json) {
    json doc{{"manifest", manifest}, {"rows", rows}};
    body = doc.dump(1) + "\n";
  }
  write_output(c.out, body, manifest, start);
  return 0;
}

int cmd_pdf(const common_options& c, int k) {
  const auto start = std::chrono::steady_clock::now();
  const auto die = dicewalk::parse_die_arg(c.die_arg);
  const auto ts = make_targets(c.targets_arg);
  dicewalk::lk_options opt;
  opt.tail_eps = c.tail_eps;
  opt.max_horizon = c.max_horizon;
  opt.progress = progress_printer;
  const auto dist = dicewalk::compute_lk(die, ts, k, opt);
  const auto points = dicewalk::scaled_pdf(dist);

  json manifest = manifest_core("pdf");
  manifest["die"] = die;
  manifest["targets"] = c.targets_arg;
  manifest["k"] = k;
  manifest["tail_eps"] = jnum(dist.tail_eps);

  std::string body = "z,density\n";
  json pts = json::array();
  for (const auto& p : points) {
    body += fmt(p.z) + "," + fmt(p.density) + "\n";
    if (c.out.as_json) pts.push_back({{"z", jnum(p.z)}, {"density", jnum(p.density)}});
  }
  if (c.out.as_json) {
    json doc{{"manifest", manifest}, {"points", pts}};
    body = doc.dump(1) + "\n";
  }
  write_output(c.out, body, manifest, start);
  return 0;
}

int cmd_roots(const common_options& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto die = dicewalk::parse_die_arg(c.die_arg);
  const auto spec = dicewalk::spectral(die);

  json manifest = manifest_core("roots");
  manifest["die"] = die;
  manifest["dominant_root_residual"] = jnum(spec.dominant_root_residual);
  manifest["subdominant_max_modulus"] = jnum(spec.subdominant_max_modulus);

  std::string body = "re,im,modulus,residual\n";
  json rows = json::array();
  for (size_t i = 0; i < spec.roots.size(); ++i) {
    const auto& z = spec.roots[i];
    body += fmt(z.real()) + "," + fmt(z.imag()) + "," + fmt(std::abs(z)) + "," +
            fmt(spec.residuals[i]) + "\n";
    if (c.out.as_json)
      rows.push_back({{"re", jnum(z.real())},
                      {"im", jnum(z.imag())},
                      {"modulus", jnum(std::abs(z))},
                      {"residual", jnum(spec.residuals[i])}});
  }
  if (c.out.as_json) {
    json doc{{"manifest", manifest}, {"roots", rows}};
    body = doc.dump(1) + "\n";
  }
  write_output(c.out, body, manifest, start);
  return 0;
}

int cmd_simulate(const common_options& c, int k, uint64_t trials, uint64_t seed,
                 int threads) {
  const auto start = std::chrono::steady_clock::now();
  dicewalk::sim_config cfg;
  cfg.die = dicewalk::parse_die_arg(c.die_arg);
  cfg.targets = make_targets(c.targets_arg);
  cfg.k = k;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.threads = threads;
  const auto stats = dicewalk::simulate_lk(cfg);

  json manifest = manifest_core("simulate");
  manifest["die"] = cfg.die;
  manifest["targets"] = c.targets_arg;
  manifest["k"] = k;
  manifest["trials"] = trials;
  manifest["seed"] = seed;
  manifest["generator"] = dicewalk::kGeneratorName;
  manifest["stats"] = {{"count", stats.count},
                       {"mean", jnum(stats.mean)},
                       {"std", jnum(stats.stddev)},
                       {"skewness", jnum(stats.skewness)},
                       {"kurtosis", jnum(stats.kurtosis)},
                       {"standard_error_of_mean", jnum(stats.standard_error_of_mean)}};

  std::string body = "n,count\n";
  json rows = json::array();
  for (const auto& [n, cnt] : stats.histogram) {
    body += std::to_string(n) + "," + std::to_string(cnt) + "\n";
    if (c.out.as_json) rows.push_back({{"n", n}, {"count", cnt}});
  }
  if (c.out.as_json) {
    json doc{{"manifest", manifest}, {"histogram", rows}};
    body = doc.dump(1) + "\n";
  }
  write_output(c.out, body, manifest, start);
  return 0;
}

// CSV with a header naming at least "k" and "mean" columns, e.g. the table
// subcommand's output.
std::vector<std::pair<long long, double>> read_fit_input(const std::string& path,
                                                         long long min_k) {
  std::ifstream in(path);
  if (!in)
    throw dicewalk::error(dicewalk::errc::invalid_input, "fit: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw dicewalk::error(dicewalk::errc::invalid_input, "fit: empty input " + path);
  int k_col = -1, mean_col = -1, col = 0;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ','); ++col) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    if (cell == "k") k_col = col;
    if (cell == "mean") mean_col = col;
  }
  if (k_col < 0 || mean_col < 0)
    throw dicewalk::error(dicewalk::errc::invalid_input,
                          "fit: header must name k and mean columns");
  std::vector<std::pair<long long, double>> pairs;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (static_cast<int>(cells.size()) <= std::max(k_col, mean_col))
      throw dicewalk::error(dicewalk::errc::invalid_input,
                            "fit: short row at " + path + ":" + std::to_string(lineno));
    try {
      const long long k = std::stoll(cells[k_col]);
      const double mean = std::stod(cells[mean_col]);
      if (k >= min_k) pairs.emplace_back(k, mean);
    } catch (const std::exception&) {
      throw dicewalk::error(dicewalk::errc::invalid_input,
                            "fit: bad number at " + path + ":" + std::to_string(lineno));
    }
  }
  return pairs;
}

int cmd_fit(const output_options& o, const std::string& input, long long min_k) {
  const auto start = std::chrono::steady_clock::now();
  const auto pairs = read_fit_input(input, min_k);
  const auto fit = dicewalk::fit_constants(pairs);

  json manifest = manifest_core("fit");
  manifest["input"] = input;
  manifest["min_k"] = min_k;
  manifest["points"] = pairs.size();

  json doc{{"c1", jnum(fit.params.c1)},
           {"c2", jnum(fit.params.c2)},
           {"max_abs_residual", jnum(fit.max_abs_residual)},
           {"sse", jnum(fit.sse)},
           {"residuals", json::array()},
           {"points", json::array()}};
  for (size_t i = 0; i < pairs.size(); ++i) {
    doc["residuals"].push_back(jnum(fit.residuals[i]));
    doc["points"].push_back(
        {{"k", pairs[i].first},
         {"mean", jnum(pairs[i].second)},
         {"fitted", jnum(dicewalk::heuristic(pairs[i].first, fit.params))}});
  }
  write_output(o, doc.dump(1) + "\n", manifest, start);
  return 0;
}

int cmd_verify_concentration(const common_options& c, long long n_targets,
                             std::vector<double> a_values, uint64_t trials,
                             uint64_t seed, int threads) {
  const auto start = std::chrono::steady_clock::now();
  const auto die = dicewalk::parse_die_arg(c.die_arg);
  auto ts = make_targets(c.targets_arg);
  while (ts.size() < n_targets) {
    if (ts.kind() == dicewalk::target_kind::explicit_list)
      throw dicewalk::error(dicewalk::errc::invalid_input,
                            "verify-concentration: target list has only " +
                                std::to_string(ts.size()) + " members");
    ts = ts.grow(ts.limit() * 2);
  }
  if (a_values.empty()) {
    const double base = std::sqrt(static_cast<double>(n_targets) *
                                  std::log(static_cast<double>(n_targets)));
    a_values = {base, 2.0 * base, 3.0 * base};
  }

  json manifest = manifest_core("verify-concentration");
  manifest["die"] = die;
  manifest["targets"] = c.targets_arg;
  manifest["n_targets"] = n_targets;
  manifest["trials"] = trials;
  manifest["seed"] = seed;
  manifest["generator"] = dicewalk::kGeneratorName;

  std::string body = "a,frequency\n";
  json rows = json::array();
  for (double a : a_values) {
    const double freq =
        dicewalk::deviation_frequency(die, ts, n_targets, a, trials, seed, threads);
    body += fmt(a) + "," + fmt(freq) + "\n";
    if (c.out.as_json) rows.push_back({{"a", jnum(a)}, {"frequency", jnum(freq)}});
  }
  if (c.out.as_json) {
    json doc{{"manifest", manifest}, {"rows", rows}};
    body = doc.dump(1) + "\n";
  }
  write_output(c.out, body, manifest, start);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and simulated statistics of dice-walk hitting times"};
  app.require_subcommand(1);

  common_options table_opt;
  int table_kmax = 30;
  auto* table = app.add_subcommand("table", "Moment table for k = 1..k_max");
  add_common_flags(table, table_opt);
  table->add_option("--k-max", table_kmax, "Largest k")->check(CLI::PositiveNumber);

  common_options pdf_opt;
  int pdf_k = 20;
  auto* pdf = app.add_subcommand("pdf", "Scaled pmf of L_k in standard units");
  add_common_flags(pdf, pdf_opt);
  pdf->add_option("--k", pdf_k, "Number of hits")->check(CLI::PositiveNumber);

  common_options roots_opt;
  auto* roots = app.add_subcommand("roots", "Characteristic polynomial roots");
  roots->add_option("--die", roots_opt.die_arg, "Die: fair:R or file:PATH");
  add_output_flags(roots, roots_opt.out);

  common_options sim_opt;
  int sim_k = 1, sim_threads = 1;
  uint64_t sim_trials = 100000, sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "Seeded Monte Carlo of L_k");
  add_common_flags(sim, sim_opt);
  sim->add_option("--k", sim_k, "Number of hits")->check(CLI::PositiveNumber);
  sim->add_option("--trials", sim_trials, "Walks to simulate");
  sim->add_option("--seed", sim_seed, "Generator seed");
  sim->add_option("--threads", sim_threads, "Worker threads")->check(CLI::PositiveNumber);

  output_options fit_out;
  std::string fit_input;
  long long fit_min_k = 2;
  auto* fit = app.add_subcommand("fit", "Least-squares heuristic constants from a mean table");
  fit->add_option("--input", fit_input, "CSV with k and mean columns")->required();
  fit->add_option("--min-k", fit_min_k,
                  "Ignore rows with smaller k (the model needs k >= 2)");
  add_output_flags(fit, fit_out);

  common_options conc_opt;
  long long conc_n = 500;
  std::vector<double> conc_a;
  uint64_t conc_trials = 100000, conc_seed = 0;
  int conc_threads = 1;
  auto* conc = app.add_subcommand("verify-concentration",
                                  "Empirical deviation frequencies of target hits");
  add_common_flags(conc, conc_opt);
  conc->add_option("--n-targets", conc_n, "Members of the target set to cover")
      ->check(CLI::PositiveNumber);
  conc->add_option("--a", conc_a,
                   "Deviation thresholds (default {1,2,3} sqrt(n ln n))");
  conc->add_option("--trials", conc_trials, "Walks per threshold");
  conc->add_option("--seed", conc_seed, "Generator seed");
  conc->add_option("--threads", conc_threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }

  try {
    if (table->parsed()) return cmd_table(table_opt, table_kmax);
    if (pdf->parsed()) return cmd_pdf(pdf_opt, pdf_k);
    if (roots->parsed()) return cmd_roots(roots_opt);
    if (sim->parsed())
      return cmd_simulate(sim_opt, sim_k, sim_trials, sim_seed, sim_threads);
    if (fit->parsed()) return cmd_fit(fit_out, fit_input, fit_min_k);
    if (conc->parsed())
      return cmd_verify_concentration(conc_opt, conc_n, conc_a, conc_trials,
                                      conc_seed, conc_threads);
  } catch (const dicewalk::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dicewalk::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
