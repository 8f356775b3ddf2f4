// maxcf: command-line front end for the max-CF library.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maxcf/all.hpp"

namespace fs = std::filesystem;
using namespace maxcf;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

const std::vector<std::string> kExperiments = {"gpd-maxima",    "counterexample", "copula-limit",
                                               "risk-identity", "nonclosedness",  "uniqueness"};

std::string fmt(double v) { return detail::fmt_num(v); }

// Doubles rounded to 15 significant digits so JSON output matches the CSV.
nlohmann::json round_json(const nlohmann::json& j) {
  if (j.is_number_float()) return std::stod(fmt(j.get<double>()));
  if (j.is_array() || j.is_object()) {
    nlohmann::json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = round_json(*it);
    return out;
  }
  return j;
}

std::string json_text(const nlohmann::json& j) { return round_json(j).dump(2) + "\n"; }

// Everything a subcommand may be given, on the command line or via --config.
struct Options {
  std::string target;  // eval: maxcf | dnorm; experiment: name
  std::string model, model_a, model_b, dnorm, generator;
  std::string grid, grid_file;
  std::string method = "auto";
  std::string out;
  std::string config;
  std::string n_list, k_list, alphas, measure_a, measure_b;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_mc;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, x, p;
  unsigned threads = 1;
  bool equal = false;
};

void add_common(CLI::App* sub, Options& o, bool stochastic) {
  sub->add_option("--config", o.config, "JSON file with option values (keys are long option names)");
  sub->add_option("--out", o.out, "Directory for <name>_seed<seed>.json/.csv output files");
  sub->add_option("--threads", o.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  if (stochastic) sub->add_option("--seed", o.seed, "Seed (required for every stochastic computation)");
}

// Values from --config fill options that were not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw InvalidArgument("config: key 'config' is not allowed inside a config file");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw InvalidArgument("config: unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (key == "grid" && value.is_array()) {
      for (const auto& point : value) {
        if (!text.empty()) text += ";";
        std::string row;
        for (const auto& c : point.is_array() ? point : nlohmann::json::array({point}))
          row += (row.empty() ? "" : ",") + fmt(c.get<double>());
        text += row;
      }
    } else if (value.is_array()) {
      for (const auto& c : value) text += (text.empty() ? "" : ",") + (c.is_string() ? c.get<std::string>() : c.dump());
    } else if (value.is_object()) {
      text = value.dump();
    } else if (value.is_number_float()) {
      text = fmt(value.get<double>());
    } else {
      text = value.dump();
    }
    opt->add_result(text);
    opt->run_callback();
  }
}

std::vector<std::vector<double>> load_grid(const Options& o, const char* fallback = nullptr) {
  if (!o.grid.empty() && !o.grid_file.empty()) throw InvalidArgument("give either --grid or --grid-file, not both");
  if (!o.grid_file.empty()) {
    std::ifstream in(o.grid_file);
    if (!in) throw InvalidArgument("grid-file: cannot open '" + o.grid_file + "'");
    std::string line, text;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (line.find_first_not_of("0123456789.eE+-, \t") != std::string::npos) continue;  // header
      line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; }), line.end());
      text += line + ";";
    }
    return parse_grid(text);
  }
  if (o.grid.empty()) {
    if (fallback) return parse_grid(fallback);
    throw InvalidArgument("missing --grid");
  }
  return parse_grid(o.grid);
}

RandomVectorModel require_model(const std::string& text, const char* flag) {
  if (text.empty()) throw InvalidArgument(std::string("missing ") + flag);
  return parse_model(text);
}

std::uint64_t require_seed(const Options& o, const std::string& what) {
  if (!o.seed) throw InvalidArgument("--seed is required for " + what);
  return *o.seed;
}

// Writes to --out when given, otherwise returns the text for stdout.
void emit(const Options& o, const std::string& name, const std::string& ext, const std::string& text,
          bool print_when_no_out = true) {
  if (o.out.empty()) {
    if (print_when_no_out) std::cout << text;
    return;
  }
  fs::create_directories(o.out);
  const std::string file = name + (o.seed ? "_seed" + std::to_string(*o.seed) : std::string()) + "." + ext;
  std::ofstream f(fs::path(o.out) / file, std::ios::binary);
  if (!f) throw InvalidArgument("out: cannot write '" + (fs::path(o.out) / file).string() + "'");
  f << text;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string grid_header(std::size_t d) {
  std::string h;
  for (std::size_t i = 0; i < d; ++i) h += "x" + std::to_string(i + 1) + ",";
  return h;
}

std::string grid_cells(const std::vector<double>& x) {
  std::string s;
  for (double v : x) s += fmt(v) + ",";
  return s;
}

// ---------------------------------------------------------------------------

MaxCf build_maxcf(const Options& o, const RandomVectorModel& model, const std::string& command) {
  std::string method = o.method;
  if (method == "auto") method = o.n ? "monte-carlo" : (model.has_maxcf() ? "closed-form" : "tail-integral");
  if (method == "closed-form") return MaxCf::closed_form(model);
  if (method == "tail-integral") return MaxCf::tail_integral(model);
  if (method == "monte-carlo") {
    const auto seed = require_seed(o, command + " with Monte Carlo evaluation");
    return MaxCf::monte_carlo(model, o.n.value_or(100000), seed, o.threads);
  }
  throw InvalidArgument("method: unknown value '" + o.method + "' (valid: auto, closed-form, tail-integral, monte-carlo)");
}

int cmd_eval(const Options& o) {
  const auto model = require_model(o.model, "--model");
  const auto grid = load_grid(o);
  const std::size_t d = model.dim();
  std::ostringstream csv;
  nlohmann::json j;
  j["model"] = model.spec();
  j["points"] = nlohmann::json::array();
  if (o.target == "maxcf") {
    const auto cf = build_maxcf(o, model, "eval maxcf");
    csv << grid_header(d) << "phi,std_error,provenance\n";
    for (const auto& x : grid) {
      const auto e = maxcf_eval(cf, x);
      csv << grid_cells(x) << fmt(e.value) << "," << fmt(e.std_error) << "," << quoted(cf.provenance()) << "\n";
      j["points"].push_back({{"x", x}, {"phi", e.value}, {"std_error", e.std_error}});
    }
    j["provenance"] = cf.provenance();
  } else if (o.target == "dnorm") {
    std::string method = o.method;
    if (method == "auto") method = o.n ? "monte-carlo" : "exact";
    std::optional<DNorm> norm;
    if (method == "exact") norm = DNorm::exact(model);
    else if (method == "monte-carlo")
      norm = DNorm::monte_carlo(model, o.n.value_or(100000), require_seed(o, "eval dnorm with Monte Carlo evaluation"),
                                o.threads);
    else throw InvalidArgument("method: unknown value '" + o.method + "' (valid: auto, exact, monte-carlo)");
    csv << grid_header(d) << "value,std_error\n";
    const auto values = dnorm_eval_grid(*norm, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      csv << grid_cells(grid[i]) << fmt(values[i].value) << "," << fmt(values[i].std_error) << "\n";
      j["points"].push_back({{"x", grid[i]}, {"value", values[i].value}, {"std_error", values[i].std_error}});
    }
    j["provenance"] = norm->label();
  } else {
    throw InvalidArgument("eval: target must be 'maxcf' or 'dnorm', got '" + o.target + "'");
  }
  emit(o, "eval_" + o.target, "csv", csv.str());
  emit(o, "eval_" + o.target, "json", json_text(j), false);
  return 0;
}

int cmd_invert(const Options& o) {
  const auto model = require_model(o.model, "--model");
  const auto grid = load_grid(o);
  const auto cf = build_maxcf(o, model, "invert");
  std::ostringstream csv;
  nlohmann::json j;
  j["model"] = model.spec();
  j["provenance"] = cf.provenance();
  j["points"] = nlohmann::json::array();
  csv << grid_header(model.dim()) << "cdf\n";
  for (const auto& x : grid) {
    const auto r = recover_cdf(cf, x);
    csv << grid_cells(x) << fmt(r.value) << "\n";
    j["points"].push_back({{"x", x}, {"cdf", r.value}, {"raw", r.raw}, {"extrapolant_gap", r.last_gap}});
  }
  emit(o, "invert", "csv", csv.str());
  emit(o, "invert", "json", json_text(j), false);
  return 0;
}

int cmd_sample(const Options& o) {
  const auto model = require_model(o.model, "--model");
  if (!o.n) throw InvalidArgument("missing --n");
  const auto s = model.sample(require_seed(o, "sample"), *o.n, o.threads);
  std::ostringstream csv;
  for (std::size_t j = 0; j < s.d(); ++j) csv << (j ? "," : "") << "z" << j + 1;
  csv << "\n";
  for (std::size_t i = 0; i < s.n(); ++i) {
    const auto r = s.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) csv << (j ? "," : "") << fmt(r[j]);
    csv << "\n";
  }
  emit(o, "sample", "csv", csv.str());
  return 0;
}

DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("measure: cannot open '" + path + "'");
  std::string line;
  std::vector<double> support, weights;
  std::size_t d = 0, m = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.find_first_not_of("0123456789.eE+-, \t\r") != std::string::npos) continue;  // header
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cells = parse_real_list(line);
    if (cells.size() < 2) throw InvalidArgument("measure '" + path + "': rows need coordinates and a weight");
    if (d == 0) d = cells.size() - 1;
    if (cells.size() != d + 1) throw InvalidArgument("measure '" + path + "': rows have different lengths");
    support.insert(support.end(), cells.begin(), cells.end() - 1);
    weights.push_back(cells.back());
    ++m;
  }
  if (m == 0) throw InvalidArgument("measure '" + path + "': no rows");
  return DiscreteMeasure(m, d, std::move(support), std::move(weights));
}

int cmd_w1(const Options& o) {
  nlohmann::json j;
  if (!o.measure_a.empty() || !o.measure_b.empty()) {
    if (o.measure_a.empty() || o.measure_b.empty()) throw InvalidArgument("w1: give both --measure-a and --measure-b");
    const auto a = load_measure(o.measure_a);
    const auto b = load_measure(o.measure_b);
    const auto bounds = w1_bounds(a, b);
    j["lower"] = bounds.lower;
    j["upper"] = bounds.upper;
    std::string plan_csv;
    if (a.size() + b.size() <= kExactSolverCap) {
      const auto plan = w1_discrete_exact(a, b);
      j["w1"] = plan.cost;
      plan_csv = plan.to_csv();
    }
    if (o.out.empty()) {
      std::cout << json_text(j);
    } else {
      emit(o, "w1", "json", json_text(j));
      if (!plan_csv.empty()) emit(o, "w1_plan", "csv", plan_csv);
    }
    return 0;
  }
  const auto a = require_model(o.model_a, "--model-a");
  const auto b = require_model(o.model_b, "--model-b");
  const auto seed = require_seed(o, "w1 between models");
  const auto res = w1_model_distance_detailed(a, b, o.n.value_or(10000), seed, o.threads);
  j["a"] = a.spec();
  j["b"] = b.spec();
  j["w1"] = res.estimate.value;
  j["std_error"] = res.estimate.std_error;
  j["batch_spread"] = res.spread;
  j["batches"] = res.batches;
  std::ostringstream csv;
  csv << "batch,w1\n";
  for (std::size_t i = 0; i < res.batches.size(); ++i) csv << i << "," << fmt(res.batches[i]) << "\n";
  emit(o, "w1", "json", json_text(j));
  emit(o, "w1", "csv", csv.str(), false);
  return 0;
}

template <class Report>
int finish_experiment(const Options& o, const std::string& name, const Report& rep, const std::string& verdict) {
  if (o.out.empty()) {
    std::cout << json_text(rep.to_json());
    std::cerr << name << ": " << verdict << "\n";
  } else {
    emit(o, name, "json", json_text(rep.to_json()));
    emit(o, name, "csv", rep.to_csv());
    std::cout << name << ": " << verdict << "\n";
  }
  return 0;
}

int cmd_experiment(const Options& o) {
  const std::string& name = o.target;
  if (name == "gpd-maxima") {
    GpdMaximaConfig cfg;
    if (o.alpha) cfg.alpha = *o.alpha;
    if (!o.generator.empty()) cfg.generator = parse_model(o.generator);
    cfg.bound = std::max(1.0, cfg.generator.bound().value_or(1.0));
    if (!o.n_list.empty()) cfg.n_list = parse_index_list(o.n_list);
    if (!o.grid.empty() || !o.grid_file.empty()) cfg.grid = load_grid(o);
    else if (cfg.generator.dim() != 1) throw InvalidArgument("gpd-maxima: --grid is required for d > 1");
    if (o.n_mc) cfg.n_mc = *o.n_mc;
    cfg.seed = require_seed(o, "experiment gpd-maxima");
    cfg.threads = o.threads;
    const auto rep = run_gpd_maxima_experiment(cfg);
    std::string verdict = rep.verdict;
    if (!rep.means.empty()) verdict += "; mean -> " + fmt(rep.means.back().front()) + " (limit " + fmt(rep.target_mean) + ")";
    return finish_experiment(o, name, rep, verdict);
  }
  if (name == "counterexample") {
    const auto n_list = parse_index_list(o.n_list.empty() ? "1..20" : o.n_list);
    const auto rep = run_counterexample_cf_vs_maxcf(n_list, o.x.value_or(1.0));
    return finish_experiment(o, name, rep, "max-CF " + rep.maxcf_verdict + ", CF " + rep.cf_verdict);
  }
  if (name == "copula-limit") {
    const auto gen = parse_model(o.dnorm.empty() ? "perm:2" : o.dnorm);
    const auto norm = DNorm::exact(gen);
    const auto grid = load_grid(o, "1,1;0.5,2;2,0.5;0.25,0.25;3,3");
    std::uint64_t seed = 0;
    if (norm.family() == NormFamily::l1) seed = require_seed(o, "experiment copula-limit with the l1-norm");
    const auto rep = run_copula_limit_check(norm, grid, o.n.value_or(1000000), seed, o.threads);
    return finish_experiment(o, name, rep, rep.pass ? "formula confirmed" : "discrepancy");
  }
  if (name == "risk-identity") {
    const auto model = parse_model(o.model.empty() ? "gpd:0,1,0.5" : o.model);
    const auto alphas = parse_real_list(o.alphas.empty() ? "0.25,0.5,0.75,0.9" : o.alphas);
    const auto rep = risk_identity_check(model, alphas);
    return finish_experiment(o, name, rep, rep.pass ? "identity holds" : "identity violated");
  }
  if (name == "nonclosedness") {
    NonclosednessConfig cfg;
    if (!o.model.empty()) cfg.base = parse_model(o.model);
    if (o.p) cfg.p = *o.p;
    if (!o.k_list.empty()) cfg.k_list = parse_index_list(o.k_list);
    if (!o.grid.empty() || !o.grid_file.empty()) cfg.grid = load_grid(o);
    else if (cfg.base.dim() != 1) throw InvalidArgument("nonclosedness: --grid is required for d > 1");
    if (o.n_mc) cfg.n_mc = *o.n_mc;
    cfg.seed = require_seed(o, "experiment nonclosedness");
    cfg.threads = o.threads;
    const auto rep = run_nonclosedness_demo(cfg);
    return finish_experiment(o, name, rep, rep.verdict);
  }
  if (name == "uniqueness") {
    const auto a = require_model(o.model_a, "--model-a");
    const auto b = require_model(o.model_b, "--model-b");
    const auto grid = load_grid(o);
    const auto rep = uniqueness_smoke_test(a, b, grid, o.n.value_or(100000), require_seed(o, "experiment uniqueness"),
                                           o.equal, o.threads);
    return finish_experiment(o, name, rep, rep.verdict);
  }
  std::string names;
  for (const auto& e : kExperiments) names += (names.empty() ? "" : ", ") + e;
  throw InvalidArgument("unknown experiment '" + name + "' (valid: " + names + ")");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-characteristic functions, D-norms, inversion, Wasserstein-1 transport and experiments"};
  app.require_subcommand(1);
  Options o;

  auto* eval = app.add_subcommand("eval", "Evaluate a max-CF or a D-norm on a grid (CSV)");
  eval->add_option("target", o.target, "maxcf | dnorm")->required();
  eval->add_option("--model", o.model, "Model spec, kind:params or JSON");
  eval->add_option("--grid", o.grid, "Points separated by ';', coordinates by ','");
  eval->add_option("--grid-file", o.grid_file, "CSV file with one point per row");
  eval->add_option("--method", o.method, "auto | closed-form | tail-integral | monte-carlo (maxcf); auto | exact | monte-carlo (dnorm)");
  eval->add_option("--n", o.n, "Monte Carlo sample size (selects Monte Carlo under --method auto)");
  add_common(eval, o, true);

  auto* invert = app.add_subcommand("invert", "Recover the cdf from the max-CF on a grid of x > 0");
  invert->add_option("--model", o.model, "Model spec, kind:params or JSON");
  invert->add_option("--grid", o.grid, "Points separated by ';', coordinates by ','");
  invert->add_option("--grid-file", o.grid_file, "CSV file with one point per row");
  invert->add_option("--method", o.method, "auto | closed-form | tail-integral | monte-carlo");
  invert->add_option("--n", o.n, "Monte Carlo sample size");
  add_common(invert, o, true);

  auto* experiment = app.add_subcommand("experiment", "Run a named experiment and write its report");
  experiment->add_option("name", o.target, "gpd-maxima | counterexample | copula-limit | risk-identity | nonclosedness | uniqueness")
      ->required();
  experiment->add_option("--alpha", o.alpha, "Tail index (gpd-maxima)");
  experiment->add_option("--generator", o.generator, "Bounded unit-mean generator (gpd-maxima)");
  experiment->add_option("--n-list", o.n_list, "Indices, e.g. 10,100,1000 or 1..20");
  experiment->add_option("--n-mc", o.n_mc, "Monte Carlo sample size per index");
  experiment->add_option("--grid", o.grid, "Points separated by ';', coordinates by ','");
  experiment->add_option("--grid-file", o.grid_file, "CSV file with one point per row");
  experiment->add_option("--x", o.x, "Evaluation point (counterexample)");
  experiment->add_option("--dnorm", o.dnorm, "Generator of the D-norm (copula-limit): perm:2 or frechet:lambda,2");
  experiment->add_option("--model", o.model, "Model (risk-identity) or base generator (nonclosedness)");
  experiment->add_option("--alphas", o.alphas, "Quantile levels (risk-identity)");
  experiment->add_option("--p", o.p, "Thinning probability (nonclosedness)");
  experiment->add_option("--k-list", o.k_list, "Iterate indices (nonclosedness), e.g. 1..20");
  experiment->add_option("--model-a", o.model_a, "First model (uniqueness)");
  experiment->add_option("--model-b", o.model_b, "Second model (uniqueness)");
  experiment->add_flag("--equal", o.equal, "Declare the two models equal in distribution (uniqueness)");
  experiment->add_option("--n", o.n, "Monte Carlo sample size (copula-limit, uniqueness)");
  add_common(experiment, o, true);

  auto* sample = app.add_subcommand("sample", "Draw a sample from a model (CSV)");
  sample->add_option("--model", o.model, "Model spec, kind:params or JSON");
  sample->add_option("--n", o.n, "Sample size");
  add_common(sample, o, true);

  auto* w1 = app.add_subcommand("w1", "Wasserstein-1 distance between two models or two discrete measures");
  w1->add_option("--model-a", o.model_a, "First model");
  w1->add_option("--model-b", o.model_b, "Second model");
  w1->add_option("--n", o.n, "Draws per model before subsampling");
  w1->add_option("--measure-a", o.measure_a, "CSV file x1..xd,weight");
  w1->add_option("--measure-b", o.measure_b, "CSV file x1..xd,weight");
  add_common(w1, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!o.config.empty()) apply_config(active, o.config);
    if (active == eval) return cmd_eval(o);
    if (active == invert) return cmd_invert(o);
    if (active == experiment) return cmd_experiment(o);
    if (active == sample) return cmd_sample(o);
    if (active == w1) return cmd_w1(o);
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
