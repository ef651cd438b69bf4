// Command-line front end: one-shot evaluators for the divergence and
// separation quantities, mixture/grid builders, the greedy cover, and the
// named experiments. Exit code 0 means success, 2 means a checked claim
// failed, 1 means the invocation or configuration was unusable.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "seqpred/experiments.hpp"
#include "seqpred/measure_json.hpp"

namespace {

using namespace seqpred;

constexpr const char* kSpecHelp =
    "measure specs:\n"
    "  bernoulli:P        binary i.i.d. with P(\"0\") = P\n"
    "  uniform:K          uniform i.i.d. over K symbols (\"0\"..\"K-1\")\n"
    "  markov:K:FILE      order-K Markov from canonical JSON in FILE\n"
    "  det:TSPEC          point mass on the binary target TSPEC\n"
    "  gammat:TSPEC       sharpening bias toward TSPEC (target mass 1/(n+1))\n"
    "  gammaprimet:TSPEC  constant 2/3 bias toward TSPEC (target mass (2/3)^n)\n"
    "  hidden:TSPEC[:S]   hidden-chain source for TSPEC over {a,0,1}, prior truncated at S\n"
    "  sparsezeros        the 1/n-zeros predictor\n"
    "  grid:K:D           binary order-K Markov grid with denominator D\n"
    "  mix:FILE           mixture from canonical JSON in FILE\n"
    "  {...} or @FILE     canonical JSON inline or from a file\n"
    "TSPEC is \"squares\", \"squares:M\", or a 0/1 pattern repeated periodically.";

struct Global {
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  int budget = kDefaultBudgetLog2;
  int jobs = 0;  // 0: use hardware concurrency

  RunConfig config() const {
    RunConfig c;
    c.seed = seed;
    c.out_dir = out;
    c.format = format;
    c.budget_log2 = budget;
    c.jobs = jobs > 0 ? jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return c;
  }
};

void write_series_file(const RunConfig& cfg, const std::string& stem, const DivergenceSeries& s) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  if (cfg.format == "json") {
    atomic_write_file(dir / (stem + ".json"), s.to_json().dump(2) + "\n");
  } else {
    atomic_write_file(dir / (stem + ".csv"), s.to_csv());
  }
}

int cmd_eval_dn(const Global& g, const std::string& mu_spec, const std::string& rho_spec, int n,
                std::string mode, std::size_t samples) {
  RunConfig cfg = g.config();
  auto mu = parse_measure_spec(mu_spec);
  auto rho = parse_measure_spec(rho_spec);
  if (mode == "auto")
    mode = exact_affordable(mu->alphabet().size(), n, cfg.budget_log2) ? "exact" : "mc";
  DivergenceSeries s;
  if (mode == "exact") {
    auto v = exact_dn(*mu, *rho, n, cfg.budget_log2);
    s.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(n), v.bits));
    std::cout << "d_" << n << " = " << format_double(v.bits) << "\n";
    if (n > 0) std::cout << "per_step = " << format_double(v.bits / n) << "\n";
    if (v.is_infinite()) std::cout << "witness = " << v.infinite_witness << "\n";
    std::cout << "mode = exact\n";
  } else if (mode == "mc") {
    auto est = mc_dn(*mu, *rho, n, samples, cfg.seed, cfg.jobs);
    s.points.push_back(DivergenceSeries::mc_point(static_cast<std::size_t>(n), est));
    std::cout << "d_" << n << " = " << format_double(est.mean) << "\n";
    if (n > 0) std::cout << "per_step = " << format_double(est.mean / n) << "\n";
    std::cout << "stderr = " << format_double(est.std_error) << "\n";
    std::cout << "samples = " << est.samples << "\n";
    std::cout << "mode = mc\nseed = " << est.seed << "\n";
  } else {
    throw std::invalid_argument("eval-dn: --mode must be exact, mc, or auto");
  }
  write_series_file(cfg, "eval_dn", s);
  return 0;
}

int cmd_eval_tv(const Global& g, const std::string& mu_spec, const std::string& rho_spec,
                const std::string& hist_text, int depth) {
  RunConfig cfg = g.config();
  auto mu = parse_measure_spec(mu_spec);
  auto rho = parse_measure_spec(rho_spec);
  History hist = History::parse(mu->alphabet(), hist_text);
  double tv = tv_conditional(*mu, *rho, hist, depth, cfg.budget_log2);
  std::cout << "tv = " << format_double(tv) << "\n";
  std::cout << "depth = " << depth << "\n";
  DivergenceSeries s;
  s.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(depth), tv));
  write_series_file(cfg, "eval_tv", s);
  return 0;
}

int cmd_eval_dinf(const Global& g, const std::string& mu_spec, const std::string& rho_spec, int n) {
  RunConfig cfg = g.config();
  auto mu = parse_measure_spec(mu_spec);
  auto rho = parse_measure_spec(rho_spec);
  auto v = d_inf(*mu, *rho, n, cfg.budget_log2);
  std::cout << "d_inf_" << n << " = " << format_double(v.value) << "\n";
  std::cout << "argmax = " << v.argmax << "\n";
  DivergenceSeries s;
  s.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(n), v.value));
  write_series_file(cfg, "eval_dinf", s);
  return 0;
}

int cmd_adversary(const Global& g, const std::string& rho_spec, int n) {
  RunConfig cfg = g.config();
  auto rho = parse_measure_spec(rho_spec);
  auto adv = adversary_sequence(*rho, n);
  std::cout << "sequence = " << adv.symbols.to_string() << "\n";
  std::cout << "d_" << n << " = " << format_double(adv.dn()) << "\n";
  DivergenceSeries s;
  for (int m = 1; m <= n; ++m)
    s.points.push_back(
        DivergenceSeries::exact_point(static_cast<std::size_t>(m), adv.cumulative_dn(static_cast<std::size_t>(m))));
  write_series_file(cfg, "adversary", s);
  return 0;
}

int cmd_build_mixture(const Global& g, int alphabet_size, int order, int denominator, bool multi) {
  RunConfig cfg = g.config();
  Alphabet a = Alphabet::indexed(static_cast<std::size_t>(alphabet_size));
  GridBuildStats stats;
  std::shared_ptr<MixturePredictor> m =
      multi ? multi_order_grid(a, order, denominator, &stats) : rational_markov_grid(a, order, denominator, &stats);
  std::cout << "components = " << stats.component_count << "\n";
  std::cout << "stationary_fallbacks = " << stats.stationary_fallbacks << "\n";
  if (!cfg.out_dir.empty()) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    auto p = dir / "mixture.json";
    atomic_write_file(p, m->to_json().dump(2) + "\n");
    std::cout << "wrote " << p.string() << "\n";
  } else {
    std::cout << m->to_json().dump(2) << "\n";
  }
  return 0;
}

int cmd_cover_construct(const Global& g, const std::string& pool_file, const std::string& rho_spec,
                        int horizon, const std::string& scheme_name) {
  RunConfig cfg = g.config();
  nlohmann::json pj = load_json_file(pool_file);
  if (!pj.is_array() || pj.empty()) throw std::invalid_argument("cover-construct: pool file must be a JSON array");
  std::vector<PoolEntry> pool;
  for (std::size_t i = 0; i < pj.size(); ++i) {
    const auto& item = pj[i];
    if (item.contains("measure")) {
      std::size_t parent = item.value("parent_index", i);
      if (parent >= pj.size()) throw std::invalid_argument("cover-construct: parent_index out of range");
      pool.push_back({parse_measure(item.at("measure")), parent});
    } else {
      pool.push_back({parse_measure(item), i});
    }
  }
  auto rho = parse_measure_spec(rho_spec);
  WeightScheme scheme;
  if (scheme_name == "inverse_square")
    scheme = WeightScheme::kInverseSquare;
  else if (scheme_name == "geometric")
    scheme = WeightScheme::kGeometric;
  else
    throw std::invalid_argument("cover-construct: --scheme must be inverse_square or geometric");
  auto cc = build_cover_construction(std::move(pool), rho, horizon, scheme, {}, cfg.budget_log2);
  auto rows = cover_diagnostics(cc, cfg.budget_log2);
  bool ok = true;
  for (const auto& r : rows)
    if (!r.holds) ok = false;
  std::cout << "levels = " << cc.levels.size() << "\n";
  std::cout << "truncation_deficit = " << format_double(cc.truncation_deficit()) << "\n";
  std::cout << "diagnostic = " << (ok ? "PASS" : "FAIL") << "\n";
  nlohmann::json report = {{"audit", cc.audit_json()}, {"diagnostics", cover_diagnostics_json(rows)}};
  if (!cfg.out_dir.empty()) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    auto p = dir / "cover_audit.json";
    atomic_write_file(p, report.dump(2) + "\n");
    std::cout << "wrote " << p.string() << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return ok ? 0 : 2;
}

int cmd_experiment(const Global& g, const std::string& name) {
  const auto& reg = experiment_registry();
  const ExperimentFn* fn = nullptr;
  for (const auto& [n, f] : reg)
    if (n == name) fn = &f;
  if (!fn) {
    std::cerr << "unknown experiment '" << name << "'. available experiments:\n";
    for (const auto& [n, f] : reg) std::cerr << "  " << n << "\n";
    return 1;
  }
  RunConfig cfg = g.config();
  auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res = (*fn)(cfg);
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& v : res.verdicts)
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << ": " << v.detail << "\n";
  for (const auto& f : write_experiment_files(res, cfg, ms)) std::cout << "wrote " << f << "\n";
  std::cout << "experiment " << name << ": " << (res.all_pass() ? "PASS" : "FAIL") << "\n";
  return res.all_pass() ? 0 : 2;
}

int cmd_list() {
  std::cout << "experiments:\n";
  for (const auto& n : experiment_names()) std::cout << "  " << n << "\n";
  std::cout << "\n" << kSpecHelp << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequence prediction toolkit: divergence evaluators, worst-case sequences,\n"
               "mixture and cover builders, and reproducible experiments."};
  app.footer(kSpecHelp);
  app.require_subcommand(1);

  Global g;
  app.add_option("--seed", g.seed, "base RNG seed for sampled evaluations")->capture_default_str();
  app.add_option("--out", g.out, "directory for emitted series and reports");
  app.add_option("--format", g.format, "series file format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--budget", g.budget, "log2 of the largest state count exact enumeration may visit")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads for sampling (0: hardware concurrency)")
      ->capture_default_str();

  std::string mu_spec, rho_spec, hist_text, mode = "auto", pool_file, scheme = "inverse_square", exp_name;
  int n = 1, depth = 8, alphabet_size = 2, order = 0, denominator = 2, horizon = 8;
  std::size_t samples = 10000;
  bool multi = false;

  auto* dn = app.add_subcommand("eval-dn", "cumulative expected log-loss gap of rho against mu over n steps");
  dn->add_option("--mu", mu_spec, "source measure spec")->required();
  dn->add_option("--rho", rho_spec, "predictor measure spec")->required();
  dn->add_option("--n", n, "horizon")->required();
  dn->add_option("--mode", mode, "exact | mc | auto")->capture_default_str();
  dn->add_option("--samples", samples, "sample count for mc mode")->capture_default_str();

  auto* tv = app.add_subcommand("eval-tv", "total variation between depth-h conditional futures");
  tv->add_option("--mu", mu_spec)->required();
  tv->add_option("--rho", rho_spec)->required();
  tv->add_option("--history", hist_text, "conditioning history (symbol labels, default empty)");
  tv->add_option("--depth", depth, "future depth")->capture_default_str();

  auto* di = app.add_subcommand("eval-dinf", "worst per-step log-ratio between two measures up to horizon n");
  di->add_option("--mu", mu_spec)->required();
  di->add_option("--rho", rho_spec)->required();
  di->add_option("--n", n, "horizon")->required();

  auto* adv = app.add_subcommand("adversary", "sequence that maximizes a predictor's per-step surprisal");
  adv->add_option("--rho", rho_spec, "predictor to defeat")->required();
  adv->add_option("--n", n, "sequence length")->required();

  auto* bm = app.add_subcommand("build-mixture", "build a rational transition-kernel grid mixture");
  bm->add_option("--alphabet", alphabet_size, "alphabet size")->capture_default_str();
  bm->add_option("--order", order, "Markov order (max order with --multi-order)")->capture_default_str();
  bm->add_option("--denominator", denominator, "grid denominator")->capture_default_str();
  bm->add_flag("--multi-order", multi, "combine orders 0..order with weights (o+1)^-2");

  auto* cov = app.add_subcommand("cover-construct", "greedy countable cover over a measure pool");
  cov->add_option("--pool", pool_file, "JSON array of measures (optionally {measure, parent_index})")->required();
  cov->add_option("--rho", rho_spec, "reference measure spec")->required();
  cov->add_option("--horizon", horizon, "construction horizon")->capture_default_str();
  cov->add_option("--scheme", scheme, "inverse_square | geometric")->capture_default_str();

  auto* exp = app.add_subcommand("experiment", "run a named experiment and grade its claims");
  exp->add_option("name", exp_name, "experiment name (see `list`)")->required();

  auto* ls = app.add_subcommand("list", "list experiments and measure spec shorthands");

  for (auto* sub : {dn, tv, di, adv, bm, cov, exp, ls}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*dn) return cmd_eval_dn(g, mu_spec, rho_spec, n, mode, samples);
    if (*tv) return cmd_eval_tv(g, mu_spec, rho_spec, hist_text, depth);
    if (*di) return cmd_eval_dinf(g, mu_spec, rho_spec, n);
    if (*adv) return cmd_adversary(g, rho_spec, n);
    if (*bm) return cmd_build_mixture(g, alphabet_size, order, denominator, multi);
    if (*cov) return cmd_cover_construct(g, pool_file, rho_spec, horizon, scheme);
    if (*exp) return cmd_experiment(g, exp_name);
    if (*ls) return cmd_list();
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
