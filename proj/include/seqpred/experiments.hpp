#pragma once

// The named desk-scale studies behind the CLI's `experiment` subcommand. Each
// one wires measures, predictors, and evaluators together, emits its series,
// and grades the claims it was built to check. Verdicts only use numbers that
// appear in the emitted series or in the `extra` audit payload, so a reader
// can re-derive every pass/fail from the files alone.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "seqpred/adversary.hpp"
#include "seqpred/biased.hpp"
#include "seqpred/cover.hpp"
#include "seqpred/dinf.hpp"
#include "seqpred/divergence.hpp"
#include "seqpred/hidden_chain.hpp"
#include "seqpred/measures.hpp"
#include "seqpred/mixture.hpp"
#include "seqpred/report.hpp"
#include "seqpred/total_variation.hpp"

namespace seqpred {

// Shared horizon ladder: powers of two from 2^4 to 2^12.
inline std::vector<int> experiment_horizons() {
  std::vector<int> h;
  for (int e = 4; e <= 12; ++e) h.push_back(1 << e);
  return h;
}

// Exhaustive enumeration is considered affordable while |X|^n fits the state
// budget; beyond that, evaluators switch to sampling.
inline bool exact_affordable(std::size_t alphabet_size, int n, int budget_log2 = kDefaultBudgetLog2) {
  return static_cast<double>(n) * std::log2(static_cast<double>(alphabet_size)) <=
         static_cast<double>(budget_log2) + 1e-9;
}

namespace detail {

inline double bernoulli_kl_bits(double p, double q) {
  auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log2(a / b); };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

// max over step probabilities realized by the adversary's chosen symbols
inline double max_step_prob(const AdversarySequence& adv) {
  double m = 0.0;
  for (double lp : adv.step_log2_prob) m = std::max(m, std::exp2(lp));
  return m;
}

// Adds one adversary-vs-candidate series and its linear lower-bound verdict:
// d_h >= h*log2|X| at every horizon, with the realized per-step probability
// never above 1/|X|.
inline void run_adversary_case(ExperimentResult& r, const std::string& cand_name, const ProcessMeasure& cand,
                               const std::vector<int>& horizons) {
  const double per_step = std::log2(static_cast<double>(cand.alphabet().size()));
  auto adv = adversary_sequence(cand, horizons.back());
  DivergenceSeries s;
  bool ok = true;
  double min_slack = kPosInf;
  for (int h : horizons) {
    double v = adv.cumulative_dn(static_cast<std::size_t>(h));
    s.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(h), v));
    min_slack = std::min(min_slack, v - per_step * h);
    if (v < per_step * h - 1e-6) ok = false;
  }
  double step_p = max_step_prob(adv);
  bool step_ok = step_p <= 1.0 / static_cast<double>(cand.alphabet().size()) + 1e-12;
  r.series.push_back({"adversary_vs_" + cand_name, std::move(s)});
  r.add_verdict("adversary_linear_vs_" + cand_name, ok && step_ok,
                "min over horizons of d_n - n*log2|X| = " + format_double(min_slack) +
                    " >= -1e-6; max realized step probability = " + format_double(step_p) + " <= 1/|X|");
}

}  // namespace detail

// ---- theorem3_c1 --------------------------------------------------------------
//
// The sharpening-biased family {gamma_t}: the uniform coin predicts every
// member with bounded divergence at small n and vanishing rate overall, each
// deterministic t is predicted by its own gamma_t at logarithmic cost, yet no
// single predictor handles everything the family's members predict: the
// worst-case sequence forces linear divergence.
inline ExperimentResult experiment_theorem3_c1(const RunConfig& cfg) {
  ExperimentResult r;
  r.name = "theorem3_c1";
  const SequenceRule t = SequenceRule::periodic("01");
  auto gamma_t = make_sharpening_biased(t);
  auto gamma = make_bernoulli(0.5);
  auto t_det = std::make_shared<DeterministicMeasure>(Alphabet::binary(), t, std::array<Symbol, 2>{0, 1});
  const auto horizons = experiment_horizons();
  const int exact_cap = 12;
  const std::size_t mc_samples = 2048;

  // gamma_t vs the uniform coin: exact up to exact_cap, sampled at the ladder
  DivergenceSeries sa;
  double max_small = 0.0;
  for (int n = 1; n <= exact_cap; ++n) {
    double v = exact_dn(*gamma_t, *gamma, n, cfg.budget_log2).bits;
    max_small = std::max(max_small, v);
    sa.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(n), v));
  }
  McEstimate tail{};
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    tail = mc_dn(*gamma_t, *gamma, horizons[i], mc_samples, Rng::derive(cfg.seed, 100 + i), cfg.jobs);
    sa.points.push_back(DivergenceSeries::mc_point(static_cast<std::size_t>(horizons[i]), tail));
  }
  r.series.push_back({"dn_gamma_t_vs_gamma", std::move(sa)});
  r.add_verdict("uniform_predicts_biased_small_n", max_small <= 1.0 + 1e-9,
                "max over n<=12 of exact d_n(gamma_t, gamma) = " + format_double(max_small) + " <= 1");
  const int big = horizons.back();
  double ratio = tail.mean / big;
  double ratio_tol = 0.01 + 3.0 * tail.std_error / big;
  r.add_verdict("uniform_predicts_biased_rate", ratio <= ratio_tol,
                "d_n/n at n=" + std::to_string(big) + " = " + format_double(ratio) + " (stderr " +
                    format_double(tail.std_error / big) + ") <= 0.01 + 3*stderr; the cumulative value "
                    "itself drifts above 1 past n~21 while staying o(n)");

  // the target sequence against its own biased measure: exactly log2(n+1)
  DivergenceSeries sb;
  double worst_b = 0.0;
  for (int h : horizons) {
    double v = exact_dn(*t_det, *gamma_t, h, cfg.budget_log2).bits;
    sb.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(h), v));
    worst_b = std::max(worst_b, std::fabs(v - std::log2(static_cast<double>(h) + 1.0)));
  }
  r.series.push_back({"dn_t_vs_gamma_t", std::move(sb)});
  r.add_verdict("own_member_cost_logarithmic", worst_b <= 1e-9,
                "max over horizons of |d_n(t, gamma_t) - log2(n+1)| = " + format_double(worst_b));

  // worst-case sequences force linear loss on any single candidate
  detail::run_adversary_case(r, "gamma", *gamma, horizons);
  detail::run_adversary_case(r, "gamma_t", *gamma_t, horizons);
  auto adv = adversary_sequence(*gamma, big);
  double gap = adv.cumulative_dn(static_cast<std::size_t>(big)) - std::log2(static_cast<double>(big) + 1.0);
  r.add_verdict("no_single_predictor_gap", gap >= 4000.0,
                "adversary forces " + format_double(adv.cumulative_dn(static_cast<std::size_t>(big))) +
                    " bits on the uniform coin at n=" + std::to_string(big) +
                    " while the matched biased member pays only log2(n+1) = " +
                    format_double(std::log2(static_cast<double>(big) + 1.0)) + "; gap = " + format_double(gap));

  r.spec_echo = {{"t", t.to_json()},
                 {"gamma_t", gamma_t->to_json()},
                 {"gamma", gamma->to_json()},
                 {"horizons", horizons},
                 {"exact_cap", exact_cap},
                 {"mc_samples", mc_samples},
                 {"seed", cfg.seed}};
  return r;
}

// ---- theorem3_c2 --------------------------------------------------------------
//
// The constant-bias family {gamma'_t}: every deterministic t costs exactly
// n*log2(3/2) against its own member, while worst-case sequences cost any
// fixed candidate a full bit per step. The rate gap 1 > log2(3/2) is the
// point: being predicted at some linear rate is not transitive.
inline ExperimentResult experiment_theorem3_c2(const RunConfig& cfg) {
  ExperimentResult r;
  r.name = "theorem3_c2";
  const SequenceRule t = SequenceRule::periodic("01");
  auto gp = make_constant_biased(t);
  auto gamma = make_bernoulli(0.5);
  auto t_det = std::make_shared<DeterministicMeasure>(Alphabet::binary(), t, std::array<Symbol, 2>{0, 1});
  const auto horizons = experiment_horizons();
  const double rate = std::log2(1.5);

  DivergenceSeries sa;
  double worst = 0.0;
  for (int h : horizons) {
    double v = exact_dn(*t_det, *gp, h, cfg.budget_log2).bits;
    sa.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(h), v));
    worst = std::max(worst, std::fabs(v - rate * h));
  }
  r.series.push_back({"dn_t_vs_gamma_prime_t", std::move(sa)});
  r.add_verdict("own_member_cost_linear_rate", worst <= 1e-9,
                "max over horizons of |d_n(t, gamma_prime_t) - n*log2(3/2)| = " + format_double(worst));

  GridBuildStats gstats;
  auto grid = rational_markov_grid(Alphabet::binary(), 1, 2, &gstats);
  detail::run_adversary_case(r, "gamma", *gamma, horizons);
  detail::run_adversary_case(r, "grid", *grid, horizons);

  const int big = horizons.back();
  auto adv_g = adversary_sequence(*gamma, big);
  auto adv_grid = adversary_sequence(*grid, big);
  double min_slope = std::min(adv_g.cumulative_dn(static_cast<std::size_t>(big)),
                              adv_grid.cumulative_dn(static_cast<std::size_t>(big))) /
                     big;
  r.add_verdict("rate_gap", min_slope >= 1.0 - 1e-9 && rate < 1.0,
                "worst-case slope vs every candidate >= " + format_double(min_slope) +
                    " while the family's own rate is log2(3/2) = " + format_double(rate));

  DivergenceSeries self;
  double worst_self = 0.0;
  for (int n = 1; n <= 12; ++n) {
    double v = exact_dn(*gp, *gp, n, cfg.budget_log2).bits;
    self.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(n), v));
    worst_self = std::max(worst_self, std::fabs(v));
  }
  r.series.push_back({"dn_gamma_prime_self", std::move(self)});
  r.add_verdict("self_divergence_zero", worst_self <= 1e-12,
                "max over n<=12 of |d_n(gamma_prime_t, gamma_prime_t)| = " + format_double(worst_self));

  r.spec_echo = {{"t", t.to_json()},
                 {"gamma_prime_t", gp->to_json()},
                 {"gamma", gamma->to_json()},
                 {"grid", {{"order", 1}, {"denominator", 2}, {"components", gstats.component_count}}},
                 {"horizons", horizons},
                 {"seed", cfg.seed}};
  return r;
}

// ---- finite_memory ------------------------------------------------------------
//
// A rational grid over Markov transition kernels of orders 0..2 mixed with
// order weights (o+1)^-2: grid members are predicted with constant overhead
// -log2(weight), and an off-grid source pays at most its KL distance to the
// nearest grid point plus that overhead.
inline ExperimentResult experiment_finite_memory(const RunConfig& cfg) {
  ExperimentResult r;
  r.name = "finite_memory";
  const Alphabet bin = Alphabet::binary();
  GridBuildStats stats;
  auto grid = multi_order_grid(bin, 2, 8, &stats);

  // component weights: order share (o+1)^-2 normalized, uniform within order
  const double norm = 1.0 + 0.25 + 1.0 / 9.0;
  const double w_order0 = (1.0 / norm) / 9.0;
  const double w_order1 = (0.25 / norm) / 81.0;

  auto b_on = make_bernoulli(5.0 / 8.0);
  auto mk_on = std::make_shared<MarkovMeasure>(
      bin, 1, std::vector<double>{7.0 / 8.0, 1.0 / 8.0, 1.0 / 4.0, 3.0 / 4.0},
      MarkovMeasure::InitialKind::kStationary);

  auto dominance_series = [&](const ProcessMeasure& mu, const ProcessMeasure& nu, int n_max, double bound,
                              const std::string& name, const std::string& vname) {
    DivergenceSeries s;
    double worst = -kPosInf;
    for (int n = 1; n <= n_max; ++n) {
      double v = exact_dn(mu, nu, n, cfg.budget_log2).bits;
      s.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(n), v));
      worst = std::max(worst, v);
    }
    r.series.push_back({name, std::move(s)});
    r.add_verdict(vname, worst <= bound + 1e-9,
                  "max exact d_n = " + format_double(worst) + " <= -log2(weight) = " + format_double(bound));
  };
  dominance_series(*b_on, *grid, 10, -std::log2(w_order0), "on_grid_bernoulli", "on_grid_bernoulli_dominance");
  dominance_series(*mk_on, *grid, 10, -std::log2(w_order1), "on_grid_markov", "on_grid_markov_dominance");

  // k=0, d=1 corner: the two-point grid {all-zeros, all-ones} prices the
  // all-zeros source at exactly one bit (its weight), for every horizon
  auto tiny = rational_markov_grid(bin, 0, 1);
  {
    DivergenceSeries s;
    double worst_dev = 0.0;
    for (int n = 1; n <= 14; ++n) {
      double v = exact_dn(*make_bernoulli(1.0), *tiny, n, cfg.budget_log2).bits;
      s.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(n), v));
      worst_dev = std::max(worst_dev, std::fabs(v - 1.0));
    }
    r.series.push_back({"tiny_grid_all_zeros", std::move(s)});
    r.add_verdict("tiny_grid_exact", worst_dev <= 1e-9,
                  "max |d_n - 1| over n<=14 = " + format_double(worst_dev) + " (two-member grid, weight 1/2)");
  }

  // off-grid source: Bernoulli(1/pi); nearest order-0 grid point is 3/8
  const double p_off = 1.0 / std::numbers::pi;
  const double q_near = 3.0 / 8.0;
  const double kl = detail::bernoulli_kl_bits(p_off, q_near);
  auto tau = make_bernoulli(p_off);
  const std::size_t off_samples = 256;
  DivergenceSeries soff;
  McEstimate off_tail{};
  std::vector<int> off_horizons = {1024, 4096};
  for (std::size_t i = 0; i < off_horizons.size(); ++i) {
    off_tail = mc_dn(*tau, *grid, off_horizons[i], off_samples, Rng::derive(cfg.seed, 300 + i), cfg.jobs);
    soff.points.push_back(DivergenceSeries::mc_point(static_cast<std::size_t>(off_horizons[i]), off_tail));
  }
  r.series.push_back({"off_grid_pi", std::move(soff)});
  const int big = off_horizons.back();
  double off_ratio = off_tail.mean / big;
  double budget = kl + (-std::log2(w_order0)) / big + 3.0 * off_tail.std_error / big;
  r.add_verdict("off_grid_budget", off_ratio <= budget,
                "d_n/n at n=" + std::to_string(big) + " = " + format_double(off_ratio) +
                    " <= KL(1/pi||3/8) + weight cost/n + 3*stderr = " + format_double(budget));

  r.spec_echo = {{"grid",
                  {{"max_order", 2},
                   {"denominator", 8},
                   {"components", stats.component_count},
                   {"stationary_fallbacks", stats.stationary_fallbacks}}},
                 {"on_grid", {{"bernoulli", b_on->to_json()}, {"markov", mk_on->to_json()}}},
                 {"weights", {{"order0_component", w_order0}, {"order1_component", w_order1}}},
                 {"off_grid",
                  {{"p", p_off}, {"nearest", q_near}, {"kl_bits", kl}, {"samples", off_samples}}},
                 {"seed", cfg.seed}};
  return r;
}

// ---- stationary_impossibility --------------------------------------------------
//
// Ternary alphabet {a,0,1}: the hidden-chain measure mu_t tracks a target
// sequence t at rate log2(3/2) per step, but worst-case sequences force any
// fixed candidate a full log2(3) per step; no candidate can close that gap.
inline ExperimentResult experiment_stationary_impossibility(const RunConfig& cfg) {
  ExperimentResult r;
  r.name = "stationary_impossibility";
  const Alphabet marked = Alphabet::marked_binary();
  const SequenceRule t = SequenceRule::periodic("01");
  auto mu_t = std::make_shared<HiddenChainMeasure>(t);
  const Symbol sym0 = *marked.index_of("0"), sym1 = *marked.index_of("1");
  auto t_det = std::make_shared<DeterministicMeasure>(marked, t, std::array<Symbol, 2>{sym0, sym1});
  const auto horizons = experiment_horizons();
  const double rate = std::log2(1.5);

  // candidates: uniform coin, rational grid, and a greedy cover over a small pool
  auto uniform3 = make_uniform_iid(marked);
  GridBuildStats gstats;
  auto grid3 = rational_markov_grid(marked, 0, 3, &gstats);
  auto skew = std::make_shared<IIDMeasure>(marked, std::vector<double>{0.5, 0.25, 0.25});
  std::vector<PoolEntry> pool = {{uniform3, 0}, {skew, 1}};
  auto rho_pool = make_mixture({uniform3, skew}, {0.5, 0.5});
  auto cc = build_cover_construction(pool, rho_pool, 5, WeightScheme::kInverseSquare, {}, cfg.budget_log2);
  auto nu_cover = cc.predictor();

  detail::run_adversary_case(r, "uniform", *uniform3, horizons);
  detail::run_adversary_case(r, "grid", *grid3, horizons);
  detail::run_adversary_case(r, "cover", *nu_cover, horizons);

  // the hidden chain's own cost on t: exact via the deterministic path, plus
  // a sampled estimate whose every draw walks the same path (stderr 0)
  DivergenceSeries st;
  std::vector<double> exact_vals;
  for (int h : horizons) {
    double v = exact_dn(*t_det, *mu_t, h, cfg.budget_log2).bits;
    exact_vals.push_back(v);
    st.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(h), v));
  }
  r.series.push_back({"dn_t_vs_mu_t", std::move(st)});
  const int big = horizons.back();
  auto est = mc_dn(*t_det, *mu_t, big, 64, Rng::derive(cfg.seed, 500), cfg.jobs);
  DivergenceSeries smc;
  smc.points.push_back(DivergenceSeries::mc_point(static_cast<std::size_t>(big), est));
  r.series.push_back({"dn_t_vs_mu_t_mc", std::move(smc)});

  double slope = exact_vals.back() / big;
  r.add_verdict("mu_t_rate_window", std::fabs(slope - rate) <= 0.02,
                "d_n(t, mu_t)/n at n=" + std::to_string(big) + " = " + format_double(slope) +
                    ", within 0.02 of log2(3/2) = " + format_double(rate) +
                    "; sampled estimate agrees at " + format_double(est.mean / big) + " (stderr " +
                    format_double(est.std_error) + ")");
  double c_first = exact_vals.front() - rate * horizons.front();
  double c_last = exact_vals.back() - rate * big;
  bool corr_ok = true;
  for (std::size_t i = 0; i < horizons.size(); ++i)
    if (exact_vals[i] - rate * horizons[i] < -1e-9) corr_ok = false;
  r.add_verdict("mu_t_correction_positive_vanishing",
                corr_ok && c_last / big < c_first / horizons.front(),
                "d_n - n*log2(3/2) stays nonnegative (=" + format_double(c_first) + " at n=" +
                    std::to_string(horizons.front()) + ", " + format_double(c_last) + " at n=" +
                    std::to_string(big) + ") and its per-step share shrinks");

  // the marker symbol keeps probability exactly 1/3 whatever the history
  double worst_marker = 0.0;
  nlohmann::json marker_probs = nlohmann::json::object();
  for (const std::string& htext : {"", "a", "0", "01", "a01"}) {
    History h = History::parse(marked, htext);
    double pa = mu_t->conditional_next(h).prob(*marked.index_of("a"));
    worst_marker = std::max(worst_marker, std::fabs(pa - 1.0 / 3.0));
    marker_probs[htext.empty() ? "(empty)" : htext] = pa;
  }
  r.add_verdict("marker_marginal_third", worst_marker <= 1e-12,
                "max |P(next='a'|h) - 1/3| over sample histories = " + format_double(worst_marker));

  r.add_verdict("rate_gap", std::log2(3.0) > rate,
                "worst-case slope vs every candidate is log2(3) = " + format_double(std::log2(3.0)) +
                    " while mu_t achieves log2(3/2) = " + format_double(rate));

  r.spec_echo = {{"t", t.to_json()},
                 {"mu_t", mu_t->to_json()},
                 {"candidates",
                  {{"uniform", uniform3->to_json()},
                   {"grid_components", gstats.component_count},
                   {"cover_pool_size", pool.size()},
                   {"cover_horizon", cc.horizon}}},
                 {"horizons", horizons},
                 {"mc_samples", 64},
                 {"seed", cfg.seed}};
  r.extra = {{"marker_probs", std::move(marker_probs)},
             {"cover_truncation_deficit", cc.truncation_deficit()}};
  return r;
}

// ---- sqrt_zeros ----------------------------------------------------------------
//
// Deterministic sequences with zeros exactly at the square positions: the
// independent predictor with P(x_n = 0) = 1/n tracks them at vanishing rate,
// even though distinct members of the family are maximally far apart in the
// worst-case per-step sense.
inline ExperimentResult experiment_sqrt_zeros(const RunConfig& cfg) {
  ExperimentResult r;
  r.name = "sqrt_zeros";
  const Alphabet bin = Alphabet::binary();
  const SequenceRule rule1 = SequenceRule::zeros_at_squares();
  const SequenceRule rule2 = SequenceRule::zeros_at_squares_from(2);
  auto mu1 = std::make_shared<DeterministicMeasure>(bin, rule1, std::array<Symbol, 2>{0, 1});
  auto mu2 = std::make_shared<DeterministicMeasure>(bin, rule2, std::array<Symbol, 2>{0, 1});
  auto nu = std::make_shared<SparseZerosPredictor>();
  const auto horizons = experiment_horizons();

  // closed form, summed independently of the evaluator: zeros at i cost
  // log2(i), ones cost log2(i/(i-1))
  auto closed_form = [&](int n) {
    double acc = 0.0;
    for (int i = 1; i <= n; ++i)
      acc += rule1.bit_at(i) == 0 ? std::log2(static_cast<double>(i))
                                  : std::log2(static_cast<double>(i) / (i - 1.0));
    return acc;
  };

  DivergenceSeries s;
  s.points.push_back(DivergenceSeries::exact_point(0, exact_dn(*mu1, *nu, 0, cfg.budget_log2).bits));
  double worst_closed = 0.0;
  std::vector<double> ratios;
  for (int h : horizons) {
    double v = exact_dn(*mu1, *nu, h, cfg.budget_log2).bits;
    s.points.push_back(DivergenceSeries::exact_point(static_cast<std::size_t>(h), v));
    worst_closed = std::max(worst_closed, std::fabs(v - closed_form(h)));
    ratios.push_back(v / h);
  }
  double d0 = s.points.front().value;
  r.series.push_back({"dn_mu_vs_nu", std::move(s)});
  r.add_verdict("closed_form_match", worst_closed <= 1e-9,
                "max |exact d_n - summed closed form| over horizons = " + format_double(worst_closed) +
                    "; empty-sequence value d_0 = " + format_double(d0));
  bool decreasing = d0 == 0.0;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (!(ratios[i] < ratios[i - 1])) decreasing = false;
  r.add_verdict("rate_vanishes", decreasing && ratios.back() <= 0.2,
                "d_n/n falls monotonically from " + format_double(ratios.front()) + " at n=" +
                    std::to_string(horizons.front()) + " to " + format_double(ratios.back()) + " at n=" +
                    std::to_string(horizons.back()));

  // two distinct members are separated: one-sided zero at their first
  // disagreement makes the per-step sup ratio infinite
  auto dv = d_inf(*mu1, *mu2, 1024, cfg.budget_log2);
  DivergenceSeries sd;
  sd.points.push_back(DivergenceSeries::exact_point(1024, dv.value));
  r.series.push_back({"dinf_members", std::move(sd)});
  r.add_verdict("members_not_separable", dv.is_infinite(),
                "d_inf(mu_1, mu_2) at n=1024 = " + format_double(dv.value) + " (witness prefix \"" +
                    dv.argmax + "\")");

  r.spec_echo = {{"mu_1", mu1->to_json()},
                 {"mu_2", mu2->to_json()},
                 {"nu", nu->to_json()},
                 {"horizons", horizons},
                 {"seed", cfg.seed}};
  r.extra = {{"note",
              "d_n(mu_2, nu) is infinite from n=1: the predictor forces a zero at position 1 and mu_2 "
              "starts with a one; only members with a zero at position 1 are tracked at finite cost"}};
  return r;
}

// ---- cover_construction ---------------------------------------------------------
//
// Greedy countable cover over a six-measure pool with their uniform mixture
// as the reference: checks the set-mass bounds behind the construction, the
// pointwise lower bound on the built mixture, and the additive overhead the
// diagnostic predicts for the final predictor.
inline ExperimentResult experiment_cover_construction(const RunConfig& cfg) {
  ExperimentResult r;
  r.name = "cover_construction";
  const Alphabet bin = Alphabet::binary();
  const SequenceRule t = SequenceRule::periodic("01");
  std::vector<MeasurePtr> members = {
      make_bernoulli(0.25),
      make_bernoulli(0.75),
      std::make_shared<MarkovMeasure>(bin, 1, std::vector<double>{0.9, 0.1, 0.2, 0.8},
                                      MarkovMeasure::InitialKind::kStationary),
      std::make_shared<MarkovMeasure>(bin, 1, std::vector<double>{0.3, 0.7, 0.6, 0.4},
                                      MarkovMeasure::InitialKind::kStationary),
      make_sharpening_biased(t),
      make_constant_biased(t)};
  std::vector<PoolEntry> pool;
  std::vector<double> sixth(members.size(), 1.0 / static_cast<double>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) pool.push_back({members[i], i});
  auto rho = make_mixture(members, sixth);
  const int horizon = 10;
  auto cc = build_cover_construction(pool, rho, horizon, WeightScheme::kInverseSquare, {}, cfg.budget_log2);
  const std::size_t P = pool.size();

  // set-mass bounds recorded level by level
  double worst_u = -kPosInf, worst_v = -kPosInf, worst_m = -kPosInf;
  const double jensen_bits = std::log2(std::numbers::e) / std::numbers::e;  // max of z*log2(1/z)
  for (const auto& lvl : cc.levels) {
    for (std::size_t i = 0; i < P; ++i) {
      worst_u = std::max(worst_u, lvl.mu_outside_u[i] - 1.0 / lvl.n);
      double dn_parent = cc.dn_parent[i][static_cast<std::size_t>(lvl.n - 1)].bits;
      worst_v = std::max(worst_v, lvl.mu_outside_v[i] - (dn_parent + jensen_bits) / lvl.delta[i]);
    }
    for (std::size_t k = 0; k < lvl.masses.size(); ++k)
      worst_m = std::max(worst_m, lvl.masses[k] - 1.0 / static_cast<double>(k + 1));
  }
  r.add_verdict("mass_outside_u_bound", worst_u <= 1e-12,
                "max over n<=10 and pool of mu(X^n\\U) - 1/n = " + format_double(worst_u));
  r.add_verdict("mass_outside_v_bound", worst_v <= 1e-9,
                "max of mu(X^n\\V) - (d_n(mu,parent) + log2(e)/e)/delta_n = " + format_double(worst_v));
  r.add_verdict("greedy_residual_bound", worst_m <= 1e-12,
                "max over picks of m^n_k - 1/k = " + format_double(worst_m));

  // pointwise lower bound, re-derived from scratch: walk the pool and the
  // reference, rebuild U/V/T with the recorded deltas, and check every leaf
  // of every picked T-set against nu_n = sum_k w_k * parent_of_pick_k
  double worst_ext = 0.0;  // max relative shortfall
  for (const auto& lvl : cc.levels) {
    const int n = lvl.n;
    std::size_t n_leaves = 1;
    for (int i = 0; i < n; ++i) n_leaves *= bin.size();
    std::vector<std::vector<double>> mass(P + 1);
    std::vector<const ProcessMeasure*> ms;
    for (const auto& e : cc.pool) ms.push_back(e.measure.get());
    ms.push_back(cc.rho.get());
    walk_prefix_tree(bin, ms, n, cfg.budget_log2,
                     [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                       if (prefix.size() != static_cast<std::size_t>(n)) return;
                       for (std::size_t i = 0; i <= P; ++i) mass[i].push_back(std::exp2(sc[i]->log2_joint()));
                     });
    std::vector<double> nu_n(n_leaves, 0.0);
    for (std::size_t k = 0; k < lvl.picks.size(); ++k) {
      const auto& parent = mass[cc.pool[lvl.picks[k]].parent_index];
      for (std::size_t leaf = 0; leaf < n_leaves; ++leaf)
        nu_n[leaf] += cc.weight(static_cast<double>(k + 1)) * parent[leaf];
    }
    for (std::size_t k = 0; k < lvl.picks.size(); ++k) {
      std::size_t j = lvl.picks[k];
      const double v_factor = std::exp2(-lvl.delta[j]);
      const double floor_coef = cc.weight(static_cast<double>(k + 1)) * v_factor / n;
      const auto& mu = mass[j];
      const auto& parent = mass[cc.pool[j].parent_index];
      const auto& rho_mass = mass[P];
      for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
        bool in_t = static_cast<double>(n) * mu[leaf] >= rho_mass[leaf] && parent[leaf] >= v_factor * mu[leaf];
        if (!in_t) continue;
        double floor = floor_coef * rho_mass[leaf];
        if (floor > 0.0) worst_ext = std::max(worst_ext, 1.0 - nu_n[leaf] / floor);
      }
    }
  }
  r.add_verdict("pointwise_floor", worst_ext <= 1e-9,
                "max relative shortfall of nu_n(x) against w_k*(1/n)*2^-delta*rho(x) over picked T-sets = " +
                    format_double(worst_ext));

  // the additive-overhead diagnostic for the final predictor
  auto rows = cover_diagnostics(cc, cfg.budget_log2);
  bool diag_ok = true;
  double diag_margin = kPosInf;
  for (const auto& row : rows) {
    if (!row.holds) diag_ok = false;
    diag_margin = std::min(diag_margin, row.dn_mu_parent + row.c_primary - row.dn_mu_nu);
  }
  r.add_verdict("diagnostic_overhead", diag_ok,
                "d_n(mu, nu) <= d_n(mu, parent) + c(n) for every pool member and n<=10; smallest margin = " +
                    format_double(diag_margin) + " bits");

  // per-member divergence series against the final predictor
  {
    auto nu = cc.predictor();
    for (std::size_t i = 0; i < P; ++i) {
      auto vals = exact_dn_all(*cc.pool[i].measure, *nu, horizon, cfg.budget_log2);
      DivergenceSeries s;
      for (int n = 1; n <= horizon; ++n)
        s.points.push_back(
            DivergenceSeries::exact_point(static_cast<std::size_t>(n), vals[static_cast<std::size_t>(n - 1)].bits));
      r.series.push_back({"dn_mu" + std::to_string(i) + "_vs_nu", std::move(s)});
    }
  }

  // regularizer replacement: the voted per-level averages keep every pool
  // member's mass within the promised factor
  auto rr = replace_regularizer(cc, cfg.budget_log2);
  double worst_step_r = 0.0;
  const int audit_n = 6;
  {
    std::vector<std::vector<double>> mass(P);
    std::vector<const ProcessMeasure*> ms;
    for (const auto& e : cc.pool) ms.push_back(e.measure.get());
    for (int n = 1; n <= audit_n; ++n) {
      for (auto& v : mass) v.clear();
      std::vector<std::vector<Symbol>> leaves;
      walk_prefix_tree(bin, ms, n, cfg.budget_log2,
                       [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                         if (prefix.size() != static_cast<std::size_t>(n)) return;
                         for (std::size_t i = 0; i < P; ++i) mass[i].push_back(std::exp2(sc[i]->log2_joint()));
                         leaves.push_back(prefix);
                       });
      const double floor_coef = 0.5 * cc.weight(static_cast<double>(n)) * std::exp2(-n);
      for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
        double sup = 0.0;
        for (std::size_t i = 0; i < P; ++i) sup = std::max(sup, mass[i][leaf]);
        if (sup == 0.0) continue;
        double lhs = rr.gamma_prime_raw(History(bin, leaves[leaf]), cc.scheme);
        worst_step_r = std::max(worst_step_r, 1.0 - lhs / (floor_coef * sup));
      }
    }
  }
  r.add_verdict("replacement_floor", worst_step_r <= 1e-9,
                "max relative shortfall of gamma'(x) against (1/2)*w_n*|X|^-n*max_pool mu(x) over n<=" +
                    std::to_string(audit_n) + " = " + format_double(worst_step_r));

  nlohmann::json trend = nlohmann::json::array();
  for (const auto& lvl : cc.levels) trend.push_back({{"n", lvl.n}, {"mu_outside_t", lvl.mu_outside_t}});
  r.spec_echo = {{"pool_size", P}, {"horizon", horizon}, {"rho", rho->to_json()}, {"seed", cfg.seed}};
  r.extra = {{"audit", cc.audit_json()},
             {"diagnostics", cover_diagnostics_json(rows)},
             {"mass_outside_t_trend", std::move(trend)},
             {"replacement",
              {{"a_n_size", rr.a_n_size},
               {"deficit", rr.deficit},
               {"gamma_prime_raw_total", rr.gamma_prime_raw_total}}}};
  return r;
}

// ---- registry -------------------------------------------------------------------

using ExperimentFn = ExperimentResult (*)(const RunConfig&);

inline const std::vector<std::pair<std::string, ExperimentFn>>& experiment_registry() {
  static const std::vector<std::pair<std::string, ExperimentFn>> reg = {
      {"theorem3_c1", &experiment_theorem3_c1},
      {"theorem3_c2", &experiment_theorem3_c2},
      {"finite_memory", &experiment_finite_memory},
      {"stationary_impossibility", &experiment_stationary_impossibility},
      {"sqrt_zeros", &experiment_sqrt_zeros},
      {"cover_construction", &experiment_cover_construction}};
  return reg;
}

inline std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& [n, fn] : experiment_registry()) names.push_back(n);
  return names;
}

inline ExperimentResult run_experiment(const std::string& name, const RunConfig& cfg) {
  for (const auto& [n, fn] : experiment_registry())
    if (n == name) return fn(cfg);
  throw std::invalid_argument("unknown experiment: " + name);
}

}  // namespace seqpred
