#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "seqpred/process.hpp"

namespace seqpred {

namespace detail {

// Total variation between the depth-h conditional cylinder distributions of
// two scorers that have already consumed the same history. If either scorer
// has pinned its history to probability zero the conditionals are treated as
// maximally separated.
inline double tv_future(const Scorer& base_mu, const Scorer& base_rho, const Alphabet& a, int h) {
  double jm = base_mu.log2_joint();
  double jr = base_rho.log2_joint();
  if (std::isinf(jm) || std::isinf(jr)) return 1.0;
  const std::size_t k = a.size();
  double acc = 0.0;
  auto rec = [&](auto&& self, const Scorer& sm, const Scorer& sr, int depth) -> void {
    if (depth == h) {
      acc += std::abs(std::exp2(sm.log2_joint() - jm) - std::exp2(sr.log2_joint() - jr));
      return;
    }
    for (std::size_t sym = 0; sym < k; ++sym) {
      auto cm = sm.clone();
      auto cr = sr.clone();
      cm->push(static_cast<Symbol>(sym));
      cr->push(static_cast<Symbol>(sym));
      self(self, *cm, *cr, depth + 1);
    }
  };
  rec(rec, base_mu, base_rho, 0);
  return 0.5 * acc;
}

}  // namespace detail

// Exact total variation distance between mu(.|hist) and rho(.|hist) projected
// onto the next h symbols. Histories one side rules out give distance 1.
inline double tv_conditional(const ProcessMeasure& mu, const ProcessMeasure& rho, const History& hist, int h,
                             int budget_log2 = kDefaultBudgetLog2) {
  if (mu.alphabet() != rho.alphabet()) throw std::invalid_argument("tv: alphabet mismatch");
  if (hist.alphabet() != mu.alphabet()) throw std::invalid_argument("tv: history alphabet mismatch");
  if (h < 0) throw std::invalid_argument("tv: negative depth");
  check_enumeration_budget(mu.alphabet().size(), h, budget_log2);
  auto sm = mu.make_scorer();
  auto sr = rho.make_scorer();
  for (Symbol s : hist.symbols()) {
    sm->push(s);
    sr->push(s);
  }
  return detail::tv_future(*sm, *sr, mu.alphabet(), h);
}

// ---- trajectory dichotomy ----------------------------------------------------

// A cylinder of fixed depth h can only resolve so much: two measures may be
// mutually singular on infinite sequences while every h-step conditional pair
// stays well inside (0,1) in total variation. The decision statistic below
// therefore combines the exact depth-h cylinder TV with a sampled event
// statistic: both sides emit futures of length `freq_lookahead`, each future
// is reduced to the sum of its symbol indices, and the two empirical summary
// distributions are compared in Kolmogorov-Smirnov distance. The summary is a
// function of the future, so any separation it exhibits is (up to sampling
// error) a lower bound on the true conditional total variation, while
// processes whose conditionals have genuinely merged show only O(1/sqrt(K))
// noise.
struct DichotomyOptions {
  int horizon = 2000;               // generated trajectory length
  int tv_depth = 8;                 // exact cylinder depth
  double lo = 0.1;                  // "merged" threshold
  double hi = 0.9;                  // "separated" threshold
  int freq_lookahead = 128;         // future length for the sampled statistic
  std::size_t freq_samples = 1024;  // sampled futures per side
  bool deep_events = true;          // include the sampled statistic in the decision value
  std::vector<int> checkpoints;     // prefix lengths at which cylinder TV is recorded; default powers of two
  int budget_log2 = kDefaultBudgetLog2;
};

struct TrajectoryVerdict {
  std::vector<double> checkpoint_tv;  // cylinder TV after each checkpoint prefix
  double final_cylinder_tv = 0.0;
  double final_event_stat = 0.0;
  double decision_value = 0.0;  // max of the two statistics at the full horizon
  int label = 0;                // +1 separated, -1 merged, 0 undecided
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion.
inline WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  double nn = static_cast<double>(trials);
  double p = static_cast<double>(successes) / nn;
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p + z2 / (2.0 * nn)) / denom;
  double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct DichotomyResult {
  std::vector<int> checkpoints;
  std::vector<TrajectoryVerdict> trajectories;
  std::size_t separated = 0;
  std::size_t merged = 0;
  std::size_t undecided = 0;
  double fraction_separated = 0.0;
  double fraction_merged = 0.0;
  WilsonInterval separated_ci;
  std::uint64_t seed = 0;
};

namespace detail {

// Two-sample Kolmogorov-Smirnov distance between the summary distributions
// described above. Scorer clones continue from the trajectory prefix.
inline double sampled_frequency_separation(const Scorer& base_mu, const Scorer& base_rho, const Alphabet& a,
                                           int lookahead, std::size_t k_samples, std::uint64_t seed) {
  const std::size_t k = a.size();
  const std::size_t max_sum = static_cast<std::size_t>(lookahead) * (k - 1);
  std::vector<std::size_t> count_mu(max_sum + 1, 0), count_rho(max_sum + 1, 0);
  auto draw = [&](const Scorer& base, std::uint64_t draw_seed) -> std::size_t {
    Rng rng(draw_seed);
    auto sc = base.clone();
    std::size_t total = 0;
    for (int t = 0; t < lookahead; ++t) {
      Symbol s = sc->conditional().sample(rng.next_unit());
      sc->push(s);
      total += s;
    }
    return total;
  };
  for (std::size_t j = 0; j < k_samples; ++j) {
    ++count_mu[draw(base_mu, Rng::derive(seed, 2 * j))];
    ++count_rho[draw(base_rho, Rng::derive(seed, 2 * j + 1))];
  }
  double best = 0.0, cum_mu = 0.0, cum_rho = 0.0;
  for (std::size_t c = 0; c <= max_sum; ++c) {
    cum_mu += static_cast<double>(count_mu[c]);
    cum_rho += static_cast<double>(count_rho[c]);
    best = std::max(best, std::abs(cum_mu - cum_rho) / static_cast<double>(k_samples));
  }
  return best;
}

}  // namespace detail

// Generates `n_trajectories` histories from mu and tracks how the conditional
// distance between mu and rho evolves along each of them. Each trajectory gets
// derived sub-seeds, so results are reproducible and independent of ordering.
inline DichotomyResult tv_dichotomy_trajectories(const ProcessMeasure& mu, const ProcessMeasure& rho,
                                                 std::size_t n_trajectories, std::uint64_t seed,
                                                 const DichotomyOptions& opt = {}) {
  if (mu.alphabet() != rho.alphabet()) throw std::invalid_argument("tv: alphabet mismatch");
  check_enumeration_budget(mu.alphabet().size(), opt.tv_depth, opt.budget_log2);
  DichotomyResult out;
  out.seed = seed;
  out.checkpoints = opt.checkpoints;
  if (out.checkpoints.empty()) {
    for (int c = 1; c < opt.horizon; c *= 2) out.checkpoints.push_back(c);
    out.checkpoints.push_back(opt.horizon);
  }
  for (std::size_t i = 0; i < n_trajectories; ++i) {
    std::uint64_t path_seed = Rng::derive(seed, 2 * i);
    std::uint64_t event_seed = Rng::derive(seed, 2 * i + 1);
    Rng rng(path_seed);
    auto gen = mu.make_scorer();  // trajectory generator
    auto sm = mu.make_scorer();
    auto sr = rho.make_scorer();
    TrajectoryVerdict v;
    std::size_t next_cp = 0;
    for (int t = 0; t < opt.horizon; ++t) {
      Symbol s = gen->conditional().sample(rng.next_unit());
      gen->push(s);
      sm->push(s);
      sr->push(s);
      while (next_cp < out.checkpoints.size() && out.checkpoints[next_cp] == t + 1) {
        v.checkpoint_tv.push_back(detail::tv_future(*sm, *sr, mu.alphabet(), opt.tv_depth));
        ++next_cp;
      }
    }
    bool final_recorded = next_cp > 0 && next_cp == out.checkpoints.size() && out.checkpoints.back() == opt.horizon;
    v.final_cylinder_tv =
        final_recorded ? v.checkpoint_tv.back() : detail::tv_future(*sm, *sr, mu.alphabet(), opt.tv_depth);
    if (opt.deep_events)
      v.final_event_stat =
          detail::sampled_frequency_separation(*sm, *sr, mu.alphabet(), opt.freq_lookahead, opt.freq_samples, event_seed);
    v.decision_value = std::max(v.final_cylinder_tv, v.final_event_stat);
    v.label = v.decision_value >= opt.hi ? 1 : (v.decision_value <= opt.lo ? -1 : 0);
    if (v.label > 0)
      ++out.separated;
    else if (v.label < 0)
      ++out.merged;
    else
      ++out.undecided;
    out.trajectories.push_back(std::move(v));
  }
  double T = static_cast<double>(n_trajectories);
  out.fraction_separated = n_trajectories ? static_cast<double>(out.separated) / T : 0.0;
  out.fraction_merged = n_trajectories ? static_cast<double>(out.merged) / T : 0.0;
  out.separated_ci = wilson_interval(out.separated, n_trajectories);
  return out;
}

}  // namespace seqpred
