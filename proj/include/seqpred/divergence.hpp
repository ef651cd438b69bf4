#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "seqpred/format.hpp"
#include "seqpred/measures.hpp"
#include "seqpred/process.hpp"

namespace seqpred {

// Expected cumulative log-loss overhead of predicting mu-distributed data
// with rho, in bits. Infinite values remember a witnessing prefix: a
// continuation the source can produce but the predictor rules out.
struct DivergenceValue {
  double bits = 0.0;
  std::string infinite_witness;  // empty when bits is finite
  bool is_infinite() const { return std::isinf(bits); }
};

namespace detail {
inline void require_same_alphabet(const ProcessMeasure& mu, const ProcessMeasure& rho) {
  if (mu.alphabet() != rho.alphabet()) throw std::invalid_argument("divergence: alphabet mismatch");
}
}  // namespace detail

// Exact n-step divergence, computed from joint probabilities:
//   d_n = sum over x in X^n of mu(x) * (log2 mu(x) - log2 rho(x)).
// Terms with mu(x) = 0 contribute nothing. A point-mass source collapses the
// sum to a single term, which is evaluated by walking rho along the target
// sequence instead of enumerating; that path is exact at any n.
inline DivergenceValue exact_dn(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                                int budget_log2 = kDefaultBudgetLog2) {
  detail::require_same_alphabet(mu, rho);
  if (n < 0) throw std::invalid_argument("divergence: negative horizon");
  if (const DeterministicMeasure* det = mu.as_deterministic()) {
    auto sc = rho.make_scorer();
    History t = det->prefix_history(n);
    int pos = 0;
    for (Symbol s : t.symbols()) {
      sc->push(s);
      ++pos;
      if (std::isinf(sc->log2_joint())) return {kPosInf, t.prefix(static_cast<std::size_t>(pos)).to_string()};
    }
    return {-sc->log2_joint(), {}};
  }
  double acc = 0.0;
  bool infinite = false;
  std::string witness;
  const ProcessMeasure* ms[2] = {&mu, &rho};
  walk_prefix_tree(mu.alphabet(), ms, n, budget_log2,
                   [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                     double lmu = sc[0]->log2_joint();
                     if (std::isinf(lmu)) return;  // source mass zero below this node
                     double lrho = sc[1]->log2_joint();
                     if (std::isinf(lrho)) {
                       if (!infinite) {
                         infinite = true;
                         witness = History(mu.alphabet(), prefix).to_string();
                       }
                       return;
                     }
                     if (prefix.size() == static_cast<std::size_t>(n)) acc += std::exp2(lmu) * (lmu - lrho);
                   });
  if (infinite) return {kPosInf, witness};
  return {acc, {}};
}

namespace detail {
// Adds the expected conditional relative entropy at one prefix node into
// steps[depth]; weight = mu(prefix).
template <typename OnInfinite>
inline void accumulate_step_kl(const Alphabet& a, const std::vector<Symbol>& prefix,
                               std::span<const std::unique_ptr<Scorer>> sc, std::vector<double>& steps,
                               OnInfinite&& on_infinite) {
  double lmu = sc[0]->log2_joint();
  if (std::isinf(lmu)) return;
  double weight = std::exp2(lmu);
  auto cmu = sc[0]->conditional();
  auto crho = sc[1]->conditional();
  const std::size_t k = a.size();
  for (std::size_t s = 0; s < k; ++s) {
    double ps = cmu.prob(s);
    if (ps == 0.0) continue;
    double qs = crho.prob(s);
    if (qs == 0.0) {
      on_infinite(prefix.size(), static_cast<Symbol>(s));
      continue;
    }
    steps[prefix.size()] += weight * ps * std::log2(ps / qs);
  }
}
}  // namespace detail

// Exact per-step divergence increments for horizons 1..n in one tree walk:
//   step[t] = E over mu-prefixes of length t-1 of KL(mu(.|prefix) || rho(.|prefix)).
// Returns the running sums d_1..d_n. An infinite step makes every later
// horizon infinite. This is a genuinely different evaluation route from
// exact_dn: conditional sums, no point-mass shortcut.
inline std::vector<DivergenceValue> exact_dn_all(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                                                 int budget_log2 = kDefaultBudgetLog2) {
  detail::require_same_alphabet(mu, rho);
  if (n <= 0) throw std::invalid_argument("divergence: horizon must be positive");
  std::vector<double> steps(static_cast<std::size_t>(n), 0.0);
  std::vector<std::string> witness(static_cast<std::size_t>(n));
  std::vector<char> infinite(static_cast<std::size_t>(n), 0);
  const ProcessMeasure* ms[2] = {&mu, &rho};
  walk_prefix_tree(mu.alphabet(), ms, n - 1, budget_log2,
                   [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                     detail::accumulate_step_kl(mu.alphabet(), prefix, sc, steps, [&](std::size_t depth, Symbol s) {
                       if (infinite[depth]) return;
                       infinite[depth] = 1;
                       std::vector<Symbol> bad(prefix);
                       bad.push_back(s);
                       witness[depth] = History(mu.alphabet(), std::move(bad)).to_string();
                     });
                   });
  std::vector<DivergenceValue> out(static_cast<std::size_t>(n));
  double acc = 0.0;
  bool inf_seen = false;
  std::string first_witness;
  for (std::size_t t = 0; t < static_cast<std::size_t>(n); ++t) {
    if (!inf_seen && infinite[t]) {
      inf_seen = true;
      first_witness = witness[t];
    }
    acc += steps[t];
    out[t] = inf_seen ? DivergenceValue{kPosInf, first_witness} : DivergenceValue{acc, {}};
  }
  return out;
}

// Exact d_n via the conditional-sum route only.
inline DivergenceValue exact_dn_stepwise(const ProcessMeasure& mu, const ProcessMeasure& rho, int n,
                                         int budget_log2 = kDefaultBudgetLog2) {
  return exact_dn_all(mu, rho, n, budget_log2).back();
}

// ---- Monte-Carlo estimation -------------------------------------------------

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t infinite_samples = 0;  // draws that hit a rho-impossible step
  std::uint64_t seed = 0;
};

namespace detail {
// One conditional-KL trajectory: a path is sampled from mu, and each step
// contributes KL(mu(.|past) || rho(.|past)), the conditional expectation of
// the log-loss increment, which keeps the estimator's variance down compared
// to scoring the realized symbols. Returns +inf if rho rules out a symbol mu
// can emit at some visited prefix.
inline double sampled_path_kl(const ProcessMeasure& mu, const ProcessMeasure& rho, int n, std::uint64_t path_seed) {
  Rng rng(path_seed);
  auto smu = mu.make_scorer();
  auto srho = rho.make_scorer();
  const std::size_t k = mu.alphabet().size();
  double g = 0.0;
  for (int t = 0; t < n; ++t) {
    auto cmu = smu->conditional();
    auto crho = srho->conditional();
    for (std::size_t s = 0; s < k; ++s) {
      double ps = cmu.prob(s);
      if (ps == 0.0) continue;
      double qs = crho.prob(s);
      if (qs == 0.0) return kPosInf;
      g += ps * std::log2(ps / qs);
    }
    Symbol sym = cmu.sample(rng.next_unit());
    smu->push(sym);
    srho->push(sym);
  }
  return g;
}

template <typename Work>
inline void run_indexed_jobs(std::size_t count, int jobs, Work&& work) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += n_threads) work(i);
    });
  }
  for (auto& th : pool) th.join();
}
}  // namespace detail

// Monte-Carlo d_n estimate. Every sample path gets its own derived seed and
// an index-addressed slot, and the reduction runs in index order, so the
// result is bitwise identical for any `jobs` value.
inline McEstimate mc_dn(const ProcessMeasure& mu, const ProcessMeasure& rho, int n, std::size_t samples,
                        std::uint64_t seed, int jobs = 1) {
  detail::require_same_alphabet(mu, rho);
  if (samples == 0) throw std::invalid_argument("mc_dn: need at least one sample");
  std::vector<double> g(samples);
  detail::run_indexed_jobs(samples, jobs,
                           [&](std::size_t i) { g[i] = detail::sampled_path_kl(mu, rho, n, Rng::derive(seed, i)); });
  McEstimate out;
  out.samples = samples;
  out.seed = seed;
  for (double v : g)
    if (std::isinf(v)) ++out.infinite_samples;
  if (out.infinite_samples > 0) {
    out.mean = kPosInf;
    out.std_error = kPosInf;
    return out;
  }
  double sum = 0.0;
  for (double v : g) sum += v;
  out.mean = sum / static_cast<double>(samples);
  double ss = 0.0;
  for (double v : g) ss += (v - out.mean) * (v - out.mean);
  out.std_error = samples > 1 ? std::sqrt(ss / (static_cast<double>(samples) * (static_cast<double>(samples) - 1.0))) : 0.0;
  return out;
}

// ---- asymptotic per-step loss -----------------------------------------------

struct KlLossEstimate {
  double value = 0.0;  // max over the probed horizons of d_n / n
  std::size_t argmax_n = 0;
  double std_error = 0.0;  // standard error of d_n/n at the argmax (0 for exact)
  std::size_t infinite_samples = 0;
};

// Estimates sup of d_n/n over the top decade [max_h/10, max_h], probing every
// `stride`-th horizon. Per-thread partial sums are reduced in thread order:
// output is reproducible for a fixed (seed, jobs) pair.
inline KlLossEstimate kl_loss_mc(const ProcessMeasure& mu, const ProcessMeasure& rho, int max_h, std::size_t samples,
                                 std::uint64_t seed, int jobs = 1, int stride = 1) {
  detail::require_same_alphabet(mu, rho);
  if (max_h < 1) throw std::invalid_argument("kl_loss: horizon must be positive");
  if (stride < 1) throw std::invalid_argument("kl_loss: stride must be positive");
  const int lo = std::max(1, max_h / 10);
  std::vector<int> probes;
  for (int t = lo; t <= max_h; t += stride) probes.push_back(t);
  if (probes.back() != max_h) probes.push_back(max_h);

  const std::size_t P = probes.size();
  const std::size_t k = mu.alphabet().size();
  int n_threads = jobs <= 1 ? 1 : jobs;
  std::vector<std::vector<double>> sum(static_cast<std::size_t>(n_threads), std::vector<double>(P, 0.0));
  std::vector<std::vector<double>> sumsq(static_cast<std::size_t>(n_threads), std::vector<double>(P, 0.0));
  std::vector<std::size_t> inf_count(static_cast<std::size_t>(n_threads), 0);

  auto worker = [&](std::size_t thread_idx, std::size_t i_begin, std::size_t i_step) {
    for (std::size_t i = i_begin; i < samples; i += i_step) {
      Rng rng(Rng::derive(seed, i));
      auto smu = mu.make_scorer();
      auto srho = rho.make_scorer();
      double g = 0.0;
      std::size_t probe_at = 0;
      for (int t = 1; t <= max_h && probe_at < P; ++t) {
        auto cmu = smu->conditional();
        auto crho = srho->conditional();
        for (std::size_t s = 0; s < k; ++s) {
          double ps = cmu.prob(s);
          if (ps == 0.0) continue;
          double qs = crho.prob(s);
          if (qs == 0.0) {
            g = kPosInf;
            break;
          }
          g += ps * std::log2(ps / qs);
        }
        if (std::isinf(g)) break;
        Symbol sym = cmu.sample(rng.next_unit());
        smu->push(sym);
        srho->push(sym);
        while (probe_at < P && probes[probe_at] == t) {
          double r = g / static_cast<double>(t);
          sum[thread_idx][probe_at] += r;
          sumsq[thread_idx][probe_at] += r * r;
          ++probe_at;
        }
      }
      if (std::isinf(g)) ++inf_count[thread_idx];
    }
  };
  if (n_threads == 1) {
    worker(0, 0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, static_cast<std::size_t>(t), static_cast<std::size_t>(t), static_cast<std::size_t>(n_threads));
    for (auto& th : pool) th.join();
  }

  KlLossEstimate out;
  for (std::size_t t = 0; t < static_cast<std::size_t>(n_threads); ++t) out.infinite_samples += inf_count[t];
  if (out.infinite_samples > 0) {
    out.value = kPosInf;
    out.std_error = kPosInf;
    out.argmax_n = static_cast<std::size_t>(max_h);
    return out;
  }
  const double S = static_cast<double>(samples);
  out.value = -1.0;
  for (std::size_t p = 0; p < P; ++p) {
    double total = 0.0, total_sq = 0.0;
    for (int t = 0; t < n_threads; ++t) {
      total += sum[static_cast<std::size_t>(t)][p];
      total_sq += sumsq[static_cast<std::size_t>(t)][p];
    }
    double mean = total / S;
    if (mean > out.value) {
      out.value = mean;
      out.argmax_n = static_cast<std::size_t>(probes[p]);
      double var = samples > 1 ? std::max(0.0, (total_sq - S * mean * mean) / (S - 1.0)) : 0.0;
      out.std_error = std::sqrt(var / S);
    }
  }
  return out;
}

// Exact counterpart for enumerable horizons.
inline KlLossEstimate kl_loss_exact(const ProcessMeasure& mu, const ProcessMeasure& rho, int max_h,
                                    int budget_log2 = kDefaultBudgetLog2) {
  auto all = exact_dn_all(mu, rho, max_h, budget_log2);
  const int lo = std::max(1, max_h / 10);
  KlLossEstimate out;
  out.value = -kPosInf;
  for (int t = lo; t <= max_h; ++t) {
    double r = all[static_cast<std::size_t>(t - 1)].bits / static_cast<double>(t);
    if (r > out.value) {
      out.value = r;
      out.argmax_n = static_cast<std::size_t>(t);
    }
  }
  return out;
}

// ---- series reporting ---------------------------------------------------------

struct SeriesPoint {
  std::size_t n = 0;
  double value = 0.0;
  double std_error = -1.0;  // negative: not applicable (exact evaluation)
  std::string mode;         // "exact" | "mc"
  std::uint64_t seed = 0;
  bool has_seed = false;
};

// Column layout shared by every d_n report the tools emit.
struct DivergenceSeries {
  std::vector<SeriesPoint> points;

  static SeriesPoint exact_point(std::size_t n, double value) { return SeriesPoint{n, value, -1.0, "exact", 0, false}; }
  static SeriesPoint mc_point(std::size_t n, const McEstimate& e) {
    return SeriesPoint{n, e.mean, e.std_error, "mc", e.seed, true};
  }

  std::string to_csv() const {
    std::string out = "n,value,value_over_n,stderr,mode,seed\n";
    for (const auto& p : points) {
      out += std::to_string(p.n);
      out += ',';
      out += format_double(p.value);
      out += ',';
      out += format_double(p.n > 0 ? p.value / static_cast<double>(p.n) : 0.0);
      out += ',';
      if (p.std_error >= 0.0) out += format_double(p.std_error);
      out += ',';
      out += p.mode;
      out += ',';
      if (p.has_seed) out += std::to_string(p.seed);
      out += '\n';
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : points) {
      nlohmann::json row = {{"n", p.n},
                            {"value", p.value},
                            {"value_over_n", p.n > 0 ? p.value / static_cast<double>(p.n) : 0.0},
                            {"mode", p.mode}};
      if (p.std_error >= 0.0) row["stderr"] = p.std_error;
      if (p.has_seed) row["seed"] = p.seed;
      rows.push_back(std::move(row));
    }
    return rows;
  }
};

}  // namespace seqpred
