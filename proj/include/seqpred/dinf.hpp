#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "seqpred/measures.hpp"
#include "seqpred/process.hpp"

namespace seqpred {

// Worst-case per-symbol log-ratio between two measures at one horizon:
//   max over x in X^m of (1/m) |log2 mu1(x) - log2 mu2(x)|,
// skipping sequences both measures rule out. A sequence only one of them
// rules out makes the value infinite. `argmax` holds the maximizing sequence
// (or the one-sided-zero witness).
struct DinfValue {
  double value = 0.0;
  std::string argmax;
  bool is_infinite() const { return std::isinf(value); }
};

// d_inf at every horizon 1..n in a single prefix-tree walk. Two point masses
// short-circuit to a prefix comparison, which reaches any horizon.
inline std::vector<DinfValue> d_inf_series(const ProcessMeasure& mu1, const ProcessMeasure& mu2, int n,
                                           int budget_log2 = kDefaultBudgetLog2) {
  if (mu1.alphabet() != mu2.alphabet()) throw std::invalid_argument("d_inf: alphabet mismatch");
  if (n <= 0) throw std::invalid_argument("d_inf: horizon must be positive");
  std::vector<DinfValue> out(static_cast<std::size_t>(n));

  const DeterministicMeasure* d1 = mu1.as_deterministic();
  const DeterministicMeasure* d2 = mu2.as_deterministic();
  if (d1 && d2) {
    History shared(mu1.alphabet());
    bool diverged = false;
    for (int m = 1; m <= n; ++m) {
      if (!diverged) {
        Symbol a = d1->symbol_at(m);
        if (a == d2->symbol_at(m)) {
          shared.push_back(a);
        } else {
          diverged = true;
          shared.push_back(a);  // a sequence mu1 can produce and mu2 cannot
        }
      }
      auto& v = out[static_cast<std::size_t>(m - 1)];
      v.value = diverged ? kPosInf : 0.0;
      v.argmax = shared.prefix(std::min<std::size_t>(shared.size(), static_cast<std::size_t>(m))).to_string();
    }
    return out;
  }

  const ProcessMeasure* ms[2] = {&mu1, &mu2};
  walk_prefix_tree(mu1.alphabet(), ms, n, budget_log2,
                   [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                     if (prefix.empty()) return;
                     double l1 = sc[0]->log2_joint();
                     double l2 = sc[1]->log2_joint();
                     bool z1 = std::isinf(l1), z2 = std::isinf(l2);
                     if (z1 && z2) return;  // neither measure reaches this sequence
                     auto& v = out[prefix.size() - 1];
                     if (z1 != z2) {
                       if (!v.is_infinite()) {
                         v.value = kPosInf;
                         v.argmax = History(mu1.alphabet(), prefix).to_string();
                       }
                       return;
                     }
                     double cand = std::abs(l1 - l2) / static_cast<double>(prefix.size());
                     if (!v.is_infinite() && cand > v.value) {
                       v.value = cand;
                       v.argmax = History(mu1.alphabet(), prefix).to_string();
                     }
                   });
  return out;
}

inline DinfValue d_inf(const ProcessMeasure& mu1, const ProcessMeasure& mu2, int n,
                       int budget_log2 = kDefaultBudgetLog2) {
  return d_inf_series(mu1, mu2, n, budget_log2).back();
}

// Closed-form upper bound on sup over all horizons n of d_inf(m1, m2)(n)
// for two Markov measures of equal order k. Any length-n probability factors
// as the initial k-block marginal times n-k transition entries, so
//   (1/n)|log2 mu1(x)/mu2(x)| <= (1/n)(I_k + (n-k) R) <= max(I_k/k, R)
// for n > k, while for n <= k it equals I_n/n exactly, where
//   I_m = worst |log2 ratio| of the first-m-symbol marginals (m = 1..k),
//   R   = worst |log2 ratio| of single transition probabilities over
//         contexts reachable by either chain.
// The returned value is max(max_m I_m/m, R). Blocks and transitions both
// measures rule out are skipped; anything one chain can realize and the
// other cannot makes the bound infinite.
inline DinfValue d_inf_markov_bound(const MarkovMeasure& m1, const MarkovMeasure& m2) {
  if (m1.alphabet() != m2.alphabet()) throw std::invalid_argument("d_inf bound: alphabet mismatch");
  if (m1.order() != m2.order()) throw std::invalid_argument("d_inf bound: orders differ");
  const Alphabet& a = m1.alphabet();
  const std::size_t A = a.size();
  const int k = m1.order();
  const std::size_t contexts = m1.context_count();

  DinfValue best;
  best.value = -1.0;
  auto offer = [&best](double cand, std::string block) {
    if (cand > best.value) {
      best.value = cand;
      best.argmax = std::move(block);
    }
  };

  // initial-segment terms I_m/m, m = 1..k
  const auto& init1 = m1.initial_block();
  const auto& init2 = m2.initial_block();
  std::size_t tail = contexts;  // A^(k-m): contexts collapsing onto one m-block
  for (int m = 1; m <= k; ++m) {
    tail /= A;
    std::size_t buckets = contexts / tail;
    for (std::size_t b = 0; b < buckets; ++b) {
      double p1 = 0.0, p2 = 0.0;
      for (std::size_t t = 0; t < tail; ++t) {
        p1 += init1[b * tail + t];
        p2 += init2[b * tail + t];
      }
      if (p1 == 0.0 && p2 == 0.0) continue;
      std::vector<Symbol> digits(static_cast<std::size_t>(m));
      std::size_t rem = b;
      for (int d = m - 1; d >= 0; --d) {
        digits[static_cast<std::size_t>(d)] = static_cast<Symbol>(rem % A);
        rem /= A;
      }
      std::string block;
      for (Symbol s : digits) block += a.label(s);
      if (p1 == 0.0 || p2 == 0.0) return {kPosInf, block};
      offer(std::abs(std::log2(p1) - std::log2(p2)) / static_cast<double>(m), std::move(block));
    }
  }

  // transition term R over contexts reachable by either chain
  auto reachable = [&](const MarkovMeasure& m, const std::vector<double>& init) {
    std::vector<char> seen(contexts, 0);
    std::vector<std::size_t> queue;
    for (std::size_t c = 0; c < contexts; ++c)
      if (init[c] > 0.0) {
        seen[c] = 1;
        queue.push_back(c);
      }
    const std::size_t ctx_mod = contexts / (contexts > 1 ? A : 1);
    while (!queue.empty()) {
      std::size_t c = queue.back();
      queue.pop_back();
      for (std::size_t s = 0; s < A; ++s) {
        if (m.row(c, static_cast<Symbol>(s)) <= 0.0) continue;
        std::size_t nxt = contexts > 1 ? (c % ctx_mod) * A + s : 0;
        if (!seen[nxt]) {
          seen[nxt] = 1;
          queue.push_back(nxt);
        }
      }
    }
    return seen;
  };
  std::vector<char> r1 = reachable(m1, init1);
  std::vector<char> r2 = reachable(m2, init2);
  for (std::size_t ctx = 0; ctx < contexts; ++ctx) {
    if (!r1[ctx] && !r2[ctx]) continue;
    if (!r1[ctx] || !r2[ctx]) return {kPosInf, m1.context_string(ctx)};
    for (std::size_t s = 0; s < A; ++s) {
      double q1 = m1.row(ctx, static_cast<Symbol>(s));
      double q2 = m2.row(ctx, static_cast<Symbol>(s));
      if (q1 == 0.0 && q2 == 0.0) continue;
      std::string block = m1.context_string(ctx) + a.label(static_cast<Symbol>(s));
      if (q1 == 0.0 || q2 == 0.0) return {kPosInf, block};
      offer(std::abs(std::log2(q1) - std::log2(q2)), std::move(block));
    }
  }
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

}  // namespace seqpred
