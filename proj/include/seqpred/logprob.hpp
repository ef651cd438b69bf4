#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

#include "seqpred/alphabet.hpp"

namespace seqpred {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Base-2 log of a probability: a value in [-inf, 0]. All probability
// accumulation in the library happens in this representation; linear-space
// products underflow near step 1100 for the measures handled here.
struct LogProb {
  double log2_value = 0.0;

  static LogProb from_prob(double p) {
    if (p < 0.0 || p > 1.0 + 1e-12) throw std::invalid_argument("probability outside [0,1]");
    return LogProb{p > 0.0 ? std::log2(p) : kNegInf};
  }
  double prob() const { return std::exp2(log2_value); }
  bool is_zero() const { return log2_value == kNegInf; }
};

// log2(sum_i 2^{v_i}) with the usual max-shift; empty input and all-(-inf)
// inputs give -inf.
inline double log2_sum_exp(std::span<const double> vals) {
  double m = kNegInf;
  for (double v : vals) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : vals) acc += std::exp2(v - m);
  return m + std::log2(acc);
}

// One-step conditional distribution over the alphabet. Stored in linear
// space (every conditional in this library arises as a ratio or a table
// entry, not as a log); log2 view is computed on demand.
class ConditionalDistribution {
 public:
  ConditionalDistribution(const Alphabet& a, std::span<const double> probs) : n_(a.size()) {
    if (probs.size() != n_) throw std::invalid_argument("conditional distribution size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!(probs[i] >= 0.0)) throw std::invalid_argument("negative conditional probability");
      p_[i] = probs[i];
      total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("conditional distribution does not sum to 1");
  }

  static ConditionalDistribution point_mass(const Alphabet& a, Symbol s) {
    std::array<double, Alphabet::kMaxSymbols> p{};
    p[s] = 1.0;
    return ConditionalDistribution(a, std::span<const double>(p.data(), a.size()));
  }

  static ConditionalDistribution uniform(const Alphabet& a) {
    std::array<double, Alphabet::kMaxSymbols> p{};
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = 1.0 / static_cast<double>(a.size());
    return ConditionalDistribution(a, std::span<const double>(p.data(), a.size()));
  }

  std::size_t size() const { return n_; }
  double prob(Symbol s) const { return p_[s]; }
  double log2_prob(Symbol s) const { return p_[s] > 0.0 ? std::log2(p_[s]) : kNegInf; }

  // Smallest-index symbol of minimal probability.
  Symbol min_prob_symbol() const {
    Symbol best = 0;
    for (std::size_t i = 1; i < n_; ++i)
      if (p_[i] < p_[best]) best = static_cast<Symbol>(i);
    return best;
  }

  // Inverse-CDF draw in index order; u in [0,1).
  Symbol sample(double u) const {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      acc += p_[i];
      if (u < acc) return static_cast<Symbol>(i);
    }
    return static_cast<Symbol>(n_ - 1);
  }

 private:
  std::array<double, Alphabet::kMaxSymbols> p_{};
  std::size_t n_;
};

}  // namespace seqpred
