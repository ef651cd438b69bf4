#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "seqpred/measures.hpp"
#include "seqpred/process.hpp"

namespace seqpred {

// A sequence built to defeat one predictor, together with the predictor's
// log2-probability of each emitted symbol. The divergence of the point mass
// on this sequence from the predictor is just the accumulated surprisal:
// d_m = -sum of the first m entries.
struct AdversarySequence {
  History symbols;
  std::vector<double> step_log2_prob;

  double cumulative_dn(std::size_t m) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc -= step_log2_prob[i];
    return acc;
  }
  double dn() const { return cumulative_dn(step_log2_prob.size()); }
  MeasurePtr as_measure() const { return make_point_mass(symbols); }
};

// Worst-case deterministic source against a given predictor: at every step
// emit the symbol the predictor currently considers least likely, breaking
// ties toward the smallest symbol index. Some symbol always has conditional
// probability <= 1/|X|, so the resulting point mass forces
// d_n >= n log2 |X| no matter the predictor.
inline AdversarySequence adversary_sequence(const ProcessMeasure& rho, int n) {
  if (n < 0) throw std::invalid_argument("adversary: negative horizon");
  AdversarySequence out{History(rho.alphabet()), {}};
  out.step_log2_prob.reserve(static_cast<std::size_t>(n));
  auto sc = rho.make_scorer();
  for (int t = 0; t < n; ++t) {
    auto cd = sc->conditional();
    Symbol s = cd.min_prob_symbol();
    out.step_log2_prob.push_back(cd.log2_prob(s));
    sc->push(s);
    out.symbols.push_back(s);
  }
  return out;
}

}  // namespace seqpred
