#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqpred/alphabet.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/logprob.hpp"
#include "seqpred/rng.hpp"

namespace seqpred {

class DeterministicMeasure;

// Sequential evaluator of one process measure along a growing history.
//
// Contract: conditional() is the next-symbol distribution given everything
// pushed so far; push(s) advances the state and adds log2 P(s | past) to
// log2_joint(). A fresh scorer starts at the empty history with joint 0.
//
// Once a zero-probability symbol has been pushed the joint is -inf for good;
// conditionals afterwards are reported uniform (any convention works: the
// conditional given an impossible history is arbitrary, and downstream sums
// weight it by probability zero).
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ConditionalDistribution conditional() const = 0;
  virtual void push(Symbol s) = 0;
  virtual std::unique_ptr<Scorer> clone() const = 0;
  double log2_joint() const { return joint_; }

 protected:
  double joint_ = 0.0;
};

// A probability measure on one-way infinite sequences, used both as a data
// generator and as a predictor. Implementations are immutable after
// construction; all evaluation state lives in scorers, so repeated calls
// with identical arguments give bitwise identical results.
class ProcessMeasure {
 public:
  virtual ~ProcessMeasure() = default;
  virtual const Alphabet& alphabet() const = 0;
  virtual std::unique_ptr<Scorer> make_scorer() const = 0;
  virtual nlohmann::json to_json() const = 0;

  // Non-null when the measure is a point mass on one sequence; several
  // evaluators have closed-form paths for that case.
  virtual const DeterministicMeasure* as_deterministic() const { return nullptr; }

  ConditionalDistribution conditional_next(const History& h) const {
    check_history(h);
    auto sc = make_scorer();
    for (Symbol s : h.symbols()) sc->push(s);
    return sc->conditional();
  }

  LogProb log_prob(const History& h) const {
    check_history(h);
    auto sc = make_scorer();
    for (Symbol s : h.symbols()) sc->push(s);
    return LogProb{sc->log2_joint()};
  }

 protected:
  void check_history(const History& h) const {
    if (h.alphabet() != alphabet()) throw std::invalid_argument("history alphabet does not match measure alphabet");
  }
};

using MeasurePtr = std::shared_ptr<const ProcessMeasure>;

// ---- sampling -------------------------------------------------------------

// Draws n symbols from the measure (optionally continuing a given prefix).
// Returns prefix + continuation. Same seed, same output.
inline History sample_continuation(const ProcessMeasure& m, const History& given, int n, std::uint64_t seed) {
  if (given.alphabet() != m.alphabet()) throw std::invalid_argument("prefix alphabet does not match measure alphabet");
  Rng rng(seed);
  auto sc = m.make_scorer();
  History out = given;
  for (Symbol s : given.symbols()) sc->push(s);
  for (int i = 0; i < n; ++i) {
    Symbol s = sc->conditional().sample(rng.next_unit());
    sc->push(s);
    out.push_back(s);
  }
  return out;
}

inline History sample(const ProcessMeasure& m, int n, std::uint64_t seed) {
  return sample_continuation(m, History(m.alphabet()), n, seed);
}

// ---- exhaustive enumeration ----------------------------------------------

inline void check_enumeration_budget(std::size_t alphabet_size, int depth, int budget_log2) {
  double bits = depth * std::log2(static_cast<double>(alphabet_size));
  if (bits > static_cast<double>(budget_log2)) {
    throw BudgetExceeded("exhaustive enumeration of " + std::to_string(alphabet_size) + "^" + std::to_string(depth) +
                         " sequences exceeds the 2^" + std::to_string(budget_log2) +
                         " state budget; use a Monte-Carlo variant or raise --budget");
  }
}

inline constexpr int kDefaultBudgetLog2 = 24;

// Depth-first walk of the |X|-ary prefix tree down to `depth`, keeping one
// scorer per measure synchronized with the current prefix. `visit` is called
// at every node, the root included, as visit(prefix, scorers) with
// scorers[i] tracking measures[i]. Scorers for all but the last branch are
// cloned, so the walk costs one clone per measure per inner node.
template <typename Visit>
void walk_prefix_tree(const Alphabet& a, std::span<const ProcessMeasure* const> measures, int depth, int budget_log2,
                      Visit&& visit) {
  check_enumeration_budget(a.size(), depth, budget_log2);
  for (const ProcessMeasure* m : measures)
    if (m->alphabet() != a) throw std::invalid_argument("walk_prefix_tree: measure alphabet mismatch");

  std::vector<std::unique_ptr<Scorer>> scorers;
  scorers.reserve(measures.size());
  for (const ProcessMeasure* m : measures) scorers.push_back(m->make_scorer());
  std::vector<Symbol> prefix;
  prefix.reserve(static_cast<std::size_t>(depth));

  const std::size_t k = a.size();
  auto rec = [&](auto&& self, std::vector<std::unique_ptr<Scorer>>& sc) -> void {
    visit(static_cast<const std::vector<Symbol>&>(prefix), std::span<const std::unique_ptr<Scorer>>(sc));
    if (prefix.size() == static_cast<std::size_t>(depth)) return;
    for (std::size_t sym = 0; sym + 1 < k; ++sym) {
      std::vector<std::unique_ptr<Scorer>> child;
      child.reserve(sc.size());
      for (const auto& s : sc) child.push_back(s->clone());
      for (auto& s : child) s->push(static_cast<Symbol>(sym));
      prefix.push_back(static_cast<Symbol>(sym));
      self(self, child);
      prefix.pop_back();
    }
    for (auto& s : sc) s->push(static_cast<Symbol>(k - 1));  // last branch reuses the parent's scorers
    prefix.push_back(static_cast<Symbol>(k - 1));
    self(self, sc);
    prefix.pop_back();
  };
  rec(rec, scorers);
}

}  // namespace seqpred
