#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "seqpred/process.hpp"
#include "seqpred/sequence_rule.hpp"

namespace seqpred {

// Stationary ergodic measure on the marked ternary alphabet {a,0,1} driven by
// a hidden counter chain on {0,1,2,...}: from any state k the chain moves to
// k+1 with probability 2/3 and resets to 0 with probability 1/3. State 0
// emits the marker 'a'; state k > 0 emits the target bit t_k. Between
// consecutive markers the output therefore replays t from the beginning.
//
// The stationary law of the counter is pi_k = (1/3)(2/3)^k (checked against
// the balance equations in the tests). Because every state resets with
// probability exactly 1/3, P(next = 'a' | any history) = 1/3 exactly.
//
// conditional_next marginalizes the exact filtered posterior of the counter.
// Only the *initial* state is truncated (to 0..s_max, a prior tail below
// (2/3)^{s_max} in total variation); the posterior support itself must be
// allowed to climb with the history length, since after observing t_1..t_n
// the whole posterior sits at state n.
class HiddenChainMeasure : public ProcessMeasure {
 public:
  explicit HiddenChainMeasure(SequenceRule target, int s_max = 80)
      : alphabet_(Alphabet::marked_binary()), target_(std::move(target)), s_max_(s_max) {
    if (s_max_ < 1) throw std::invalid_argument("hidden chain: s_max must be >= 1");
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  const SequenceRule& target() const { return target_; }
  int s_max() const { return s_max_; }

  static constexpr Symbol kMarker = 0;  // 'a'
  Symbol emission(std::int64_t state) const {
    return state == 0 ? kMarker : static_cast<Symbol>(1 + target_.bit_at(state));
  }

  std::unique_ptr<Scorer> make_scorer() const override { return std::make_unique<S>(this); }

  nlohmann::json to_json() const override {
    return {{"family", "hidden_chain"}, {"target", target_.to_json()}, {"s_max", s_max_}};
  }

 private:
  struct S : Scorer {
    const HiddenChainMeasure* m;
    // Normalized posterior over the counter *before* the next transition,
    // as sparse (state, weight) pairs. Starts at the truncated stationary
    // prior; each push advances one transition + one emission.
    std::vector<std::pair<std::int64_t, double>> post;
    bool dead = false;

    explicit S(const HiddenChainMeasure* mm) : m(mm) {
      post.reserve(static_cast<std::size_t>(mm->s_max_) + 1);
      // pi_k = (1/3)(2/3)^k restricted to k <= s_max, renormalized.
      double w = 1.0 / 3.0, total = 0.0;
      for (int k = 0; k <= mm->s_max_; ++k) {
        post.emplace_back(k, w);
        total += w;
        w *= 2.0 / 3.0;
      }
      for (auto& e : post) e.second /= total;
    }

    // P(next symbol): marker w.p. 1/3 from every state; bit b gets
    // (2/3) * (posterior mass of states whose successor emits b).
    ConditionalDistribution conditional() const override {
      if (dead) return ConditionalDistribution::uniform(m->alphabet_);
      std::array<double, 3> p{1.0 / 3.0, 0.0, 0.0};
      for (const auto& [state, weight] : post) {
        Symbol e = m->emission(state + 1);
        p[e] += (2.0 / 3.0) * weight;
      }
      return ConditionalDistribution(m->alphabet_, std::span<const double>(p.data(), 3));
    }

    void push(Symbol s) override {
      if (dead) return;
      if (s == kMarker) {
        // Reset path: probability 1/3 from every state; posterior collapses
        // to state 0.
        joint_ += std::log2(1.0 / 3.0);
        post.assign(1, {0, 1.0});
        return;
      }
      double mass = 0.0;
      std::size_t keep = 0;
      for (std::size_t i = 0; i < post.size(); ++i) {
        auto [state, weight] = post[i];
        if (m->emission(state + 1) == s) {
          post[keep++] = {state + 1, weight};
          mass += weight;
        }
      }
      post.resize(keep);
      if (mass <= 0.0) {
        dead = true;
        joint_ = kNegInf;
        post.clear();
        return;
      }
      joint_ += std::log2((2.0 / 3.0) * mass);
      for (auto& e : post) e.second /= mass;
    }

    std::unique_ptr<Scorer> clone() const override { return std::make_unique<S>(*this); }
  };

  Alphabet alphabet_;
  SequenceRule target_;
  int s_max_;
};

inline std::shared_ptr<HiddenChainMeasure> make_hidden_chain(SequenceRule target, int s_max = 80) {
  return std::make_shared<HiddenChainMeasure>(std::move(target), s_max);
}

}  // namespace seqpred
