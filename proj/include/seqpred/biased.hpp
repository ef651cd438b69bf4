#pragma once

#include <cmath>
#include <memory>

#include <json.hpp>

#include "seqpred/measures.hpp"
#include "seqpred/process.hpp"
#include "seqpred/sequence_rule.hpp"

namespace seqpred {

// Binary measure biased toward a target sequence t. While the history still
// equals the target prefix, the next symbol follows the target with
// probability follow(n) at step n; after the first deviation every symbol is
// a fair coin.
//
// Two follow schedules are supported:
//   sharpening: follow(n) = 1 - 1/(n+1), so the target prefix t_1..t_n keeps
//               mass prod_i i/(i+1) = 1/(n+1);
//   constant:   follow(n) = p (default 2/3), so the target prefix keeps
//               mass p^n.
class BiasedToSequenceMeasure : public ProcessMeasure {
 public:
  enum class Schedule { kSharpening, kConstant };

  BiasedToSequenceMeasure(SequenceRule target, Schedule schedule, double constant_p = 2.0 / 3.0)
      : alphabet_(Alphabet::binary()), target_(std::move(target)), schedule_(schedule), p_(constant_p) {
    if (schedule_ == Schedule::kConstant && !(p_ > 0.0 && p_ < 1.0))
      throw std::invalid_argument("biased: constant follow probability must lie in (0,1)");
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  const SequenceRule& target() const { return target_; }
  Schedule schedule() const { return schedule_; }

  double follow_prob(std::int64_t step) const {  // step is 1-based
    return schedule_ == Schedule::kSharpening ? 1.0 - 1.0 / static_cast<double>(step + 1) : p_;
  }

  std::unique_ptr<Scorer> make_scorer() const override {
    struct S : Scorer {
      const BiasedToSequenceMeasure* m;
      std::int64_t pos = 0;
      bool on_target = true;
      explicit S(const BiasedToSequenceMeasure* mm) : m(mm) {}

      ConditionalDistribution conditional() const override {
        if (!on_target) return ConditionalDistribution::uniform(m->alphabet_);
        double f = m->follow_prob(pos + 1);
        Symbol t = static_cast<Symbol>(m->target_.bit_at(pos + 1));
        std::array<double, 2> p{};
        p[t] = f;
        p[1 - t] = 1.0 - f;
        return ConditionalDistribution(m->alphabet_, std::span<const double>(p.data(), 2));
      }

      void push(Symbol s) override {
        if (on_target) {
          double f = m->follow_prob(pos + 1);
          Symbol t = static_cast<Symbol>(m->target_.bit_at(pos + 1));
          joint_ += std::log2(s == t ? f : 1.0 - f);
          on_target = (s == t);
        } else {
          joint_ += -1.0;  // log2(1/2)
        }
        ++pos;
      }
      std::unique_ptr<Scorer> clone() const override { return std::make_unique<S>(*this); }
    };
    return std::make_unique<S>(this);
  }

  nlohmann::json to_json() const override {
    nlohmann::json j = {{"family", "biased_to_sequence"},
                        {"target", target_.to_json()},
                        {"schedule", schedule_ == Schedule::kSharpening ? "sharpening" : "constant"}};
    if (schedule_ == Schedule::kConstant && p_ != 2.0 / 3.0) j["p"] = p_;
    return j;
  }

 private:
  Alphabet alphabet_;
  SequenceRule target_;
  Schedule schedule_;
  double p_;
};

inline std::shared_ptr<BiasedToSequenceMeasure> make_sharpening_biased(SequenceRule target) {
  return std::make_shared<BiasedToSequenceMeasure>(std::move(target), BiasedToSequenceMeasure::Schedule::kSharpening);
}

inline std::shared_ptr<BiasedToSequenceMeasure> make_constant_biased(SequenceRule target, double p = 2.0 / 3.0) {
  return std::make_shared<BiasedToSequenceMeasure>(std::move(target), BiasedToSequenceMeasure::Schedule::kConstant, p);
}

}  // namespace seqpred
