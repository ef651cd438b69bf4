#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqpred/process.hpp"
#include "seqpred/sequence_rule.hpp"

namespace seqpred {

// ---- i.i.d. ----------------------------------------------------------------

class IIDMeasure : public ProcessMeasure {
 public:
  IIDMeasure(Alphabet a, std::vector<double> probs) : alphabet_(std::move(a)), probs_(std::move(probs)) {
    if (probs_.size() != alphabet_.size()) throw std::invalid_argument("iid: probability vector size mismatch");
    double total = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("iid: probability outside [0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("iid: probabilities do not sum to 1");
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  const std::vector<double>& probs() const { return probs_; }

  std::unique_ptr<Scorer> make_scorer() const override {
    struct S : Scorer {
      const IIDMeasure* m;
      explicit S(const IIDMeasure* mm) : m(mm) {}
      ConditionalDistribution conditional() const override {
        return ConditionalDistribution(m->alphabet_, m->probs_);
      }
      void push(Symbol s) override {
        double p = m->probs_[s];
        joint_ += p > 0.0 ? std::log2(p) : kNegInf;
      }
      std::unique_ptr<Scorer> clone() const override { return std::make_unique<S>(*this); }
    };
    return std::make_unique<S>(this);
  }

  nlohmann::json to_json() const override {
    return {{"family", "iid"}, {"alphabet", alphabet_.labels()}, {"probs", probs_}};
  }

 private:
  Alphabet alphabet_;
  std::vector<double> probs_;
};

// Binary i.i.d. with P("0") = p.
inline std::shared_ptr<IIDMeasure> make_bernoulli(double p) {
  return std::make_shared<IIDMeasure>(Alphabet::binary(), std::vector<double>{p, 1.0 - p});
}

inline std::shared_ptr<IIDMeasure> make_uniform_iid(Alphabet a) {
  std::vector<double> probs(a.size(), 1.0 / static_cast<double>(a.size()));
  return std::make_shared<IIDMeasure>(std::move(a), std::move(probs));
}

// ---- finite-order Markov ----------------------------------------------------

// Order-k Markov measure. Contexts are the last k symbols, encoded base-|X|
// with the oldest symbol in the highest digit; rows_[ctx*|X| + s] is
// P(next = s | ctx). The first k symbols are drawn from an initial
// distribution over k-blocks; with InitialKind::kStationary that distribution
// is the stationary one, making the whole process stationary.
class MarkovMeasure : public ProcessMeasure {
 public:
  enum class InitialKind { kStationary, kUniform, kExplicit };

  MarkovMeasure(Alphabet a, int order, std::vector<double> rows, InitialKind init,
                std::vector<double> explicit_initial = {})
      : alphabet_(std::move(a)), order_(order), rows_(std::move(rows)), initial_kind_(init) {
    if (order_ < 0) throw std::invalid_argument("markov: negative order");
    const std::size_t k = alphabet_.size();
    n_contexts_ = 1;
    for (int i = 0; i < order_; ++i) {
      if (n_contexts_ > (1u << 20) / k) throw BudgetExceeded("markov: context space too large");
      n_contexts_ *= k;
    }
    if (rows_.size() != n_contexts_ * k) throw std::invalid_argument("markov: transition table size mismatch");
    for (std::size_t c = 0; c < n_contexts_; ++c) {
      double total = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        double p = rows_[c * k + s];
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("markov: row probability outside [0,1]");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("markov: row for context '" + context_string(c) + "' does not sum to 1");
    }
    switch (initial_kind_) {
      case InitialKind::kStationary:
        initial_ = solve_stationary(alphabet_, order_, rows_);
        break;
      case InitialKind::kUniform:
        initial_.assign(n_contexts_, 1.0 / static_cast<double>(n_contexts_));
        break;
      case InitialKind::kExplicit: {
        if (explicit_initial.size() != n_contexts_) throw std::invalid_argument("markov: initial distribution size mismatch");
        initial_ = std::move(explicit_initial);
        double total = std::accumulate(initial_.begin(), initial_.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("markov: initial distribution does not sum to 1");
        break;
      }
    }
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  int order() const { return order_; }
  std::size_t context_count() const { return n_contexts_; }
  double row(std::size_t ctx, Symbol s) const { return rows_[ctx * alphabet_.size() + s]; }
  const std::vector<double>& rows() const { return rows_; }
  const std::vector<double>& initial_block() const { return initial_; }
  InitialKind initial_kind() const { return initial_kind_; }

  // P(x_1..x_{k+1}) for the (k+1)-block with context part `ctx` and final
  // symbol s; the quantity the finite-memory distance bound is built from.
  double block_prob(std::size_t ctx, Symbol s) const { return initial_[ctx] * row(ctx, s); }

  std::string context_string(std::size_t ctx) const {
    std::string out;
    const std::size_t k = alphabet_.size();
    std::vector<Symbol> syms(static_cast<std::size_t>(order_));
    for (int i = order_ - 1; i >= 0; --i) {
      syms[static_cast<std::size_t>(i)] = static_cast<Symbol>(ctx % k);
      ctx /= k;
    }
    for (Symbol s : syms) out += alphabet_.label(s);
    return out;
  }

  // Stationary distribution of the context chain by power iteration
  // (relative tolerance 1e-13, cap 1e6 rounds). Periodic chains are detected
  // via a two-step cycle check and reported as errors naming a context.
  static std::vector<double> solve_stationary(const Alphabet& a, int order, const std::vector<double>& rows,
                                              bool* failed = nullptr, int iteration_cap = 1000000) {
    const std::size_t k = a.size();
    std::size_t n_ctx = 1;
    for (int i = 0; i < order; ++i) n_ctx *= k;
    std::vector<double> pi(n_ctx, 1.0 / static_cast<double>(n_ctx));
    if (order == 0) return pi;
    std::vector<double> next(n_ctx), prev2(n_ctx);
    const std::size_t ctx_mod = n_ctx / k;  // shift: ctx' = (ctx % ctx_mod)*k + s
    double residual = 1.0;
    for (int it = 0; it < iteration_cap; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t c = 0; c < n_ctx; ++c) {
        if (pi[c] == 0.0) continue;
        std::size_t base = (c % ctx_mod) * k;
        for (std::size_t s = 0; s < k; ++s) next[base + s] += pi[c] * rows[c * k + s];
      }
      residual = 0.0;
      for (std::size_t c = 0; c < n_ctx; ++c) residual = std::max(residual, std::abs(next[c] - pi[c]));
      if (it >= 2) {
        double cycle = 0.0;
        for (std::size_t c = 0; c < n_ctx; ++c) cycle = std::max(cycle, std::abs(next[c] - prev2[c]));
        if (cycle < 1e-15 && residual > 1e-10) break;  // period-2 oscillation; will not converge
      }
      prev2 = pi;
      pi = next;
      if (residual <= 1e-13) return pi;
    }
    std::size_t worst = 0;
    for (std::size_t c = 0; c < n_ctx; ++c)
      if (std::abs(next[c] - pi[c]) > std::abs(next[worst] - pi[worst])) worst = c;
    if (failed) {
      *failed = true;
      return std::vector<double>(n_ctx, 1.0 / static_cast<double>(n_ctx));
    }
    std::string ctx_label;
    {
      std::size_t c = worst;
      std::vector<Symbol> syms(static_cast<std::size_t>(order));
      for (int i = order - 1; i >= 0; --i) {
        syms[static_cast<std::size_t>(i)] = static_cast<Symbol>(c % k);
        c /= k;
      }
      for (Symbol s : syms) ctx_label += a.label(s);
    }
    throw StationarySolveError("no stationary distribution reachable by power iteration (non-ergodic chain); residual " +
                               std::to_string(residual) + " at context '" + ctx_label + "'");
  }

  std::unique_ptr<Scorer> make_scorer() const override {
    struct S : Scorer {
      const MarkovMeasure* m;
      std::size_t ctx = 0;       // rolling context once warmed up
      std::size_t block = 0;     // partial first-k block
      int pos = 0;
      explicit S(const MarkovMeasure* mm) : m(mm) {}

      ConditionalDistribution conditional() const override {
        const std::size_t k = m->alphabet_.size();
        std::array<double, Alphabet::kMaxSymbols> p{};
        if (pos >= m->order_) {
          for (std::size_t s = 0; s < k; ++s) p[s] = m->rows_[ctx * k + s];
        } else {
          // Marginal conditionals inside the initial block: sum the initial
          // distribution over all completions of the realized prefix.
          std::size_t suffix_count = 1;
          for (int i = 0; i < m->order_ - pos; ++i) suffix_count *= k;
          double denom = 0.0;
          std::array<double, Alphabet::kMaxSymbols> num{};
          std::size_t base = block * k * (suffix_count / k);
          for (std::size_t s = 0; s < k; ++s) {
            double mass = 0.0;
            std::size_t lo = base + s * (suffix_count / k);
            for (std::size_t t = 0; t < suffix_count / k; ++t) mass += m->initial_[lo + t];
            num[s] = mass;
            denom += mass;
          }
          if (denom <= 0.0) return ConditionalDistribution::uniform(m->alphabet_);  // impossible prefix
          for (std::size_t s = 0; s < k; ++s) p[s] = num[s] / denom;
        }
        return ConditionalDistribution(m->alphabet_, std::span<const double>(p.data(), k));
      }

      void push(Symbol s) override {
        double p = conditional().prob(s);
        joint_ += p > 0.0 ? std::log2(p) : kNegInf;
        const std::size_t k = m->alphabet_.size();
        if (pos < m->order_) {
          block = block * k + s;
          if (pos + 1 == m->order_) ctx = block;
        } else if (m->order_ > 0) {
          ctx = (ctx % (m->n_contexts_ / k)) * k + s;
        }
        ++pos;
      }
      std::unique_ptr<Scorer> clone() const override { return std::make_unique<S>(*this); }
    };
    return std::make_unique<S>(this);
  }

  nlohmann::json to_json() const override {
    nlohmann::json rows = nlohmann::json::object();
    const std::size_t k = alphabet_.size();
    for (std::size_t c = 0; c < n_contexts_; ++c) {
      std::vector<double> row(rows_.begin() + static_cast<std::ptrdiff_t>(c * k),
                              rows_.begin() + static_cast<std::ptrdiff_t>((c + 1) * k));
      rows[context_string(c)] = row;
    }
    nlohmann::json j = {{"family", "markov"}, {"alphabet", alphabet_.labels()}, {"order", order_}, {"rows", rows}};
    switch (initial_kind_) {
      case InitialKind::kStationary: j["initial"] = "stationary"; break;
      case InitialKind::kUniform: j["initial"] = "uniform"; break;
      case InitialKind::kExplicit: j["initial"] = initial_; break;
    }
    return j;
  }

 private:
  Alphabet alphabet_;
  int order_;
  std::vector<double> rows_;
  InitialKind initial_kind_;
  std::vector<double> initial_;
  std::size_t n_contexts_;
};

inline std::shared_ptr<MarkovMeasure> make_markov(Alphabet a, int order, std::vector<double> rows,
                                                  MarkovMeasure::InitialKind init = MarkovMeasure::InitialKind::kStationary,
                                                  std::vector<double> explicit_initial = {}) {
  return std::make_shared<MarkovMeasure>(std::move(a), order, std::move(rows), init, std::move(explicit_initial));
}

// ---- deterministic -----------------------------------------------------------

// Point mass on a single sequence, given either by a rule producing bits
// (bit_symbols maps them into the measure's alphabet: identity on a binary
// alphabet, {1,2} on the marked ternary one) or by an explicit symbol string
// extended by holding its last symbol forever.
class DeterministicMeasure : public ProcessMeasure {
 public:
  DeterministicMeasure(Alphabet a, SequenceRule rule, std::array<Symbol, 2> bit_symbols)
      : alphabet_(std::move(a)), rule_(std::move(rule)), bit_symbols_(bit_symbols) {
    if (bit_symbols_[0] >= alphabet_.size() || bit_symbols_[1] >= alphabet_.size())
      throw std::invalid_argument("deterministic: bit symbol out of range");
  }

  DeterministicMeasure(Alphabet a, std::vector<Symbol> symbols)
      : alphabet_(std::move(a)), rule_(SequenceRule::periodic("0")), explicit_symbols_(std::move(symbols)) {
    if (explicit_symbols_.empty()) throw std::invalid_argument("deterministic: empty symbol string");
    for (Symbol s : explicit_symbols_)
      if (s >= alphabet_.size()) throw std::invalid_argument("deterministic: symbol out of range");
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  bool has_rule() const { return explicit_symbols_.empty(); }
  const SequenceRule& rule() const {
    if (!has_rule()) throw std::logic_error("deterministic: explicit-symbol measure has no rule");
    return rule_;
  }
  const DeterministicMeasure* as_deterministic() const override { return this; }

  Symbol symbol_at(std::int64_t pos) const {
    if (!explicit_symbols_.empty()) {
      std::size_t i = static_cast<std::size_t>(pos - 1);
      return i < explicit_symbols_.size() ? explicit_symbols_[i] : explicit_symbols_.back();
    }
    return bit_symbols_[static_cast<std::size_t>(rule_.bit_at(pos))];
  }

  History prefix_history(int n) const {
    History h(alphabet_);
    for (int i = 1; i <= n; ++i) h.push_back(symbol_at(i));
    return h;
  }

  std::unique_ptr<Scorer> make_scorer() const override {
    struct S : Scorer {
      const DeterministicMeasure* m;
      std::int64_t pos = 0;
      bool alive = true;
      explicit S(const DeterministicMeasure* mm) : m(mm) {}
      ConditionalDistribution conditional() const override {
        if (!alive) return ConditionalDistribution::uniform(m->alphabet_);
        return ConditionalDistribution::point_mass(m->alphabet_, m->symbol_at(pos + 1));
      }
      void push(Symbol s) override {
        if (alive && s == m->symbol_at(pos + 1)) {
          // log2(1) == 0; nothing to add
        } else {
          alive = false;
          joint_ = kNegInf;
        }
        ++pos;
      }
      std::unique_ptr<Scorer> clone() const override { return std::make_unique<S>(*this); }
    };
    return std::make_unique<S>(this);
  }

  nlohmann::json to_json() const override {
    if (!has_rule()) {
      std::vector<std::string> labels;
      for (Symbol s : explicit_symbols_) labels.push_back(alphabet_.label(s));
      return {{"family", "deterministic"}, {"alphabet", alphabet_.labels()}, {"symbols", labels}, {"then", "hold"}};
    }
    return {{"family", "deterministic"}, {"alphabet", alphabet_.labels()}, {"target", rule_.to_json()}};
  }

 private:
  Alphabet alphabet_;
  SequenceRule rule_;
  std::array<Symbol, 2> bit_symbols_{0, 0};
  std::vector<Symbol> explicit_symbols_;
};

inline std::shared_ptr<DeterministicMeasure> make_point_mass(const History& h) {
  return std::make_shared<DeterministicMeasure>(h.alphabet(), h.symbols());
}

inline std::shared_ptr<DeterministicMeasure> make_deterministic(SequenceRule rule) {
  return std::make_shared<DeterministicMeasure>(Alphabet::binary(), std::move(rule), std::array<Symbol, 2>{0, 1});
}

// Deterministic binary sequence embedded into the marked ternary alphabet
// {a,0,1}; it never emits the marker.
inline std::shared_ptr<DeterministicMeasure> make_deterministic_marked(SequenceRule rule) {
  return std::make_shared<DeterministicMeasure>(Alphabet::marked_binary(), std::move(rule), std::array<Symbol, 2>{1, 2});
}

// ---- sparse-zeros predictor ---------------------------------------------------

// Binary predictor with P(x_n = "0") = 1/n independently across steps.
// The rule is taken literally at n = 1, where it makes "0" certain; that is
// what gives the clean closed form for its loss on sequences whose zeros sit
// at the square positions.
class SparseZerosPredictor : public ProcessMeasure {
 public:
  SparseZerosPredictor() : alphabet_(Alphabet::binary()) {}

  const Alphabet& alphabet() const override { return alphabet_; }

  std::unique_ptr<Scorer> make_scorer() const override {
    struct S : Scorer {
      const SparseZerosPredictor* m;
      std::int64_t pos = 0;
      explicit S(const SparseZerosPredictor* mm) : m(mm) {}
      ConditionalDistribution conditional() const override {
        double p0 = 1.0 / static_cast<double>(pos + 1);
        std::array<double, 2> p{p0, 1.0 - p0};
        return ConditionalDistribution(m->alphabet_, std::span<const double>(p.data(), 2));
      }
      void push(Symbol s) override {
        double p0 = 1.0 / static_cast<double>(pos + 1);
        double p = s == 0 ? p0 : 1.0 - p0;
        joint_ += p > 0.0 ? std::log2(p) : kNegInf;
        ++pos;
      }
      std::unique_ptr<Scorer> clone() const override { return std::make_unique<S>(*this); }
    };
    return std::make_unique<S>(this);
  }

  nlohmann::json to_json() const override { return {{"family", "sparse_zeros"}}; }

 private:
  Alphabet alphabet_;
};

inline std::shared_ptr<SparseZerosPredictor> make_sparse_zeros_predictor() {
  return std::make_shared<SparseZerosPredictor>();
}

}  // namespace seqpred
