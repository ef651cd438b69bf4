#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqpred/measures.hpp"
#include "seqpred/process.hpp"

namespace seqpred {

// Bayesian mixture nu = sum_k w_k mu_k. The joint probability is the
// weighted sum of component joints; the one-step conditional is the
// posterior-weighted average of component conditionals. Internally the
// posterior is kept in linear space and renormalized every step (the
// per-step normalizer is exactly the conditional probability of the pushed
// symbol, so the running joint accumulates one log2 per step and never
// underflows).
class MixturePredictor : public ProcessMeasure {
 public:
  MixturePredictor(std::vector<MeasurePtr> components, std::vector<double> weights,
                   nlohmann::json compact_json = nlohmann::json())
      : components_(std::move(components)), weights_(std::move(weights)), compact_json_(std::move(compact_json)) {
    if (components_.empty()) throw std::invalid_argument("mixture: no components");
    if (components_.size() != weights_.size()) throw std::invalid_argument("mixture: weight/component count mismatch");
    alphabet_ = components_[0]->alphabet();
    double total = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (components_[i]->alphabet() != alphabet_) throw std::invalid_argument("mixture: component alphabet mismatch");
      if (!(weights_[i] > 0.0)) throw std::invalid_argument("mixture: weights must be positive");
      total += weights_[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights must sum to 1");
    build_packed_plan();
  }

  const Alphabet& alphabet() const override { return alphabet_; }
  std::size_t size() const { return components_.size(); }
  const MeasurePtr& component(std::size_t i) const { return components_.at(i); }
  double weight(std::size_t i) const { return weights_.at(i); }

  std::unique_ptr<Scorer> make_scorer() const override {
    if (packed_) return std::make_unique<PackedScorer>(this);
    return std::make_unique<GenericScorer>(this);
  }

  nlohmann::json to_json() const override {
    if (!compact_json_.is_null()) return compact_json_;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : components_) comps.push_back(c->to_json());
    return {{"family", "mixture"}, {"weights", weights_}, {"components", comps}};
  }

 private:
  // ---- packed plan: every component i.i.d. or finite-order Markov ----------
  void build_packed_plan() {
    const std::size_t k = alphabet_.size();
    packed_ = true;
    max_order_ = 0;
    std::vector<const std::vector<double>*> row_src(components_.size());
    std::vector<const std::vector<double>*> init_src(components_.size());
    order_of_.assign(components_.size(), 0);
    static const std::vector<double> kEmptyInit{1.0};
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (auto iid = dynamic_cast<const IIDMeasure*>(components_[i].get())) {
        order_of_[i] = 0;
        row_src[i] = &iid->probs();
        init_src[i] = &kEmptyInit;
      } else if (auto mk = dynamic_cast<const MarkovMeasure*>(components_[i].get())) {
        order_of_[i] = mk->order();
        row_src[i] = &mk->rows();
        init_src[i] = &mk->initial_block();
        max_order_ = std::max(max_order_, mk->order());
      } else {
        packed_ = false;
        break;
      }
    }
    if (!packed_) return;
    orders_.clear();
    for (int o : order_of_)
      if (std::find(orders_.begin(), orders_.end(), o) == orders_.end()) orders_.push_back(o);
    std::sort(orders_.begin(), orders_.end());
    order_slot_.assign(components_.size(), 0);
    for (std::size_t i = 0; i < components_.size(); ++i)
      order_slot_[i] = static_cast<std::size_t>(std::find(orders_.begin(), orders_.end(), order_of_[i]) - orders_.begin());
    row_offset_.assign(components_.size(), 0);
    init_offset_.assign(components_.size(), 0);
    rows_flat_.clear();
    init_flat_.clear();
    for (std::size_t i = 0; i < components_.size(); ++i) {
      row_offset_[i] = rows_flat_.size();
      rows_flat_.insert(rows_flat_.end(), row_src[i]->begin(), row_src[i]->end());
      init_offset_[i] = init_flat_.size();
      init_flat_.insert(init_flat_.end(), init_src[i]->begin(), init_src[i]->end());
    }
    ctx_size_.assign(orders_.size(), 1);
    for (std::size_t g = 0; g < orders_.size(); ++g)
      for (int i = 0; i < orders_[g]; ++i) ctx_size_[g] *= k;
  }

  // Marginal next-symbol mass inside the initial block of an order-`order`
  // component: prefix of `pos` symbols encoded as `block`.
  static void block_marginal(const double* init, std::size_t k, int order, std::size_t block, int pos, double* out) {
    std::size_t suffix = 1;
    for (int i = 0; i < order - pos; ++i) suffix *= k;
    const std::size_t sub = suffix / k;
    double denom = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      double mass = 0.0;
      const double* lo = init + block * suffix + s * sub;
      for (std::size_t t = 0; t < sub; ++t) mass += lo[t];
      out[s] = mass;
      denom += mass;
    }
    if (denom > 0.0)
      for (std::size_t s = 0; s < k; ++s) out[s] /= denom;
    else
      for (std::size_t s = 0; s < k; ++s) out[s] = 1.0 / static_cast<double>(k);  // impossible prefix
  }

  struct PackedScorer : Scorer {
    const MixturePredictor* m;
    std::vector<double> w;
    std::vector<std::size_t> ctx;  // one rolling context per distinct order
    std::size_t block = 0;         // history prefix while pos < max_order
    int pos = 0;
    bool dead = false;

    explicit PackedScorer(const MixturePredictor* mm) : m(mm), w(mm->weights_), ctx(mm->orders_.size(), 0) {}

    double comp_prob(std::size_t i, Symbol s) const {
      const std::size_t k = m->alphabet_.size();
      int o = m->order_of_[i];
      if (pos >= o) return m->rows_flat_[m->row_offset_[i] + ctx[m->order_slot_[i]] * k + s];
      std::array<double, Alphabet::kMaxSymbols> p{};
      block_marginal(m->init_flat_.data() + m->init_offset_[i], k, o, block, pos, p.data());
      return p[s];
    }

    ConditionalDistribution conditional() const override {
      if (dead) return ConditionalDistribution::uniform(m->alphabet_);
      const std::size_t k = m->alphabet_.size();
      std::array<double, Alphabet::kMaxSymbols> acc{};
      if (pos >= m->max_order_) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          const double* row = m->rows_flat_.data() + m->row_offset_[i] + ctx[m->order_slot_[i]] * k;
          for (std::size_t s = 0; s < k; ++s) acc[s] += w[i] * row[s];
        }
      } else {
        for (std::size_t i = 0; i < w.size(); ++i)
          for (std::size_t s = 0; s < k; ++s) acc[s] += w[i] * comp_prob(i, static_cast<Symbol>(s));
      }
      double total = 0.0;
      for (std::size_t s = 0; s < k; ++s) total += acc[s];
      for (std::size_t s = 0; s < k; ++s) acc[s] /= total;  // guards drift; total == 1 up to rounding
      return ConditionalDistribution(m->alphabet_, std::span<const double>(acc.data(), k));
    }

    void push(Symbol s) override {
      if (dead) {
        ++pos;
        return;
      }
      const std::size_t k = m->alphabet_.size();
      double total = 0.0;
      if (pos >= m->max_order_) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          w[i] *= m->rows_flat_[m->row_offset_[i] + ctx[m->order_slot_[i]] * k + s];
          total += w[i];
        }
      } else {
        for (std::size_t i = 0; i < w.size(); ++i) {
          w[i] *= comp_prob(i, s);
          total += w[i];
        }
      }
      if (total <= 0.0) {
        dead = true;
        joint_ = kNegInf;
        ++pos;
        return;
      }
      double inv = 1.0 / total;
      for (auto& x : w) x *= inv;
      joint_ += std::log2(total);
      for (std::size_t g = 0; g < ctx.size(); ++g) {
        std::size_t n_ctx = m->ctx_size_[g];
        if (m->orders_[g] == 0) continue;
        if (pos < m->orders_[g])
          ctx[g] = ctx[g] * k + s;  // still filling the window
        else
          ctx[g] = (ctx[g] % (n_ctx / k)) * k + s;
      }
      if (pos < m->max_order_) block = block * k + s;
      ++pos;
    }

    std::unique_ptr<Scorer> clone() const override { return std::make_unique<PackedScorer>(*this); }
  };

  struct GenericScorer : Scorer {
    const MixturePredictor* m;
    std::vector<std::unique_ptr<Scorer>> cs;
    std::vector<double> w;
    bool dead = false;

    explicit GenericScorer(const MixturePredictor* mm) : m(mm), w(mm->weights_) {
      cs.reserve(mm->components_.size());
      for (const auto& c : mm->components_) cs.push_back(c->make_scorer());
    }
    GenericScorer(const GenericScorer& o) : m(o.m), w(o.w), dead(o.dead) {
      joint_ = o.joint_;
      cs.reserve(o.cs.size());
      for (const auto& s : o.cs) cs.push_back(s->clone());
    }

    ConditionalDistribution conditional() const override {
      if (dead) return ConditionalDistribution::uniform(m->alphabet_);
      const std::size_t k = m->alphabet_.size();
      std::array<double, Alphabet::kMaxSymbols> acc{};
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (w[i] == 0.0) continue;
        auto cd = cs[i]->conditional();
        for (std::size_t s = 0; s < k; ++s) acc[s] += w[i] * cd.prob(s);
      }
      double total = 0.0;
      for (std::size_t s = 0; s < k; ++s) total += acc[s];
      for (std::size_t s = 0; s < k; ++s) acc[s] /= total;
      return ConditionalDistribution(m->alphabet_, std::span<const double>(acc.data(), k));
    }

    void push(Symbol s) override {
      if (dead) return;
      double total = 0.0;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        if (w[i] == 0.0) {
          cs[i]->push(s);
          continue;
        }
        double before = cs[i]->log2_joint();
        cs[i]->push(s);
        double after = cs[i]->log2_joint();
        double p = std::isinf(after) ? 0.0 : std::exp2(after - before);
        w[i] *= p;
        total += w[i];
      }
      if (total <= 0.0) {
        dead = true;
        joint_ = kNegInf;
        return;
      }
      double inv = 1.0 / total;
      for (auto& x : w) x *= inv;
      joint_ += std::log2(total);
    }

    std::unique_ptr<Scorer> clone() const override { return std::make_unique<GenericScorer>(*this); }
  };

  Alphabet alphabet_ = Alphabet::binary();
  std::vector<MeasurePtr> components_;
  std::vector<double> weights_;
  nlohmann::json compact_json_;

  bool packed_ = false;
  int max_order_ = 0;
  std::vector<int> order_of_;
  std::vector<int> orders_;
  std::vector<std::size_t> order_slot_;
  std::vector<std::size_t> ctx_size_;
  std::vector<std::size_t> row_offset_, init_offset_;
  std::vector<double> rows_flat_, init_flat_;
};

inline std::shared_ptr<MixturePredictor> make_mixture(std::vector<MeasurePtr> comps, std::vector<double> weights) {
  return std::make_shared<MixturePredictor>(std::move(comps), std::move(weights));
}

// ---- rational parameter grids -----------------------------------------------

// All probability vectors over k symbols whose entries are multiples of 1/d.
inline std::vector<std::vector<double>> rational_simplex_grid(std::size_t k, int d) {
  std::vector<std::vector<double>> out;
  std::vector<int> parts(k, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == k) {
      parts[i] = left;
      std::vector<double> v(k);
      for (std::size_t j = 0; j < k; ++j) v[j] = static_cast<double>(parts[j]) / static_cast<double>(d);
      out.push_back(std::move(v));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      parts[i] = c;
      self(self, i + 1, left - c);
    }
  };
  rec(rec, 0, d);
  return out;
}

struct GridBuildStats {
  std::size_t component_count = 0;
  std::size_t stationary_fallbacks = 0;  // components whose context chain had no reachable stationary law
};

// Uniform mixture over every order-`order` Markov measure whose conditional
// parameters lie on the 1/d grid. Rows with zero entries are allowed; such
// components simply never dominate off-support sequences. Components get a
// stationary initial block when power iteration reaches one, and a uniform
// initial block otherwise (recorded in stats).
inline std::shared_ptr<MixturePredictor> rational_markov_grid(const Alphabet& a, int order, int d,
                                                              GridBuildStats* stats = nullptr,
                                                              std::size_t max_components = (1u << 16)) {
  if (d < 1) throw std::invalid_argument("grid: denominator must be >= 1");
  const std::size_t k = a.size();
  std::size_t n_ctx = 1;
  for (int i = 0; i < order; ++i) n_ctx *= k;
  auto rows_menu = rational_simplex_grid(k, d);
  double count_log2 = static_cast<double>(n_ctx) * std::log2(static_cast<double>(rows_menu.size()));
  if (count_log2 > std::log2(static_cast<double>(max_components)))
    throw BudgetExceeded("grid: " + std::to_string(rows_menu.size()) + "^" + std::to_string(n_ctx) +
                         " components exceed the configured cap of " + std::to_string(max_components));

  std::vector<MeasurePtr> comps;
  std::vector<std::size_t> pick(n_ctx, 0);
  GridBuildStats local;
  for (;;) {
    std::vector<double> rows(n_ctx * k);
    for (std::size_t c = 0; c < n_ctx; ++c)
      for (std::size_t s = 0; s < k; ++s) rows[c * k + s] = rows_menu[pick[c]][s];
    if (order == 0) {
      comps.push_back(std::make_shared<IIDMeasure>(a, std::vector<double>(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k))));
    } else {
      bool failed = false;
      auto init = MarkovMeasure::solve_stationary(a, order, rows, &failed, 5000);
      if (failed) ++local.stationary_fallbacks;
      comps.push_back(std::make_shared<MarkovMeasure>(a, order, std::move(rows),
                                                      failed ? MarkovMeasure::InitialKind::kUniform
                                                             : MarkovMeasure::InitialKind::kExplicit,
                                                      failed ? std::vector<double>{} : std::move(init)));
    }
    std::size_t i = 0;
    while (i < n_ctx && ++pick[i] == rows_menu.size()) pick[i++] = 0;
    if (i == n_ctx) break;
  }
  local.component_count = comps.size();
  if (stats) *stats = local;
  std::vector<double> weights(comps.size(), 1.0 / static_cast<double>(comps.size()));
  nlohmann::json compact = {{"family", "markov_grid"}, {"alphabet", a.labels()}, {"order", order}, {"denominator", d}};
  return std::make_shared<MixturePredictor>(std::move(comps), std::move(weights), std::move(compact));
}

// Grids of all orders 0..max_order mixed together; order o carries total
// weight proportional to 1/(o+1)^2, split uniformly inside the order.
inline std::shared_ptr<MixturePredictor> multi_order_grid(const Alphabet& a, int max_order, int d,
                                                          GridBuildStats* stats = nullptr,
                                                          std::size_t max_components = (1u << 16)) {
  std::vector<MeasurePtr> comps;
  std::vector<double> weights;
  double norm = 0.0;
  for (int o = 0; o <= max_order; ++o) norm += 1.0 / ((o + 1.0) * (o + 1.0));
  GridBuildStats total;
  for (int o = 0; o <= max_order; ++o) {
    GridBuildStats s;
    auto grid = rational_markov_grid(a, o, d, &s, max_components);
    total.component_count += s.component_count;
    total.stationary_fallbacks += s.stationary_fallbacks;
    double share = (1.0 / ((o + 1.0) * (o + 1.0))) / norm / static_cast<double>(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      comps.push_back(grid->component(i));
      weights.push_back(share);
    }
  }
  if (stats) *stats = total;
  // Nudge the weights onto an exact unit sum (they already are up to rounding).
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (auto& w : weights) w /= sum;
  nlohmann::json compact = {{"family", "multi_order_grid"}, {"alphabet", a.labels()}, {"max_order", max_order}, {"denominator", d}};
  return std::make_shared<MixturePredictor>(std::move(comps), std::move(weights), std::move(compact));
}

}  // namespace seqpred
