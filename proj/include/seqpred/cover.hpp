#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqpred/divergence.hpp"
#include "seqpred/mixture.hpp"
#include "seqpred/process.hpp"

namespace seqpred {

// Weight sequences used across cover levels and greedy picks. The inverse
// square scheme sums to exactly 1 over all of N; the geometric one does too,
// but decays much faster, which shows up in the diagnostic bound.
enum class WeightScheme { kInverseSquare, kGeometric };

inline constexpr double kBaselNormalizer = 0.6079271018540267;  // 6/pi^2

inline double cover_weight(WeightScheme s, double k) {
  return s == WeightScheme::kInverseSquare ? kBaselNormalizer / (k * k) : std::exp2(-k);
}

inline double neg_log2_cover_weight(WeightScheme s, double k) {
  return s == WeightScheme::kInverseSquare ? 2.0 * std::log2(k) - std::log2(kBaselNormalizer) : k;
}

// Pool member together with its designated estimator ("parent"): the measure
// that enters the final mixture on this member's behalf. parent_index points
// into the same pool; self-parents are the common case.
struct PoolEntry {
  MeasurePtr measure;
  std::size_t parent_index = 0;
};

// Per-horizon audit record. Leaves of X^n are indexed lexicographically
// (first symbol most significant).
struct CoverLevel {
  int n = 0;
  // per pool member
  std::vector<std::size_t> u_size, v_size, t_size;
  std::vector<double> mu_outside_u;  // mu_i(X^n \ U_i); Markov-inequality material
  std::vector<double> mu_outside_v;  // mu_i(X^n \ V_i); log-ratio tail mass
  std::vector<double> mu_outside_t;  // mu_i(X^n \ T_i); reported o(1) trend
  std::vector<double> delta;
  // greedy cover
  std::vector<std::size_t> picks;          // selected pool indices, in pick order
  std::vector<double> masses;              // m^n_k: rho-mass newly covered by pick k
  std::vector<std::uint32_t> first_cover;  // per leaf: 1-based ordinal of the covering pick, 0 = uncovered
  double rho_covered = 0.0;
};

struct ParentCoverageEvent {
  std::size_t pool_index = 0;
  int n = 0;            // first horizon at which the parent ruled out a mu-possible prefix
  std::string witness;  // that prefix
};

using DeltaRule = std::function<double(int n, double running_max_dn)>;

inline double default_delta_rule(int n, double running_max_dn) {
  return std::sqrt(static_cast<double>(n) * std::max(1.0, running_max_dn));
}

// Finite-horizon typical-set cover. For each n <= horizon and pool member mu:
//   U = sequences where mu(x) >= rho(x)/n,
//   V = sequences where the parent keeps up with mu to within 2^-delta_n(mu),
//   T = U and V;
// a greedy pass then covers rho-mass with the T sets (ties to the smallest
// pool index, stop at zero gain), and level n contributes
// sum over picks k of w_k * parent(pick k). The final predictor is
// 1/2 * uniform-iid + 1/2 * sum over n of w_n * (level n contribution),
// truncated at the horizon and renormalized.
class CoverConstruction {
 public:
  std::vector<PoolEntry> pool;
  MeasurePtr rho;
  MeasurePtr gamma;  // uniform i.i.d. regularizer
  int horizon = 0;
  WeightScheme scheme = WeightScheme::kInverseSquare;
  std::vector<CoverLevel> levels;                       // index n-1
  std::vector<std::vector<DivergenceValue>> dn_parent;  // [pool][m-1]: d_m(mu, parent)
  std::vector<ParentCoverageEvent> parent_events;

  double weight(double k) const { return cover_weight(scheme, k); }

  // Raw mixture coefficient each pool index receives as a parent, before
  // normalization; the gamma component always carries raw weight 1/2.
  std::vector<double> raw_parent_coefficients() const {
    std::vector<double> coeff(pool.size(), 0.0);
    for (const auto& lvl : levels)
      for (std::size_t k = 0; k < lvl.picks.size(); ++k)
        coeff[pool[lvl.picks[k]].parent_index] += 0.5 * weight(lvl.n) * weight(static_cast<double>(k + 1));
    return coeff;
  }

  // Mass lost to truncating the over-n sum at the horizon (and to levels
  // whose greedy pass stopped early).
  double truncation_deficit() const {
    double total = 0.5;
    for (double c : raw_parent_coefficients()) total += c;
    return 1.0 - total;
  }

  std::shared_ptr<MixturePredictor> predictor() const {
    auto raw = raw_parent_coefficients();
    double total = 0.5;
    for (double c : raw) total += c;
    std::vector<MeasurePtr> comps{gamma};
    std::vector<double> weights{0.5 / total};
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (raw[i] <= 0.0) continue;
      comps.push_back(pool[i].measure);
      weights.push_back(raw[i] / total);
    }
    return std::make_shared<MixturePredictor>(std::move(comps), std::move(weights));
  }

  // Level-n sub-measure evaluated on a prefix: sum over picks of w_k * parent.
  double nu_n_linear(int n, const History& x) const {
    const auto& lvl = levels.at(static_cast<std::size_t>(n - 1));
    double acc = 0.0;
    for (std::size_t k = 0; k < lvl.picks.size(); ++k) {
      const auto& parent = pool[pool[lvl.picks[k]].parent_index].measure;
      acc += weight(static_cast<double>(k + 1)) * parent->log_prob(x).prob();
    }
    return acc;
  }

  nlohmann::json audit_json() const {
    nlohmann::json pool_json = nlohmann::json::array();
    for (const auto& e : pool) pool_json.push_back({{"measure", e.measure->to_json()}, {"parent_index", e.parent_index}});
    nlohmann::json level_json = nlohmann::json::array();
    for (const auto& lvl : levels) {
      level_json.push_back({{"n", lvl.n},
                            {"u_size", lvl.u_size},
                            {"v_size", lvl.v_size},
                            {"t_size", lvl.t_size},
                            {"mu_outside_u", lvl.mu_outside_u},
                            {"mu_outside_v", lvl.mu_outside_v},
                            {"mu_outside_t", lvl.mu_outside_t},
                            {"delta", lvl.delta},
                            {"picks", lvl.picks},
                            {"masses", lvl.masses},
                            {"rho_covered", lvl.rho_covered}});
    }
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : parent_events)
      events.push_back({{"pool_index", e.pool_index}, {"n", e.n}, {"witness", e.witness}});
    auto raw = raw_parent_coefficients();
    nlohmann::json final_weights = {{"gamma", 0.5}};
    nlohmann::json parents = nlohmann::json::object();
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (raw[i] > 0.0) parents[std::to_string(i)] = raw[i];
    final_weights["parents"] = std::move(parents);
    return {{"scheme", scheme == WeightScheme::kInverseSquare ? "inverse_square" : "geometric"},
            {"horizon", horizon},
            {"rho", rho->to_json()},
            {"pool", std::move(pool_json)},
            {"levels", std::move(level_json)},
            {"parent_zero_coverage_events", std::move(events)},
            {"raw_weights", std::move(final_weights)},
            {"truncation_deficit", truncation_deficit()}};
  }
};

inline CoverConstruction build_cover_construction(std::vector<PoolEntry> pool, MeasurePtr rho, int horizon,
                                                  WeightScheme scheme = WeightScheme::kInverseSquare,
                                                  DeltaRule delta_rule = {},
                                                  int budget_log2 = kDefaultBudgetLog2) {
  if (pool.empty()) throw std::invalid_argument("cover: empty pool");
  if (horizon < 1) throw std::invalid_argument("cover: horizon must be >= 1");
  const Alphabet& a = pool[0].measure->alphabet();
  for (const auto& e : pool) {
    if (e.parent_index >= pool.size()) throw std::invalid_argument("cover: parent index out of range");
    if (e.measure->alphabet() != a) throw std::invalid_argument("cover: pool alphabet mismatch");
  }
  if (rho->alphabet() != a) throw std::invalid_argument("cover: rho alphabet mismatch");
  check_enumeration_budget(a.size(), horizon, budget_log2);
  if (!delta_rule) delta_rule = default_delta_rule;

  CoverConstruction cc;
  cc.pool = std::move(pool);
  cc.rho = std::move(rho);
  cc.gamma = make_uniform_iid(a);
  cc.horizon = horizon;
  cc.scheme = scheme;

  const std::size_t P = cc.pool.size();
  cc.dn_parent.resize(P);
  for (std::size_t i = 0; i < P; ++i) {
    cc.dn_parent[i] =
        exact_dn_all(*cc.pool[i].measure, *cc.pool[cc.pool[i].parent_index].measure, horizon, budget_log2);
    for (int m = 1; m <= horizon; ++m) {
      const auto& v = cc.dn_parent[i][static_cast<std::size_t>(m - 1)];
      if (v.is_infinite()) {
        cc.parent_events.push_back({i, m, v.infinite_witness});
        break;  // stays infinite for every larger m
      }
    }
  }

  const std::size_t k = a.size();
  for (int n = 1; n <= horizon; ++n) {
    std::size_t n_leaves = 1;
    for (int i = 0; i < n; ++i) n_leaves *= k;

    // joint masses at the leaves, pool members first, rho last
    std::vector<std::vector<double>> mass(P + 1);
    for (auto& v : mass) v.reserve(n_leaves);
    std::vector<const ProcessMeasure*> ms;
    for (const auto& e : cc.pool) ms.push_back(e.measure.get());
    ms.push_back(cc.rho.get());
    walk_prefix_tree(a, ms, n, budget_log2,
                     [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                       if (prefix.size() != static_cast<std::size_t>(n)) return;
                       for (std::size_t i = 0; i <= P; ++i) mass[i].push_back(std::exp2(sc[i]->log2_joint()));
                     });
    const std::vector<double>& rho_mass = mass[P];

    CoverLevel lvl;
    lvl.n = n;
    lvl.u_size.resize(P);
    lvl.v_size.resize(P);
    lvl.t_size.resize(P);
    lvl.mu_outside_u.resize(P);
    lvl.mu_outside_v.resize(P);
    lvl.mu_outside_t.resize(P);
    lvl.delta.resize(P);
    std::vector<std::vector<char>> t_mask(P, std::vector<char>(n_leaves, 0));
    for (std::size_t i = 0; i < P; ++i) {
      double running_max = 0.0;
      for (int m = 1; m <= n; ++m) {
        const auto& v = cc.dn_parent[i][static_cast<std::size_t>(m - 1)];
        if (!v.is_infinite()) running_max = std::max(running_max, v.bits);
      }
      double delta = delta_rule(n, running_max);
      lvl.delta[i] = delta;
      const double v_factor = std::exp2(-delta);
      const std::vector<double>& mu = mass[i];
      const std::vector<double>& parent = mass[cc.pool[i].parent_index];
      for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
        bool in_u = static_cast<double>(n) * mu[leaf] >= rho_mass[leaf];
        bool in_v = parent[leaf] >= v_factor * mu[leaf];
        if (in_u) ++lvl.u_size[i];
        if (in_v) ++lvl.v_size[i];
        if (in_u && in_v) {
          ++lvl.t_size[i];
          t_mask[i][leaf] = 1;
        } else {
          lvl.mu_outside_t[i] += mu[leaf];
        }
        if (!in_u) lvl.mu_outside_u[i] += mu[leaf];
        if (!in_v) lvl.mu_outside_v[i] += mu[leaf];
      }
    }

    std::vector<char> covered(n_leaves, 0);
    lvl.first_cover.assign(n_leaves, 0);
    for (std::uint32_t pick = 1;; ++pick) {
      double best_gain = 0.0;
      std::size_t best_i = P;
      for (std::size_t i = 0; i < P; ++i) {
        double gain = 0.0;
        for (std::size_t leaf = 0; leaf < n_leaves; ++leaf)
          if (t_mask[i][leaf] && !covered[leaf]) gain += rho_mass[leaf];
        if (gain > best_gain) {
          best_gain = gain;
          best_i = i;
        }
      }
      if (best_i == P) break;  // zero residual gain everywhere
      lvl.picks.push_back(best_i);
      lvl.masses.push_back(best_gain);
      for (std::size_t leaf = 0; leaf < n_leaves; ++leaf) {
        if (t_mask[best_i][leaf] && !covered[leaf]) {
          covered[leaf] = 1;
          lvl.first_cover[leaf] = pick;
        }
      }
    }
    for (std::size_t leaf = 0; leaf < n_leaves; ++leaf)
      if (covered[leaf]) lvl.rho_covered += rho_mass[leaf];

    cc.levels.push_back(std::move(lvl));
  }
  return cc;
}

// ---- diagnostic prediction bound ---------------------------------------------

// Additive overhead the construction is predicted to stay within:
//   d_n(mu, nu) <= d_n(mu, parent) + c(n),
// with c(n) = -log2(w_n * w_j / (2n)) + delta_n(mu) evaluated at j = 1/eps
// and eps = 2^-sqrt(n). Under inverse-square weights this is
//   1 + 3 log2 n + 2 sqrt(n) - 2 log2(6/pi^2) + delta_n(mu).
inline double cover_diagnostic_c(WeightScheme s, int n, double delta_n) {
  double j = std::exp2(std::sqrt(static_cast<double>(n)));
  return 1.0 + std::log2(static_cast<double>(n)) + neg_log2_cover_weight(s, static_cast<double>(n)) +
         neg_log2_cover_weight(s, j) + delta_n;
}

struct CoverDiagnosticRow {
  std::size_t pool_index = 0;
  int n = 0;
  double dn_mu_nu = 0.0;
  double dn_mu_parent = 0.0;
  double delta_n = 0.0;
  double c_primary = 0.0;      // c(n) under the construction's weight scheme
  double c_alternative = 0.0;  // c(n) under the other scheme, reported unasserted
  bool holds = false;          // dn_mu_nu <= dn_mu_parent + c_primary
};

inline std::vector<CoverDiagnosticRow> cover_diagnostics(const CoverConstruction& cc,
                                                         int budget_log2 = kDefaultBudgetLog2) {
  auto nu = cc.predictor();
  WeightScheme other =
      cc.scheme == WeightScheme::kInverseSquare ? WeightScheme::kGeometric : WeightScheme::kInverseSquare;
  std::vector<CoverDiagnosticRow> rows;
  for (std::size_t i = 0; i < cc.pool.size(); ++i) {
    auto dn_nu = exact_dn_all(*cc.pool[i].measure, *nu, cc.horizon, budget_log2);
    for (int n = 1; n <= cc.horizon; ++n) {
      CoverDiagnosticRow r;
      r.pool_index = i;
      r.n = n;
      r.dn_mu_nu = dn_nu[static_cast<std::size_t>(n - 1)].bits;
      r.dn_mu_parent = cc.dn_parent[i][static_cast<std::size_t>(n - 1)].bits;
      r.delta_n = cc.levels[static_cast<std::size_t>(n - 1)].delta[i];
      r.c_primary = cover_diagnostic_c(cc.scheme, n, r.delta_n);
      r.c_alternative = cover_diagnostic_c(other, n, r.delta_n);
      r.holds = r.dn_mu_nu <= r.dn_mu_parent + r.c_primary + 1e-9;
      rows.push_back(r);
    }
  }
  return rows;
}

inline nlohmann::json cover_diagnostics_json(const std::vector<CoverDiagnosticRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"pool_index", r.pool_index},
                   {"n", r.n},
                   {"dn_mu_nu", r.dn_mu_nu},
                   {"dn_mu_parent", r.dn_mu_parent},
                   {"delta_n", r.delta_n},
                   {"c_primary", r.c_primary},
                   {"c_alternative", r.c_alternative},
                   {"holds", r.holds}});
  }
  return out;
}

// ---- regularizer replacement ---------------------------------------------------

// Swaps the uniform i.i.d. regularizer for a convex combination of pool
// measures. For each n, every sequence the pool can produce votes for a pool
// measure achieving at least half the pool supremum on it (the argmax, ties
// to the smallest index); gamma'_n averages those votes, and
// gamma' = sum over n of w_n gamma'_n.
struct RegularizerReplacement {
  std::vector<MeasurePtr> pool_measures;           // copies of the pool, for audit evaluation
  std::vector<std::vector<double>> level_weights;  // [n-1][pool index], each row sums to 1
  std::vector<std::size_t> a_n_size;               // sequences with nonzero pool supremum
  double gamma_prime_raw_total = 0.0;              // sum of w_n over built levels (< 1 at finite horizon)
  std::shared_ptr<MixturePredictor> gamma_prime;   // normalized gamma'
  std::shared_ptr<MixturePredictor> predictor;     // nu with gamma replaced by gamma', renormalized
  double deficit = 0.0;                            // 1 - raw mass of the replaced nu

  // Raw (unnormalized) gamma'(x) = sum over n of w_n gamma'_n(x); the Step-r
  // audit inequality gamma'(x) >= 1/2 w_n |X|^-n mu(x) is stated for this.
  double gamma_prime_raw(const History& x, WeightScheme scheme) const {
    double acc = 0.0;
    for (std::size_t lvl = 0; lvl < level_weights.size(); ++lvl) {
      double level = 0.0;
      for (std::size_t i = 0; i < pool_measures.size(); ++i) {
        if (level_weights[lvl][i] == 0.0) continue;
        level += level_weights[lvl][i] * pool_measures[i]->log_prob(x).prob();
      }
      acc += cover_weight(scheme, static_cast<double>(lvl + 1)) * level;
    }
    return acc;
  }
};

inline RegularizerReplacement replace_regularizer(const CoverConstruction& cc,
                                                  int budget_log2 = kDefaultBudgetLog2) {
  const Alphabet& a = cc.pool[0].measure->alphabet();
  const std::size_t P = cc.pool.size();
  RegularizerReplacement rr;
  for (const auto& e : cc.pool) rr.pool_measures.push_back(e.measure);

  for (int n = 1; n <= cc.horizon; ++n) {
    std::vector<double> votes(P, 0.0);
    std::size_t a_n = 0;
    std::vector<const ProcessMeasure*> ms;
    for (const auto& e : cc.pool) ms.push_back(e.measure.get());
    walk_prefix_tree(a, ms, n, budget_log2,
                     [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                       if (prefix.size() != static_cast<std::size_t>(n)) return;
                       double best = 0.0;
                       std::size_t best_i = P;
                       for (std::size_t i = 0; i < P; ++i) {
                         double m = std::exp2(sc[i]->log2_joint());
                         if (m > best) {
                           best = m;
                           best_i = i;
                         }
                       }
                       if (best_i == P) return;  // no pool measure reaches this sequence
                       ++a_n;
                       votes[best_i] += 1.0;
                     });
    if (a_n == 0)
      throw std::runtime_error("replace_regularizer: pool assigns zero mass to every sequence of length " +
                               std::to_string(n));
    for (auto& v : votes) v /= static_cast<double>(a_n);
    rr.level_weights.push_back(std::move(votes));
    rr.a_n_size.push_back(a_n);
    rr.gamma_prime_raw_total += cc.weight(n);
  }

  // normalized gamma' as a standalone mixture
  {
    std::vector<double> coeff(P, 0.0);
    for (std::size_t lvl = 0; lvl < rr.level_weights.size(); ++lvl)
      for (std::size_t i = 0; i < P; ++i)
        coeff[i] += cc.weight(static_cast<double>(lvl + 1)) * rr.level_weights[lvl][i];
    std::vector<MeasurePtr> comps;
    std::vector<double> weights;
    for (std::size_t i = 0; i < P; ++i) {
      if (coeff[i] <= 0.0) continue;
      comps.push_back(cc.pool[i].measure);
      weights.push_back(coeff[i] / rr.gamma_prime_raw_total);
    }
    rr.gamma_prime = std::make_shared<MixturePredictor>(std::move(comps), std::move(weights));
  }

  // nu with gamma' in place of gamma: all coefficients land on pool measures
  {
    std::vector<double> coeff(P, 0.0);
    for (std::size_t lvl = 0; lvl < rr.level_weights.size(); ++lvl)
      for (std::size_t i = 0; i < P; ++i)
        coeff[i] += 0.5 * cc.weight(static_cast<double>(lvl + 1)) * rr.level_weights[lvl][i];
    auto parent_raw = cc.raw_parent_coefficients();
    for (std::size_t i = 0; i < P; ++i) coeff[i] += parent_raw[i];
    double total = 0.0;
    for (double c : coeff) total += c;
    rr.deficit = 1.0 - total;
    std::vector<MeasurePtr> comps;
    std::vector<double> weights;
    for (std::size_t i = 0; i < P; ++i) {
      if (coeff[i] <= 0.0) continue;
      comps.push_back(cc.pool[i].measure);
      weights.push_back(coeff[i] / total);
    }
    rr.predictor = std::make_shared<MixturePredictor>(std::move(comps), std::move(weights));
  }
  return rr;
}

}  // namespace seqpred
