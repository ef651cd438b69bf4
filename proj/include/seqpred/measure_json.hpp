#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqpred/biased.hpp"
#include "seqpred/hidden_chain.hpp"
#include "seqpred/measures.hpp"
#include "seqpred/mixture.hpp"
#include "seqpred/process.hpp"
#include "seqpred/sequence_rule.hpp"

namespace seqpred {

// Reconstructs any measure in the library from its to_json() form. JSON is
// the canonical serialization; the CLI string forms below are sugar on top.
inline MeasurePtr parse_measure(const nlohmann::json& j);

namespace detail {

inline Alphabet alphabet_from_json(const nlohmann::json& j) {
  return Alphabet(j.at("alphabet").get<std::vector<std::string>>());
}

inline std::string context_key(const Alphabet& a, int order, std::size_t ctx) {
  std::string out;
  std::vector<Symbol> syms(static_cast<std::size_t>(order));
  for (int i = order - 1; i >= 0; --i) {
    syms[static_cast<std::size_t>(i)] = static_cast<Symbol>(ctx % a.size());
    ctx /= a.size();
  }
  for (Symbol s : syms) out += a.label(s);
  return out;
}

inline MeasurePtr parse_markov(const nlohmann::json& j) {
  Alphabet a = alphabet_from_json(j);
  int order = j.at("order").get<int>();
  if (order < 0) throw std::invalid_argument("markov: negative order");
  const std::size_t k = a.size();
  std::size_t n_ctx = 1;
  for (int i = 0; i < order; ++i) n_ctx *= k;
  std::vector<double> rows(n_ctx * k);
  const auto& rows_json = j.at("rows");
  for (std::size_t c = 0; c < n_ctx; ++c) {
    auto row = rows_json.at(context_key(a, order, c)).get<std::vector<double>>();
    if (row.size() != k) throw std::invalid_argument("markov: row size mismatch");
    for (std::size_t s = 0; s < k; ++s) rows[c * k + s] = row[s];
  }
  auto init_kind = MarkovMeasure::InitialKind::kStationary;
  std::vector<double> init;
  if (j.contains("initial")) {
    const auto& ij = j.at("initial");
    if (ij.is_string()) {
      std::string s = ij.get<std::string>();
      if (s == "stationary")
        init_kind = MarkovMeasure::InitialKind::kStationary;
      else if (s == "uniform")
        init_kind = MarkovMeasure::InitialKind::kUniform;
      else
        throw std::invalid_argument("markov: unknown initial kind: " + s);
    } else {
      init_kind = MarkovMeasure::InitialKind::kExplicit;
      init = ij.get<std::vector<double>>();
    }
  }
  return make_markov(std::move(a), order, std::move(rows), init_kind, std::move(init));
}

inline MeasurePtr parse_deterministic(const nlohmann::json& j) {
  Alphabet a = alphabet_from_json(j);
  if (j.contains("symbols")) {
    std::vector<Symbol> syms;
    for (const auto& lab : j.at("symbols")) {
      auto idx = a.index_of(lab.get<std::string>());
      if (!idx) throw std::invalid_argument("deterministic: symbol not in alphabet: " + lab.get<std::string>());
      syms.push_back(*idx);
    }
    return std::make_shared<DeterministicMeasure>(std::move(a), std::move(syms));
  }
  SequenceRule rule = SequenceRule::from_json(j.at("target"));
  if (a == Alphabet::binary()) return make_deterministic(std::move(rule));
  if (a == Alphabet::marked_binary()) return make_deterministic_marked(std::move(rule));
  throw std::invalid_argument("deterministic: rule-based form needs the binary or marked-binary alphabet");
}

inline MeasurePtr parse_biased(const nlohmann::json& j) {
  SequenceRule rule = SequenceRule::from_json(j.at("target"));
  std::string schedule = j.at("schedule").get<std::string>();
  if (schedule == "sharpening") return make_sharpening_biased(std::move(rule));
  if (schedule == "constant") return make_constant_biased(std::move(rule), j.value("p", 2.0 / 3.0));
  throw std::invalid_argument("biased_to_sequence: unknown schedule: " + schedule);
}

inline MeasurePtr parse_mixture(const nlohmann::json& j) {
  std::vector<MeasurePtr> comps;
  for (const auto& cj : j.at("components")) comps.push_back(parse_measure(cj));
  return make_mixture(std::move(comps), j.at("weights").get<std::vector<double>>());
}

}  // namespace detail

inline MeasurePtr parse_measure(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "iid")
    return std::make_shared<IIDMeasure>(detail::alphabet_from_json(j), j.at("probs").get<std::vector<double>>());
  if (family == "bernoulli") return make_bernoulli(j.at("p").get<double>());
  if (family == "markov") return detail::parse_markov(j);
  if (family == "deterministic") return detail::parse_deterministic(j);
  if (family == "biased_to_sequence") return detail::parse_biased(j);
  if (family == "hidden_chain")
    return make_hidden_chain(SequenceRule::from_json(j.at("target")), j.value("s_max", std::int64_t{80}));
  if (family == "sparse_zeros") return make_sparse_zeros_predictor();
  if (family == "mixture") return detail::parse_mixture(j);
  if (family == "markov_grid")
    return rational_markov_grid(detail::alphabet_from_json(j), j.at("order").get<int>(),
                                j.at("denominator").get<int>());
  if (family == "multi_order_grid")
    return multi_order_grid(detail::alphabet_from_json(j), j.at("max_order").get<int>(),
                            j.at("denominator").get<int>());
  throw std::invalid_argument("unknown measure family: " + family);
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

// CLI shorthand for common measures. Canonical JSON is accepted inline
// (leading '{') or from a file via '@path'. Shorthands:
//   bernoulli:P       binary i.i.d. with P("0") = P
//   uniform:K         uniform i.i.d. over K symbols ("0".."K-1")
//   markov:K:FILE     order-K Markov; FILE holds the canonical JSON
//   det:TSPEC         point mass on the binary target TSPEC
//   gammat:TSPEC      sharpening bias toward TSPEC (target mass 1/(n+1))
//   gammaprimet:TSPEC constant 2/3 bias toward TSPEC (target mass (2/3)^n)
//   hidden:TSPEC[:S]  stationary hidden-chain source for TSPEC, prior truncated at S
//   sparsezeros       the 1/n-zeros predictor
//   grid:K:D          binary order-K Markov grid with denominator D
//   mix:FILE          mixture from canonical JSON in FILE
// TSPEC is "squares", "squares:M", or a 0/1 pattern repeated periodically.
inline MeasurePtr parse_measure_spec(const std::string& spec) {
  if (!spec.empty() && spec[0] == '{') return parse_measure(nlohmann::json::parse(spec));
  if (!spec.empty() && spec[0] == '@') return parse_measure(load_json_file(spec.substr(1)));
  auto split = [&](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    return parts;
  };
  auto parts = split(spec);
  const std::string& head = parts[0];
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (parts.size() < lo + 1 || parts.size() > hi + 1)
      throw std::invalid_argument("malformed measure spec: " + spec);
  };
  if (head == "bernoulli") {
    need(1, 1);
    return make_bernoulli(std::stod(parts[1]));
  }
  if (head == "uniform") {
    need(1, 1);
    return make_uniform_iid(Alphabet::indexed(static_cast<std::size_t>(std::stoul(parts[1]))));
  }
  if (head == "markov") {
    need(2, 2);
    auto m = parse_measure(load_json_file(parts[2]));
    auto mk = std::dynamic_pointer_cast<const MarkovMeasure>(m);
    if (!mk) throw std::invalid_argument("markov spec file does not describe a markov measure: " + parts[2]);
    if (mk->order() != std::stoi(parts[1]))
      throw std::invalid_argument("markov spec order mismatch: expected " + parts[1] + ", file has " +
                                  std::to_string(mk->order()));
    return m;
  }
  if (head == "det") {
    need(1, 2);  // allow "det:squares:M"
    return make_deterministic(SequenceRule::parse_spec(spec.substr(4)));
  }
  if (head == "gammat") {
    need(1, 2);
    return make_sharpening_biased(SequenceRule::parse_spec(spec.substr(7)));
  }
  if (head == "gammaprimet") {
    need(1, 2);
    return make_constant_biased(SequenceRule::parse_spec(spec.substr(12)));
  }
  if (head == "hidden") {
    need(1, 3);
    // "squares[:M]" consumes one extra colon of the TSPEC before an optional
    // trailing truncation bound
    std::size_t tspec_parts = parts.size() > 1 && parts[1] == "squares" && parts.size() > 2 ? 2 : 1;
    std::string tspec = parts[1];
    for (std::size_t i = 2; i < 1 + tspec_parts; ++i) tspec += ":" + parts[i];
    std::int64_t s_max = 80;
    if (parts.size() > 1 + tspec_parts) s_max = std::stoll(parts[1 + tspec_parts]);
    return make_hidden_chain(SequenceRule::parse_spec(tspec), s_max);
  }
  if (head == "sparsezeros") {
    need(0, 0);
    return make_sparse_zeros_predictor();
  }
  if (head == "grid") {
    need(2, 2);
    return rational_markov_grid(Alphabet::binary(), std::stoi(parts[1]), std::stoi(parts[2]));
  }
  if (head == "mix") {
    need(1, 1);
    return parse_measure(load_json_file(parts[1]));
  }
  throw std::invalid_argument("unknown measure spec: " + spec);
}

}  // namespace seqpred
