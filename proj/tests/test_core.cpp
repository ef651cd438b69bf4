#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "seqpred/alphabet.hpp"
#include "seqpred/biased.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/hidden_chain.hpp"
#include "seqpred/logprob.hpp"
#include "seqpred/measures.hpp"
#include "seqpred/process.hpp"
#include "seqpred/rng.hpp"
#include "seqpred/sequence_rule.hpp"

using namespace seqpred;
using Catch::Matchers::WithinAbs;

TEST_CASE("alphabet basics and validation") {
  Alphabet b = Alphabet::binary();
  REQUIRE(b.size() == 2);
  REQUIRE(b.label(0) == "0");
  REQUIRE(b.label(1) == "1");
  REQUIRE(b.index_of("1").value() == 1);
  REQUIRE_FALSE(b.index_of("2").has_value());

  Alphabet m = Alphabet::marked_binary();
  REQUIRE(m.size() == 3);
  REQUIRE(m.label(0) == "a");
  REQUIRE(m.index_of("0").value() == 1);

  Alphabet idx = Alphabet::indexed(4);
  REQUIRE(idx.size() == 4);
  REQUIRE(idx.label(3) == "3");

  REQUIRE_THROWS_AS(Alphabet({"0"}), std::invalid_argument);
  REQUIRE_THROWS_AS(Alphabet({"0", "0"}), std::invalid_argument);
  REQUIRE_THROWS_AS(Alphabet({"0", ""}), std::invalid_argument);
  REQUIRE_THROWS_AS(Alphabet({"0", "1", "2", "3", "4", "5", "6", "7", "8"}), std::invalid_argument);
  REQUIRE(b == Alphabet::binary());
  REQUIRE(b != m);
}

TEST_CASE("history parse, prefix, and bounds") {
  Alphabet b = Alphabet::binary();
  History h = History::parse(b, "0110");
  REQUIRE(h.size() == 4);
  REQUIRE(h[0] == 0);
  REQUIRE(h[1] == 1);
  REQUIRE(h.to_string() == "0110");
  REQUIRE(h.prefix(2).to_string() == "01");
  REQUIRE(h.prefix(0).empty());
  REQUIRE_THROWS_AS(h.prefix(5), std::invalid_argument);
  REQUIRE_THROWS_AS(History::parse(b, "012"), std::invalid_argument);

  History m(Alphabet::marked_binary());
  m.push_back(0);
  m.push_back(2);
  REQUIRE(m.to_string() == "a1");
  REQUIRE_THROWS_AS(m.push_back(3), std::invalid_argument);
  REQUIRE_THROWS_AS(History(b, std::vector<Symbol>{0, 2}), std::invalid_argument);
}

TEST_CASE("conditional distribution validation and queries") {
  Alphabet b = Alphabet::binary();
  std::vector<double> p{0.25, 0.75};
  ConditionalDistribution cd(b, p);
  REQUIRE_THAT(cd.prob(0), WithinAbs(0.25, 0.0));
  REQUIRE_THAT(cd.log2_prob(0), WithinAbs(-2.0, 0.0));
  REQUIRE(cd.min_prob_symbol() == 0);

  std::vector<double> bad_sum{0.25, 0.25};
  REQUIRE_THROWS_AS(ConditionalDistribution(b, bad_sum), std::invalid_argument);
  std::vector<double> neg{-0.25, 1.25};
  REQUIRE_THROWS_AS(ConditionalDistribution(b, neg), std::invalid_argument);
  std::vector<double> short_vec{1.0};
  REQUIRE_THROWS_AS(ConditionalDistribution(b, short_vec), std::invalid_argument);

  auto pm = ConditionalDistribution::point_mass(b, 1);
  REQUIRE(pm.prob(1) == 1.0);
  REQUIRE(pm.prob(0) == 0.0);
  REQUIRE(pm.log2_prob(0) == kNegInf);

  Alphabet m = Alphabet::marked_binary();
  auto u = ConditionalDistribution::uniform(m);
  REQUIRE_THAT(u.prob(2), WithinAbs(1.0 / 3.0, 1e-15));

  // ties in the minimum break toward the smallest index
  std::vector<double> tie{0.2, 0.2, 0.6};
  REQUIRE(ConditionalDistribution(m, tie).min_prob_symbol() == 0);
  std::vector<double> tie2{0.6, 0.2, 0.2};
  REQUIRE(ConditionalDistribution(m, tie2).min_prob_symbol() == 1);
}

TEST_CASE("conditional distribution sampling is inverse-CDF in index order") {
  Alphabet m = Alphabet::marked_binary();
  std::vector<double> p{0.2, 0.3, 0.5};
  ConditionalDistribution cd(m, p);
  REQUIRE(cd.sample(0.0) == 0);
  REQUIRE(cd.sample(0.1999) == 0);
  REQUIRE(cd.sample(0.2) == 1);
  REQUIRE(cd.sample(0.4999) == 1);
  REQUIRE(cd.sample(0.5) == 2);
  REQUIRE(cd.sample(0.9999) == 2);

  // empirical frequencies land near the weights
  Rng rng(7);
  std::array<int, 3> count{};
  const int N = 20000;
  for (int i = 0; i < N; ++i) ++count[cd.sample(rng.next_unit())];
  for (int s = 0; s < 3; ++s) REQUIRE_THAT(count[s] / double(N), WithinAbs(p[s], 0.02));
}

TEST_CASE("log-prob helpers") {
  REQUIRE(LogProb::from_prob(0.0).is_zero());
  REQUIRE_THAT(LogProb::from_prob(0.5).log2_value, WithinAbs(-1.0, 0.0));
  REQUIRE_THAT(LogProb::from_prob(0.5).prob(), WithinAbs(0.5, 0.0));
  REQUIRE_THROWS_AS(LogProb::from_prob(-0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(LogProb::from_prob(1.1), std::invalid_argument);

  REQUIRE(log2_sum_exp({}) == kNegInf);
  std::vector<double> all_inf{kNegInf, kNegInf};
  REQUIRE(log2_sum_exp(all_inf) == kNegInf);
  std::vector<double> two_halves{-1.0, -1.0};
  REQUIRE_THAT(log2_sum_exp(two_halves), WithinAbs(0.0, 1e-15));
  std::vector<double> with_zero{-2000.0, -2001.0, kNegInf};
  // direct exp2 would underflow; the max-shift keeps it finite
  REQUIRE_THAT(log2_sum_exp(with_zero), WithinAbs(-2000.0 + std::log2(1.5), 1e-12));
}

TEST_CASE("rng determinism and stream derivation") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    auto va = a.next_u64();
    if (va != b.next_u64()) all_equal = false;
    if (va != c.next_u64()) any_diff = true;
  }
  REQUIRE(all_equal);
  REQUIRE(any_diff);

  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    double x = u.next_unit();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }

  // derived streams differ across indices and match on replay
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 64; ++i) seeds.insert(Rng::derive(5, i));
  REQUIRE(seeds.size() == 64);
  REQUIRE(Rng::derive(5, 3) == Rng::derive(5, 3));
  REQUIRE(Rng::derive(5, 3) != Rng::derive(6, 3));
}

TEST_CASE("scorers satisfy the chain rule and leave no state behind") {
  auto check = [](const ProcessMeasure& m, const std::string& text) {
    History h = History::parse(m.alphabet(), text);
    auto sc = m.make_scorer();
    double acc = 0.0;
    for (Symbol s : h.symbols()) {
      // querying the conditional twice must not disturb the scorer
      auto c1 = sc->conditional();
      auto c2 = sc->conditional();
      for (std::size_t k = 0; k < m.alphabet().size(); ++k) REQUIRE(c1.prob(k) == c2.prob(k));
      acc += c1.log2_prob(s);
      sc->push(s);
    }
    if (std::isinf(acc)) {
      REQUIRE(sc->log2_joint() == kNegInf);
    } else {
      REQUIRE_THAT(sc->log2_joint(), WithinAbs(acc, 1e-12));
    }
    REQUIRE_THAT(m.log_prob(h).log2_value, WithinAbs(sc->log2_joint(), 0.0));
  };

  check(*make_bernoulli(0.3), "01101");
  check(*make_markov(Alphabet::binary(), 1, {0.9, 0.1, 0.2, 0.8}), "011010");
  check(*make_sharpening_biased(SequenceRule::periodic("01")), "0110");
  check(*make_constant_biased(SequenceRule::periodic("01")), "1001");
  check(*make_hidden_chain(SequenceRule::periodic("01")), "a01a0");
  check(*make_sparse_zeros_predictor(), "0111");
}

TEST_CASE("scorer clones evolve independently") {
  auto m = make_markov(Alphabet::binary(), 1, {0.9, 0.1, 0.2, 0.8});
  auto sc = m->make_scorer();
  sc->push(0);
  auto cl = sc->clone();
  cl->push(1);
  sc->push(0);
  REQUIRE(sc->log2_joint() != cl->log2_joint());
  // the clone saw "01", the original "00"
  REQUIRE_THAT(cl->log2_joint(), WithinAbs(m->log_prob(History::parse(m->alphabet(), "01")).log2_value, 1e-12));
  REQUIRE_THAT(sc->log2_joint(), WithinAbs(m->log_prob(History::parse(m->alphabet(), "00")).log2_value, 1e-12));
}

TEST_CASE("prefix tree walk visits every node in lexicographic leaf order") {
  Alphabet b = Alphabet::binary();
  auto mu = make_bernoulli(0.25);
  const ProcessMeasure* ms[1] = {mu.get()};

  std::size_t nodes = 0;
  std::vector<std::string> leaves;
  bool saw_root = false;
  walk_prefix_tree(b, ms, 3, kDefaultBudgetLog2,
                   [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                     ++nodes;
                     if (prefix.empty()) {
                       saw_root = true;
                       REQUIRE(sc[0]->log2_joint() == 0.0);
                     }
                     // joint at every node matches an independent evaluation
                     History h(b, prefix);
                     REQUIRE_THAT(sc[0]->log2_joint(), WithinAbs(mu->log_prob(h).log2_value, 1e-12));
                     if (prefix.size() == 3) leaves.push_back(h.to_string());
                   });
  REQUIRE(saw_root);
  REQUIRE(nodes == 1 + 2 + 4 + 8);
  std::vector<std::string> expect = {"000", "001", "010", "011", "100", "101", "110", "111"};
  REQUIRE(leaves == expect);
}

TEST_CASE("prefix tree walk tracks several measures at once") {
  Alphabet b = Alphabet::binary();
  auto m1 = make_bernoulli(0.5);
  auto m2 = make_markov(b, 1, {0.7, 0.3, 0.4, 0.6});
  const ProcessMeasure* ms[2] = {m1.get(), m2.get()};
  double total1 = 0.0, total2 = 0.0;
  walk_prefix_tree(b, ms, 5, kDefaultBudgetLog2,
                   [&](const std::vector<Symbol>& prefix, std::span<const std::unique_ptr<Scorer>> sc) {
                     if (prefix.size() != 5) return;
                     total1 += std::exp2(sc[0]->log2_joint());
                     total2 += std::exp2(sc[1]->log2_joint());
                   });
  REQUIRE_THAT(total1, WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(total2, WithinAbs(1.0, 1e-12));
}

TEST_CASE("enumeration budget rejects oversized walks") {
  Alphabet b = Alphabet::binary();
  Alphabet m = Alphabet::marked_binary();
  auto mu = make_bernoulli(0.5);
  const ProcessMeasure* ms[1] = {mu.get()};
  REQUIRE_THROWS_AS(walk_prefix_tree(b, ms, 30, kDefaultBudgetLog2, [](auto&, auto) {}), BudgetExceeded);
  REQUIRE_NOTHROW(check_enumeration_budget(2, 24, kDefaultBudgetLog2));
  REQUIRE_THROWS_AS(check_enumeration_budget(2, 25, kDefaultBudgetLog2), BudgetExceeded);
  // 16 ternary symbols cost 16*log2(3) ~ 25.36 bits
  REQUIRE_THROWS_AS(check_enumeration_budget(3, 16, kDefaultBudgetLog2), BudgetExceeded);
  REQUIRE_NOTHROW(check_enumeration_budget(3, 15, kDefaultBudgetLog2));
  REQUIRE(m.size() == 3);
}

TEST_CASE("sequence rules produce the advertised bits") {
  auto alt = SequenceRule::periodic("01");
  REQUIRE(alt.prefix_string(6) == "010101");
  REQUIRE(alt.bit_at(1) == 0);
  REQUIRE(alt.bit_at(2) == 1);
  REQUIRE(SequenceRule::periodic("1").prefix_string(4) == "1111");
  REQUIRE_THROWS_AS(SequenceRule::periodic(""), std::invalid_argument);
  REQUIRE_THROWS_AS(SequenceRule::periodic("02"), std::invalid_argument);

  auto sq = SequenceRule::zeros_at_squares();
  std::set<std::int64_t> squares = {1, 4, 9, 16, 25, 36, 49, 64, 81, 100};
  int zero_count = 0;
  for (std::int64_t i = 1; i <= 100; ++i) {
    int expect = squares.count(i) ? 0 : 1;
    REQUIRE(sq.bit_at(i) == expect);
    if (sq.bit_at(i) == 0) ++zero_count;
  }
  // number of zeros among the first n symbols is floor(sqrt(n))
  REQUIRE(zero_count == 10);

  auto sq2 = SequenceRule::zeros_at_squares_from(2);
  REQUIRE(sq2.bit_at(1) == 1);  // the square 1 is skipped
  REQUIRE(sq2.bit_at(4) == 0);
  REQUIRE(sq2.bit_at(9) == 0);

  auto ex = SequenceRule::explicit_then_hold({0, 1, 1});
  REQUIRE(ex.prefix_string(6) == "011111");
  REQUIRE_THROWS_AS(SequenceRule::explicit_then_hold({}), std::invalid_argument);
  REQUIRE_THROWS_AS(SequenceRule::explicit_then_hold({0, 2}), std::invalid_argument);

  REQUIRE_THROWS_AS(alt.bit_at(0), std::invalid_argument);
}

TEST_CASE("sequence rules round-trip through json and specs") {
  for (const auto& r : {SequenceRule::periodic("011"), SequenceRule::zeros_at_squares(),
                        SequenceRule::zeros_at_squares_from(3), SequenceRule::explicit_then_hold({1, 0, 1})}) {
    auto back = SequenceRule::from_json(r.to_json());
    REQUIRE(back == r);
    REQUIRE(back.prefix_string(20) == r.prefix_string(20));
  }
  REQUIRE(SequenceRule::parse_spec("squares") == SequenceRule::zeros_at_squares());
  REQUIRE(SequenceRule::parse_spec("squares:3") == SequenceRule::zeros_at_squares_from(3));
  REQUIRE(SequenceRule::parse_spec("01") == SequenceRule::periodic("01"));
  REQUIRE_THROWS_AS(SequenceRule::from_json(nlohmann::json{{"kind", "nope"}}), std::invalid_argument);
}

TEST_CASE("sampling is reproducible and follows the measure") {
  auto mu = make_bernoulli(0.25);
  History h1 = sample(*mu, 50, 11);
  History h2 = sample(*mu, 50, 11);
  REQUIRE(h1 == h2);
  History h3 = sample(*mu, 50, 12);
  REQUIRE(!(h1 == h3));

  // long-run frequency of "0" near 0.25
  History big = sample(*mu, 20000, 1);
  int zeros = 0;
  for (Symbol s : big.symbols())
    if (s == 0) ++zeros;
  REQUIRE_THAT(zeros / 20000.0, WithinAbs(0.25, 0.02));

  // continuation keeps the prefix and extends it
  History pre = History::parse(mu->alphabet(), "11");
  History cont = sample_continuation(*mu, pre, 3, 7);
  REQUIRE(cont.size() == 5);
  REQUIRE(cont.prefix(2).to_string() == "11");
}
