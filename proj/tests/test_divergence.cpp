#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "seqpred/biased.hpp"
#include "seqpred/dinf.hpp"
#include "seqpred/divergence.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/format.hpp"
#include "seqpred/hidden_chain.hpp"
#include "seqpred/measures.hpp"
#include "seqpred/mixture.hpp"
#include "seqpred/total_variation.hpp"

using namespace seqpred;
using Catch::Matchers::WithinAbs;

namespace {
MeasurePtr markov_a() { return make_markov(Alphabet::binary(), 1, {0.7, 0.3, 0.4, 0.6}); }
MeasurePtr markov_b() { return make_markov(Alphabet::binary(), 1, {0.2, 0.8, 0.5, 0.5}); }
}  // namespace

TEST_CASE("exact divergence matches the Bernoulli closed form") {
  // 10 * KL(B(3/4) || B(1/2)) = 10 * (1 - H(3/4))
  REQUIRE_THAT(exact_dn(*make_bernoulli(0.75), *make_bernoulli(0.5), 10).bits,
               WithinAbs(1.8872187554086717, 1e-12));
  REQUIRE(exact_dn(*markov_a(), *markov_a(), 8).bits == 0.0);
  REQUIRE(exact_dn(*make_bernoulli(0.3), *make_bernoulli(0.6), 0).bits == 0.0);
  REQUIRE_THROWS_AS(exact_dn(*make_bernoulli(0.3), *make_bernoulli(0.6), -1), std::invalid_argument);
  REQUIRE_THROWS_AS(exact_dn(*make_bernoulli(0.3), *make_uniform_iid(Alphabet::marked_binary()), 2),
                    std::invalid_argument);
}

TEST_CASE("product-form and conditional-sum evaluations agree") {
  auto check = [](const ProcessMeasure& mu, const ProcessMeasure& rho, int n) {
    double a = exact_dn(mu, rho, n).bits;
    double b = exact_dn_stepwise(mu, rho, n).bits;
    REQUIRE_THAT(a, WithinAbs(b, 1e-10));
  };
  check(*make_bernoulli(0.3), *make_bernoulli(0.6), 10);
  check(*markov_a(), *markov_b(), 10);
  check(*make_sharpening_biased(SequenceRule::periodic("01")), *make_bernoulli(0.5), 10);
  check(*make_constant_biased(SequenceRule::periodic("10")), *markov_a(), 10);
  check(*make_mixture({make_bernoulli(0.2), make_bernoulli(0.8)}, {0.5, 0.5}), *make_bernoulli(0.5), 10);
  check(*make_hidden_chain(SequenceRule::periodic("01"), 20), *make_uniform_iid(Alphabet::marked_binary()), 6);
}

TEST_CASE("divergence is nonnegative and nondecreasing in the horizon") {
  auto all = exact_dn_all(*markov_a(), *make_bernoulli(0.5), 10);
  REQUIRE(all.size() == 10);
  double prev = 0.0;
  for (const auto& v : all) {
    REQUIRE(v.bits >= prev - 1e-12);
    prev = v.bits;
  }
  REQUIRE_THAT(all.back().bits, WithinAbs(exact_dn(*markov_a(), *make_bernoulli(0.5), 10).bits, 1e-10));
  REQUIRE_THROWS_AS(exact_dn_all(*markov_a(), *make_bernoulli(0.5), 0), std::invalid_argument);
}

TEST_CASE("infinite divergence carries a witnessing prefix") {
  auto det01 = make_deterministic(SequenceRule::periodic("01"));

  // enumeration route: first prefix in depth-first order the predictor rules out
  auto v = exact_dn(*make_bernoulli(0.5), *det01, 3);
  REQUIRE(v.is_infinite());
  REQUIRE(v.infinite_witness == "00");

  // conditional route: the offending extension at the earliest step
  auto w = exact_dn_stepwise(*make_bernoulli(0.5), *det01, 3);
  REQUIRE(w.is_infinite());
  REQUIRE(w.infinite_witness == "1");

  // point-mass source: walks the target sequence, any n
  auto u = exact_dn(*det01, *make_deterministic(SequenceRule::periodic("00")), 5);
  REQUIRE(u.is_infinite());
  REQUIRE(u.infinite_witness == "01");

  // and stays exact when finite
  auto fine = exact_dn(*det01, *make_bernoulli(0.5), 4096);
  REQUIRE_THAT(fine.bits, WithinAbs(4096.0, 1e-9));
}

TEST_CASE("monte-carlo divergence is seeded, parallel-invariant, and consistent") {
  auto mu = markov_a();
  auto coin = make_bernoulli(0.5);

  auto same = mc_dn(*mu, *mu, 10, 64, 17);
  REQUIRE(same.mean == 0.0);
  REQUIRE(same.std_error == 0.0);

  // i.i.d. pairs have state-independent conditionals: zero-variance estimate
  auto iid = mc_dn(*make_bernoulli(0.7), *make_bernoulli(0.4), 10, 50, 123);
  REQUIRE_THAT(iid.mean, WithinAbs(exact_dn(*make_bernoulli(0.7), *make_bernoulli(0.4), 10).bits, 1e-9));
  REQUIRE(iid.std_error <= 1e-12);

  auto j1 = mc_dn(*mu, *coin, 12, 200, 7, 1);
  auto j4 = mc_dn(*mu, *coin, 12, 200, 7, 4);
  REQUIRE(j1.mean == j4.mean);
  REQUIRE(j1.std_error == j4.std_error);

  auto est = mc_dn(*mu, *coin, 10, 4000, 99);
  REQUIRE(std::abs(est.mean - exact_dn(*mu, *coin, 10).bits) <= 4.0 * est.std_error + 1e-9);
  REQUIRE(est.std_error > 0.0);

  auto inf = mc_dn(*coin, *make_deterministic(SequenceRule::periodic("01")), 5, 100, 3);
  REQUIRE(inf.infinite_samples == 100);
  REQUIRE(std::isinf(inf.mean));

  REQUIRE_THROWS_AS(mc_dn(*mu, *coin, 5, 0, 1), std::invalid_argument);
}

TEST_CASE("per-step loss estimates recover the i.i.d. relative entropy") {
  const double kl = 0.7 * std::log2(0.7 / 0.5) + 0.3 * std::log2(0.3 / 0.5);
  auto ex = kl_loss_exact(*make_bernoulli(0.7), *make_bernoulli(0.5), 12);
  REQUIRE_THAT(ex.value, WithinAbs(kl, 1e-12));
  REQUIRE(ex.argmax_n >= 1);
  REQUIRE(ex.argmax_n <= 12);

  auto mc = kl_loss_mc(*make_bernoulli(0.7), *make_bernoulli(0.5), 12, 100, 5);
  REQUIRE_THAT(mc.value, WithinAbs(kl, 1e-12));
  // every sampled path produces the same per-step KL, so only accumulation
  // rounding is left in the spread
  REQUIRE(mc.std_error <= 1e-9);
  REQUIRE(mc.infinite_samples == 0);

  auto strided = kl_loss_mc(*make_bernoulli(0.7), *make_bernoulli(0.5), 20, 100, 5, 1, 7);
  REQUIRE_THAT(strided.value, WithinAbs(kl, 1e-12));

  auto mkv = kl_loss_mc(*markov_a(), *make_bernoulli(0.5), 16, 1500, 11);
  auto mkv_ex = kl_loss_exact(*markov_a(), *make_bernoulli(0.5), 16);
  REQUIRE(std::abs(mkv.value - mkv_ex.value) <= 5.0 * mkv.std_error + 1e-6);

  auto inf = kl_loss_mc(*make_bernoulli(0.5), *make_deterministic(SequenceRule::periodic("01")), 8, 50, 1);
  REQUIRE(std::isinf(inf.value));
  REQUIRE(inf.infinite_samples == 50);
}

TEST_CASE("worst-case log-ratio distance: exact values, symmetry, triangle") {
  auto half = make_bernoulli(0.5);
  auto quarter = make_bernoulli(0.25);
  auto series = d_inf_series(*half, *quarter, 6);
  for (const auto& v : series) REQUIRE_THAT(v.value, WithinAbs(1.0, 1e-15));
  REQUIRE(series.back().argmax == "000000");

  REQUIRE(d_inf(*markov_a(), *half, 8).value == d_inf(*half, *markov_a(), 8).value);

  double ab = d_inf(*markov_a(), *markov_b(), 8).value;
  double ac = d_inf(*markov_a(), *half, 8).value;
  double cb = d_inf(*half, *markov_b(), 8).value;
  REQUIRE(ab <= ac + cb + 1e-12);

  REQUIRE(d_inf(*markov_a(), *markov_a(), 6).value == 0.0);
  REQUIRE_THROWS_AS(d_inf(*half, *quarter, 0), std::invalid_argument);
}

TEST_CASE("worst-case log-ratio distance flags one-sided impossibilities") {
  auto det01 = make_deterministic(SequenceRule::periodic("01"));
  auto det10 = make_deterministic(SequenceRule::periodic("10"));
  for (const auto& v : d_inf_series(*det01, *det10, 5)) REQUIRE(v.is_infinite());
  REQUIRE(d_inf(*det01, *det01, 7).value == 0.0);
  REQUIRE(d_inf(*make_bernoulli(0.5), *det01, 3).is_infinite());
}

TEST_CASE("markov bound dominates every finite horizon") {
  auto a = make_markov(Alphabet::binary(), 1, {0.7, 0.3, 0.4, 0.6});
  auto b = make_markov(Alphabet::binary(), 1, {0.2, 0.8, 0.5, 0.5});
  const auto* ma = dynamic_cast<const MarkovMeasure*>(a.get());
  const auto* mb = dynamic_cast<const MarkovMeasure*>(b.get());
  auto bound = d_inf_markov_bound(*ma, *mb);

  // independent closed form: stationaries 4/7 and 5/13; worst transition 0.7 vs 0.2
  double i1 = std::max(std::abs(std::log2((4.0 / 7.0) / (5.0 / 13.0))),
                       std::abs(std::log2((3.0 / 7.0) / (8.0 / 13.0))));
  double r = std::log2(0.7 / 0.2);
  REQUIRE_THAT(bound.value, WithinAbs(std::max(i1, r), 1e-12));
  REQUIRE(bound.argmax == "00");

  for (const auto& v : d_inf_series(*a, *b, 10)) REQUIRE(v.value <= bound.value + 1e-12);

  // i.i.d. chains embedded at order 1: bound collapses to the symbol ratio
  auto ia = make_markov(Alphabet::binary(), 1, {0.3, 0.7, 0.3, 0.7});
  auto ib = make_markov(Alphabet::binary(), 1, {0.6, 0.4, 0.6, 0.4});
  auto eq = d_inf_markov_bound(*dynamic_cast<const MarkovMeasure*>(ia.get()),
                               *dynamic_cast<const MarkovMeasure*>(ib.get()));
  REQUIRE_THAT(eq.value, WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(d_inf(*ia, *ib, 8).value, WithinAbs(eq.value, 1e-12));

  auto order2 = make_markov(Alphabet::binary(), 2, {0.9, 0.1, 0.8, 0.2, 0.3, 0.7, 0.6, 0.4},
                            MarkovMeasure::InitialKind::kUniform);
  REQUIRE_THROWS_AS(d_inf_markov_bound(*ma, *dynamic_cast<const MarkovMeasure*>(order2.get())),
                    std::invalid_argument);
}

TEST_CASE("total variation of conditional cylinders") {
  auto half = make_bernoulli(0.5);
  auto quarter = make_bernoulli(0.25);
  History empty(half->alphabet());
  REQUIRE_THAT(tv_conditional(*half, *quarter, empty, 1), WithinAbs(0.25, 1e-15));
  REQUIRE_THAT(tv_conditional(*half, *quarter, empty, 2), WithinAbs(0.3125, 1e-12));
  REQUIRE_THAT(tv_conditional(*half, *make_bernoulli(1.0), empty, 3), WithinAbs(0.875, 1e-12));
  REQUIRE(tv_conditional(*half, *half, empty, 4) == 0.0);
  REQUIRE_THAT(tv_conditional(*half, *quarter, empty, 3), WithinAbs(tv_conditional(*quarter, *half, empty, 3), 1e-15));

  double prev = 0.0;
  for (int h = 1; h <= 6; ++h) {
    double tv = tv_conditional(*half, *quarter, empty, h);
    REQUIRE(tv >= prev - 1e-12);
    prev = tv;
  }

  // histories the predictor rules out are maximally separated
  History ones = History::parse(half->alphabet(), "1");
  REQUIRE(tv_conditional(*half, *make_deterministic(SequenceRule::periodic("01")), ones, 3) == 1.0);

  REQUIRE_THROWS_AS(tv_conditional(*half, *quarter, empty, -1), std::invalid_argument);
  REQUIRE_THROWS_AS(tv_conditional(*half, *quarter, empty, 30), BudgetExceeded);
}

TEST_CASE("wilson intervals") {
  auto empty = wilson_interval(0, 0);
  REQUIRE(empty.lo == 0.0);
  REQUIRE(empty.hi == 1.0);

  auto mid = wilson_interval(50, 100);
  REQUIRE_THAT(mid.lo + mid.hi, WithinAbs(1.0, 1e-12));
  REQUIRE(mid.lo > 0.40);
  REQUIRE(mid.lo < 0.41);

  auto high = wilson_interval(95, 100);
  REQUIRE(high.lo > 0.88);
  REQUIRE(high.hi < 0.99);

  auto full = wilson_interval(100, 100);
  REQUIRE_THAT(full.hi, WithinAbs(1.0, 1e-12));
  REQUIRE(full.lo > 0.9);
}

TEST_CASE("trajectory dichotomy separates singular pairs and merges dominated ones") {
  DichotomyOptions opt;
  opt.horizon = 256;
  opt.tv_depth = 6;
  opt.freq_lookahead = 64;
  opt.freq_samples = 512;

  auto half = make_bernoulli(0.5);
  auto quarter = make_bernoulli(0.25);

  auto singular = tv_dichotomy_trajectories(*half, *quarter, 24, 2026, opt);
  REQUIRE(singular.separated >= 20);
  REQUIRE(singular.checkpoints.back() == 256);
  REQUIRE(singular.trajectories[0].checkpoint_tv.size() == singular.checkpoints.size());
  REQUIRE_THAT(singular.fraction_separated, WithinAbs(static_cast<double>(singular.separated) / 24.0, 1e-15));

  auto dominated = make_mixture({half, quarter}, {0.5, 0.5});
  auto merged = tv_dichotomy_trajectories(*half, *dominated, 24, 2026, opt);
  REQUIRE(merged.merged >= 20);

  // reproducible for a fixed seed
  auto again = tv_dichotomy_trajectories(*half, *dominated, 24, 2026, opt);
  REQUIRE(again.merged == merged.merged);
  REQUIRE(again.trajectories[0].decision_value == merged.trajectories[0].decision_value);

  // identical measures with the sampled statistic disabled: exactly zero distance
  DichotomyOptions plain = opt;
  plain.deep_events = false;
  auto same = tv_dichotomy_trajectories(*half, *half, 8, 7, plain);
  REQUIRE(same.merged == 8);
  for (const auto& t : same.trajectories) REQUIRE(t.decision_value == 0.0);
}

TEST_CASE("series reports freeze the csv layout") {
  DivergenceSeries s;
  s.points.push_back(DivergenceSeries::exact_point(4, 1.5));
  s.points.push_back(DivergenceSeries::mc_point(8, McEstimate{2.0, 0.25, 100, 0, 42}));
  s.points.push_back(DivergenceSeries::exact_point(0, 0.0));
  REQUIRE(s.to_csv() ==
          "n,value,value_over_n,stderr,mode,seed\n"
          "4,1.5,0.375,,exact,\n"
          "8,2,0.25,0.25,mc,42\n"
          "0,0,0,,exact,\n");
  auto j = s.to_json();
  REQUIRE(j.size() == 3);
  REQUIRE(!j[0].contains("stderr"));
  REQUIRE(!j[0].contains("seed"));
  REQUIRE(j[1]["seed"] == 42);
  REQUIRE_THAT(j[1]["stderr"].get<double>(), WithinAbs(0.25, 0.0));
  REQUIRE_THAT(j[2]["value_over_n"].get<double>(), WithinAbs(0.0, 0.0));
}

TEST_CASE("doubles format to shortest round-trip strings") {
  REQUIRE(format_double(0.5) == "0.5");
  REQUIRE(format_double(1.0) == "1");
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(format_double(kPosInf) == "inf");
  REQUIRE(format_double(-kPosInf) == "-inf");
  REQUIRE(format_double(std::nan("")) == "nan");
  for (double v : {1.0 / 3.0, 0.30000000000000004, 1e-300, 1.8872187554086717}) {
    REQUIRE(std::stod(format_double(v)) == v);
  }
}
