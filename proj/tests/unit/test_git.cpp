#include <doctest.h>

#include "common.hpp"
#include "hb/git.hpp"

using namespace hb;

TEST_SUITE("git") {
  TEST_CASE("subsheaf subgroup weights") {
    OneParamSubgroup l = subsheaf_one_ps(SplitBundle{{2, 0}}, 3, {0});
    REQUIRE(l.weights.size() == 10);
    CHECK(l.weights.front() == -4);
    CHECK(l.weights.back() == 6);
    CHECK(std::accumulate(l.weights.begin(), l.weights.end(), 0LL) == 0);
    CHECK_NOTHROW(l.validate(10));
    CHECK_THROWS_AS(subsheaf_one_ps(SplitBundle{{2, 0}}, 3, {0, 1}), InvalidInput);
  }

  TEST_CASE("subgroup validation") {
    OneParamSubgroup l{{1, 1, -1}, std::nullopt, true};
    CHECK_THROWS_AS(l.validate(3), InvalidInput);
    l.special_linear = false;
    CHECK_NOTHROW(l.validate(3));
    CHECK_THROWS_AS(l.validate(4), InvalidInput);
    OneParamSubgroup flat{{0, 0}, std::nullopt, false};
    CHECK_THROWS_AS(flat.validate(2), InvalidInput);
    OneParamSubgroup sing{{1, -1}, Mat::Ones(2, 2), true};
    CHECK_THROWS_AS(sing.validate(2), InvalidInput);
  }

  TEST_CASE("generic rank and theta") {
    SectionBasis b(SplitBundle{{2, 0}}, 3);
    Mat U = Mat::Identity(10, 10).leftCols(6);
    CHECK(generic_rank(U, b) == 1);
    CHECK(generic_rank(Mat::Identity(10, 10), b) == 2);
    Mat v = Mat::Zero(10, 1);
    v(0) = 1.0;
    v(6) = 1.0;
    CHECK(generic_rank(v, b) == 1);
    CHECK(theta(U, b) == 1 * 10 - 2 * 6);
    CHECK(theta(Mat::Identity(10, 10), b) == 0);
  }

  TEST_CASE("first weight of the subsheaf subgroup") {
    SectionBasis b(SplitBundle{{2, 0}}, 3);
    Mu1 m = mu1(subsheaf_one_ps(b.bundle(), 3, {0}), b);
    CHECK(m.theta_by_level.at(-4) == -2);
    CHECK(m.theta_by_level.at(6) == 0);
    CHECK(m.theta_sum == -20);
    CHECK(m.jump_sum == -2);
    CHECK(m.mu1 == Rational(-2));
    CHECK(m.rank_jumps.at(-4) == 1);
    CHECK(m.rank_jumps.at(6) == 1);
  }

  TEST_CASE("second weight") {
    const int k = 3;
    HiggsInstance p = fixtures::polystable();
    CHECK(mu2(subsheaf_one_ps(p.bundle, k, {0}), pushforward(p, k)) == 8);
    HiggsInstance u = fixtures::unstable();
    CHECK(mu2(subsheaf_one_ps(u.bundle, k, {0}), pushforward(u, k)) == 0);
    CHECK(mu2(subsheaf_one_ps(u.bundle, k, {1}), pushforward(u, k)) > 0);
  }

  TEST_CASE("maximal weight closed forms") {
    HiggsInstance p = fixtures::polystable();
    const int k = 3;
    SectionBasis b(p.bundle, k);
    HermitianForm G = reference_l2_gram(p.bundle, k, quadrature_for(p, k));
    MaximalWeight w = maximal_weight(p, k, {0}, G);
    CHECK(w.nu == Rational(1));
    CHECK(w.w1 == Rational(0));
    CHECK(w.w2_limit == Rational(2));

    MaximalWeight inv = maximal_weight(fixtures::unstable(), k, {0},
                                       reference_l2_gram(fixtures::unstable().bundle, k, default_quadrature(8)));
    CHECK(inv.w2_limit == Rational(0));
    CHECK(inv.e21 == 0.0);
  }

  TEST_CASE("w2 along the geodesic matches the trace derivative") {
    struct Case {
      HiggsInstance inst;
      int f;  // the single summand spanning F
    };
    std::vector<Case> cases{{make_instance(1, {2, 0}, {{{}, {1.0, cplx(0.5, 1)}}, {{}, {}}}), 1},
                            {make_instance(0, {0, 0}, {{{0.3}, {1.0}}, {{2.0}, {-0.3}}}), 1},
                            {fixtures::unstable(), 0}};
    const int k = 2;
    for (const auto& c : cases) {
      SectionBasis b(c.inst.bundle, k);
      HermitianForm G = reference_l2_gram(c.inst.bundle, k, quadrature_for(c.inst, k));
      MaximalWeight w = maximal_weight(c.inst, k, {c.f}, G);
      // Reference Grams are diagonal, so the adapted frame is G^{-1/2} with F columns first.
      std::vector<int> order;
      for (int j = 0; j < b.size(); ++j)
        if (b.items()[j].summand == c.f) order.push_back(j);
      const int hdim = static_cast<int>(order.size());
      for (int j = 0; j < b.size(); ++j)
        if (b.items()[j].summand != c.f) order.push_back(j);
      Mat X = Mat::Zero(b.size(), b.size());
      for (int j = 0; j < b.size(); ++j) X(order[j], j) = 1.0 / std::sqrt(G.matrix()(order[j], order[j]).real());
      FrameHiggs fh = whiten(pushforward(c.inst, k), X, twist_l2_gram(c.inst.twist.m, quadrature_for(c.inst, k)));
      const double s = 1.0 + to_double(w.nu);
      auto trace_term = [&](double t) {
        Eigen::VectorXd d = Eigen::VectorXd::Constant(b.size(), std::exp(s * t));
        d.head(hdim).setOnes();
        double acc = 0.0;
        for (const auto& a : fh.alpha) acc += (d.asDiagonal() * a * d.cwiseInverse().asDiagonal()).squaredNorm();
        return 0.5 * std::log1p(acc);
      };
      for (double t : {-0.7, 0.0, 0.4, 1.3}) {
        const double e = 1e-5;
        const double fd = (trace_term(t + e) - trace_term(t - e)) / (2 * e);
        CHECK(w.w2_at(t) == doctest::Approx(fd).epsilon(1e-6));
      }
      const bool invariant = is_invariant_summand_set(c.inst, {c.f});
      CHECK(w.w2_limit == (invariant ? Rational(0) : Rational(1) + w.nu));
      CHECK(w.w2_at(30.0) == doctest::Approx(to_double(w.w2_limit)).epsilon(1e-9));
    }
  }

  TEST_CASE("total weight of the destabilizing subsheaf") {
    HiggsInstance e = fixtures::split({2, 0});
    WeightReport r = subsheaf_weight(e, 3, {0}, make_params(e, 3));
    CHECK(r.m1.jump_sum == -2);
    CHECK(r.mu2 == 0);
    CHECK(r.epsilon == Rational(1, 5));
    CHECK(r.mu_total == Rational(-2));
    CHECK(r.sign == WeightSign::unstable);
    REQUIRE(r.maximal);
    CHECK(r.maximal->nu == Rational(3, 2));

    HiggsInstance p = fixtures::polystable();
    WeightReport q = subsheaf_weight(p, 3, {0}, make_params(p, 3));
    CHECK(q.mu_total == Rational(2));
    CHECK(q.sign == WeightSign::stable_compatible);
  }
}
