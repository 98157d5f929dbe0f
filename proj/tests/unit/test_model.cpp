#include <doctest.h>

#include "common.hpp"
#include "hb/model.hpp"

using namespace hb;

TEST_SUITE("model") {
  TEST_CASE("exponents follow the degree table") {
    HiggsInstance u = fixtures::unstable();
    CHECK(u.exponent(0, 1) == 0);
    CHECK(u.exponent(1, 0) == -4);
    CHECK(u.exponent(0, 0) == -2);
    CHECK(validate(u).valid);
    CHECK_FALSE(validate(u).zero_higgs);
  }

  TEST_CASE("validation lists every violation") {
    HiggsInstance bad = make_instance(0, {0, 1}, {{{}, {}}, {{1.0}, {}}});
    Diagnostics d = validate(bad);
    CHECK_FALSE(d.valid);
    CHECK(d.violations.size() == 2);  // unsorted degrees, entry (2,1) must vanish
    HiggsInstance count = make_instance(0, {1, 0}, {{{}, {}}, {{}, {}}});
    count.phi.entry(0, 1) = {1.0};
    CHECK_FALSE(validate(count).valid);
    CHECK_THROWS_AS(require_valid(count), InvalidInput);
    HiggsInstance nan = make_instance(0, {0, 0}, {{{}, {NAN}}, {{}, {}}});
    CHECK_FALSE(validate(nan).valid);
    CHECK(validate(fixtures::split({2, 0})).zero_higgs);
    CHECK_THROWS_AS(make_instance(0, {0, 0}, {{{}}}), InvalidInput);
  }

  TEST_CASE("evaluation agrees across charts up to unitary phases") {
    HiggsInstance h = make_instance(1, {3, 0}, {{{}, {1.0, cplx(0, 2), -0.5}}, {{}, {}}});
    const ChartPoint p{0, cplx(0.6, -0.3)};
    const ChartPoint w = in_chart(p, 1);
    CHECK(std::abs(h.evaluate(p)(0, 1) - (1.0 + cplx(0, 2) * p.z - 0.5 * p.z * p.z)) < 1e-14);
    // In chart 1 the entry is w^e times the chart-0 polynomial.
    CHECK(std::abs(h.evaluate(w)(0, 1) - std::pow(w.z, 2) * h.evaluate(p)(0, 1)) < 1e-13);
    CHECK(std::abs(h.evaluate_reference(w)(0, 1)) == doctest::Approx(std::abs(h.evaluate_reference(p)(0, 1))));
  }

  TEST_CASE("hilbert values and admissibility") {
    SplitBundle E{{1, -1}};
    CHECK(min_admissible_level(E) == 1);
    CHECK(hilbert_value(E, 1) == 4);
    CHECK(hilbert_value(E, 3) == 8);
    CHECK_THROWS_AS(hilbert_value(E, 0), InadmissibleLevel);
    CHECK(sub_bundle(E, {1}).degrees == std::vector<int>{-1});
  }

  TEST_CASE("invariant summand sets") {
    HiggsInstance u = fixtures::unstable();
    CHECK(is_invariant_summand_set(u, {0}));
    CHECK_FALSE(is_invariant_summand_set(u, {1}));
    CHECK_FALSE(is_invariant_summand_set(fixtures::polystable(), {0}));
    CHECK_THROWS_AS(is_invariant_summand_set(u, {}), InvalidInput);
    CHECK_THROWS_AS(is_invariant_summand_set(u, {0, 1}), InvalidInput);
  }

  TEST_CASE("witnesses and verdicts") {
    auto w = destabilizing_witness(fixtures::unstable(), 3);
    REQUIRE(w);
    CHECK(w->summands == std::vector<int>{0});
    CHECK(w->margin == Rational(1));
    CHECK(w->verdict == Stability::unstable);

    bool heuristic = true;
    CHECK(stability_verdict(fixtures::polystable(), 4, &heuristic) == Stability::polystable);
    CHECK_FALSE(heuristic);
    CHECK(stability_verdict(fixtures::semistable(), 4) == Stability::strictly_semistable);
    CHECK(stability_verdict(fixtures::split({2, 0}), 3) == Stability::unstable);
    CHECK(stability_verdict(fixtures::split({1, 1}), 3) == Stability::polystable);
    CHECK(stability_verdict(fixtures::split({0}), 3) == Stability::stable);
    // An upper-triangular field keeps O(1) invariant.
    HiggsInstance s = make_instance(0, {1, -1}, {{{}, {1.0, 0.0, 0.0}}, {{}, {}}});
    CHECK(stability_verdict(s, 2) == Stability::unstable);
  }
}
