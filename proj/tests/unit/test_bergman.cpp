#include <doctest.h>

#include "common.hpp"
#include "hb/bergman.hpp"
#include "hb/fit.hpp"

using namespace hb;

TEST_SUITE("bergman") {
  TEST_CASE("Bergman function of reference metrics on split bundles") {
    const SplitBundle E{{2, 0, -1}};
    const int k = 3;
    SectionBasis b(E, k);
    const QuadratureScheme q = default_quadrature(8);
    BergmanField f = bergman_function(BundleMetric::reference(E), b, q);
    CHECK(f.trace_integral == doctest::Approx(b.size()).epsilon(1e-12));
    Mat expect = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) expect(i, i) = E.degrees[i] + k + 1;
    for (const auto& v : f.field.values) CHECK((v - expect).norm() < 1e-11);
  }

  TEST_CASE("Bergman expansion for the reference metric is exact") {
    const SplitBundle E{{1, 0}};
    BergmanExpansion be = bergman_expansion_check(BundleMetric::reference(E), {3, 4, 5, 6});
    CHECK(be.fit.exact);
    for (double v : be.first_order) CHECK(v < 1e-7);
    // Degree zero summands: B_k / k - Id = Id / k.
    BergmanExpansion flat = bergman_expansion_check(BundleMetric::reference(SplitBundle{{0, 0}}), {3, 4, 5, 6});
    for (std::size_t i = 0; i < flat.id_error.size(); ++i) CHECK(flat.id_error[i] < 2.0 / (3 + i));
    CHECK_THROWS_AS(bergman_expansion_check(BundleMetric::reference(E), {3, 4, 5}), InvalidInput);
  }

  TEST_CASE("Bergman expansion for a conformal metric decays at second order") {
    const SplitBundle E{{0, 0}};
    BergmanExpansion be = bergman_expansion_check(BundleMetric::conformal(E, {0.4, -0.4}), {6, 8, 10, 12, 14});
    CHECK_FALSE(be.fit.exact);
    CHECK(be.fit.slope <= -1.7);
  }

  TEST_CASE("Hitchin residual of the flat polystable example") {
    HiggsInstance p = fixtures::polystable();
    const QuadratureScheme q = default_quadrature(4);
    const double c = 0.25;
    HitchinResidual r = hitchin_residual(BundleMetric::reference(p.bundle), p, c, q);
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 3 * c;
    expect(1, 1) = -3 * c;
    for (const auto& v : r.field.values) CHECK((v - expect).norm() < 1e-6);
    CHECK(r.sup_norm == doctest::Approx(expect.norm()).epsilon(1e-6));
    CHECK(std::abs(r.trace_integral) < 1e-6);
    CHECK_THROWS_AS(hitchin_residual(BundleMetric::reference(p.bundle), p, -1.0, q), InvalidInput);
    CHECK_THROWS_AS(hitchin_residual(BundleMetric::reference(SplitBundle{{1, 0}}), p, c, q), ShapeMismatch);
  }

  TEST_CASE("pointwise commutator is traceless and Hermitian") {
    HiggsInstance p = fixtures::semistable();
    Mat K(2, 2);
    K << 2, cplx(0.5, 0.5), cplx(0.5, -0.5), 1;
    Mat C = pointwise_commutator(p, K, ChartPoint{0, cplx(0.3, 0.1)});
    CHECK(std::abs(C.trace()) < 1e-14);
    CHECK((C - C.adjoint()).norm() < 1e-14);
    CHECK(C.norm() > 0.1);
  }

  TEST_CASE("recursion matches the closed forms") {
    std::mt19937_64 rng(17);
    const Mat a = fixtures::random_matrix(4, 4, rng) * 0.5;
    const Mat b = fixtures::random_matrix(4, 4, rng) * 0.5;
    const double eps = 0.3;
    ExpansionCoeffs c = ajbj_recursion({a}, {b}, eps, 4);
    auto br = [](const Mat& x, const Mat& y) -> Mat { return x * y - y * x; };
    const Mat ab = br(a, b);
    const Mat A1 = eps * ab;
    const Mat A2 = eps * eps * br(a, br(ab, b));
    const Mat A3 = std::pow(eps, 3) * br(a, br(br(a, br(ab, b)), b) - ab * b * ab + b * ab * ab);
    CHECK((c.A[0] - Mat::Identity(4, 4)).norm() == 0.0);
    CHECK((c.A[1] - A1).norm() < 1e-12 * A1.norm());
    CHECK((c.A[2] - A2).norm() < 1e-12 * A2.norm());
    CHECK((c.A[3] - A3).norm() < 1e-12 * A3.norm());
    // B is the formal inverse of A.
    for (int j = 1; j <= 4; ++j) {
      Mat s = Mat::Zero(4, 4);
      for (int i = 0; i <= j; ++i) s += c.B[i] * c.A[j - i];
      CHECK(s.norm() < 1e-12 * (1.0 + c.A[j].norm()));
    }
    CHECK_THROWS_AS(ajbj_recursion({a}, {b}, eps, 7), InvalidInput);
    CHECK_THROWS_AS(ajbj_recursion({a}, {b, b}, eps, 2), ShapeMismatch);
  }

  TEST_CASE("recursion vanishes for a normal single block") {
    Mat a = Mat::Zero(3, 3);
    a(0, 0) = cplx(1, 2);
    a(1, 1) = -0.5;
    ExpansionCoeffs c = ajbj_recursion({a}, {a.adjoint()}, 0.7, 5);
    for (int j = 1; j <= 5; ++j) CHECK(c.A[j].norm() == 0.0);
  }

  TEST_CASE("bracket sums over blocks") {
    std::mt19937_64 rng(18);
    std::vector<Mat> al{fixtures::random_matrix(3, 3, rng), fixtures::random_matrix(3, 3, rng)};
    std::vector<Mat> be{fixtures::random_matrix(3, 3, rng), fixtures::random_matrix(3, 3, rng)};
    const Mat X = fixtures::random_matrix(3, 3, rng), Y = fixtures::random_matrix(3, 3, rng);
    Mat expect = Mat::Zero(3, 3);
    for (int i = 0; i < 2; ++i) expect += al[i] * X * be[i] * Y - X * be[i] * Y * al[i];
    CHECK((bracket(al, X, be, Y) - expect).norm() < 1e-13);
  }

  TEST_CASE("expansion sweep orders") {
    ExpansionReport r = expansion_convergence_check(fixtures::polystable(), {4, 6, 8, 10, 12, 14, 16}, 2);
    CHECK_FALSE(r.exact);
    CHECK(r.fits[0].slope <= -0.7);
    CHECK(r.fits[1].slope <= -1.7);
    for (const auto& row : r.rows) CHECK(row.closed_form_a1 < 1e-12);
    ExpansionReport z = expansion_convergence_check(fixtures::split({0, 0}), {4, 5, 6, 7}, 1);
    CHECK(z.exact);
    CHECK(z.fits[0].exact);
    CHECK_THROWS_AS(expansion_convergence_check(fixtures::polystable(), {4, 5}, 1), InvalidInput);
  }

  TEST_CASE("balanced states and the Hitchin defect") {
    HiggsInstance p = fixtures::polystable();
    BalancedProblem pb(p, 5);
    IterationControls ctl;
    ctl.tol = 1e-11;
    IterationReport rep = iterate(pb, ctl);
    REQUIRE(rep.verdict == Verdict::converged);
    BalancedHitchinRow row = balanced_to_hitchin_check(rep.final_state, pb);
    CHECK(row.bergman_defect < 1e-8);
    CHECK(row.epsilon > 0.0);
    CHECK_THROWS_AS(balanced_to_hitchin_check(MetricState(pb.reference_gram()), pb), InvalidInput);
  }

  TEST_CASE("c bounds from an extrapolated series") {
    std::vector<int> ks{4, 5, 6, 7, 8};
    std::vector<double> eps;
    for (int k : ks) eps.push_back(0.25 - 0.5 / k + 0.1 / (double(k) * k));
    CBounds in = c_bounds(ks, eps, 2.0, 2, 1.0);
    CHECK(in.eps_limit == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(in.lower == doctest::Approx(0.2));
    CHECK(in.upper == doctest::Approx(0.5));
    CHECK(in.contained);
    CHECK_FALSE(c_bounds(ks, eps, 10.0, 2, 1.0).contained);
    CHECK_THROWS_AS(c_bounds(ks, {0.1}, 2.0, 2, 1.0), InvalidInput);
  }

  TEST_CASE("Hormander ratio") {
    HiggsInstance p = fixtures::polystable();
    HormanderResult flat = hormander_check(p, 4, BundleMetric::reference(p.bundle), quadrature_for(p, 4));
    CHECK(flat.all_holomorphic);
    std::vector<double> r;
    for (int k : {4, 8, 12}) {
      HormanderResult h = hormander_check(p, k, BundleMetric::conformal(p.bundle, {0.5, -0.5}), quadrature_for(p, k));
      CHECK_FALSE(h.all_holomorphic);
      CHECK(h.worst >= 0);
      r.push_back(h.ratio);
    }
    CHECK(*std::max_element(r.begin(), r.end()) <= 5.0 * *std::min_element(r.begin(), r.end()));
    CHECK_THROWS_AS(hormander_check(fixtures::split({0, 0}), 4, BundleMetric::reference(SplitBundle{{0, 0}}),
                                    default_quadrature(8)),
                    InvalidInput);
  }

  TEST_CASE("log-log fits") {
    std::vector<int> ks{2, 4, 8, 16};
    std::vector<double> v;
    for (int k : ks) v.push_back(3.0 * std::pow(k, -2.0));
    SlopeFit f = fit_loglog(ks, v);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit_loglog(ks, {0.0, 1e-15, 0.0, 0.0}).exact);
    CHECK_THROWS_AS(fit_loglog({1}, {1.0}), InvalidInput);
    CHECK(nonincreasing({3.0, 2.0, 2.0, 1.0}, 0.0));
    CHECK_FALSE(nonincreasing({3.0, 2.0, 2.5}, 0.1));
    CHECK(nonincreasing({3.0, 2.0, 2.05}, 0.1));
  }
}
