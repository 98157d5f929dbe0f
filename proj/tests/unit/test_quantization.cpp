#include <doctest.h>

#include "common.hpp"
#include "hb/quantization.hpp"

using namespace hb;

TEST_SUITE("quantization") {
  TEST_CASE("section basis layout") {
    SectionBasis b(SplitBundle{{1, -1}}, 1);
    CHECK(b.size() == 4);
    CHECK(b.offset(1) == 3);
    CHECK(b.index(1, 0) == 3);
    CHECK(b.max_degree() == 2);
    const ChartPoint p{0, cplx(0.5, 0.25)};
    Mat S = b.evaluate(p);
    CHECK(std::abs(S(0, 2) - p.z * p.z) < 1e-15);
    CHECK(std::abs(S(1, 3) - 1.0) < 1e-15);
    CHECK(S(0, 3) == cplx(0.0));
    CHECK_THROWS_AS(SectionBasis(SplitBundle{{1, -1}}, 0), InadmissibleLevel);
  }

  TEST_CASE("reference grams are beta integrals") {
    const SplitBundle E{{2, 0}};
    const int k = 3;
    HermitianForm G = reference_l2_gram(E, k, default_quadrature(8));
    SectionBasis b(E, k);
    for (int j = 0; j < b.size(); ++j)
      for (int l = 0; l < b.size(); ++l) {
        const auto& bj = b.items()[j];
        const double expect = j == l ? fixtures::beta(bj.exponent, b.degree(bj.summand)) : 0.0;
        CHECK(std::abs(G.matrix()(j, l) - expect) < 1e-14);
      }
    HermitianForm GM = twist_l2_gram(2, default_quadrature(4));
    CHECK(GM.matrix()(1, 1).real() == doctest::Approx(fixtures::beta(1, 2)).epsilon(1e-14));
    HermitianForm R = l2_gram(BundleMetric::reference(E), b, default_quadrature(8));
    CHECK((R.matrix() - G.matrix()).norm() < 1e-14);
  }

  TEST_CASE("params") {
    QuantParams p = make_params(fixtures::unstable(), 3, Rational(1, 2));
    CHECK(p.N == 8);
    CHECK(p.chi_exact() == Rational(4));
    CHECK(p.delta() == 0.5);
    CHECK(p.epsilon(1.0) == doctest::Approx(0.75));
    CHECK_THROWS_AS(make_params(fixtures::unstable(), 3, Rational(-1)), InvalidInput);
  }

  TEST_CASE("pushforward is polynomial convolution") {
    PushforwardMatrix A = pushforward(fixtures::unstable(), 1);
    // H^0(O(2)) (x) H^0(O(2)) -> summand-1 block via the constant entry; b indexes H^0(M).
    CHECK(A.blocks() == 3);
    CHECK(A.N == 4);
    Mat expect = Mat::Zero(4, 12);
    for (int b = 0; b <= 2; ++b) expect(b, b * 4 + 3) = 1.0;
    CHECK((A.A - expect).norm() == 0.0);

    HiggsInstance h = make_instance(1, {2, 0}, {{{}, {1.0, 2.0}}, {{}, {}}});
    PushforwardMatrix B = pushforward(h, 1);
    SectionBasis s(h.bundle, 1);
    // t_1 (x) s_{2,0} maps to z * (1 + 2z) e_1.
    CHECK(B.block(1)(s.index(0, 1), s.index(1, 0)) == cplx(1.0));
    CHECK(B.block(1)(s.index(0, 2), s.index(1, 0)) == cplx(2.0));
    CHECK(B.block(0)(s.index(0, 0), s.index(1, 0)) == cplx(1.0));
  }

  TEST_CASE("reconstruction inverts the pushforward") {
    HiggsInstance h = make_instance(1, {3, 1, 0}, {{{}, {1.0, cplx(0, 2)}, {0.5, 0.0, 1.0}}, {{}, {}, {1.0}}, {{}, {}, {}}});
    for (int k : {0, 2, 5}) {
      PushforwardMatrix A = pushforward(h, k);
      HiggsField back = reconstruct_higgs(A, h.bundle, 1, k);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const auto& x = h.phi.entry(i, j);
          const auto& y = back.entry(i, j);
          REQUIRE(x.size() == y.size());
          for (std::size_t c = 0; c < x.size(); ++c) CHECK(std::abs(x[c] - y[c]) < 1e-12);
        }
    }
    std::mt19937_64 rng(8);
    PushforwardMatrix R = pushforward(h, 2);
    R.A = fixtures::random_matrix(R.A.rows(), R.A.cols(), rng);
    CHECK_THROWS_AS(reconstruct_higgs(R, h.bundle, 1, 2), NotInduced);
  }

  TEST_CASE("P against the dense adjoint") {
    std::mt19937_64 rng(9);
    HiggsInstance h = fixtures::unstable();
    const int k = 2;
    PushforwardMatrix A = pushforward(h, k);
    const int N = A.N;
    HermitianForm G(fixtures::random_spd(N, rng));
    HermitianForm GM = twist_l2_gram(2, default_quadrature(6));
    QuantParams params = make_params(h, k);
    PEndomorphism pe = p_endomorphism(A, G, GM, params);

    // phi_* : H^0(M) (x) V -> V and its adjoint for the product form.
    HermitianForm dom = kron(GM, G);
    Mat As = adjoint_wrt(A.A, dom, G);
    const double F = frobenius_norm_wrt(A.A, dom, G);
    // [phi_*, phi_*^*] = phi_* phi_*^* - sum over an orthonormal basis of H^0(M) of t_b^* phi_* (t_b (x) .).
    Mat C = A.A * As;
    Mat c = GM.inv_sqrt();
    for (int a = 0; a < A.blocks(); ++a) {
      Mat Ta = Mat::Zero(N, N), Sa = Mat::Zero(N, N);
      for (int b = 0; b < A.blocks(); ++b) {
        Ta += A.block(b) * c(b, a);
        Sa += G.solve(Mat(A.block(b) * c(b, a)).adjoint() * G.matrix());
      }
      C -= Sa * Ta;
    }
    const Mat P = (Mat::Identity(N, N) + params.delta() * C / (1.0 + F * F)) / params.chi();
    CHECK(pe.frob2 == doctest::Approx(F * F).epsilon(1e-12));
    CHECK((pe.P - P).norm() < 1e-11 * P.norm());
  }

  TEST_CASE("whitened blocks") {
    std::mt19937_64 rng(10);
    HiggsInstance h = fixtures::polystable();
    PushforwardMatrix A = pushforward(h, 3);
    HermitianForm G(fixtures::random_spd(A.N, rng));
    FrameHiggs fh = whiten(A, G.inv_sqrt(), twist_l2_gram(0, default_quadrature(2)));
    REQUIRE(fh.alpha.size() == 1);
    const Mat& a = fh.alpha[0];
    CHECK(fh.frob2 == doctest::Approx(a.squaredNorm()));
    CHECK((fh.commutator - (a * a.adjoint() - a.adjoint() * a)).norm() < 1e-12);
    CHECK(std::abs(fh.commutator.trace()) < 1e-12);
  }

  TEST_CASE("metrics") {
    const SplitBundle E{{0, 0}};
    BundleMetric c = BundleMetric::conformal(E, {0.5, -0.5});
    const ChartPoint p{0, cplx(0.3, 0.4)};
    CHECK(std::abs(c.relative(p)(0, 0) - std::exp(-0.5 * height(p))) < 1e-15);
    CHECK(std::abs(c.frame(p, 2)(1, 1) - std::exp(0.5 * height(p)) * fs_line_weight(p, 2)) < 1e-15);
    Mat K(2, 2);
    K << 2, cplx(0, 1), cplx(0, -1), 2;
    CHECK((BundleMetric::constant(E, K).relative(p) - K).norm() < 1e-15);
    CHECK_THROWS_AS(BundleMetric::constant(SplitBundle{{1, 0}}, K), InvalidInput);
    CHECK((BundleMetric::flat(E).frame(p) - Mat::Identity(2, 2)).norm() < 1e-15);
  }

  TEST_CASE("weakly geometric bounds for the reference metrics") {
    HiggsInstance h = fixtures::polystable();
    WeaklyGeometricReport r = weakly_geometric_report(h, {4, 6, 8, 10}, BundleMetric::reference(h.bundle));
    CHECK(r.c_prime > 0.0);
    CHECK(r.lower_ok);
    CHECK(r.op_ok);
    for (const auto& row : r.rows) CHECK(row.scaled == doctest::Approx(row.frob2 * 2 / row.k));
    CHECK_THROWS_AS(weakly_geometric_report(fixtures::split({0, 0}), {4, 6}, BundleMetric::reference(SplitBundle{{0, 0}})),
                    InvalidInput);
  }

  TEST_CASE("multiplication map norm bound") {
    for (int k : {2, 5, 9}) {
      MultiplicationNorm n = multiplication_norm_check(2, SplitBundle{{1, 0}}, k);
      CHECK(n.ok);
      CHECK(n.norm2 <= n.bound);
    }
  }
}
