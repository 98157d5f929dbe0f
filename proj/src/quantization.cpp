#include "hb/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hb {

SectionBasis::SectionBasis(SplitBundle E, int k) : E_(std::move(E)), k_(k) {
  require_admissible(E_, k_);
  for (int i = 0; i < E_.rank(); ++i) {
    offsets_.push_back(static_cast<int>(items_.size()));
    for (int a = 0; a <= degree(i); ++a) items_.push_back({i, a});
  }
}

int SectionBasis::max_degree() const {
  int d = 0;
  for (int i = 0; i < rank(); ++i) d = std::max(d, degree(i));
  return d;
}

Mat SectionBasis::evaluate(const ChartPoint& p) const {
  Mat S = Mat::Zero(rank(), size());
  for (int i = 0; i < rank(); ++i) {
    const int D = degree(i);
    cplx pw = 1.0;
    // chart 0: z^a; chart 1: w^{D - a}
    for (int e = 0; e <= D; ++e) {
      S(i, index(i, p.chart == 0 ? e : D - e)) = pw;
      pw *= p.z;
    }
  }
  return S;
}

Mat SectionBasis::evaluate_reference(const ChartPoint& p) const {
  Mat S = evaluate(p);
  const double s = 1.0 + std::norm(p.z);
  for (int i = 0; i < rank(); ++i) S.row(i) *= std::pow(s, -0.5 * degree(i));
  return S;
}

SectionBasis section_basis(const SplitBundle& E, int k) { return SectionBasis(E, k); }

std::vector<Mat> sample_reference(const SectionBasis& basis, const QuadratureScheme& q) {
  std::vector<Mat> out;
  out.reserve(q.size());
  for (const auto& p : q.nodes()) out.push_back(basis.evaluate_reference(p));
  return out;
}

QuadratureScheme quadrature_for(const HiggsInstance& inst, int k) {
  SectionBasis b(inst.bundle, k);
  return default_quadrature(b.max_degree() + inst.twist.m);
}

QuantParams make_params(const HiggsInstance& inst, int k, Rational ell) {
  if (ell <= Rational(0)) throw InvalidInput("ell must be a positive rational");
  QuantParams p;
  p.k = k;
  p.ell = ell;
  p.rank = inst.rank();
  p.N = hilbert_value(inst.bundle, k);
  return p;
}

BundleMetric::BundleMetric(SplitBundle E, Relative rel, std::string kind)
    : E_(std::move(E)), rel_(std::move(rel)), kind_(std::move(kind)) {}

BundleMetric BundleMetric::reference(const SplitBundle& E) {
  const int r = E.rank();
  return BundleMetric(E, [r](const ChartPoint&) { return Mat::Identity(r, r).eval(); }, "reference");
}

BundleMetric BundleMetric::conformal(const SplitBundle& E, const std::vector<double>& a) {
  if (static_cast<int>(a.size()) != E.rank()) throw InvalidInput("conformal metric needs one exponent per summand");
  return BundleMetric(
      E,
      [a](const ChartPoint& p) {
        const double t = height(p);
        Mat K = Mat::Zero(a.size(), a.size());
        for (std::size_t i = 0; i < a.size(); ++i) K(i, i) = std::exp(-a[i] * t);
        return K;
      },
      "conformal");
}

BundleMetric BundleMetric::constant(const SplitBundle& E, const Mat& K) {
  for (int d : E.degrees)
    if (d != E.degrees.front()) throw InvalidInput("constant relative metric needs equal degrees");
  HermitianForm check(K);
  return BundleMetric(E, [K](const ChartPoint&) { return K; }, "constant");
}

BundleMetric BundleMetric::flat(const SplitBundle& E) {
  const int r = E.rank();
  SplitBundle copy = E;
  return BundleMetric(
      E,
      [copy, r](const ChartPoint& p) {
        Mat K = Mat::Identity(r, r);
        const double s = 1.0 + std::norm(p.z);
        for (int i = 0; i < r; ++i) K(i, i) = std::pow(s, copy.degrees[i]);
        return K;
      },
      "flat");
}

Mat BundleMetric::frame(const ChartPoint& p) const {
  Mat K = rel_(p);
  const double s = 1.0 + std::norm(p.z);
  Eigen::VectorXd d(E_.rank());
  for (int i = 0; i < E_.rank(); ++i) d(i) = std::pow(s, -0.5 * E_.degrees[i]);
  return d.asDiagonal() * K * d.asDiagonal();
}

namespace {

Mat gram_from_samples(const std::vector<Mat>& S, const QuadratureScheme& q,
                      const std::function<Mat(std::size_t)>& weight) {
  const Eigen::Index N = S.front().cols();
  return integrate_nodes(q, N, N, [&](std::size_t i, Mat& acc) {
    acc.noalias() += q.weights()[i] * (S[i].adjoint() * weight(i) * S[i]);
  });
}

}  // namespace

HermitianForm twist_l2_gram(int m, const QuadratureScheme& q) {
  if (m < 0) throw InvalidInput("twist degree must be nonnegative");
  return reference_l2_gram(SplitBundle{{m}}, 0, q);
}

HermitianForm reference_l2_gram(const SplitBundle& E, int k, const QuadratureScheme& q) {
  SectionBasis basis(E, k);
  const Eigen::Index N = basis.size();
  Mat G = integrate_nodes(q, N, N, [&](std::size_t i, Mat& acc) {
    Mat S = basis.evaluate_reference(q.nodes()[i]);
    acc.noalias() += q.weights()[i] * (S.adjoint() * S);
  });
  return HermitianForm(G);
}

HermitianForm l2_gram(const BundleMetric& h, const SectionBasis& basis, const QuadratureScheme& q) {
  auto S = sample_reference(basis, q);
  return HermitianForm(gram_from_samples(S, q, [&](std::size_t i) { return h.relative(q.nodes()[i]); }));
}

PushforwardMatrix pushforward(const HiggsInstance& inst, int k) {
  require_valid(inst);
  SectionBasis basis(inst.bundle, k);
  const int N = basis.size();
  const int m = inst.twist.m;
  PushforwardMatrix out{Mat::Zero(N, static_cast<Eigen::Index>(m + 1) * N), m, N};
  for (int i = 0; i < inst.rank(); ++i) {
    for (int j = 0; j < inst.rank(); ++j) {
      const auto& c = inst.phi.entry(i, j);
      for (int cc = 0; cc < static_cast<int>(c.size()); ++cc) {
        if (c[cc] == cplx(0.0)) continue;
        for (int b = 0; b <= m; ++b)
          for (int a = 0; a <= basis.degree(j); ++a)
            out.A(basis.index(i, a + b + cc), static_cast<Eigen::Index>(b) * N + basis.index(j, a)) += c[cc];
      }
    }
  }
  return out;
}

HiggsField reconstruct_higgs(const PushforwardMatrix& A, const SplitBundle& E, int m, int k) {
  SectionBasis basis(E, k);
  const int N = basis.size();
  const int r = E.rank();
  if (A.A.rows() != N || A.A.cols() != static_cast<Eigen::Index>(m + 1) * N)
    throw ShapeMismatch("pushforward matrix has the wrong shape for (E, m, k)");
  int max_e = 0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) max_e = std::max(max_e, E.degrees[i] - E.degrees[j] - m);
  const int L = max_e + 1;
  const double scale = std::max(1.0, A.A.cwiseAbs().maxCoeff());

  // phi(x) from e_1(x) A = phi(x) e_2(x), with e_1, e_2 the fiber evaluations.
  auto fiber_phi = [&](const ChartPoint& p) {
    Mat e1 = basis.evaluate(p);
    Mat e2(r, static_cast<Eigen::Index>(m + 1) * N);
    cplx pw = 1.0;
    for (int b = 0; b <= m; ++b, pw *= p.z) e2.middleCols(static_cast<Eigen::Index>(b) * N, N) = pw * e1;
    Mat lhs = e1 * A.A;
    Mat phi = e2.transpose().colPivHouseholderQr().solve(lhs.transpose()).transpose();
    if ((lhs - phi * e2).norm() > 1e-9 * scale * std::max(1.0, e2.norm()))
      throw NotInduced("matrix is not induced by a bundle morphism (kernel condition fails)");
    return phi;
  };

  std::vector<Mat> vals;
  for (int l = 0; l < L; ++l) vals.push_back(fiber_phi(ChartPoint{0, std::polar(1.0, 2.0 * std::numbers::pi * l / L)}));
  // Extra off-circle probes catch violations the interpolation points miss.
  for (cplx z : {cplx(0.31, -0.17), cplx(-0.52, 0.44), cplx(0.0, 0.0)}) fiber_phi(ChartPoint{0, z});

  HiggsField out(r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const int e = E.degrees[i] - E.degrees[j] - m;
      std::vector<cplx> coeffs(L, 0.0);
      for (int a = 0; a < L; ++a) {
        cplx acc = 0.0;
        for (int l = 0; l < L; ++l) acc += vals[l](i, j) * std::polar(1.0, -2.0 * std::numbers::pi * l * a / L);
        coeffs[a] = acc / static_cast<double>(L);
      }
      for (int a = std::max(e + 1, 0); a < L; ++a)
        if (std::abs(coeffs[a]) > 1e-9 * scale)
          throw NotInduced("recovered Higgs entry exceeds its admissible degree");
      if (e < 0) continue;
      coeffs.resize(e + 1);
      bool zero = true;
      for (auto& c : coeffs) {
        if (std::abs(c) < 1e-13 * scale) c = 0.0;
        zero = zero && c == cplx(0.0);
      }
      if (!zero) out.entry(i, j) = coeffs;
    }
  }
  return out;
}

FrameHiggs whiten(const PushforwardMatrix& A, const Mat& X, const HermitianForm& G_M) {
  if (A.A.rows() != X.rows() || G_M.dim() != A.blocks()) throw ShapeMismatch("pushforward does not match the frame");
  const Mat c = G_M.inv_sqrt();
  Eigen::PartialPivLU<Mat> lu(X);
  std::vector<Mat> raw;
  for (int b = 0; b < A.blocks(); ++b) raw.push_back(lu.solve(A.block(b) * X));
  FrameHiggs out;
  const Eigen::Index N = X.cols();
  out.commutator = Mat::Zero(N, N);
  for (int a = 0; a < A.blocks(); ++a) {
    Mat alpha = Mat::Zero(N, N);
    for (int b = 0; b < A.blocks(); ++b) alpha += c(b, a) * raw[b];
    out.frob2 += alpha.squaredNorm();
    out.commutator += alpha * alpha.adjoint() - alpha.adjoint() * alpha;
    out.alpha.push_back(std::move(alpha));
  }
  return out;
}

Mat p_in_frame(const FrameHiggs& fh, const QuantParams& params) {
  const Eigen::Index N = fh.commutator.rows();
  Mat P = Mat::Identity(N, N) + (params.delta() / (1.0 + fh.frob2)) * fh.commutator;
  return P / params.chi();
}

PEndomorphism p_endomorphism(const PushforwardMatrix& A, const HermitianForm& G, const HermitianForm& G_M,
                             const QuantParams& params) {
  if (G.dim() != A.N || params.N != A.N) throw ShapeMismatch("Gram, pushforward and parameters disagree on N");
  const Mat X = G.inv_sqrt();
  const Mat Xi = G.sqrt();
  FrameHiggs fh = whiten(A, X, G_M);
  PEndomorphism out;
  out.P = X * p_in_frame(fh, params) * Xi;
  out.commutator = X * fh.commutator * Xi;
  out.frob2 = fh.frob2;
  out.gram = G.matrix();
  return out;
}

double appendix_c_prime(const HiggsInstance& inst, const BundleMetric& h, const QuadratureScheme& q) {
  SectionBasis mb(SplitBundle{{inst.twist.m}}, 0);
  const Mat c = twist_l2_gram(inst.twist.m, q).inv_sqrt();
  Mat v = integrate_nodes(q, 1, 1, [&](std::size_t i, Mat& acc) {
    const ChartPoint& p = q.nodes()[i];
    const double density = (mb.evaluate_reference(p) * c).squaredNorm();
    const Mat K = h.relative(p);
    Mat Phi = herm_power(K, 0.5) * inst.evaluate_reference(p) * herm_power(K, -0.5);
    Eigen::JacobiSVD<Mat> svd(Phi);
    const double op = svd.singularValues()(0);
    acc(0, 0) += q.weights()[i] * density * op * op;
  });
  return v(0, 0).real();
}

WeaklyGeometricReport weakly_geometric_report(const HiggsInstance& inst, const std::vector<int>& ks,
                                              const BundleMetric& h) {
  require_valid(inst);
  if (inst.phi.is_zero()) throw InvalidInput("weakly geometric report needs a nonzero Higgs field");
  if (ks.empty()) throw InvalidInput("empty k range");
  WeaklyGeometricReport rep;
  rep.c_prime = appendix_c_prime(inst, h, quadrature_for(inst, *std::max_element(ks.begin(), ks.end())));
  for (int k : ks) {
    SectionBasis basis(inst.bundle, k);
    QuadratureScheme q = quadrature_for(inst, k);
    HermitianForm G = l2_gram(h, basis, q);
    HermitianForm GM = twist_l2_gram(inst.twist.m, q);
    FrameHiggs fh = whiten(pushforward(inst, k), G.inv_sqrt(), GM);
    Mat row(basis.size(), static_cast<Eigen::Index>(basis.size()) * fh.alpha.size());
    for (std::size_t a = 0; a < fh.alpha.size(); ++a) row.middleCols(a * basis.size(), basis.size()) = fh.alpha[a];
    WeaklyGeometricRow r;
    r.k = k;
    r.frob2 = fh.frob2;
    r.scaled = fh.frob2 * inst.rank() / k;
    r.op_norm = Eigen::JacobiSVD<Mat>(row).singularValues()(0);
    r.lower_ok = rep.c_prime * k / inst.rank() <= fh.frob2 * (1.0 + 1e-9);
    r.op_ok = r.op_norm <= rep.c_prime * (1.0 + 1e-9);
    rep.lower_ok = rep.lower_ok && r.lower_ok;
    rep.op_ok = rep.op_ok && r.op_ok;
    rep.rows.push_back(r);
  }
  return rep;
}

MultiplicationNorm multiplication_norm_check(int m, const SplitBundle& E, int k) {
  SectionBasis src(E, k);
  SplitBundle Em = E;
  for (int& d : Em.degrees) d += m;
  SectionBasis dst(Em, k);
  QuadratureScheme q = default_quadrature(dst.max_degree());
  HermitianForm GM = twist_l2_gram(m, q);
  HermitianForm G = reference_l2_gram(E, k, q);
  HermitianForm Gd = reference_l2_gram(Em, k, q);
  const int N = src.size();
  Mat T = Mat::Zero(dst.size(), static_cast<Eigen::Index>(m + 1) * N);
  for (const auto& it : src.items())
    for (int b = 0; b <= m; ++b) T(dst.index(it.summand, it.exponent + b), b * N + src.index(it.summand, it.exponent)) = 1.0;
  MultiplicationNorm out;
  const double op = operator_norm_wrt(T, kron(GM, G), Gd);
  out.norm2 = op * op;
  SectionBasis mb(SplitBundle{{m}}, 0);
  const Mat c = GM.inv_sqrt();
  double sup = 0.0;
  for (const auto& p : q.nodes()) sup = std::max(sup, (mb.evaluate_reference(p) * c).squaredNorm());
  out.bound = (m + 1) * sup;
  out.ok = out.norm2 <= out.bound * (1.0 + 1e-9);
  return out;
}

}  // namespace hb
