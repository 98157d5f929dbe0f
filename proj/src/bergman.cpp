#include "hb/bergman.hpp"

#include <algorithm>
#include <cmath>

namespace hb {

namespace {

// Conjugation taking holomorphic-frame endomorphisms to the metric-unitary frame.
Mat unitary_from_frame(const BundleMetric& h, const ChartPoint& p) {
  const double s = 1.0 + std::norm(p.z);
  Eigen::VectorXd d(h.bundle().rank());
  for (int i = 0; i < d.size(); ++i) d(i) = std::pow(s, -0.5 * h.bundle().degrees[i]);
  return herm_power(h.relative(p), 0.5) * d.asDiagonal();
}

Mat curvature_unitary(const BundleMetric& h, const ChartPoint& p, double step) {
  Mat theta = curvature_in_frame([&](const ChartPoint& x) { return h.frame(x); }, p, step);
  Mat V = unitary_from_frame(h, p);
  return V * theta * V.inverse();
}

SampledField empty_field(const QuadratureScheme& q, Eigen::Index rows, Eigen::Index cols) {
  SampledField f{rows, cols, q.n_polar(), q.n_azimuthal(), {}};
  f.values.reserve(q.size());
  return f;
}

double l2_of(const SampledField& f, const QuadratureScheme& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights()[i] * f.values[i].squaredNorm();
  return std::sqrt(s);
}

}  // namespace

BergmanField bergman_function(const BundleMetric& h, const SectionBasis& basis, const QuadratureScheme& q) {
  const auto S = sample_reference(basis, q);
  HermitianForm R = l2_gram(h, basis, q);
  const Mat X = R.inv_sqrt();
  BergmanField out;
  out.metric = h.kind();
  out.field = empty_field(q, basis.rank(), basis.rank());
  double tr = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    Mat Y = herm_power(h.relative(q.nodes()[i]), 0.5) * S[i] * X;
    Mat B = Y * Y.adjoint();
    tr += q.weights()[i] * B.trace().real();
    out.field.values.push_back(std::move(B));
  }
  out.trace_integral = tr;
  return out;
}

BergmanExpansion bergman_expansion_check(const BundleMetric& h, const std::vector<int>& ks, double step) {
  if (ks.size() < 4) throw InvalidInput("Bergman expansion check needs at least four levels");
  const int kmax = *std::max_element(ks.begin(), ks.end());
  int dmax = 0;
  for (int d : h.bundle().degrees) dmax = std::max(dmax, d + kmax);
  QuadratureScheme q = default_quadrature(dmax + 8);
  std::vector<Mat> curv;
  for (const auto& p : q.nodes()) curv.push_back(curvature_unitary(h, p, step));
  const int r = h.bundle().rank();
  const Mat I = Mat::Identity(r, r);
  BergmanExpansion out;
  std::vector<double> sup_res;
  for (int k : ks) {
    BergmanField B = bergman_function(h, SectionBasis(h.bundle(), k), q);
    double res = 0.0, id = 0.0, first = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const Mat& b = B.field.values[i];
      res = std::max(res, (b / k - I - (curv[i] + I) / k).norm());
      id = std::max(id, (b / k - I).norm());
      first = std::max(first, (b - k * I - (curv[i] + I)).norm());
    }
    sup_res.push_back(res);
    out.id_error.push_back(id);
    out.first_order.push_back(first);
  }
  // Below this the finite-difference curvature cannot resolve the remainder.
  out.fit = fit_loglog(ks, sup_res, 1e-8);
  return out;
}

Mat pointwise_commutator(const HiggsInstance& inst, const Mat& relative, const ChartPoint& p) {
  Mat Phi = herm_power(relative, 0.5) * inst.evaluate_reference(p) * herm_power(relative, -0.5);
  return Phi * Phi.adjoint() - Phi.adjoint() * Phi;
}

HitchinResidual hitchin_residual(const BundleMetric& h, const HiggsInstance& inst, double c, const QuadratureScheme& q,
                                 double step) {
  if (c < 0.0) throw InvalidInput("Hitchin coupling must be nonnegative");
  if (h.bundle().degrees != inst.bundle.degrees) throw ShapeMismatch("metric and instance live on different bundles");
  const int r = inst.rank();
  const double lambda = static_cast<double>(inst.bundle.degree()) / r;
  HitchinResidual out;
  out.field = empty_field(q, r, r);
  double tr = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const ChartPoint& p = q.nodes()[i];
    Mat R = curvature_unitary(h, p, step) + c * pointwise_commutator(inst, h.relative(p), p) -
            lambda * Mat::Identity(r, r);
    out.sup_norm = std::max(out.sup_norm, R.norm());
    tr += q.weights()[i] * R.trace().real();
    out.field.values.push_back(std::move(R));
  }
  out.l2_norm = l2_of(out.field, q);
  out.trace_integral = tr;
  return out;
}

BalancedHitchinRow balanced_to_hitchin_check(const MetricState& state, const BalancedProblem& pb) {
  StepEval ev = evaluate_state(state, pb);
  if (!(ev.residual < 1e-8)) throw InvalidInput("state is not balanced to 1e-8");
  const auto& q = pb.scheme();
  const auto& S = pb.samples();
  const auto& pr = pb.params();
  const int r = pb.rank();
  const Mat I = Mat::Identity(r, r);
  const Mat X = state.orthonormalizer;
  // L2 Gram of the pullback metric is X^{-*} Q X^{-1}.
  const Mat Rinv = X * ev.Q.inverse() * X.adjoint();
  BalancedHitchinRow row;
  row.k = pr.k;
  row.epsilon = ev.epsilon;
  row.frob2 = ev.higgs.frob2;
  row.residual = ev.residual;
  double t2 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    Mat SX = S[i] * X;
    Mat K = (SX * SX.adjoint()).inverse();
    Mat Kh = herm_power(K, 0.5);
    Mat B = Kh * S[i] * Rinv * S[i].adjoint() * Kh;
    Mat C = pointwise_commutator(pb.instance(), K, q.nodes()[i]);
    Mat T = (I + (ev.epsilon / pr.k) * C) * B / pr.chi() - I;
    t2 += q.weights()[i] * T.squaredNorm();
    d2 += q.weights()[i] * (B + ev.epsilon * C - pr.chi() * I).squaredNorm();
  }
  row.t_norm = std::sqrt(t2);
  row.bergman_defect = std::sqrt(d2);
  return row;
}

CBounds c_bounds(const std::vector<int>& ks, const std::vector<double>& eps, double c_prime, int rank, double ell,
                 double slack) {
  if (ks.empty() || ks.size() != eps.size()) throw InvalidInput("epsilon series is empty or mismatched");
  CBounds out;
  out.c_prime = c_prime;
  out.lower = ell / (1.0 + rank * c_prime);
  out.upper = ell / (1.0 + c_prime / rank);
  if (ks.size() >= 3) {
    Eigen::MatrixXd M(ks.size(), 3);
    Eigen::VectorXd y(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const double x = 1.0 / ks[i];
      M.row(i) << 1.0, x, x * x;
      y(i) = eps[i];
    }
    out.eps_limit = M.colPivHouseholderQr().solve(y)(0);
  } else {
    out.eps_limit = eps.back();
  }
  out.contained = out.lower * (1.0 - slack) <= out.eps_limit && out.eps_limit <= out.upper * (1.0 + slack);
  return out;
}

Mat bracket(const std::vector<Mat>& alpha, const Mat& X, const std::vector<Mat>& beta, const Mat& Y) {
  if (alpha.size() != beta.size() || alpha.empty()) throw ShapeMismatch("alpha and beta need the same block count");
  Mat out = Mat::Zero(X.rows(), X.cols());
  for (std::size_t a = 0; a < alpha.size(); ++a) {
    Mat XbY = X * beta[a] * Y;
    out += alpha[a] * XbY - XbY * alpha[a];
  }
  return out;
}

ExpansionCoeffs ajbj_recursion(const std::vector<Mat>& alpha, const std::vector<Mat>& beta, double eps, int order) {
  if (order < 0 || order > 6) throw InvalidInput("expansion order must lie in 0..6");
  if (alpha.empty() || alpha.size() != beta.size()) throw ShapeMismatch("alpha and beta need the same block count");
  const Eigen::Index n = alpha.front().rows();
  for (std::size_t a = 0; a < alpha.size(); ++a)
    if (alpha[a].rows() != n || alpha[a].cols() != n || beta[a].rows() != n || beta[a].cols() != n)
      throw ShapeMismatch("expansion blocks must be square of equal size");
  ExpansionCoeffs out;
  out.order = order;
  out.epsilon = eps;
  out.A.push_back(Mat::Identity(n, n));
  out.B.push_back(Mat::Identity(n, n));
  for (int j = 0; j < order; ++j) {
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i <= j; ++i) a += bracket(alpha, out.A[i], beta, out.B[j - i]);
    out.A.push_back(eps * a);
    Mat b = Mat::Zero(n, n);
    for (int i = 0; i <= j; ++i) b -= out.B[i] * out.A[j + 1 - i];
    out.B.push_back(b);
  }
  return out;
}

ExpansionReport expansion_convergence_check(const HiggsInstance& inst, const std::vector<int>& ks, int order,
                                            Rational ell) {
  if (ks.size() < 4) throw InvalidInput("expansion check needs at least four levels");
  ExpansionReport rep;
  rep.exact = inst.phi.is_zero();
  for (int k : ks) {
    BalancedProblem pb(inst, k, ell);
    // The geometric family: L2 metrics of the reference metric on E.
    const MetricState s0(pb.reference_gram());
    FrameHiggs fh = whiten(pb.phi_star(), s0.orthonormalizer, pb.twist_gram());
    const Mat P = p_in_frame(fh, pb.params());
    const double chi = pb.params().chi();
    const double eps = pb.params().epsilon(fh.frob2);
    // (.,.)' = (P .,.): operator norms are taken after conjugating by P^{1/2}.
    const Mat Ph = herm_power(P, 0.5), Pmh = herm_power(P, -0.5), Pinv = P.inverse();
    auto norm_p = [&](const Mat& M) { return Eigen::JacobiSVD<Mat>(Ph * M * Pmh).singularValues()(0); };
    std::vector<Mat> beta;
    for (const auto& a : fh.alpha) beta.push_back(Pinv * a.adjoint() * P);
    ExpansionCoeffs c = ajbj_recursion(fh.alpha, beta, eps, order);
    ExpansionRow row;
    row.k = k;
    row.epsilon = eps;
    Mat partial = Mat::Zero(P.rows(), P.cols());
    for (int j = 0; j <= order; ++j) {
      partial += std::pow(static_cast<double>(k), -j) * c.A[j];
      row.error.push_back(norm_p(chi * P - partial));
      row.a_norm.push_back(norm_p(c.A[j]));
    }
    row.closed_form_a1 =
        norm_p(chi * P - Mat::Identity(P.rows(), P.cols()) - (eps / k) * fh.commutator);
    rep.rows.push_back(row);
  }
  for (int j = 0; j <= order; ++j) {
    std::vector<double> v;
    for (const auto& row : rep.rows) v.push_back(row.error[j]);
    rep.fits.push_back(fit_loglog(ks, v, 1e-13));
  }
  return rep;
}

HormanderResult hormander_check(const HiggsInstance& inst, int k, const BundleMetric& h, const QuadratureScheme& q,
                                double step) {
  require_valid(inst);
  if (inst.phi.is_zero()) throw InvalidInput("Hormander check needs a nonzero Higgs field");
  SectionBasis basis(inst.bundle, k);
  SplitBundle Em = inst.bundle;
  for (int& d : Em.degrees) d += inst.twist.m;
  SectionBasis target(Em, k);
  const int m = inst.twist.m;
  const Mat X = l2_gram(h, basis, q).inv_sqrt();

  // f_j = phi^{*} s'_j in the holomorphic frame of M (x) E(k), all j at once.
  auto f_at = [&](const ChartPoint& p) {
    const Mat H = h.frame(p, k);
    const Mat Phi = inst.evaluate(p);
    const double hM = fs_line_weight(p, m);
    return Mat(H.partialPivLu().solve(Phi.adjoint() * H * basis.evaluate(p) * X) / hM);
  };
  auto root_at = [&](const ChartPoint& p) { return herm_power(h.frame(p, k) * fs_line_weight(p, m), 0.5); };

  const Eigen::Index N = basis.size(), Nt = target.size();
  std::vector<Mat> F, T, U;
  Mat W = Mat::Zero(Nt, Nt), b = Mat::Zero(Nt, N);
  HormanderResult out;
  out.rhs.assign(N, 0.0);
  out.lhs.assign(N, 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const ChartPoint& p = q.nodes()[i];
    const Mat Ur = root_at(p);
    Mat Ti = Ur * target.evaluate(p);
    Mat Fi = Ur * f_at(p);
    Mat D = Ur * dbar(f_at, p, step);
    const double w = q.weights()[i];
    W += w * Ti.adjoint() * Ti;
    b += w * Ti.adjoint() * Fi;
    const double g = 1.0 / kahler_density(p);
    for (Eigen::Index j = 0; j < N; ++j) out.rhs[j] += w * g * D.col(j).squaredNorm();
    T.push_back(std::move(Ti));
    F.push_back(std::move(Fi));
  }
  const Mat coef = HermitianForm(0.5 * (W + W.adjoint())).solve(b);
  for (std::size_t i = 0; i < q.size(); ++i) {
    Mat R = F[i] - T[i] * coef;
    for (Eigen::Index j = 0; j < N; ++j) out.lhs[j] += q.weights()[i] * R.col(j).squaredNorm();
  }
  double fnorm = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) fnorm = std::max(fnorm, F[i].squaredNorm());
  out.all_holomorphic = true;
  for (Eigen::Index j = 0; j < N; ++j) {
    if (out.rhs[j] <= 1e-20 * std::max(fnorm, 1e-300)) continue;
    out.all_holomorphic = false;
    const double ratio = k * out.lhs[j] / out.rhs[j];
    if (ratio > out.ratio) {
      out.ratio = ratio;
      out.worst = static_cast<int>(j);
    }
  }
  return out;
}

}  // namespace hb
