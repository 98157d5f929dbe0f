#include "hb/balanced.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hb/parallel.hpp"

namespace hb {

MetricState::MetricState(HermitianForm g) : G(std::move(g)), orthonormalizer(G.inv_sqrt()) {}

MetricState::MetricState(HermitianForm g, Mat X) : G(std::move(g)), orthonormalizer(std::move(X)) {
  const Eigen::Index n = G.dim();
  if (orthonormalizer.rows() != n || orthonormalizer.cols() != n) throw ShapeMismatch("orthonormalizer has wrong shape");
  Mat check = orthonormalizer.adjoint() * G.matrix() * orthonormalizer;
  if ((check - Mat::Identity(n, n)).norm() > 1e-8 * std::sqrt(static_cast<double>(n)))
    throw InvalidInput("orthonormalizer is not orthonormal for G");
}

MetricState MetricState::rotated(const Mat& W) const {
  MetricState out(G, orthonormalizer * W);
  out.step = step;
  out.parent = parent;
  return out;
}

BalancedProblem::BalancedProblem(HiggsInstance inst, int k, Rational ell)
    : BalancedProblem(inst, k, ell, quadrature_for(inst, k)) {}

BalancedProblem::BalancedProblem(HiggsInstance inst, int k, Rational ell, QuadratureScheme q)
    : inst_(std::move(inst)),
      basis_(inst_.bundle, k),
      scheme_(std::move(q)),
      samples_(sample_reference(basis_, scheme_)),
      A_(pushforward(inst_, k)),
      GM_(twist_l2_gram(inst_.twist.m, scheme_)),
      Gref_(reference_l2_gram(inst_.bundle, k, scheme_)),
      params_(make_params(inst_, k, ell)) {}

Mat fs_pullback_metric(const MetricState& state, const SectionBasis& basis, const ChartPoint& p) {
  Mat SX = basis.evaluate(p) * state.orthonormalizer;
  Mat M = SX * SX.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-14 * es.eigenvalues().maxCoeff()))
    throw InadmissibleLevel("sections do not generate the fiber at this point");
  return M.inverse();
}

BundleMetric fs_pullback_bundle_metric(const MetricState& state, const SectionBasis& basis) {
  const Mat X = state.orthonormalizer;
  return BundleMetric(
      basis.bundle(),
      [X, basis](const ChartPoint& p) {
        Mat SX = basis.evaluate_reference(p) * X;
        return (SX * SX.adjoint()).inverse().eval();
      },
      "fs_pullback");
}

Mat l2_gram_fs(const MetricState& state, const BalancedProblem& pb) {
  const auto& S = pb.samples();
  const auto& q = pb.scheme();
  const Mat& X = state.orthonormalizer;
  const Eigen::Index N = pb.N();
  Mat Q = integrate_nodes(q, N, N, [&](std::size_t i, Mat& acc) {
    Mat SX = S[i] * X;
    Mat M = SX * SX.adjoint();
    Eigen::LLT<Mat> llt(M);
    if (llt.info() != Eigen::Success) throw DegenerateForm("pullback metric is not positive at a node");
    Mat Y = llt.matrixL().solve(SX);
    acc.noalias() += q.weights()[i] * (Y.adjoint() * Y);
  });
  return 0.5 * (Q + Q.adjoint());
}

std::vector<double> fs_partition(const MetricState& state, const BalancedProblem& pb) {
  std::vector<double> out;
  for (const auto& S : pb.samples()) {
    Mat SX = S * state.orthonormalizer;
    Mat M = SX * SX.adjoint();
    out.push_back((SX.adjoint() * M.inverse() * SX).trace().real());
  }
  return out;
}

StepEval evaluate_state(const MetricState& state, const BalancedProblem& pb) {
  StepEval ev;
  ev.Q = l2_gram_fs(state, pb);
  ev.higgs = whiten(pb.phi_star(), state.orthonormalizer, pb.twist_gram());
  ev.P = p_in_frame(ev.higgs, pb.params());
  ev.P = 0.5 * (ev.P + ev.P.adjoint());
  ev.residual = (ev.Q - ev.P).norm() / ev.P.norm();
  ev.epsilon = pb.params().epsilon(ev.higgs.frob2);
  return ev;
}

MetricState t_step(const MetricState& state, const StepEval& ev) {
  const Mat Pm = herm_power(ev.P, -0.5);
  Mat Gp = Pm * ev.Q * Pm;
  Eigen::PartialPivLU<Mat> lu(state.orthonormalizer);
  const Mat Xi = lu.inverse();
  Mat G = Xi.adjoint() * Gp * Xi;
  MetricState out(HermitianForm(0.5 * (G + G.adjoint())));
  out.step = state.step + 1;
  out.parent = state.step;
  return out;
}

MetricState t_step(const MetricState& state, const BalancedProblem& pb) {
  return t_step(state, evaluate_state(state, pb));
}

double balanced_residual(const MetricState& state, const BalancedProblem& pb) {
  return evaluate_state(state, pb).residual;
}

Mat moment_map(const MetricState& state, const BalancedProblem& pb) {
  StepEval ev = evaluate_state(state, pb);
  const cplx I(0, 1);
  const auto& pr = pb.params();
  return -0.5 * I * ev.Q + (I * pr.delta() / (2.0 * pr.chi() * (1.0 + ev.higgs.frob2))) * ev.higgs.commutator;
}

namespace {

double log_det_pos(const Mat& M) {
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) throw DegenerateForm("wedge norm underflow in the Kempf-Ness functional");
  double s = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) s += 2.0 * std::log(llt.matrixL()(i, i).real());
  return s;
}

}  // namespace

double kempf_ness_basis(const MetricState& state0, const Mat& B_in, const BalancedProblem& pb) {
  const Eigen::Index N = pb.N();
  if (B_in.rows() != N || B_in.cols() != N) throw ShapeMismatch("basis change has wrong shape");
  const double ld = std::log(std::abs(B_in.determinant()));
  if (!std::isfinite(ld)) throw DegenerateForm("singular basis change");
  const Mat B = B_in * std::exp(-ld / static_cast<double>(N));
  const Mat X0 = state0.orthonormalizer;
  const Mat XB = X0 * B;
  const auto& S = pb.samples();
  const auto& q = pb.scheme();
  Mat first = integrate_nodes(q, 1, 1, [&](std::size_t i, Mat& acc) {
    Mat a = S[i] * XB;
    Mat b = S[i] * X0;
    acc(0, 0) += q.weights()[i] * (log_det_pos(a * a.adjoint()) - log_det_pos(b * b.adjoint()));
  });
  FrameHiggs fh = whiten(pb.phi_star(), X0, pb.twist_gram());
  double moved = 0.0;
  Eigen::PartialPivLU<Mat> lu(B);
  for (const auto& alpha : fh.alpha) moved += lu.solve(alpha * B).squaredNorm();
  const auto& pr = pb.params();
  return 0.25 * first(0, 0).real() +
         (pr.delta() / (4.0 * pr.chi())) * (std::log1p(moved) - std::log1p(fh.frob2));
}

double kempf_ness(const MetricState& state0, const Mat& zeta, double t, const BalancedProblem& pb) {
  const double scale = std::max(1.0, zeta.norm());
  if ((zeta - zeta.adjoint()).norm() > 1e-10 * scale) throw InvalidInput("zeta must be Hermitian");
  if (std::abs(zeta.trace()) > 1e-10 * scale) throw InvalidInput("zeta must be traceless");
  return kempf_ness_basis(state0, herm_exp(-t * zeta), pb);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converged:
      return "converged";
    case Verdict::max_iter:
      return "max_iter";
    case Verdict::degenerate:
      return "degenerate";
  }
  return "unknown";
}

std::string IterationReport::steps_csv() const {
  std::ostringstream os;
  os << "step,residual,kn_value,min_eig,max_eig,epsilon\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.residual, r.kn_value, r.min_eig,
                  r.max_eig, r.epsilon);
    os << buf;
  }
  return os.str();
}

IterationReport iterate(const BalancedProblem& pb, const IterationControls& controls) {
  return iterate_from(pb, MetricState(pb.reference_gram()), controls);
}

IterationReport iterate_from(const BalancedProblem& pb, const MetricState& initial, const IterationControls& controls) {
  if (!(controls.tol > 0.0)) throw InvalidInput("tolerance must be positive");
  IterationReport rep(initial);
  const Mat rinv = pb.reference_gram().inv_sqrt();
  MetricState state = initial;
  Eigen::PartialPivLU<Mat> lu0(initial.orthonormalizer);
  for (int step = 0;; ++step) {
    StepEval ev;
    try {
      ev = evaluate_state(state, pb);
    } catch (const DegenerateForm& e) {
      rep.verdict = Verdict::degenerate;
      rep.note = e.what();
      break;
    }
    IterationRecord rec;
    rec.step = step;
    rec.residual = ev.residual;
    rec.frob2 = ev.higgs.frob2;
    rec.epsilon = ev.epsilon;
    Eigen::SelfAdjointEigenSolver<Mat> es(rinv * state.G.matrix() * rinv, Eigen::EigenvaluesOnly);
    rec.min_eig = es.eigenvalues().minCoeff();
    rec.max_eig = es.eigenvalues().maxCoeff();
    if (controls.track_kempf_ness) {
      try {
        rec.kn_value = kempf_ness_basis(initial, lu0.solve(state.orthonormalizer), pb);
      } catch (const DegenerateForm&) {
        rec.kn_value = NAN;
      }
      if (!rep.records.empty() && rec.kn_value > rep.records.back().kn_value + 1e-10 * (1.0 + std::abs(rec.kn_value)))
        rep.kn_monotone = false;
    }
    rep.records.push_back(rec);
    rep.final_state = state;
    if (ev.residual < controls.tol) {
      rep.verdict = Verdict::converged;
      break;
    }
    if (step >= controls.burn_in && rec.max_eig / rec.min_eig > controls.degeneration_threshold) {
      rep.verdict = Verdict::degenerate;
      rep.note = "Gram condition number relative to the reference exceeded the threshold";
      break;
    }
    if (step >= controls.max_iter) {
      rep.verdict = Verdict::max_iter;
      break;
    }
    try {
      state = t_step(state, ev);
    } catch (const DegenerateForm& e) {
      rep.verdict = Verdict::degenerate;
      rep.note = e.what();
      break;
    }
  }
  return rep;
}

}  // namespace hb
