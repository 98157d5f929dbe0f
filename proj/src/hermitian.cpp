#include "hb/hermitian.hpp"

#include <cmath>

namespace hb {

HermitianForm::HermitianForm(const Mat& G) {
  if (G.rows() != G.cols() || G.rows() == 0) throw ShapeMismatch("Gram matrix must be square and nonempty");
  const double scale = std::max(G.norm(), 1e-300);
  if ((G - G.adjoint()).norm() > 1e-12 * scale) throw InvalidInput("Gram matrix is not Hermitian");
  G_ = 0.5 * (G + G.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(G_);
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  if (!(evals_.minCoeff() > 0.0)) throw DegenerateForm("Gram matrix is not positive definite");
  Eigen::VectorXd d = G_.diagonal().real().cwiseSqrt().cwiseInverse();
  Mat E = d.asDiagonal() * G_ * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> ee(E, Eigen::EigenvaluesOnly);
  const double lo = ee.eigenvalues().minCoeff();
  equilibrated_cond_ = lo > 0.0 ? ee.eigenvalues().maxCoeff() / lo : INFINITY;
  if (!(equilibrated_cond_ <= kMaxCondition)) throw DegenerateForm("Gram matrix is numerically degenerate");
}

HermitianForm HermitianForm::identity(Eigen::Index n) { return HermitianForm(Mat::Identity(n, n)); }

Mat HermitianForm::sqrt() const { return evecs_ * evals_.cwiseSqrt().asDiagonal() * evecs_.adjoint(); }

Mat HermitianForm::inv_sqrt() const {
  return evecs_ * evals_.cwiseSqrt().cwiseInverse().asDiagonal() * evecs_.adjoint();
}

Mat HermitianForm::inverse() const { return evecs_ * evals_.cwiseInverse().asDiagonal() * evecs_.adjoint(); }

Mat HermitianForm::solve(const Mat& rhs) const {
  if (rhs.rows() != dim()) throw ShapeMismatch("right-hand side has wrong row count");
  return G_.llt().solve(rhs);
}

SqrtPair herm_sqrt(const HermitianForm& G) { return {G.sqrt(), G.inv_sqrt()}; }

Mat herm_power(const Mat& H, double exponent) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues();
  if (exponent != std::floor(exponent) && ev.minCoeff() <= 0.0)
    throw DegenerateForm("fractional power of a non-positive matrix");
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::pow(ev(i), exponent);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Mat herm_exp(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues().array().exp();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

HermitianForm kron(const HermitianForm& outer, const HermitianForm& inner) {
  const Eigen::Index a = outer.dim(), b = inner.dim();
  Mat K(a * b, a * b);
  for (Eigen::Index i = 0; i < a; ++i)
    for (Eigen::Index j = 0; j < a; ++j) K.block(i * b, j * b, b, b) = outer.matrix()(i, j) * inner.matrix();
  return HermitianForm(K);
}

namespace {

void check_shapes(const Mat& A, const HermitianForm& G_dom, const HermitianForm& G_cod) {
  if (A.cols() != G_dom.dim() || A.rows() != G_cod.dim())
    throw ShapeMismatch("linear map does not match its domain/codomain forms");
}

}  // namespace

Mat adjoint_wrt(const Mat& A, const HermitianForm& G_dom, const HermitianForm& G_cod) {
  check_shapes(A, G_dom, G_cod);
  return G_dom.solve(A.adjoint() * G_cod.matrix());
}

double frobenius_norm_wrt(const Mat& A, const HermitianForm& G_dom, const HermitianForm& G_cod) {
  check_shapes(A, G_dom, G_cod);
  const cplx tr = (adjoint_wrt(A, G_dom, G_cod) * A).trace();
  return std::sqrt(std::max(tr.real(), 0.0));
}

double operator_norm_wrt(const Mat& A, const HermitianForm& G_dom, const HermitianForm& G_cod) {
  check_shapes(A, G_dom, G_cod);
  Mat W = G_cod.sqrt() * A * G_dom.inv_sqrt();
  if (W.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(W);
  return svd.singularValues()(0);
}

std::vector<Mat> column_blocks(const Mat& A) {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() % n != 0) throw ShapeMismatch("matrix is not a row of square blocks");
  std::vector<Mat> out;
  for (Eigen::Index b = 0; b < A.cols() / n; ++b) out.push_back(A.middleCols(b * n, n));
  return out;
}

Mat commutator(const Mat& A, const Mat& A_star) {
  const Eigen::Index n = A.rows();
  if (A_star.cols() != n || A_star.rows() != A.cols() || A.cols() % std::max<Eigen::Index>(n, 1) != 0)
    throw ShapeMismatch("commutator blocks do not match");
  Mat out = Mat::Zero(n, n);
  for (Eigen::Index b = 0; b < A.cols() / n; ++b) {
    const auto Ab = A.middleCols(b * n, n);
    const auto Sb = A_star.middleRows(b * n, n);
    out += Ab * Sb - Sb * Ab;
  }
  return out;
}

}  // namespace hb
