#pragma once

#include <vector>

#include "hb/types.hpp"

namespace hb {

// Inner product on a coordinate space, stored as its Gram matrix with
// G(j, l) = (e_l, e_j), so that (v, w) = w^* G v.
class HermitianForm {
 public:
  explicit HermitianForm(const Mat& G);
  static HermitianForm identity(Eigen::Index n);

  Eigen::Index dim() const { return G_.rows(); }
  const Mat& matrix() const { return G_; }
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const Mat& eigenvectors() const { return evecs_; }

  Mat sqrt() const;
  Mat inv_sqrt() const;
  Mat inverse() const;
  Mat solve(const Mat& rhs) const;
  cplx inner(const Vec& v, const Vec& w) const { return w.dot(G_ * v); }

  double condition() const { return evals_.maxCoeff() / evals_.minCoeff(); }
  // Condition number after symmetric diagonal scaling to unit diagonal.
  double equilibrated_condition() const { return equilibrated_cond_; }

  static constexpr double kMaxCondition = 1e10;

 private:
  Mat G_;
  Eigen::VectorXd evals_;
  Mat evecs_;
  double equilibrated_cond_ = 1.0;
};

struct SqrtPair {
  Mat root;
  Mat inv_root;
};

SqrtPair herm_sqrt(const HermitianForm& G);

// f(H) for a Hermitian matrix H via its eigendecomposition.
Mat herm_power(const Mat& H, double exponent);
Mat herm_exp(const Mat& H);

// Kronecker product form on U (x) V; the first factor indexes blocks.
HermitianForm kron(const HermitianForm& outer, const HermitianForm& inner);

Mat adjoint_wrt(const Mat& A, const HermitianForm& G_dom, const HermitianForm& G_cod);
double frobenius_norm_wrt(const Mat& A, const HermitianForm& G_dom, const HermitianForm& G_cod);
double operator_norm_wrt(const Mat& A, const HermitianForm& G_dom, const HermitianForm& G_cod);

// [A, A*] for A : H (x) U -> U given as horizontal blocks A_b over an
// orthonormal basis of H, and A* : U -> H (x) U given as vertical blocks:
// sum_b A_b (A*)_b - (A*)_b A_b.
Mat commutator(const Mat& A, const Mat& A_star);

// Splits an N x (h N) matrix into its h column blocks.
std::vector<Mat> column_blocks(const Mat& A);

}  // namespace hb
