#include "hb/git.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace hb {

void OneParamSubgroup::validate(int N) const {
  if (static_cast<int>(weights.size()) != N)
    throw InvalidInput("one-parameter subgroup needs " + std::to_string(N) + " weights, got " +
                       std::to_string(weights.size()));
  std::set<long long> distinct(weights.begin(), weights.end());
  if (distinct.size() < 2) throw InvalidInput("one-parameter subgroup needs at least two distinct weights");
  if (special_linear) {
    long long s = 0;
    for (long long w : weights) s += w;
    if (s != 0) throw InvalidInput("weights of a special linear subgroup must sum to zero");
  }
  if (basis_change) {
    if (basis_change->rows() != N || basis_change->cols() != N) throw ShapeMismatch("basis change has wrong shape");
    Eigen::JacobiSVD<Mat> svd(*basis_change);
    const auto& sv = svd.singularValues();
    if (!(sv(N - 1) > 1e-12 * sv(0))) throw InvalidInput("basis change is singular");
  }
}

Mat OneParamSubgroup::weight_vectors(int N) const {
  return basis_change ? *basis_change : Mat::Identity(N, N).eval();
}

OneParamSubgroup subsheaf_one_ps(const SplitBundle& E, int k, const std::vector<int>& S) {
  SectionBasis basis(E, k);
  std::vector<bool> in(E.rank(), false);
  for (int i : S) {
    if (i < 0 || i >= E.rank()) throw InvalidInput("summand index out of range");
    in[i] = true;
  }
  long long dim_sub = 0;
  for (const auto& it : basis.items()) dim_sub += in[it.summand] ? 1 : 0;
  const long long dim_quot = basis.size() - dim_sub;
  if (dim_sub == 0 || dim_quot == 0) throw InvalidInput("subsheaf must be a nonempty proper set of summands");
  OneParamSubgroup out;
  for (const auto& it : basis.items()) out.weights.push_back(in[it.summand] ? -dim_quot : dim_sub);
  return out;
}

namespace {

std::vector<ChartPoint> rank_samples(int count, std::uint64_t seed) {
  std::vector<ChartPoint> pts;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const int fixed = std::max(1, count / 2);
  for (int j = 0; j < fixed; ++j) {
    const double rho = 0.6 + 0.4 * std::fmod((j + 1) * std::numbers::sqrt2, 1.0);
    pts.push_back(ChartPoint{0, std::polar(rho, 2.0 * std::numbers::pi * std::fmod(j * golden, 1.0))});
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int j = fixed; j < count; ++j) {
    const double rho = 0.5 + 0.5 * u(rng);
    pts.push_back(ChartPoint{0, std::polar(rho, 2.0 * std::numbers::pi * u(rng))});
  }
  return pts;
}

int column_rank(const Mat& M, double rel) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 1e-300) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > rel * sv(0) ? 1 : 0;
  return r;
}

}  // namespace

int generic_rank(const Mat& U, const SectionBasis& basis, int sample_count, std::uint64_t seed) {
  if (U.rows() != basis.size()) throw ShapeMismatch("subspace lives in the wrong section space");
  if (U.cols() == 0 || U.norm() == 0.0) throw InvalidInput("subspace must be nonzero");
  Eigen::JacobiSVD<Mat> usvd(U, Eigen::ComputeThinU);
  const int dim = column_rank(U, 1e-12);
  const Mat Q = usvd.matrixU().leftCols(dim);
  int best = 0;
  for (const auto& p : rank_samples(sample_count, seed)) {
    Eigen::JacobiSVD<Mat> svd(basis.evaluate_reference(p) * Q);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > 1e-9 ? 1 : 0;
    best = std::max(best, r);
  }
  return best;
}

long long theta(const Mat& U, const SectionBasis& basis, std::uint64_t seed) {
  const long long rkF = generic_rank(U, basis, 16, seed);
  const long long dimU = column_rank(U, 1e-12);
  return rkF * basis.size() - static_cast<long long>(basis.rank()) * dimU;
}

Mu1 mu1(const OneParamSubgroup& lambda, const SectionBasis& basis, std::uint64_t seed) {
  const int N = basis.size();
  lambda.validate(N);
  const Mat V = lambda.weight_vectors(N);
  std::set<long long> levels(lambda.weights.begin(), lambda.weights.end());
  std::vector<long long> lv(levels.begin(), levels.end());
  Mu1 out;
  int prev_rank = 0;
  std::vector<long long> thetas;
  for (long long n : lv) {
    std::vector<int> cols;
    for (int j = 0; j < N; ++j)
      if (lambda.weights[j] <= n) cols.push_back(j);
    Mat U(N, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) U.col(c) = V.col(cols[c]);
    const int rk = generic_rank(U, basis, 16, seed);
    const long long th = static_cast<long long>(rk) * N - static_cast<long long>(basis.rank()) * column_rank(U, 1e-12);
    out.theta_by_level[n] = th;
    out.rank_jumps[n] = rk - prev_rank;
    prev_rank = rk;
    thetas.push_back(th);
  }
  for (std::size_t i = 0; i < lv.size(); ++i) {
    out.jump_sum += thetas[i];
    if (i + 1 < lv.size()) out.theta_sum += thetas[i] * (lv[i + 1] - lv[i]);
  }
  out.mu1 = Rational(out.theta_sum, N);
  return out;
}

long long mu2(const OneParamSubgroup& lambda, const PushforwardMatrix& A) {
  const int N = A.N;
  lambda.validate(N);
  Mat Ad = A.A;
  if (lambda.basis_change) {
    const Mat& V = *lambda.basis_change;
    Eigen::PartialPivLU<Mat> lu(V);
    for (int b = 0; b < A.blocks(); ++b) Ad.middleCols(static_cast<Eigen::Index>(b) * N, N) = lu.solve(A.block(b) * V);
  }
  const double tol = 1e-11 * std::max(1.0, A.A.size() ? A.A.cwiseAbs().maxCoeff() : 0.0);
  long long best = 0;
  for (Eigen::Index c = 0; c < Ad.cols(); ++c)
    for (Eigen::Index r = 0; r < Ad.rows(); ++r)
      if (std::abs(Ad(r, c)) >= tol) best = std::max(best, lambda.weights[r] - lambda.weights[c % N]);
  return best;
}

double MaximalWeight::w2_at(double t) const {
  const double s = 1.0 + to_double(nu);
  const double up = std::exp(2.0 * s * t), down = std::exp(-2.0 * s * t);
  return s * (up * e21 - down * e12) / (1.0 + e11 + e22 + down * e12 + up * e21);
}

MaximalWeight maximal_weight(const HiggsInstance& inst, int k, const std::vector<int>& S, const HermitianForm& G) {
  SectionBasis basis(inst.bundle, k);
  const int N = basis.size();
  if (G.dim() != N) throw ShapeMismatch("Gram does not match H^0(E(k))");
  if (S.empty() || static_cast<int>(S.size()) >= inst.rank()) throw InvalidInput("subsheaf must be a nonempty proper set");
  std::vector<bool> in(inst.rank(), false);
  for (int i : S) {
    if (i < 0 || i >= inst.rank()) throw InvalidInput("summand index out of range");
    in[i] = true;
  }
  std::vector<int> hcols, ocols;
  for (int j = 0; j < N; ++j) (in[basis.items()[j].summand] ? hcols : ocols).push_back(j);
  const Eigen::Index h = static_cast<Eigen::Index>(hcols.size());
  Mat H = Mat::Zero(N, h), O = Mat::Zero(N, N - h);
  for (Eigen::Index c = 0; c < h; ++c) H(hcols[c], c) = 1.0;
  for (Eigen::Index c = 0; c < N - h; ++c) O(ocols[c], c) = 1.0;
  const Mat& g = G.matrix();
  Mat XH = H * herm_power(H.adjoint() * g * H, -0.5);
  Mat Op = O - XH * (XH.adjoint() * g * O);
  Mat XO = Op * herm_power(Op.adjoint() * g * Op, -0.5);
  Mat X(N, N);
  X << XH, XO;

  FrameHiggs fh = whiten(pushforward(inst, k), X, twist_l2_gram(inst.twist.m, quadrature_for(inst, k)));
  MaximalWeight out;
  for (const auto& a : fh.alpha) {
    out.e11 += a.topLeftCorner(h, h).squaredNorm();
    out.e12 += a.topRightCorner(h, N - h).squaredNorm();
    out.e21 += a.bottomLeftCorner(N - h, h).squaredNorm();
    out.e22 += a.bottomRightCorner(N - h, N - h).squaredNorm();
  }
  const long long hE = N, hF = h;
  const long long rF = static_cast<long long>(S.size()), r = inst.rank();
  out.nu = Rational(hF, hE - hF);
  out.w1 = Rational(r * rF, 2 * (hE - hF)) * (Rational(hE, r) - Rational(hF, rF));
  const bool invariant = std::sqrt(out.e21) <= 1e-9 * std::sqrt(1.0 + fh.frob2);
  out.w2_limit = invariant ? Rational(0) : Rational(1) + out.nu;
  return out;
}

std::string to_string(WeightSign s) {
  switch (s) {
    case WeightSign::unstable:
      return "unstable";
    case WeightSign::strictly_semistable:
      return "strictly_semistable";
    case WeightSign::stable_compatible:
      return "stable_compatible";
  }
  return "unknown";
}

WeightReport total_weight(const OneParamSubgroup& lambda, const HiggsInstance& inst, int k, const QuantParams& params,
                          std::uint64_t seed) {
  SectionBasis basis(inst.bundle, k);
  WeightReport rep;
  rep.m1 = mu1(lambda, basis, seed);
  rep.mu2 = mu2(lambda, pushforward(inst, k));
  rep.epsilon = params.ell / params.chi_exact();
  rep.mu_total = rep.m1.mu1 + rep.epsilon * rep.mu2;
  rep.sign = rep.mu_total < Rational(0) ? WeightSign::unstable
                              : (rep.mu_total == Rational(0) ? WeightSign::strictly_semistable : WeightSign::stable_compatible);
  return rep;
}

WeightReport subsheaf_weight(const HiggsInstance& inst, int k, const std::vector<int>& S, const QuantParams& params,
                             std::uint64_t seed) {
  WeightReport rep = total_weight(subsheaf_one_ps(inst.bundle, k, S), inst, k, params, seed);
  rep.subsheaf = S;
  rep.maximal = maximal_weight(inst, k, S, reference_l2_gram(inst.bundle, k, quadrature_for(inst, k)));
  return rep;
}

}  // namespace hb
