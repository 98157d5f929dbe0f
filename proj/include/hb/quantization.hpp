#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hb/geometry.hpp"
#include "hb/hermitian.hpp"
#include "hb/model.hpp"

namespace hb {

struct BasisItem {
  int summand;
  int exponent;
};

// Monomial basis z^a e_i of H^0(E(k)), ordered by (summand, exponent).
class SectionBasis {
 public:
  SectionBasis(SplitBundle E, int k);

  const SplitBundle& bundle() const { return E_; }
  int level() const { return k_; }
  int rank() const { return E_.rank(); }
  int size() const { return static_cast<int>(items_.size()); }
  const std::vector<BasisItem>& items() const { return items_; }
  // Degree d_i + k of the i-th summand of E(k).
  int degree(int i) const { return E_.degrees[i] + k_; }
  int max_degree() const;
  int index(int summand, int exponent) const { return offsets_[summand] + exponent; }
  int offset(int summand) const { return offsets_[summand]; }

  // r x N evaluation matrix in the holomorphic chart frame of E(k).
  Mat evaluate(const ChartPoint& p) const;
  // Same sections in the frame that is unitary for the reference metric.
  Mat evaluate_reference(const ChartPoint& p) const;

 private:
  SplitBundle E_;
  int k_;
  std::vector<BasisItem> items_;
  std::vector<int> offsets_;
};

SectionBasis section_basis(const SplitBundle& E, int k);

// Reference-frame evaluations of a basis at every node of a scheme.
std::vector<Mat> sample_reference(const SectionBasis& basis, const QuadratureScheme& q);

QuadratureScheme quadrature_for(const HiggsInstance& inst, int k);

struct QuantParams {
  int k = 1;
  Rational ell{1};
  int rank = 1;
  long long N = 1;

  double delta() const { return to_double(ell); }
  double chi() const { return static_cast<double>(N) / rank; }
  Rational chi_exact() const { return Rational(N, rank); }
  double epsilon(double frob2) const { return delta() * k / (1.0 + frob2); }
};

QuantParams make_params(const HiggsInstance& inst, int k, Rational ell = Rational(1));

// Hermitian metric on E, stored relative to the reference (Fubini-Study on each
// summand) in the reference-unitary frame.
class BundleMetric {
 public:
  using Relative = std::function<Mat(const ChartPoint&)>;
  BundleMetric(SplitBundle E, Relative rel, std::string kind);

  static BundleMetric reference(const SplitBundle& E);
  // diag(exp(-a_i t)) times the reference, t the height function.
  static BundleMetric conformal(const SplitBundle& E, const std::vector<double>& a);
  // Constant matrix relative to the reference; needs equal degrees.
  static BundleMetric constant(const SplitBundle& E, const Mat& K);
  // Constant matrix in the holomorphic frame; flat on a trivial bundle.
  static BundleMetric flat(const SplitBundle& E);

  const SplitBundle& bundle() const { return E_; }
  const std::string& kind() const { return kind_; }
  Mat relative(const ChartPoint& p) const { return rel_(p); }
  // The metric in the holomorphic chart frame of E.
  Mat frame(const ChartPoint& p) const;
  // The metric on E(k) in the holomorphic chart frame.
  Mat frame(const ChartPoint& p, int k) const { return frame(p) * fs_line_weight(p, k); }

 private:
  SplitBundle E_;
  Relative rel_;
  std::string kind_;
};

HermitianForm twist_l2_gram(int m, const QuadratureScheme& q);
HermitianForm reference_l2_gram(const SplitBundle& E, int k, const QuadratureScheme& q);
HermitianForm l2_gram(const BundleMetric& h, const SectionBasis& basis, const QuadratureScheme& q);

// Matrix of H^0(M) (x) H^0(E(k)) -> H^0(E(k)); column b * N + j is t_b (x) s_j.
struct PushforwardMatrix {
  Mat A;
  int m = 0;
  int N = 0;

  int blocks() const { return m + 1; }
  Mat block(int b) const { return A.middleCols(static_cast<Eigen::Index>(b) * N, N); }
};

PushforwardMatrix pushforward(const HiggsInstance& inst, int k);
HiggsField reconstruct_higgs(const PushforwardMatrix& A, const SplitBundle& E, int m, int k);

// Blocks of phi_* over orthonormal bases: alpha_a = X^{-1} (sum_b A_b c_ba) X
// where the columns of X are an orthonormal basis of H^0(E(k)) and c the
// orthonormalizer of H^0(M).
struct FrameHiggs {
  std::vector<Mat> alpha;
  double frob2 = 0.0;
  Mat commutator;
};

FrameHiggs whiten(const PushforwardMatrix& A, const Mat& X, const HermitianForm& G_M);

struct PEndomorphism {
  Mat P;  // acts on reference coefficient columns
  Mat commutator;
  double frob2 = 0.0;
  Mat gram;
};

PEndomorphism p_endomorphism(const PushforwardMatrix& A, const HermitianForm& G, const HermitianForm& G_M,
                             const QuantParams& params);

// (1 + delta C/(1 + F)) / chi in the orthonormal frame of fh.
Mat p_in_frame(const FrameHiggs& fh, const QuantParams& params);

// Sum over an orthonormal basis t_b of H^0(M) of the L2 norm of the pointwise
// operator norm of phi(. (x) t_b), measured with h.
double appendix_c_prime(const HiggsInstance& inst, const BundleMetric& h, const QuadratureScheme& q);

struct WeaklyGeometricRow {
  int k = 0;
  double frob2 = 0.0;
  double scaled = 0.0;  // frob2 * rank / k
  double op_norm = 0.0;
  bool lower_ok = true;
  bool op_ok = true;
};

struct WeaklyGeometricReport {
  std::vector<WeaklyGeometricRow> rows;
  double c_prime = 0.0;
  bool lower_ok = true;
  bool op_ok = true;
};

WeaklyGeometricReport weakly_geometric_report(const HiggsInstance& inst, const std::vector<int>& ks,
                                              const BundleMetric& h);

struct MultiplicationNorm {
  double norm2 = 0.0;
  double bound = 0.0;
  bool ok = true;
};

MultiplicationNorm multiplication_norm_check(int m, const SplitBundle& E, int k);

}  // namespace hb
