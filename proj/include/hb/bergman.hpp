#pragma once

#include <string>
#include <vector>

#include "hb/balanced.hpp"
#include "hb/fit.hpp"

namespace hb {

// B_k at every node, in the frame that is unitary for the metric.
struct BergmanField {
  SampledField field;
  std::string metric;
  double trace_integral = 0.0;
};

BergmanField bergman_function(const BundleMetric& h, const SectionBasis& basis, const QuadratureScheme& q);

struct BergmanExpansion {
  SlopeFit fit;                    // sup residual of the first-order expansion vs k
  std::vector<double> id_error;    // sup |B_k / k - Id|
  std::vector<double> first_order; // sup |B_k - k Id - (i Lambda F + 1)|
};

// Needs at least four levels.
BergmanExpansion bergman_expansion_check(const BundleMetric& h, const std::vector<int>& ks, double step = 1e-3);

struct HitchinResidual {
  SampledField field;
  double sup_norm = 0.0;
  double l2_norm = 0.0;
  double trace_integral = 0.0;
};

// i Lambda F_h + c [phi, phi^*] - lambda Id with lambda = deg E / r.
HitchinResidual hitchin_residual(const BundleMetric& h, const HiggsInstance& inst, double c, const QuadratureScheme& q,
                                 double step = 1e-3);

// Pointwise [phi, phi^*] for the metric h, in the h-unitary frame.
Mat pointwise_commutator(const HiggsInstance& inst, const Mat& relative, const ChartPoint& p);

struct BalancedHitchinRow {
  int k = 0;
  double t_norm = 0.0;          // L2 norm of T_k
  double bergman_defect = 0.0;  // L2 norm of B_k + eps [phi, phi^*] - chi Id
  double epsilon = 0.0;
  double frob2 = 0.0;
  double residual = 0.0;
};

BalancedHitchinRow balanced_to_hitchin_check(const MetricState& state, const BalancedProblem& pb);

struct CBounds {
  double c_prime = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double eps_limit = 0.0;
  bool contained = false;
};

// Extrapolates eps(k) = c + b/k + d/k^2 and compares c against the bounds.
CBounds c_bounds(const std::vector<int>& ks, const std::vector<double>& eps, double c_prime, int rank, double ell,
                 double slack = 0.1);

struct ExpansionCoeffs {
  int order = 0;
  double epsilon = 0.0;
  std::vector<Mat> A;
  std::vector<Mat> B;
};

// sum_a alpha_a X beta_a Y - X beta_a Y alpha_a.
Mat bracket(const std::vector<Mat>& alpha, const Mat& X, const std::vector<Mat>& beta, const Mat& Y);

ExpansionCoeffs ajbj_recursion(const std::vector<Mat>& alpha, const std::vector<Mat>& beta, double eps, int order);

struct ExpansionRow {
  int k = 0;
  double epsilon = 0.0;
  std::vector<double> error;   // error[n] = |chi P - sum_{j<=n} k^{-j} A_j|'
  std::vector<double> a_norm;  // |A_j|'
  double closed_form_a1 = 0.0; // |chi P - Id - k^{-1} eps [phi_*, phi_*^*]|'
};

struct ExpansionReport {
  std::vector<ExpansionRow> rows;
  std::vector<SlopeFit> fits;  // one per order
  bool exact = false;          // phi = 0
};

ExpansionReport expansion_convergence_check(const HiggsInstance& inst, const std::vector<int>& ks, int order,
                                            Rational ell = Rational(1));

struct HormanderResult {
  double ratio = 0.0;  // max_j k lhs_j / rhs_j
  int worst = -1;
  std::vector<double> lhs;
  std::vector<double> rhs;
  bool all_holomorphic = false;
};

HormanderResult hormander_check(const HiggsInstance& inst, int k, const BundleMetric& h, const QuadratureScheme& q,
                                double step = 1e-3);

}  // namespace hb
