#pragma once

#include <string>
#include <vector>

#include "hb/quantization.hpp"

namespace hb {

// Gram matrix together with a chosen orthonormal frame: the columns of
// `orthonormalizer` X satisfy X^* G X = Id (G^{-1/2} unless rotated).
struct MetricState {
  HermitianForm G;
  Mat orthonormalizer;
  int step = 0;
  int parent = -1;

  explicit MetricState(HermitianForm g);
  MetricState(HermitianForm g, Mat X);
  // Same Gram, frame rotated by a unitary W (X -> X W).
  MetricState rotated(const Mat& W) const;
};

// Everything fixed for one (instance, k, ell): bases, samples, phi_*, forms.
class BalancedProblem {
 public:
  BalancedProblem(HiggsInstance inst, int k, Rational ell = Rational(1));
  BalancedProblem(HiggsInstance inst, int k, Rational ell, QuadratureScheme q);

  const HiggsInstance& instance() const { return inst_; }
  const SectionBasis& basis() const { return basis_; }
  const QuadratureScheme& scheme() const { return scheme_; }
  const std::vector<Mat>& samples() const { return samples_; }
  const PushforwardMatrix& phi_star() const { return A_; }
  const HermitianForm& twist_gram() const { return GM_; }
  const HermitianForm& reference_gram() const { return Gref_; }
  const QuantParams& params() const { return params_; }
  int N() const { return basis_.size(); }
  int rank() const { return basis_.rank(); }

 private:
  HiggsInstance inst_;
  SectionBasis basis_;
  QuadratureScheme scheme_;
  std::vector<Mat> samples_;
  PushforwardMatrix A_;
  HermitianForm GM_;
  HermitianForm Gref_;
  QuantParams params_;
};

// Pullback metric on E(k) at p in the holomorphic chart frame.
Mat fs_pullback_metric(const MetricState& state, const SectionBasis& basis, const ChartPoint& p);

// The pullback as a metric on E, relative to the reference metric.
BundleMetric fs_pullback_bundle_metric(const MetricState& state, const SectionBasis& basis);

// Q_lj = int (s_j, s_l)_FS over the frame basis s = S X.
Mat l2_gram_fs(const MetricState& state, const BalancedProblem& pb);

// Pointwise sum_j |s_j|^2_FS at every node.
std::vector<double> fs_partition(const MetricState& state, const BalancedProblem& pb);

struct StepEval {
  Mat Q;  // frame coordinates
  Mat P;  // frame coordinates
  FrameHiggs higgs;
  double residual = 0.0;
  double epsilon = 0.0;
};

StepEval evaluate_state(const MetricState& state, const BalancedProblem& pb);

MetricState t_step(const MetricState& state, const BalancedProblem& pb);
MetricState t_step(const MetricState& state, const StepEval& ev);
double balanced_residual(const MetricState& state, const BalancedProblem& pb);
Mat moment_map(const MetricState& state, const BalancedProblem& pb);

// Kempf-Ness functional of state0 moved by the basis change B (sections
// S X0 -> S X0 B, B rescaled to |det B| = 1), relative to state0.
double kempf_ness_basis(const MetricState& state0, const Mat& B, const BalancedProblem& pb);

// L(t) along exp(t zeta) acting on the point; zeta is Hermitian and traceless in
// the orthonormal frame of state0, and the sections move by exp(-t zeta).
double kempf_ness(const MetricState& state0, const Mat& zeta, double t, const BalancedProblem& pb);

struct IterationControls {
  double tol = 1e-9;
  int max_iter = 2000;
  double degeneration_threshold = 1e8;
  int burn_in = 20;
  bool track_kempf_ness = true;
};

struct IterationRecord {
  int step = 0;
  double residual = 0.0;
  double kn_value = 0.0;
  double min_eig = 0.0;  // of G relative to the reference Gram
  double max_eig = 0.0;
  double frob2 = 0.0;
  double epsilon = 0.0;
};

enum class Verdict { converged, max_iter, degenerate };
std::string to_string(Verdict v);

struct IterationReport {
  std::vector<IterationRecord> records;
  Verdict verdict = Verdict::max_iter;
  std::string note;
  bool kn_monotone = true;
  MetricState final_state;

  explicit IterationReport(MetricState s) : final_state(std::move(s)) {}
  std::string steps_csv() const;
};

IterationReport iterate(const BalancedProblem& pb, const IterationControls& controls = {});
IterationReport iterate_from(const BalancedProblem& pb, const MetricState& initial,
                             const IterationControls& controls = {});

}  // namespace hb
