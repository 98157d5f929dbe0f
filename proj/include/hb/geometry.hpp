#pragma once

#include <functional>
#include <vector>

#include "hb/types.hpp"

namespace hb {

// A point of P^1 in one of the two standard charts; chart 1 uses w = 1/z.
struct ChartPoint {
  int chart = 0;
  cplx z{0.0, 0.0};
};

// The representative with |z| <= 1.
ChartPoint canonical(const ChartPoint& p);
ChartPoint in_chart(const ChartPoint& p, int chart);
// (|z|^2 - 1)/(|z|^2 + 1) measured in chart 0; ranges over [-1, 1].
double height(const ChartPoint& p);

class QuadratureScheme {
 public:
  QuadratureScheme(int n_polar, int n_azimuthal);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<ChartPoint>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  int n_polar() const { return n_polar_; }
  int n_azimuthal() const { return n_az_; }
  bool same_orders(const QuadratureScheme& other) const {
    return n_polar_ == other.n_polar_ && n_az_ == other.n_az_;
  }
  QuadratureScheme refined() const { return QuadratureScheme(2 * n_polar_, 2 * n_az_); }

 private:
  int n_polar_;
  int n_az_;
  std::vector<ChartPoint> nodes_;
  std::vector<double> weights_;
};

QuadratureScheme build_quadrature(int n_polar, int n_azimuthal);

// Orders that resolve polynomial integrands of the given degree with room to
// spare for the rational factors of Fubini-Study pullbacks.
QuadratureScheme default_quadrature(int degree);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct SampledField {
  Eigen::Index rows = 1;
  Eigen::Index cols = 1;
  int n_polar = 0;
  int n_azimuthal = 0;
  std::vector<Mat> values;
};

template <class F>
SampledField sample(const QuadratureScheme& q, Eigen::Index rows, Eigen::Index cols, F&& f) {
  SampledField out{rows, cols, q.n_polar(), q.n_azimuthal(), {}};
  out.values.reserve(q.size());
  for (const auto& p : q.nodes()) {
    Mat v = f(p);
    if (v.rows() != rows || v.cols() != cols) throw ShapeMismatch("sampled value has wrong shape");
    out.values.push_back(std::move(v));
  }
  return out;
}

Mat integrate(const SampledField& f, const QuadratureScheme& q);

// Integral of a matrix-valued function of the node index.
Mat integrate_nodes(const QuadratureScheme& q, Eigen::Index rows, Eigen::Index cols,
                    const std::function<void(std::size_t, Mat&)>& add_weighted);

// Doubles both orders until the relative change drops below rel_tol.
Mat integrate_adaptive(const std::function<Mat(const ChartPoint&)>& f, int n_polar, int n_azimuthal,
                       double rel_tol = 1e-12, int max_doublings = 5);

// (1 + |z|^2)^{-k} in the chart frame of O(k).
double fs_line_weight(const ChartPoint& p, int k);

// Kahler density (1 + |z|^2)^{-2} of omega in the chart coordinate.
double kahler_density(const ChartPoint& p);

using FrameMetric = std::function<Mat(const ChartPoint&)>;

// Curvature endomorphism i Lambda F in the holomorphic chart frame, normalized so
// that the Fubini-Study metric on O(d) gives d.
Mat curvature_in_frame(const FrameMetric& h, const ChartPoint& p, double step = 1e-3);

// Same quantity conjugated into the h-unitary frame h^{1/2}; Hermitian.
Mat numeric_curvature(const FrameMetric& h, const ChartPoint& p, double step = 1e-3);

// d/d(zbar) of a chart-frame field by fourth-order central differences.
Mat dbar(const std::function<Mat(const ChartPoint&)>& f, const ChartPoint& p, double step = 1e-3);

}  // namespace hb
