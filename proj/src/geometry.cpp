#include "hb/geometry.hpp"

#include <cmath>
#include <numbers>

#include "hb/hermitian.hpp"
#include "hb/parallel.hpp"

namespace hb {

ChartPoint in_chart(const ChartPoint& p, int chart) {
  if (chart != 0 && chart != 1) throw InvalidInput("chart index must be 0 or 1");
  if (p.chart == chart) return p;
  if (std::abs(p.z) == 0.0) throw InvalidInput("point lies outside the requested chart");
  return ChartPoint{chart, 1.0 / p.z};
}

ChartPoint canonical(const ChartPoint& p) {
  if (std::abs(p.z) <= 1.0) return p;
  return ChartPoint{1 - p.chart, 1.0 / p.z};
}

double height(const ChartPoint& p) {
  const double a = std::norm(p.z);
  const double t = (a - 1.0) / (a + 1.0);
  return p.chart == 0 ? t : -t;
}

namespace {

// P_n(x) and its derivative by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double r = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, r, p, dp);
      const double dr = p / dp;
      r -= dr;
      if (std::abs(dr) < 1e-16) break;
    }
    legendre(n, r, p, dp);
    x[i] = -r;
    x[n - 1 - i] = r;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - r * r) * dp * dp);
  }
}

QuadratureScheme::QuadratureScheme(int n_polar, int n_azimuthal) : n_polar_(n_polar), n_az_(n_azimuthal) {
  if (n_polar < 2 || n_azimuthal < 4)
    throw InvalidInput("quadrature orders must satisfy n_polar >= 2 and n_azimuthal >= 4");
  std::vector<double> t, wt;
  gauss_legendre(n_polar, t, wt);
  nodes_.reserve(static_cast<std::size_t>(n_polar) * n_azimuthal);
  weights_.reserve(nodes_.capacity());
  for (int j = 0; j < n_polar; ++j) {
    for (int l = 0; l < n_azimuthal; ++l) {
      const double theta = 2.0 * std::numbers::pi * l / n_azimuthal;
      ChartPoint p;
      if (t[j] <= 0.0) {
        p.chart = 0;
        p.z = std::polar(std::sqrt((1.0 + t[j]) / (1.0 - t[j])), theta);
      } else {
        p.chart = 1;
        p.z = std::polar(std::sqrt((1.0 - t[j]) / (1.0 + t[j])), -theta);
      }
      nodes_.push_back(p);
      weights_.push_back(0.5 * wt[j] / n_azimuthal);
    }
  }
}

QuadratureScheme build_quadrature(int n_polar, int n_azimuthal) { return QuadratureScheme(n_polar, n_azimuthal); }

QuadratureScheme default_quadrature(int degree) {
  degree = std::max(degree, 0);
  return QuadratureScheme(degree + 12, 2 * degree + 16);
}

Mat integrate_nodes(const QuadratureScheme& q, Eigen::Index rows, Eigen::Index cols,
                    const std::function<void(std::size_t, Mat&)>& add_weighted) {
  return chunked_sum<Mat>(
      q.size(), [&] { return Mat::Zero(rows, cols).eval(); }, add_weighted);
}

Mat integrate(const SampledField& f, const QuadratureScheme& q) {
  if (f.values.size() != q.size() || f.n_polar != q.n_polar() || f.n_azimuthal != q.n_azimuthal())
    throw ShapeMismatch("field was not sampled on this quadrature scheme");
  const auto& w = q.weights();
  return integrate_nodes(q, f.rows, f.cols, [&](std::size_t i, Mat& acc) { acc += w[i] * f.values[i]; });
}

Mat integrate_adaptive(const std::function<Mat(const ChartPoint&)>& f, int n_polar, int n_azimuthal,
                       double rel_tol, int max_doublings) {
  auto run = [&](const QuadratureScheme& q) {
    Mat first = f(q.nodes()[0]);
    return integrate_nodes(q, first.rows(), first.cols(),
                           [&](std::size_t i, Mat& acc) { acc += q.weights()[i] * f(q.nodes()[i]); });
  };
  QuadratureScheme q(n_polar, n_azimuthal);
  Mat prev = run(q);
  for (int level = 0; level < max_doublings; ++level) {
    q = q.refined();
    Mat next = run(q);
    const double scale = std::max(next.norm(), 1e-300);
    const bool done = (next - prev).norm() <= rel_tol * scale;
    prev = std::move(next);
    if (done) break;
  }
  return prev;
}

double fs_line_weight(const ChartPoint& p, int k) { return std::pow(1.0 + std::norm(p.z), -k); }

double kahler_density(const ChartPoint& p) { return fs_line_weight(p, 2); }

namespace {

struct Stencil {
  Mat c, xp1, xp2, xm1, xm2, yp1, yp2, ym1, ym2;
};

Stencil stencil(const std::function<Mat(const ChartPoint&)>& f, const ChartPoint& p, double s) {
  auto at = [&](double dx, double dy) { return f(ChartPoint{p.chart, p.z + cplx(dx, dy)}); };
  return Stencil{f(p),         at(s, 0),  at(2 * s, 0),  at(-s, 0), at(-2 * s, 0),
                 at(0, s),     at(0, 2 * s), at(0, -s), at(0, -2 * s)};
}

void check_step(double step) {
  if (!(step > 1e-7) || step > 0.1) throw InvalidInput("finite-difference step outside (1e-7, 0.1]");
}

}  // namespace

Mat dbar(const std::function<Mat(const ChartPoint&)>& f, const ChartPoint& p, double step) {
  check_step(step);
  const Stencil s = stencil(f, p, step);
  Mat dx = (-s.xp2 + 8.0 * s.xp1 - 8.0 * s.xm1 + s.xm2) / (12.0 * step);
  Mat dy = (-s.yp2 + 8.0 * s.yp1 - 8.0 * s.ym1 + s.ym2) / (12.0 * step);
  return 0.5 * (dx + cplx(0, 1) * dy);
}

Mat curvature_in_frame(const FrameMetric& h, const ChartPoint& p, double step) {
  check_step(step);
  const Stencil s = stencil(h, p, step);
  for (const Mat* m : {&s.c, &s.xp1, &s.xp2, &s.xm1, &s.xm2, &s.yp1, &s.yp2, &s.ym1, &s.ym2}) {
    Eigen::LLT<Mat> llt(*m);
    if (llt.info() != Eigen::Success) throw DegenerateForm("metric lost positivity on the curvature stencil");
  }
  const double h2 = step * step;
  Mat dx = (-s.xp2 + 8.0 * s.xp1 - 8.0 * s.xm1 + s.xm2) / (12.0 * step);
  Mat dy = (-s.yp2 + 8.0 * s.yp1 - 8.0 * s.ym1 + s.ym2) / (12.0 * step);
  Mat dxx = (-s.xp2 + 16.0 * s.xp1 - 30.0 * s.c + 16.0 * s.xm1 - s.xm2) / (12.0 * h2);
  Mat dyy = (-s.yp2 + 16.0 * s.yp1 - 30.0 * s.c + 16.0 * s.ym1 - s.ym2) / (12.0 * h2);
  const cplx I(0, 1);
  Mat dz = 0.5 * (dx - I * dy);
  Mat dzbar = 0.5 * (dx + I * dy);
  Mat lap = 0.25 * (dxx + dyy);
  Eigen::PartialPivLU<Mat> lu(s.c);
  Mat k = lu.solve(lap) - lu.solve(dzbar) * lu.solve(dz);
  return -k / kahler_density(p);
}

Mat numeric_curvature(const FrameMetric& h, const ChartPoint& p, double step) {
  Mat theta = curvature_in_frame(h, p, step);
  const Mat hp = h(p);
  Mat root = herm_power(hp, 0.5);
  Mat inv_root = herm_power(hp, -0.5);
  Mat out = root * theta * inv_root;
  return 0.5 * (out + out.adjoint());
}

}  // namespace hb
