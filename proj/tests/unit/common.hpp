#pragma once

#include <cmath>
#include <random>

#include "hb/model.hpp"

namespace fixtures {

inline hb::HiggsInstance polystable() {
  return hb::make_instance(0, {0, 0}, {{{}, {2.0}}, {{1.0}, {}}}, "polystable");
}
inline hb::HiggsInstance semistable() {
  return hb::make_instance(0, {0, 0}, {{{}, {1.0}}, {{}, {}}}, "semistable");
}
inline hb::HiggsInstance unstable() { return hb::make_instance(2, {1, -1}, {{{}, {1.0}}, {{}, {}}}, "unstable"); }
inline hb::HiggsInstance split(std::vector<int> degrees, int m = 0) { return hb::make_instance(m, degrees, {}); }

// Beta integral of |z|^{2a} (1 + |z|^2)^{-d} against the unit-volume form.
inline double beta(int a, int d) { return std::tgamma(a + 1.0) * std::tgamma(d - a + 1.0) / std::tgamma(d + 2.0); }

inline hb::Mat random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  hb::Mat A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = hb::cplx(g(rng), g(rng));
  return A;
}

inline hb::Mat random_spd(int n, std::mt19937_64& rng) {
  hb::Mat A = random_matrix(n, n, rng);
  return A * A.adjoint() / n + hb::Mat::Identity(n, n);
}

inline hb::Mat random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<hb::Mat> qr(random_matrix(n, n, rng));
  return qr.householderQ() * hb::Mat::Identity(n, n);
}

}  // namespace fixtures
