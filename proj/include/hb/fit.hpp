#pragma once

#include <vector>

namespace hb {

// Least-squares line through (log k, log value).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  // Every value fell below the floor, so no slope is meaningful.
  bool exact = false;
  std::vector<int> ks;
  std::vector<double> values;
};

SlopeFit fit_loglog(const std::vector<int>& ks, const std::vector<double>& values, double floor = 1e-13);

// True when v[i+1] <= v[i] + slack for every i.
bool nonincreasing(const std::vector<double>& v, double slack);

}  // namespace hb
