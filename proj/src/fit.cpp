#include "hb/fit.hpp"

#include <cmath>
#include <stdexcept>

#include "hb/types.hpp"

namespace hb {

SlopeFit fit_loglog(const std::vector<int>& ks, const std::vector<double>& values, double floor) {
  if (ks.size() != values.size() || ks.size() < 2) throw InvalidInput("fit needs matching series of length >= 2");
  SlopeFit out;
  out.ks = ks;
  out.values = values;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (values[i] <= floor) continue;
    x.push_back(std::log(static_cast<double>(ks[i])));
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 2) {
    out.exact = true;
    return out;
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.intercept = (sy - out.slope * sx) / n;
  return out;
}

bool nonincreasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i] + slack) return false;
  return true;
}

}  // namespace hb
