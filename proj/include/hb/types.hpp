#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/rational.hpp>

namespace hb {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Rational = boost::rational<long long>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gram matrix too ill-conditioned (or not positive) to continue.
struct DegenerateForm : Error {
  using Error::Error;
};

// Level k too small for the sections of E(k) to generate.
struct InadmissibleLevel : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct InvalidInput : Error {
  using Error::Error;
};

// Matrix does not come from a bundle morphism.
struct NotInduced : Error {
  using Error::Error;
};

inline double to_double(const Rational& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

std::string to_string(const Rational& q);
Rational parse_rational(const std::string& text);

}  // namespace hb
