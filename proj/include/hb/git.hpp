#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hb/quantization.hpp"

namespace hb {

// Integer weights on a basis of H^0(E(k)); column j of basis_change (reference
// coordinates) has weight weights[j]. Without a basis change the reference
// monomials are the weight vectors.
struct OneParamSubgroup {
  std::vector<long long> weights;
  std::optional<Mat> basis_change;
  bool special_linear = true;

  void validate(int N) const;
  Mat weight_vectors(int N) const;
};

// Two-weight subgroup acting with weight -dim U'' on U' = H^0(F(k)) and with
// weight dim U' on the complementary summands. S holds 0-based summand indices.
OneParamSubgroup subsheaf_one_ps(const SplitBundle& E, int k, const std::vector<int>& S);

// Rank of the subsheaf generated by the columns of U (reference coordinates).
int generic_rank(const Mat& U, const SectionBasis& basis, int sample_count = 16, std::uint64_t seed = 0);

// rk(F') N - r dim U'.
long long theta(const Mat& U, const SectionBasis& basis, std::uint64_t seed = 0);

struct Mu1 {
  Rational mu1;                                 // (1/N) sum over all integers n of Theta(U_{<=n})
  long long theta_sum = 0;                      // the sum itself
  long long jump_sum = 0;                       // sum over the distinct weights only
  std::map<long long, long long> theta_by_level;  // Theta(U_{<=n}) at each distinct weight n
  std::map<long long, int> rank_jumps;          // r_n = rk F_{<=n} - rk F_{<n}
};

Mu1 mu1(const OneParamSubgroup& lambda, const SectionBasis& basis, std::uint64_t seed = 0);

// max(0, max{a - b : block U_b -> U_a of phi_* nonzero}).
long long mu2(const OneParamSubgroup& lambda, const PushforwardMatrix& A);

struct MaximalWeight {
  Rational nu;
  Rational w1;
  Rational w2_limit;
  double e11 = 0.0, e12 = 0.0, e21 = 0.0, e22 = 0.0;  // squared Frobenius norms of the blocks

  // The Higgs part of the weight along the geodesic at time t.
  double w2_at(double t) const;
};

MaximalWeight maximal_weight(const HiggsInstance& inst, int k, const std::vector<int>& S, const HermitianForm& G);

enum class WeightSign { unstable, strictly_semistable, stable_compatible };
std::string to_string(WeightSign s);

struct WeightReport {
  Mu1 m1;
  long long mu2 = 0;
  Rational epsilon;
  Rational mu_total;
  WeightSign sign = WeightSign::stable_compatible;
  std::optional<MaximalWeight> maximal;
  std::vector<int> subsheaf;
};

WeightReport total_weight(const OneParamSubgroup& lambda, const HiggsInstance& inst, int k, const QuantParams& params,
                          std::uint64_t seed = 0);
WeightReport subsheaf_weight(const HiggsInstance& inst, int k, const std::vector<int>& S, const QuantParams& params,
                             std::uint64_t seed = 0);

}  // namespace hb
