#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hb/geometry.hpp"
#include "hb/types.hpp"

namespace hb {

struct TwistBundle {
  int m = 0;
};

// E = O(d_1) + ... + O(d_r) with d_1 >= ... >= d_r.
struct SplitBundle {
  std::vector<int> degrees;

  int rank() const { return static_cast<int>(degrees.size()); }
  int degree() const;
  int min_degree() const;
};

// r x r matrix of polynomials; entry (i, j) maps the j-th summand of M (x) E to
// the i-th summand and has e_ij + 1 ascending coefficients, or none when zero.
class HiggsField {
 public:
  HiggsField() = default;
  explicit HiggsField(int r) : r_(r), entries_(static_cast<std::size_t>(r) * r) {}

  int rank() const { return r_; }
  const std::vector<cplx>& entry(int i, int j) const { return entries_[idx(i, j)]; }
  std::vector<cplx>& entry(int i, int j) { return entries_[idx(i, j)]; }
  bool is_zero() const;

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * r_ + j; }
  int r_ = 0;
  std::vector<std::vector<cplx>> entries_;
};

struct HiggsInstance {
  TwistBundle twist;
  SplitBundle bundle;
  HiggsField phi;
  std::string label;

  int rank() const { return bundle.rank(); }
  // e_ij = d_i - d_j - m; entry (i, j) may be nonzero only when e_ij >= 0.
  int exponent(int i, int j) const { return bundle.degrees[i] - bundle.degrees[j] - twist.m; }

  // Phi in the holomorphic chart frames of E and M.
  Mat evaluate(const ChartPoint& p) const;
  // Phi in the frames that are unitary for the Fubini-Study reference metrics.
  Mat evaluate_reference(const ChartPoint& p) const;
};

HiggsInstance make_instance(int m, std::vector<int> degrees, const std::vector<std::vector<std::vector<cplx>>>& phi,
                            std::string label = "");

struct Diagnostics {
  bool valid = true;
  bool zero_higgs = false;
  std::vector<std::string> violations;
};

Diagnostics validate(const HiggsInstance& inst);
// Throws InvalidInput listing the violations.
void require_valid(const HiggsInstance& inst);

// Smallest k with d_i + k >= 0 for every summand.
int min_admissible_level(const SplitBundle& E);
void require_admissible(const SplitBundle& E, int k);

long long hilbert_value(const SplitBundle& E, int k);
SplitBundle sub_bundle(const SplitBundle& E, const std::vector<int>& summands);

// Subsets are 0-based summand indices.
bool is_invariant_summand_set(const HiggsInstance& inst, const std::vector<int>& S);

enum class Stability { unstable, strictly_semistable, polystable, stable };
std::string to_string(Stability s);

struct Witness {
  std::vector<int> summands;  // empty for an eigen-line witness
  Rational margin;            // reduced Hilbert value of F minus that of E
  std::string kind;           // "summand" or "eigen"
  bool splits = false;        // a phi-invariant complement of the same slope exists
  Stability verdict = Stability::stable;
  bool heuristic = false;
};

std::optional<Witness> destabilizing_witness(const HiggsInstance& inst, int k);
Stability stability_verdict(const HiggsInstance& inst, int k, bool* heuristic = nullptr);

}  // namespace hb
