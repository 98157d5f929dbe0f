#include "hb/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hb {

int SplitBundle::degree() const { return std::accumulate(degrees.begin(), degrees.end(), 0); }

int SplitBundle::min_degree() const { return *std::min_element(degrees.begin(), degrees.end()); }

bool HiggsField::is_zero() const {
  for (const auto& e : entries_)
    for (const auto& c : e)
      if (c != cplx(0.0)) return false;
  return true;
}

Mat HiggsInstance::evaluate(const ChartPoint& p) const {
  const int r = rank();
  Mat out = Mat::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const auto& c = phi.entry(i, j);
      if (c.empty()) continue;
      const int e = exponent(i, j);
      cplx acc = 0.0;
      // Horner in the chart variable; chart 1 reverses the coefficient order.
      for (int a = e; a >= 0; --a) acc = acc * p.z + c[p.chart == 0 ? a : e - a];
      out(i, j) = acc;
    }
  }
  return out;
}

Mat HiggsInstance::evaluate_reference(const ChartPoint& p) const {
  Mat out = evaluate(p);
  const double s = 1.0 + std::norm(p.z);
  for (int i = 0; i < rank(); ++i)
    for (int j = 0; j < rank(); ++j)
      if (out(i, j) != cplx(0.0)) out(i, j) *= std::pow(s, -0.5 * exponent(i, j));
  return out;
}

HiggsInstance make_instance(int m, std::vector<int> degrees, const std::vector<std::vector<std::vector<cplx>>>& phi,
                            std::string label) {
  HiggsInstance inst;
  inst.twist.m = m;
  inst.bundle.degrees = std::move(degrees);
  const int r = inst.rank();
  inst.phi = HiggsField(r);
  if (!phi.empty()) {
    if (static_cast<int>(phi.size()) != r) throw InvalidInput("Higgs matrix must have one row per summand");
    for (int i = 0; i < r; ++i) {
      if (static_cast<int>(phi[i].size()) != r) throw InvalidInput("Higgs matrix must be square");
      for (int j = 0; j < r; ++j) inst.phi.entry(i, j) = phi[i][j];
    }
  }
  inst.label = std::move(label);
  return inst;
}

Diagnostics validate(const HiggsInstance& inst) {
  Diagnostics d;
  auto fail = [&](const std::string& msg) {
    d.valid = false;
    d.violations.push_back(msg);
  };
  const auto& deg = inst.bundle.degrees;
  if (deg.empty()) fail("bundle has no summands");
  if (!std::is_sorted(deg.begin(), deg.end(), std::greater<int>())) fail("bundle degrees must be sorted descending");
  if (inst.twist.m < 0) fail("twist degree must be nonnegative");
  if (inst.phi.rank() != inst.rank()) {
    fail("Higgs matrix rank does not match the bundle rank");
    return d;
  }
  for (int i = 0; i < inst.rank(); ++i) {
    for (int j = 0; j < inst.rank(); ++j) {
      const auto& c = inst.phi.entry(i, j);
      if (c.empty()) continue;
      const int e = inst.exponent(i, j);
      std::ostringstream where;
      where << "entry (" << i + 1 << "," << j + 1 << ")";
      if (e < 0) {
        fail(where.str() + " must be zero since d_i - d_j - m = " + std::to_string(e) + " < 0");
      } else if (static_cast<int>(c.size()) != e + 1) {
        fail(where.str() + " needs " + std::to_string(e + 1) + " coefficients, got " + std::to_string(c.size()));
      }
      for (const auto& v : c)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fail(where.str() + " has a non-finite coefficient");
    }
  }
  d.zero_higgs = inst.phi.is_zero();
  return d;
}

void require_valid(const HiggsInstance& inst) {
  Diagnostics d = validate(inst);
  if (d.valid) return;
  std::string msg = "invalid Higgs instance:";
  for (const auto& v : d.violations) msg += " " + v + ";";
  throw InvalidInput(msg);
}

int min_admissible_level(const SplitBundle& E) { return -E.min_degree(); }

void require_admissible(const SplitBundle& E, int k) {
  if (E.degrees.empty()) throw InvalidInput("bundle has no summands");
  if (k < min_admissible_level(E))
    throw InadmissibleLevel("level k = " + std::to_string(k) + " is below " + std::to_string(min_admissible_level(E)));
}

long long hilbert_value(const SplitBundle& E, int k) {
  require_admissible(E, k);
  long long h = 0;
  for (int d : E.degrees) h += d + k + 1;
  return h;
}

SplitBundle sub_bundle(const SplitBundle& E, const std::vector<int>& summands) {
  SplitBundle F;
  for (int i : summands) F.degrees.push_back(E.degrees.at(i));
  return F;
}

namespace {

void check_subset(const std::vector<int>& S, int r) {
  if (S.empty() || static_cast<int>(S.size()) >= r) throw InvalidInput("summand subset must be nonempty and proper");
  std::vector<int> sorted = S;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw InvalidInput("repeated summand index");
  if (sorted.front() < 0 || sorted.back() >= r) throw InvalidInput("summand index out of range");
}

bool entry_nonzero(const HiggsField& phi, int i, int j) {
  for (const auto& c : phi.entry(i, j))
    if (c != cplx(0.0)) return true;
  return false;
}

Rational reduced(const SplitBundle& E, int k) { return Rational(hilbert_value(E, k), E.rank()); }

}  // namespace

bool is_invariant_summand_set(const HiggsInstance& inst, const std::vector<int>& S) {
  const int r = inst.rank();
  check_subset(S, r);
  std::vector<bool> in(r, false);
  for (int i : S) in[i] = true;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (!in[i] && in[j] && entry_nonzero(inst.phi, i, j)) return false;
  return true;
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::unstable:
      return "unstable";
    case Stability::strictly_semistable:
      return "strictly_semistable";
    case Stability::polystable:
      return "polystable";
    case Stability::stable:
      return "stable";
  }
  return "unknown";
}

std::optional<Witness> destabilizing_witness(const HiggsInstance& inst, int k) {
  require_valid(inst);
  const int r = inst.rank();
  const Rational mean = reduced(inst.bundle, k);
  std::optional<Witness> best;
  for (unsigned mask = 1; mask + 1 < (1u << r); ++mask) {
    std::vector<int> S, rest;
    for (int i = 0; i < r; ++i) (mask >> i & 1u ? S : rest).push_back(i);
    if (!is_invariant_summand_set(inst, S)) continue;
    Rational margin = reduced(sub_bundle(inst.bundle, S), k) - mean;
    if (margin < Rational(0)) continue;
    if (!best || margin > best->margin) {
      Witness w;
      w.summands = S;
      w.margin = margin;
      w.kind = "summand";
      w.splits = margin == Rational(0) && is_invariant_summand_set(inst, rest);
      best = w;
    }
  }
  if (best && best->margin > Rational(0)) {
    best->verdict = Stability::unstable;
    return best;
  }

  const bool equal_degrees = std::all_of(inst.bundle.degrees.begin(), inst.bundle.degrees.end(),
                                         [&](int d) { return d == inst.bundle.degrees.front(); });
  if (r > 1 && inst.twist.m == 0 && equal_degrees) {
    // Constant phi: every eigenvector spans a phi-invariant copy of O(d).
    Eigen::ComplexEigenSolver<Mat> es(inst.evaluate(ChartPoint{}));
    Eigen::JacobiSVD<Mat> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    const bool diagonalizable = sv(sv.size() - 1) > 1e-8 * sv(0);
    Witness w;
    w.margin = 0;
    w.kind = "eigen";
    w.splits = diagonalizable;
    w.verdict = diagonalizable ? Stability::polystable : Stability::strictly_semistable;
    return w;
  }
  if (best) {
    best->verdict = best->splits ? Stability::polystable : Stability::strictly_semistable;
    best->heuristic = true;
  }
  return best;
}

Stability stability_verdict(const HiggsInstance& inst, int k, bool* heuristic) {
  auto w = destabilizing_witness(inst, k);
  const bool flag = w ? w->heuristic : inst.rank() > 1;
  if (heuristic) *heuristic = flag;
  return w ? w->verdict : Stability::stable;
}

}  // namespace hb
