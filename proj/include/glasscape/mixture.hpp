#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <locale>
#include <map>
#include <sstream>
#include <string>

#include "glasscape/errors.hpp"

namespace glasscape {

inline constexpr int kDefaultDegreeCap = 64;

/**
 * Mixture polynomial nu(x) = sum_p c_p x^p with c_p >= 0 and p >= 2.
 * The stored coefficients are the squared disorder weights.
 */
class Mixture {
 public:
  Mixture() = default;

  static Mixture from_terms(const std::map<int, double>& terms, bool normalize = true,
                            int degree_cap = kDefaultDegreeCap) {
    Mixture m;
    double dropped = 0.0;
    for (auto [p, c] : terms) {
      if (p < 2) throw UsageError("mixture degree must be >= 2, got " + std::to_string(p));
      if (!(c >= 0.0) || !std::isfinite(c)) throw UsageError("mixture coefficient must be finite and >= 0");
      if (p > degree_cap) {
        dropped += c;
        continue;
      }
      if (c > 0.0) m.coeffs_[p] = c;
    }
    if (m.coeffs_.empty()) throw UsageError("mixture needs at least one positive coefficient");
    if (normalize) {
      double s = m.value(1.0);
      for (auto& [p, c] : m.coeffs_) c /= s;
      dropped /= s;
    }
    m.normalized_ = normalize;
    m.dropped_tail_ = dropped;
    return m;
  }

  const std::map<int, double>& coeffs() const { return coeffs_; }
  double coeff(int p) const {
    auto it = coeffs_.find(p);
    return it == coeffs_.end() ? 0.0 : it->second;
  }
  int max_degree() const { return coeffs_.rbegin()->first; }
  bool normalized() const { return normalized_; }
  /// Weight discarded by the degree cap, relative to nu(1).
  double dropped_tail() const { return dropped_tail_; }

  bool is_pure() const { return coeffs_.size() == 1; }
  int pure_degree() const { return coeffs_.begin()->first; }
  bool is_even() const {
    for (auto& [p, c] : coeffs_)
      if (p % 2) return false;
    return true;
  }

  double value(double x) const { return derivative(x, 0); }

  /// k-th derivative, k <= 4.
  double derivative(double x, int k) const {
    if (k < 0 || k > 4) throw UnsupportedOrder("mixture derivative order must be in 0..4");
    double s = 0.0;
    for (auto [p, c] : coeffs_) {
      if (p < k) continue;
      double f = 1.0;
      for (int j = 0; j < k; ++j) f *= p - j;
      s += c * f * std::pow(x, p - k);
    }
    return s;
  }

  double operator()(double x, int k = 0) const { return derivative(x, k); }

  /// nu_q(x) = nu(q^2 x), kept unnormalized.
  Mixture scaled(double q) const {
    Mixture m = *this;
    for (auto& [p, c] : m.coeffs_) c *= std::pow(q, 2 * p);
    m.normalized_ = false;
    return m;
  }

 private:
  std::map<int, double> coeffs_;
  bool normalized_ = false;
  double dropped_tail_ = 0.0;
};

inline double eval(const Mixture& m, double x, int k) { return m.derivative(x, k); }

/// sum_p |c_p - c'_p| p^4
inline double norm_distance(const Mixture& a, const Mixture& b) {
  std::map<int, double> diff;
  for (auto [p, c] : a.coeffs()) diff[p] += c;
  for (auto [p, c] : b.coeffs()) diff[p] -= c;
  double s = 0.0;
  for (auto [p, d] : diff) s += std::abs(d) * std::pow(static_cast<double>(p), 4);
  return s;
}

/// (1-eps) x^p + eps x^partner
inline Mixture perturb_pure(int p, double eps, int partner_degree) {
  if (p < 3) throw UsageError("perturb_pure needs p >= 3");
  if (partner_degree < 2 || partner_degree == p) throw UsageError("partner degree must be >= 2 and differ from p");
  if (!(eps >= 0.0 && eps < 1.0)) throw UsageError("eps must lie in [0,1)");
  std::map<int, double> t{{p, 1.0 - eps}};
  if (eps > 0.0) t[partner_degree] = eps;
  return Mixture::from_terms(t, true);
}

/// Reads `p value` lines, `#` comments and an optional `normalize true|false` line.
inline Mixture parse_mixture(std::istream& in) {
  std::map<int, double> terms;
  bool normalize = true;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::string head;
    if (!(ls >> head)) continue;
    auto where = " on line " + std::to_string(lineno);
    if (head == "normalize") {
      std::string v;
      ls >> v;
      if (v == "true") normalize = true;
      else if (v == "false") normalize = false;
      else throw UsageError("normalize expects true or false" + where);
      continue;
    }
    int p = 0;
    double c = 0.0;
    try {
      std::size_t used = 0;
      p = std::stoi(head, &used);
      if (used != head.size()) throw std::invalid_argument(head);
    } catch (const std::exception&) {
      throw UsageError("bad degree '" + head + "'" + where);
    }
    if (!(ls >> c)) throw UsageError("missing coefficient" + where);
    std::string extra;
    if (ls >> extra) throw UsageError("trailing text" + where);
    if (p < 2) throw UsageError("degree below 2" + where);
    if (c < 0.0) throw UsageError("negative coefficient" + where);
    if (!terms.emplace(p, c).second) throw UsageError("duplicate degree " + std::to_string(p) + where);
  }
  return Mixture::from_terms(terms, normalize);
}

inline Mixture load_mixture(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open mixture file " + path);
  return parse_mixture(f);
}

}  // namespace glasscape
