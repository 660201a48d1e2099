#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "glasscape/errors.hpp"
#include "glasscape/mixture.hpp"

namespace glasscape {

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream key derived from a seed and up to two labels.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

/// Uniform in (0,1) at a counter position of a keyed stream.
inline double uniform_open(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(splitmix64(key ^ splitmix64(counter)) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard Gaussian at a counter position (Box-Muller on two uniforms).
inline double gaussian(std::uint64_t key, std::uint64_t counter) {
  double u1 = uniform_open(key, 2 * counter), u2 = uniform_open(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

/// Which tensor representations an instance keeps.
enum class TensorForms {
  /// i.i.d. arrays only; energies by direct contraction.
  raw,
  /// symmetrized full and packed arrays; gradients and Hessians available.
  symmetric
};

inline constexpr std::uint64_t kTensorEntryCap = std::uint64_t{1} << 31;

struct Evaluation {
  double energy = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/**
 * Sampled Hamiltonian H(x) = sum_p gamma_p N^{-(p-1)/2} sum_t J_t x_t1 ... x_tp
 * with i.i.d. standard Gaussian J over all index tuples.
 */
class HamiltonianInstance {
 public:
  HamiltonianInstance(const Mixture& m, int n, std::uint64_t seed, TensorForms forms = TensorForms::symmetric,
                      std::uint64_t entry_cap = kTensorEntryCap)
      : mixture_(m), n_(n), seed_(seed), forms_(forms) {
    if (n < 2) throw UsageError("dimension must be at least 2");
    for (auto [p, c] : m.coeffs()) {
      double entries = std::pow(static_cast<double>(n), p);
      if (entries > static_cast<double>(entry_cap))
        throw ResourceError("tensor of degree " + std::to_string(p) + " exceeds the memory cap");
      Degree d;
      d.p = p;
      d.weight = std::sqrt(c) / std::pow(static_cast<double>(n), 0.5 * (p - 1));
      fill(d);
      degrees_.push_back(std::move(d));
    }
  }

  int n() const { return n_; }
  const Mixture& mixture() const { return mixture_; }
  std::uint64_t seed() const { return seed_; }
  TensorForms forms() const { return forms_; }

  double energy(const Eigen::VectorXd& x) const {
    check_point(x);
    double e = 0.0;
    for (const auto& d : degrees_) e += d.weight * (forms_ == TensorForms::raw ? contract_raw(d, x) : contract_packed(d, x));
    return e;
  }

  /// Energy, Euclidean gradient (order >= 1) and Euclidean Hessian (order 2).
  Evaluation evaluate(const Eigen::VectorXd& x, int order) const {
    check_point(x);
    if (order < 0 || order > 2) throw UnsupportedOrder("evaluation order must be 0, 1 or 2");
    Evaluation ev;
    if (order == 0) {
      ev.energy = energy(x);
      return ev;
    }
    if (forms_ == TensorForms::raw) throw PreconditionError("derivatives need the symmetric tensor forms");
    ev.gradient = Eigen::VectorXd::Zero(n_);
    if (order == 2) ev.hessian = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& d : degrees_) {
      Eigen::MatrixXd w = two_form(d, x);
      Eigen::VectorXd wx = w * x;
      ev.energy += d.weight * x.dot(wx);
      ev.gradient += (d.weight * d.p) * wx;
      if (order == 2) ev.hessian += (d.weight * d.p * (d.p - 1)) * w;
    }
    return ev;
  }

 private:
  struct Degree {
    int p = 0;
    double weight = 0.0;
    std::vector<double> raw;
    /// Full symmetric array, first index fastest.
    std::vector<double> sym;
    /// Sums over distinct permutations, indexed by sorted tuples in lexicographic order.
    std::vector<double> packed;
  };

  void check_point(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw UsageError("point dimension does not match the instance");
  }

  void fill(Degree& d) const {
    const std::size_t total = ipow(n_, d.p);
    const std::uint64_t key = rng::stream_key(seed_, static_cast<std::uint64_t>(d.p));
    std::vector<double> raw(total);
    for (std::size_t t = 0; t < total; ++t) raw[t] = rng::gaussian(key, t);
    if (forms_ == TensorForms::raw) {
      d.raw = std::move(raw);
      return;
    }
    // rank of every sorted tuple, in the order the packed loops visit them
    std::vector<int> idx(d.p);
    std::vector<std::size_t> rank_of(total, 0);
    std::size_t count = 0;
    enumerate_sorted(d.p, [&](const std::vector<int>& s) { rank_of[flat(s)] = count++; });
    d.packed.assign(count, 0.0);
    std::vector<int> multiplicity(count, 0);
    for (std::size_t t = 0; t < total; ++t) {
      unflat(t, idx);
      std::sort(idx.begin(), idx.end());
      std::size_t r = rank_of[flat(idx)];
      d.packed[r] += raw[t];
      ++multiplicity[r];
    }
    d.sym.resize(total);
    for (std::size_t t = 0; t < total; ++t) {
      unflat(t, idx);
      std::sort(idx.begin(), idx.end());
      std::size_t r = rank_of[flat(idx)];
      d.sym[t] = d.packed[r] / multiplicity[r];
    }
  }

  static std::size_t ipow(int base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
    return r;
  }

  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t t = 0;
    for (int k = static_cast<int>(idx.size()) - 1; k >= 0; --k) t = t * n_ + idx[k];
    return t;
  }

  void unflat(std::size_t t, std::vector<int>& idx) const {
    for (auto& i : idx) {
      i = static_cast<int>(t % n_);
      t /= n_;
    }
  }

  template <class F>
  void enumerate_sorted(int p, F&& f) const {
    std::vector<int> s(p, 0);
    while (true) {
      f(s);
      int k = p - 1;
      while (k >= 0 && s[k] == n_ - 1) --k;
      if (k < 0) return;
      ++s[k];
      for (int j = k + 1; j < p; ++j) s[j] = s[k];
    }
  }

  double contract_raw(const Degree& d, const Eigen::VectorXd& x) const {
    // fold the first index repeatedly: v <- reshape(v) * x
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(d.raw.data(), static_cast<Eigen::Index>(d.raw.size()));
    for (int k = 0; k < d.p; ++k) {
      Eigen::Index cols = v.size() / n_;
      v = Eigen::Map<const Eigen::MatrixXd>(v.data(), n_, cols).transpose() * x;
    }
    return v(0);
  }

  double contract_packed(const Degree& d, const Eigen::VectorXd& x) const {
    const double* t = d.packed.data();
    const int n = n_;
    double s = 0.0;
    switch (d.p) {
      case 2:
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) s += *t++ * x[i] * x[j];
        return s;
      case 3:
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double a = x[i] * x[j], inner = 0.0;
            for (int k = j; k < n; ++k) inner += *t++ * x[k];
            s += a * inner;
          }
        return s;
      case 4:
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double a = x[i] * x[j];
            for (int k = j; k < n; ++k) {
              double b = a * x[k], inner = 0.0;
              for (int l = k; l < n; ++l) inner += *t++ * x[l];
              s += b * inner;
            }
          }
        return s;
      default: {
        std::size_t r = 0;
        enumerate_sorted(d.p, [&](const std::vector<int>& idx) {
          double m = d.packed[r++];
          for (int i : idx) m *= x[i];
          s += m;
        });
        return s;
      }
    }
  }

  /// W with W_ij = sum over the remaining indices of S_ij... x ... x.
  Eigen::MatrixXd two_form(const Degree& d, const Eigen::VectorXd& x) const {
    const Eigen::Index nn = static_cast<Eigen::Index>(n_) * n_;
    Eigen::Map<const Eigen::MatrixXd> s(d.sym.data(), nn, static_cast<Eigen::Index>(d.sym.size()) / nn);
    Eigen::VectorXd kron = Eigen::VectorXd::Ones(1);
    for (int k = 2; k < d.p; ++k) {
      Eigen::VectorXd next(kron.size() * n_);
      for (Eigen::Index j = 0; j < n_; ++j) next.segment(j * kron.size(), kron.size()) = x[j] * kron;
      kron = std::move(next);
    }
    Eigen::VectorXd w = s * kron;
    return Eigen::Map<Eigen::MatrixXd>(w.data(), n_, n_);
  }

  Mixture mixture_;
  int n_;
  std::uint64_t seed_;
  TensorForms forms_;
  std::vector<Degree> degrees_;
};

inline HamiltonianInstance sample_hamiltonian(const Mixture& m, int n, std::uint64_t seed,
                                              TensorForms forms = TensorForms::symmetric) {
  return HamiltonianInstance(m, n, seed, forms);
}

/// Overlap <a,b>/(|a||b|).
inline double overlap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

/// Uniform point on the sphere of radius sqrt(N), from a keyed stream.
inline Eigen::VectorXd sphere_point(int n, std::uint64_t key) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng::gaussian(key, static_cast<std::uint64_t>(i));
  return v * (std::sqrt(static_cast<double>(n)) / v.norm());
}

}  // namespace glasscape
