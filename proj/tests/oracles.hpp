#pragma once

// Reference computations used by the tests. Each one avoids the library's
// solver code paths: plain long-double sums, QR least squares on the weighted
// convolution matrix, and iteratively reweighted least squares.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Coeffs = std::vector<cplx>;

inline double power_weight(std::size_t k, double alpha) { return std::pow(static_cast<double>(k + 1), alpha); }

inline std::vector<double> power_weights(std::size_t T, double alpha) {
  std::vector<double> w(T);
  for (std::size_t t = 0; t < T; ++t) w[t] = power_weight(t, alpha);
  return w;
}

/// max over k <= K, 0 <= t <= k+1 of max(w_{k+t}/w_k, w_k/w_{k+t}).
template <class W>
double brute_doubling(W w, std::size_t K) {
  double m = 1.0;
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t t = 0; t <= k + 1; ++t) {
      const double r = w(k + t) / w(k);
      m = std::max({m, r, 1.0 / r});
    }
  return m;
}

inline double lp_norm(const Coeffs& c, double p, const std::vector<double>& w) {
  long double s = 0;
  for (std::size_t t = 0; t < c.size(); ++t) s += std::pow(static_cast<long double>(std::abs(c[t])), p) * w[t];
  return static_cast<double>(std::pow(s, 1.0L / p));
}

inline Coeffs convolve(const Coeffs& a, const Coeffs& b) {
  Coeffs out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Coeffs residual(const Coeffs& P, const Coeffs& f) {
  Coeffs r = convolve(P, f);
  for (auto& x : r) x = -x;
  r[0] += 1.0;
  return r;
}

/// Closed form for 1 - z^d: coefficients of p_n and ||1 - (1 - z^d) p_n||^p,
/// from direct long-double sums over the dilated power weight.
struct ClosedForm {
  Coeffs coeffs;
  double norm_p_power;
};

inline ClosedForm closed_one_minus_zd(std::size_t d, std::size_t n, double p, double alpha) {
  const std::size_t N = n / d;
  const long double e = -static_cast<long double>(alpha) / (p - 1.0L);
  std::vector<long double> S(N + 2);
  long double acc = 0;
  for (std::size_t t = 0; t <= N + 1; ++t) {
    acc += std::pow(static_cast<long double>(d * t + 1), e);
    S[t] = acc;
  }
  ClosedForm cf;
  cf.coeffs.assign(n + 1, 0.0);
  for (std::size_t t = 0; t <= N; ++t) cf.coeffs[d * t] = static_cast<double>(1.0L - S[t] / S[N + 1]);
  cf.norm_p_power = static_cast<double>(std::pow(S[N + 1], 1.0L - p));
  return cf;
}

/// Weighted least squares min || W^{1/2} (e_0 - M c) || by Householder QR.
inline Coeffs weighted_lstsq(const Coeffs& f, std::size_t n, const std::vector<double>& w) {
  const auto T = static_cast<Eigen::Index>(n + f.size());
  const auto N = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(T, N);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(T);
  for (Eigen::Index k = 0; k < N; ++k)
    for (std::size_t i = 0; i < f.size(); ++i) A(k + static_cast<Eigen::Index>(i), k) = f[i];
  for (Eigen::Index t = 0; t < T; ++t) A.row(t) *= std::sqrt(w[static_cast<std::size_t>(t)]);
  b[0] = std::sqrt(w[0]);
  const Eigen::VectorXcd c = A.householderQr().solve(b);
  return Coeffs(c.data(), c.data() + c.size());
}

/// Minimizer of sum_t w_t |1 - P f|_t^p by iteratively reweighted least
/// squares. p > 2 uses the damped update with step 1/(p-1); p < 2 smooths
/// |r|^{p-2} by (|r|^2 + eps^2)^{(p-2)/2} with eps driven to zero.
inline Coeffs irls(const Coeffs& f, std::size_t n, double p, const std::vector<double>& w, int iters = 4000) {
  Coeffs c = weighted_lstsq(f, n, w);
  if (p == 2.0) return c;
  const std::size_t T = n + f.size();
  double eps = 1e-2;
  for (int it = 0; it < iters; ++it) {
    const Coeffs r = residual(c, f);
    std::vector<double> v(T);
    for (std::size_t t = 0; t < T; ++t) {
      const double m = std::abs(r[t]);
      v[t] = p > 2.0 ? w[t] * std::max(std::pow(m, p - 2.0), 1e-300) : w[t] * std::pow(m * m + eps * eps, (p - 2.0) / 2.0);
    }
    const Coeffs ls = weighted_lstsq(f, n, v);
    const double step = p > 2.0 ? 1.0 / (p - 1.0) : 1.0;
    double change = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const cplx next = c[k] + step * (ls[k] - c[k]);
      change = std::max(change, std::abs(next - c[k]));
      c[k] = next;
    }
    if (p < 2.0) eps = std::max(eps * 0.7, 1e-15);
    if (change < 1e-15 && (p > 2.0 || eps <= 1e-15)) break;
  }
  return c;
}

/// H_m = sum_{k=1}^m 1/k.
inline double harmonic(std::size_t m) {
  long double s = 0;
  for (std::size_t k = m; k >= 1; --k) s += 1.0L / static_cast<long double>(k);
  return static_cast<double>(s);
}

}  // namespace oracle
