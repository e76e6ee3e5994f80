#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

Mat mat_identity(std::size_t n) {
  Mat m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

Mat mat_mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size(), k = b.size(), m = b[0].size();
  Mat out(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double aij = a[i][j];
      if (aij == 0.0) continue;
      for (std::size_t l = 0; l < m; ++l) out[i][l] += aij * b[j][l];
    }
  return out;
}

static double inf_norm(const Mat& a) {
  double best = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

Mat mat_exp(const Mat& a) {
  const std::size_t n = a.size();
  int squarings = 0;
  double norm = inf_norm(a);
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  Mat x(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x[i][j] = a[i][j] * scale;

  Mat result = mat_identity(n);
  Mat term = mat_identity(n);
  for (int k = 1; k <= 40; ++k) {
    term = mat_mul(term, x);
    double max_term = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        term[i][j] /= static_cast<double>(k);
        result[i][j] += term[i][j];
        max_term = std::max(max_term, std::abs(term[i][j]));
      }
    if (max_term < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = mat_mul(result, result);
  return result;
}

std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
  const std::size_t p = c.size();
  using C = std::complex<double>;
  auto eval = [&](C z) {
    C acc(1.0, 0.0);
    for (double coef : c) acc = acc * z + coef;
    return acc;
  };
  std::vector<C> roots(p);
  for (std::size_t i = 0; i < p; ++i)
    roots[i] = std::pow(C(0.4, 0.9), static_cast<double>(i + 1));
  for (int iter = 0; iter < 500; ++iter) {
    double shift = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      C denom(1.0, 0.0);
      for (std::size_t j = 0; j < p; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      C delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      shift = std::max(shift, std::abs(delta));
    }
    if (shift < 1e-14) break;
  }
  return roots;
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int n_panels) {
  if (n_panels < 1) throw std::invalid_argument("simpson: panels");
  const double h = (b - a) / (2.0 * n_panels);
  double acc = f(a) + f(b);
  for (int k = 1; k < 2 * n_panels; ++k)
    acc += f(a + h * k) * ((k % 2 == 1) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double c = cdf(samples[i]);
    d = std::max(d, std::abs(c - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
  }
  return d;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ar1_loglik(const std::vector<double>& y, double phi, double innov_mean,
                  double innov_var) {
  const double two_pi = 6.283185307179586476925286766559;
  const double stat_mean = innov_mean / (1.0 - phi);
  const double stat_var = innov_var / (1.0 - phi * phi);
  double ll = -0.5 * (std::log(two_pi * stat_var) +
                      (y[0] - stat_mean) * (y[0] - stat_mean) / stat_var);
  for (std::size_t k = 1; k < y.size(); ++k) {
    const double resid = y[k] - phi * y[k - 1] - innov_mean;
    ll -= 0.5 * (std::log(two_pi * innov_var) + resid * resid / innov_var);
  }
  return ll;
}

double iid_gauss_loglik(const std::vector<double>& y, double mean,
                        double var) {
  const double two_pi = 6.283185307179586476925286766559;
  double ll = 0.0;
  for (double v : y)
    ll -= 0.5 * (std::log(two_pi * var) + (v - mean) * (v - mean) / var);
  return ll;
}

double mean_of(const std::vector<double>& y) {
  double s = 0.0;
  for (double v : y) s += v;
  return s / static_cast<double>(y.size());
}

double variance_of(const std::vector<double>& y) {
  const double m = mean_of(y);
  double s = 0.0;
  for (double v : y) s += (v - m) * (v - m);
  return s / static_cast<double>(y.size() - 1);
}

double autocorr_of(const std::vector<double>& y, int lag) {
  const double m = mean_of(y);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    den += (y[k] - m) * (y[k] - m);
    if (k + lag < y.size()) num += (y[k] - m) * (y[k + lag] - m);
  }
  return num / den;
}

double median_of(std::vector<double> y) {
  std::sort(y.begin(), y.end());
  const std::size_t n = y.size();
  if (n % 2 == 1) return y[n / 2];
  return 0.5 * (y[n / 2 - 1] + y[n / 2]);
}

}  // namespace oracle
