// Independent numerical routines used only as test oracles. These are
// deliberately written against plain std containers, not Eigen, so that
// agreement with the library is evidence rather than tautology.

#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

Mat mat_identity(std::size_t n);
Mat mat_mul(const Mat& a, const Mat& b);
// Scaling-and-squaring with a plain Taylor series.
Mat mat_exp(const Mat& a);

// Roots of a monic polynomial z^p + c[0] z^{p-1} + ... + c[p-1] via
// Durand-Kerner iteration.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& c);

double simpson(const std::function<double(double)>& f, double a, double b,
               int n_panels);

// One-sample Kolmogorov-Smirnov statistic; cdf must be the hypothesised CDF.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

double normal_cdf(double x);

// Exact Gaussian AR(1) log likelihood with stationary initial condition:
// y_{k+1} = phi y_k + eps, eps ~ N(innov_mean, innov_var).
double ar1_loglik(const std::vector<double>& y, double phi, double innov_mean,
                  double innov_var);

double iid_gauss_loglik(const std::vector<double>& y, double mean,
                        double var);

double mean_of(const std::vector<double>& y);
double variance_of(const std::vector<double>& y);
double autocorr_of(const std::vector<double>& y, int lag);
double median_of(std::vector<double> y);

}  // namespace oracle
