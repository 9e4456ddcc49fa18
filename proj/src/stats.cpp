#include "recdp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "recdp/errors.hpp"

namespace recdp {

namespace {

// lgamma(a + 0.5) - lgamma(a). Direct subtraction loses ~|lgamma(a)| * eps
// absolute accuracy, which blows past 1e-12 for a in the thousands, so for
// large a the difference is evaluated by its asymptotic expansion.
double lgamma_half_step(double a) {
  if (a < 30.0) return std::lgamma(a + 0.5) - std::lgamma(a);
  const double b = a + 0.5;
  double d = a * std::log1p(0.5 / a) + 0.5 * std::log(a) - 0.5;
  d += (1.0 / 12.0) * (1.0 / b - 1.0 / a);
  d -= (1.0 / 360.0) * (1.0 / (b * b * b) - 1.0 / (a * a * a));
  d += (1.0 / 1260.0) *
       (1.0 / (b * b * b * b * b) - 1.0 / (a * a * a * a * a));
  return d;
}

// ln B(a, 1/2)
double lbeta_half(double a) {
  constexpr double half_log_pi = 0.572364942924700087071713675677;  // ln(sqrt(pi))
  return half_log_pi - lgamma_half_step(a);
}

// Continued fraction for the regularized incomplete beta (Lentz).
double betacf(double a, double b, double x) {
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double student_two_tail(double t, std::int64_t df) {
  if (df < 1) throw ConfigError("degrees of freedom must be >= 1");
  if (t == 0.0) return 1.0;
  const double t2 = t * t;
  const double dfd = static_cast<double>(df);
  const double a = dfd / 2.0;
  const double x = dfd / (dfd + t2);       // argument of I_x(a, 1/2)
  const double lnx = -std::log1p(t2 / dfd);  // ln x without cancellation
  const double ln1mx = std::log(t2) - std::log(dfd + t2);
  const double lfront = a * lnx + 0.5 * ln1mx - lbeta_half(a);
  // p = I_x(a, 1/2); pick the branch whose continued fraction converges
  if (x < (a + 1.0) / (a + 2.5)) {
    return std::min(1.0, std::exp(lfront) * betacf(a, 0.5, x) / a);
  }
  const double y = t2 / (dfd + t2);  // 1 - x
  const double tail = std::exp(lfront) * betacf(0.5, a, y) / 0.5;
  return std::min(1.0, 1.0 - tail);
}

double paired_t_test(std::span<const double> x, std::span<const double> y,
                     bool one_tailed) {
  if (x.size() != y.size())
    throw InsufficientDataError("paired samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientDataError("paired t-test needs n >= 2");

  double mean = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    if (d != 0.0) all_zero = false;
    mean += d;
  }
  mean /= static_cast<double>(n);
  if (all_zero) return 1.0;

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (x[i] - y[i]) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return std::numeric_limits<double>::denorm_min();

  const double t = std::fabs(mean) * std::sqrt(static_cast<double>(n)) / sd;
  const double p = student_two_tail(t, static_cast<std::int64_t>(n - 1));
  return one_tailed ? p / 2.0 : p;
}

PValueCurve build_curve(std::vector<std::vector<double>> per_fold_pvalues) {
  if (per_fold_pvalues.empty())
    throw InsufficientDataError("curve needs at least one fold");
  const std::size_t m = per_fold_pvalues.front().size();
  for (auto& fold : per_fold_pvalues) {
    if (fold.size() != m)
      throw InsufficientDataError("folds contribute unequal p-value counts");
    std::sort(fold.begin(), fold.end(), std::greater<double>());
  }
  PValueCurve c;
  c.m = m;
  c.per_fold = std::move(per_fold_pvalues);
  c.mean.resize(m);
  c.sigma.resize(m);
  const double nf = static_cast<double>(c.per_fold.size());
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (const auto& fold : c.per_fold) s += fold[r];
    c.mean[r] = s / nf;
    double ss = 0.0;
    for (const auto& fold : c.per_fold) {
      const double d = fold[r] - c.mean[r];
      ss += d * d;
    }
    c.sigma[r] = c.per_fold.size() > 1 ? std::sqrt(ss / (nf - 1.0)) : 0.0;
  }
  return c;
}

DpValue discriminative_power(const PValueCurve& curve) {
  DpValue v;
  for (std::size_t r = 0; r < curve.m; ++r) {
    v.dp += curve.mean[r];
    v.dp_plus_sigma += std::min(1.0, curve.mean[r] + curve.sigma[r]);
  }
  return v;
}

}  // namespace recdp
