#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace recdp {

// Two-tailed p-value of Student's t with `df` degrees of freedom,
// p = I_{df/(df+t^2)}(df/2, 1/2) via a Lentz continued fraction.
double student_two_tail(double t, std::int64_t df);

// Paired Student's t-test on user-aligned samples. Conventions:
//   all differences exactly 0        -> p = 1.0
//   zero variance, nonzero mean      -> smallest positive double
// `one_tailed` halves the two-tailed p (the all-zero case stays 1.0).
double paired_t_test(std::span<const double> x, std::span<const double> y,
                     bool one_tailed = false);

// Sorted p-value curve: per fold the m p-values sorted descending, plus the
// rank-wise mean and sample standard deviation across folds.
struct PValueCurve {
  std::string metric;
  std::size_t m = 0;
  std::vector<std::vector<double>> per_fold;  // each sorted descending
  std::vector<double> mean;
  std::vector<double> sigma;
};

// Every fold must contribute the same number of p-values.
PValueCurve build_curve(std::vector<std::vector<double>> per_fold_pvalues);

// dp = sum of the mean curve; dp_plus_sigma = sum of min(1, mean + sigma).
struct DpValue {
  double dp = 0.0;
  double dp_plus_sigma = 0.0;
};
DpValue discriminative_power(const PValueCurve& curve);

}  // namespace recdp
