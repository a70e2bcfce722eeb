#pragma once

#include <cstdint>
#include <vector>

namespace simperc {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for a binomial proportion, z = 1.96 (95%).
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t n,
                               double z = 1.96);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
};

LinearFit linear_fit(const std::vector<double>& xs,
                     const std::vector<double>& ys);

}  // namespace simperc
