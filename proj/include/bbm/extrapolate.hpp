#pragma once

#include <vector>

namespace bbm {

struct LinearFit {
  double a = 0.0;
  double b = 0.0;
  double a_se = 0.0;
  double rss = 0.0;
};

/// Weighted least squares y = a + b t. Empty weights means uniform.
LinearFit fit_linear(const std::vector<double>& t, const std::vector<double>& y,
                     const std::vector<double>& w = {});

struct ExtrapolationSample {
  double delta = 0.0;
  double value = 0.0;
  double error = 0.0;
};

enum class ExtrapolationModel { linear, free_gamma };

struct Extrapolation {
  double limit = 0.0;
  double uncertainty = 0.0;
  double slope = 0.0;
  double gamma = 1.0;
  double residual = 0.0;
  /// Value at the smallest delta, unextrapolated.
  double smallest_delta_value = 0.0;
};

/// Fits value = a + b delta^gamma (gamma = 1 for the linear model, fitted
/// otherwise) by weighted least squares and returns a as the delta -> 0
/// limit. Weights are 1/error^2 when every sample carries a positive error.
/// Throws InputError with fewer than 3 (linear) or 4 (free gamma) samples.
Extrapolation extrapolate(std::vector<ExtrapolationSample> samples,
                          ExtrapolationModel model = ExtrapolationModel::linear);

}  // namespace bbm
