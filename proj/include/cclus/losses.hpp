#pragma once

// Training-loss kernels for the two network heads, with analytic gradients.
// Inputs are flat double arrays so an external trainer can call them on its
// own buffers.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cclus/core.hpp"

namespace cclus {

struct FocalParams {
  std::vector<double> alpha = std::vector<double>(kPixelClassCount, 1.0);  ///< per class
  double gamma = 2.0;
};

struct LossValue {
  double value = 0.0;
  std::vector<double> gradient;  ///< same layout as the differentiated input
};

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean over pixels of -alpha_t * (1 - p_t)^gamma * log(p_t), where p_t is the
/// predicted probability of the pixel's true class (clamped to
/// [1e-7, 1 - 1e-7]) and alpha_t that class's weight. `predicted` and `truth`
/// hold `classes` entries per pixel; truth rows must be one-hot. The gradient
/// is with respect to `predicted`.
LossValue focal_loss(std::span<const double> predicted, std::span<const double> truth,
                     std::size_t classes, const FocalParams& params);

/// (1/N) * sum over pixels of mask * |D - D_hat|^2 with N the total pixel
/// count. Offsets are interleaved (dx, dy) per pixel; the gradient is with
/// respect to `predicted`.
LossValue offset_loss(std::span<const double> predicted, std::span<const double> truth,
                      const BinaryMask& piglet_mask);

LossValue offset_loss(const OffsetMap& predicted, const OffsetMap& truth,
                      const BinaryMask& piglet_mask);

/// lambda * l1 + (1 - lambda) * l2; lambda must lie in [0, 1].
double total_loss(double l1, double l2, double lambda);

struct GradCheckOptions {
  std::size_t cases = 50;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Test hook: perturbs one analytic gradient entry so the check must fail.
  bool corrupt = false;
};

struct GradCheckEntry {
  std::string loss;
  double max_rel_error = 0.0;
  std::size_t worst_case = 0;
  std::size_t worst_element = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;  ///< focal, offset, total
  bool passed = false;
};

/// Central finite differences against the analytic gradients on random inputs
/// (up to 8x8 pixels, 3 classes).
GradCheckReport gradient_check(const GradCheckOptions& options);

/// One line per loss with its max relative error and, for failures, where it
/// occurred; then an overall PASS/FAIL line.
std::string format_report(const GradCheckReport& report, double tolerance);

}  // namespace cclus
