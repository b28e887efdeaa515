#include "cclus/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

namespace cclus {

LossValue focal_loss(std::span<const double> predicted, std::span<const double> truth,
                     std::size_t classes, const FocalParams& params) {
  if (classes == 0) throw std::invalid_argument("focal loss needs at least one class");
  if (predicted.size() != truth.size() || predicted.size() % classes != 0) {
    throw DimensionError("focal loss: predicted/truth shapes do not match");
  }
  if (params.alpha.size() != classes) {
    throw DimensionError("focal loss: alpha has " + std::to_string(params.alpha.size()) +
                         " weights for " + std::to_string(classes) + " classes");
  }
  if (!(params.gamma >= 0.0) || !std::isfinite(params.gamma)) {
    throw std::invalid_argument("focal loss: gamma must be finite and non-negative");
  }
  for (const double a : params.alpha) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("focal loss: alpha must be finite and non-negative");
    }
  }

  const std::size_t pixels = predicted.size() / classes;
  LossValue out;
  out.gradient.assign(predicted.size(), 0.0);
  if (pixels == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(pixels);
  const double gamma = params.gamma;

  for (std::size_t x = 0; x < pixels; ++x) {
    const double* t = truth.data() + x * classes;
    std::size_t true_class = classes;
    for (std::size_t c = 0; c < classes; ++c) {
      if (t[c] == 1.0 && true_class == classes) {
        true_class = c;
      } else if (t[c] != 0.0) {
        true_class = classes + 1;
        break;
      }
    }
    if (true_class >= classes) {
      throw std::invalid_argument("focal loss: truth row " + std::to_string(x) +
                                  " is not one-hot");
    }
    // With a one-hot truth, p_t = p*y + (1-p)*(1-y) on the true channel is
    // the predicted probability of the true class.
    const double raw = predicted[x * classes + true_class];
    const double q = std::clamp(raw, kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double alpha = params.alpha[true_class];
    const double one_minus = 1.0 - q;
    const double weight = std::pow(one_minus, gamma);
    const double log_q = std::log(q);
    out.value += -alpha * weight * log_q * inv_n;

    const bool clamped = raw < kProbabilityClamp || raw > 1.0 - kProbabilityClamp;
    if (!clamped) {
      const double focus = gamma == 0.0 ? 0.0 : gamma * std::pow(one_minus, gamma - 1.0) * log_q;
      out.gradient[x * classes + true_class] = alpha * (focus - weight / q) * inv_n;
    }
  }
  return out;
}

LossValue offset_loss(std::span<const double> predicted, std::span<const double> truth,
                      const BinaryMask& piglet_mask) {
  const std::size_t n = piglet_mask.dims().pixel_count();
  if (predicted.size() != 2 * n || truth.size() != 2 * n) {
    throw DimensionError("offset loss: displacement arrays do not match the mask grid " +
                         to_string(piglet_mask.dims()));
  }
  LossValue out;
  out.gradient.assign(predicted.size(), 0.0);
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (const auto p : piglet_mask.pixels()) {
    const double ex = predicted[2 * p] - truth[2 * p];
    const double ey = predicted[2 * p + 1] - truth[2 * p + 1];
    out.value += (ex * ex + ey * ey) * inv_n;
    out.gradient[2 * p] = 2.0 * inv_n * ex;
    out.gradient[2 * p + 1] = 2.0 * inv_n * ey;
  }
  return out;
}

LossValue offset_loss(const OffsetMap& predicted, const OffsetMap& truth,
                      const BinaryMask& piglet_mask) {
  require_same_dims(predicted.dims(), truth.dims(), "offset loss predicted vs truth");
  require_same_dims(predicted.dims(), piglet_mask.dims(), "offset loss maps vs mask");
  auto flatten = [](const OffsetMap& m) {
    std::vector<double> v;
    v.reserve(2 * m.vectors().size());
    for (const auto& o : m.vectors()) {
      v.push_back(o.dx);
      v.push_back(o.dy);
    }
    return v;
  };
  return offset_loss(flatten(predicted), flatten(truth), piglet_mask);
}

double total_loss(double l1, double l2, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("loss weight lambda must lie in [0, 1], got " +
                                std::to_string(lambda));
  }
  return lambda * l1 + (1.0 - lambda) * l2;
}

namespace {

struct Worst {
  double rel = 0.0;
  std::size_t index = 0;
};

// Compares `analytic` with central differences of f around `x`.
Worst compare_gradient(std::vector<double> x, std::span<const double> analytic, double step,
                       const std::function<double(std::span<const double>)>& f) {
  Worst w;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-10});
    const double rel = std::abs(numeric - analytic[i]) / scale;
    if (rel > w.rel) w = {rel, i};
  }
  return w;
}

void record(GradCheckEntry& entry, const Worst& w, std::size_t case_index) {
  if (w.rel > entry.max_rel_error) {
    entry.max_rel_error = w.rel;
    entry.worst_case = case_index;
    entry.worst_element = w.index;
  }
}

}  // namespace

GradCheckReport gradient_check(const GradCheckOptions& options) {
  constexpr std::size_t kClasses = 3;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::uint32_t> side(1, 8);
  std::uniform_real_distribution<double> logit(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> offset(-6.0, 6.0);
  std::uniform_real_distribution<double> gamma_dist(0.0, 3.0);
  std::uniform_real_distribution<double> alpha_dist(0.25, 2.0);
  std::uniform_real_distribution<double> lambda_dist(0.0, 1.0);

  GradCheckReport report;
  report.entries = {{"focal"}, {"offset"}, {"total"}};

  for (std::size_t k = 0; k < options.cases; ++k) {
    const GridDims dims{side(rng), side(rng)};
    const std::size_t n = dims.pixel_count();

    std::vector<double> probs(n * kClasses);
    std::vector<double> onehot(n * kClasses, 0.0);
    std::vector<std::uint32_t> piglet_pixels;
    for (std::size_t x = 0; x < n; ++x) {
      double z[kClasses];
      double sum = 0.0;
      for (std::size_t c = 0; c < kClasses; ++c) {
        z[c] = std::exp(logit(rng));
        sum += z[c];
      }
      for (std::size_t c = 0; c < kClasses; ++c) probs[x * kClasses + c] = z[c] / sum;
      const auto cls = static_cast<std::size_t>(unit(rng) * kClasses) % kClasses;
      onehot[x * kClasses + cls] = 1.0;
      if (cls == static_cast<std::size_t>(PixelClass::piglet)) {
        piglet_pixels.push_back(static_cast<std::uint32_t>(x));
      }
    }
    FocalParams fp;
    fp.gamma = gamma_dist(rng);
    for (auto& a : fp.alpha) a = alpha_dist(rng);

    std::vector<double> pred_offsets(2 * n);
    std::vector<double> true_offsets(2 * n);
    for (auto& v : pred_offsets) v = offset(rng);
    for (auto& v : true_offsets) v = offset(rng);
    const BinaryMask mask = BinaryMask::from_sorted(dims, piglet_pixels);
    const double lambda = lambda_dist(rng);

    LossValue focal = focal_loss(probs, onehot, kClasses, fp);
    LossValue off = offset_loss(pred_offsets, true_offsets, mask);
    if (options.corrupt && k == 0) {
      focal.gradient[0] += 0.5;
      off.gradient[0] += 0.5;
    }

    record(report.entries[0],
           compare_gradient(probs, focal.gradient, options.step,
                            [&](std::span<const double> p) {
                              return focal_loss(p, onehot, kClasses, fp).value;
                            }),
           k);
    record(report.entries[1],
           compare_gradient(pred_offsets, off.gradient, options.step,
                            [&](std::span<const double> d) {
                              return offset_loss(d, true_offsets, mask).value;
                            }),
           k);

    // Total loss over the concatenated head outputs.
    std::vector<double> joint(probs);
    joint.insert(joint.end(), pred_offsets.begin(), pred_offsets.end());
    std::vector<double> joint_grad;
    joint_grad.reserve(joint.size());
    for (const double g : focal.gradient) joint_grad.push_back(lambda * g);
    for (const double g : off.gradient) joint_grad.push_back((1.0 - lambda) * g);
    const std::size_t split = probs.size();
    record(report.entries[2],
           compare_gradient(joint, joint_grad, options.step,
                            [&](std::span<const double> v) {
                              return total_loss(
                                  focal_loss(v.first(split), onehot, kClasses, fp).value,
                                  offset_loss(v.subspan(split), true_offsets, mask).value,
                                  lambda);
                            }),
           k);
  }

  report.passed = std::all_of(report.entries.begin(), report.entries.end(), [&](const auto& e) {
    return e.max_rel_error <= options.tolerance;
  });
  return report;
}

std::string format_report(const GradCheckReport& report, double tolerance) {
  char buf[160];
  std::string out;
  for (const auto& e : report.entries) {
    const bool ok = e.max_rel_error <= tolerance;
    if (ok) {
      std::snprintf(buf, sizeof buf, "%-6s max_rel_error=%.3e ok\n", e.loss.c_str(),
                    e.max_rel_error);
    } else {
      std::snprintf(buf, sizeof buf, "%-6s max_rel_error=%.3e FAIL at case %zu element %zu\n",
                    e.loss.c_str(), e.max_rel_error, e.worst_case, e.worst_element);
    }
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%s (tolerance %.0e)\n", report.passed ? "PASS" : "FAIL",
                tolerance);
  return out + buf;
}

}  // namespace cclus
