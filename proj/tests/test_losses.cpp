#include <doctest.h>

#include <cmath>
#include <random>

#include "cclus/losses.hpp"

using namespace cclus;

namespace {

struct FocalCase {
  std::vector<double> pred;
  std::vector<double> truth;
};

FocalCase random_focal(std::mt19937_64& rng, std::size_t pixels, std::size_t classes) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  FocalCase c{std::vector<double>(pixels * classes), std::vector<double>(pixels * classes, 0.0)};
  for (std::size_t x = 0; x < pixels; ++x) {
    double sum = 0;
    for (std::size_t k = 0; k < classes; ++k) sum += c.pred[x * classes + k] = u(rng);
    for (std::size_t k = 0; k < classes; ++k) c.pred[x * classes + k] /= sum;
    c.truth[x * classes + rng() % classes] = 1.0;
  }
  return c;
}

// The loss written out term by term, without sharing code with the library.
double focal_reference(const FocalCase& c, std::size_t classes, const std::vector<double>& alpha,
                       double gamma) {
  const std::size_t n = c.pred.size() / classes;
  double total = 0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t k = 0; k < classes; ++k) {
      const double y = c.truth[x * classes + k];
      if (y != 1.0) continue;
      const double p = c.pred[x * classes + k];
      total += -alpha[k] * std::pow(1 - p, gamma) * std::log(p);
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace

TEST_CASE("perfect prediction has near-zero focal loss") {
  const std::vector<double> p{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  const auto v = focal_loss(p, p, 3, {});
  CHECK(v.value <= 1e-6);
  CHECK(v.value >= 0.0);
}

TEST_CASE("focal loss with gamma 0 and unit alpha is cross entropy") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto c = random_focal(rng, 1 + rng() % 64, 3);
    double ce = 0;
    const std::size_t n = c.pred.size() / 3;
    for (std::size_t i = 0; i < c.pred.size(); ++i) {
      if (c.truth[i] == 1.0) ce -= std::log(c.pred[i]);
    }
    ce /= static_cast<double>(n);
    FocalParams fp;
    fp.gamma = 0.0;
    CHECK(std::abs(focal_loss(c.pred, c.truth, 3, fp).value - ce) <= 1e-12);
  }
}

TEST_CASE("single binary pixel at 0.9") {
  FocalParams fp;
  fp.alpha = {1.0, 1.0};
  fp.gamma = 2.0;
  const auto v = focal_loss(std::vector<double>{0.1, 0.9}, std::vector<double>{0.0, 1.0}, 2, fp);
  CHECK(v.value == doctest::Approx(-0.01 * std::log(0.9)).epsilon(1e-12));
  CHECK(v.value == doctest::Approx(1.0536e-3).epsilon(1e-4));
}

TEST_CASE("focal loss matches the reference and central differences") {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 50; ++k) {
    const std::size_t w = 1 + rng() % 8;
    const std::size_t h = 1 + rng() % 8;
    auto c = random_focal(rng, w * h, 3);
    FocalParams fp;
    fp.gamma = static_cast<double>(rng() % 5) / 2.0;
    fp.alpha = {0.25 + static_cast<double>(rng() % 4), 1.0, 0.5};
    const auto v = focal_loss(c.pred, c.truth, 3, fp);
    REQUIRE(v.value == doctest::Approx(focal_reference(c, 3, fp.alpha, fp.gamma)).epsilon(1e-12));
    const double step = 1e-5;
    for (std::size_t i = 0; i < c.pred.size(); ++i) {
      const double orig = c.pred[i];
      c.pred[i] = orig + step;
      const double up = focal_reference(c, 3, fp.alpha, fp.gamma);
      c.pred[i] = orig - step;
      const double down = focal_reference(c, 3, fp.alpha, fp.gamma);
      c.pred[i] = orig;
      const double numeric = (up - down) / (2 * step);
      const double scale = std::max({1.0, std::abs(numeric), std::abs(v.gradient[i])});
      REQUIRE(std::abs(numeric - v.gradient[i]) / scale <= 1e-4);
    }
  }
}

TEST_CASE("focal loss rejects bad shapes and parameters") {
  const std::vector<double> p{0.5, 0.5, 0.0};
  CHECK_THROWS_AS(focal_loss(p, std::vector<double>{1, 0}, 3, {}), DimensionError);
  CHECK_THROWS_AS(focal_loss(p, std::vector<double>{0.5, 0.5, 0}, 3, {}), std::invalid_argument);
  FocalParams neg;
  neg.gamma = -1;
  CHECK_THROWS_AS(focal_loss(p, std::vector<double>{1, 0, 0}, 3, neg), std::invalid_argument);
}

TEST_CASE("offset loss examples") {
  const GridDims d{2, 1};
  const BinaryMask first(d, {0});
  const OffsetMap truth = OffsetMap::zeros(d);
  CHECK(offset_loss(truth, truth, first).value == 0.0);

  const OffsetMap err(d, {{3.0F, 4.0F}, {0.0F, 0.0F}});
  const auto v = offset_loss(err, truth, first);
  CHECK(v.value == 12.5);
  REQUIRE(v.gradient.size() == 4);
  CHECK(v.gradient[0] == 3.0);  // 2/N * 3
  CHECK(v.gradient[1] == 4.0);
  CHECK(v.gradient[2] == 0.0);

  const OffsetMap unmasked(d, {{0.0F, 0.0F}, {7.0F, -2.0F}});
  CHECK(offset_loss(unmasked, truth, first).value == 0.0);
  CHECK_THROWS_AS(offset_loss(OffsetMap::zeros({3, 1}), truth, first), DimensionError);
}

TEST_CASE("offset loss gradient and permutation invariance") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 3);
  for (int k = 0; k < 50; ++k) {
    const GridDims d{1 + static_cast<std::uint32_t>(rng() % 8),
                     1 + static_cast<std::uint32_t>(rng() % 8)};
    const std::size_t n = d.pixel_count();
    std::vector<double> pred(2 * n), truth(2 * n);
    for (auto& v : pred) v = g(rng);
    for (auto& v : truth) v = g(rng);
    std::vector<std::uint32_t> px;
    for (std::uint32_t p = 0; p < n; ++p) {
      if (rng() % 2) px.push_back(p);
    }
    const BinaryMask mask = BinaryMask::from_sorted(d, px);
    const auto v = offset_loss(pred, truth, mask);
    CHECK(v.value >= 0.0);

    double ref = 0;
    for (const auto p : px) {
      ref += std::pow(pred[2 * p] - truth[2 * p], 2) + std::pow(pred[2 * p + 1] - truth[2 * p + 1], 2);
    }
    CHECK(v.value == doctest::Approx(ref / static_cast<double>(n)).epsilon(1e-12));

    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double orig = pred[i];
      pred[i] = orig + 1e-5;
      const double up = offset_loss(pred, truth, mask).value;
      pred[i] = orig - 1e-5;
      const double down = offset_loss(pred, truth, mask).value;
      pred[i] = orig;
      const double numeric = (up - down) / 2e-5;
      REQUIRE(std::abs(numeric - v.gradient[i]) / std::max(1.0, std::abs(numeric)) <= 1e-4);
    }

    // Reverse the pixel order of every array and the mask together.
    std::vector<double> rp(2 * n), rt(2 * n);
    std::vector<std::uint32_t> rpx;
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t q = n - 1 - p;
      rp[2 * q] = pred[2 * p];
      rp[2 * q + 1] = pred[2 * p + 1];
      rt[2 * q] = truth[2 * p];
      rt[2 * q + 1] = truth[2 * p + 1];
    }
    for (const auto p : px) rpx.push_back(static_cast<std::uint32_t>(n - 1 - p));
    const double reversed = offset_loss(rp, rt, BinaryMask(d, rpx)).value;
    CHECK(reversed == doctest::Approx(v.value).epsilon(1e-12));
  }
}

TEST_CASE("total loss") {
  CHECK(total_loss(2.0, 4.0, 0.25) == 3.5);
  CHECK(total_loss(1.234, 99.0, 1.0) == 1.234);
  CHECK(total_loss(1.234, 99.0, 0.0) == 99.0);
  CHECK_THROWS_AS(total_loss(1, 1, -0.01), std::invalid_argument);
  CHECK_THROWS_AS(total_loss(1, 1, 1.01), std::invalid_argument);
  CHECK_THROWS_AS(total_loss(1, 1, std::nan("")), std::invalid_argument);
}

TEST_CASE("built-in gradient check") {
  const auto r = gradient_check({});
  CHECK(r.passed);
  REQUIRE(r.entries.size() == 3);
  for (const auto& e : r.entries) CHECK(e.max_rel_error <= 1e-4);
  GradCheckOptions bad;
  bad.corrupt = true;
  CHECK_FALSE(gradient_check(bad).passed);
  CHECK(format_report(r, 1e-4).find("PASS") != std::string::npos);
}
