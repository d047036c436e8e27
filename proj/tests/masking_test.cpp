#include "msgd/masking.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace msgd {
namespace {

TEST(MaskModel, RejectsInvalidP) {
  EXPECT_THROW(MaskModel(0.0), ConfigError);
  EXPECT_THROW(MaskModel(-0.1), ConfigError);
  EXPECT_THROW(MaskModel(1.5), ConfigError);
  EXPECT_THROW(MaskModel(std::nan("")), ConfigError);
  EXPECT_NO_THROW(MaskModel(1.0));
}

TEST(MaskSampler, FullObservationKeepsEverything) {
  SplitMix64 rng(1);
  const Matrix a = testing_util::gaussian_matrix(5, 7, rng);
  for (auto mode : {MaskMode::kResampleEachIteration, MaskMode::kFrozenMatrixMask}) {
    MaskSampler s(MaskModel(1.0, mode), 42);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const MaskedRow r = s.sample(a, i);
      EXPECT_TRUE(r.mask.all());
      EXPECT_EQ(r.values, a.row(i).transpose());
    }
  }
}

TEST(MaskSampler, FrozenMaskIsStableAcrossAccessOrder) {
  SplitMix64 rng(2);
  const Matrix a = testing_util::gaussian_matrix(10, 8, rng);
  MaskSampler forward(MaskModel(0.5, MaskMode::kFrozenMatrixMask), 9);
  MaskSampler backward(MaskModel(0.5, MaskMode::kFrozenMatrixMask), 9);
  std::vector<Mask> first(10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    first[static_cast<std::size_t>(i)] = forward.sample(a, i).mask;
  }
  for (Eigen::Index i = 9; i >= 0; --i) {
    EXPECT_TRUE((backward.sample(a, i).mask == first[static_cast<std::size_t>(i)]).all());
    EXPECT_TRUE((forward.sample(a, i).mask == first[static_cast<std::size_t>(i)]).all());
  }
}

TEST(MaskSampler, ResampleModeVaries) {
  SplitMix64 rng(3);
  const Matrix a = testing_util::gaussian_matrix(1, 30, rng);
  MaskSampler s(MaskModel(0.5), 4);
  const Mask m0 = s.sample(a, 0).mask;
  bool differs = false;
  for (int t = 0; t < 10 && !differs; ++t) {
    differs = !(s.sample(a, 0).mask == m0).all();
  }
  EXPECT_TRUE(differs);
}

TEST(MaskSampler, HalfKeepFractionOnWideRow) {
  const Matrix a = Matrix::Ones(1, 2000);
  MaskSampler s(MaskModel(0.5), 5);
  const double frac = static_cast<double>(s.sample(a, 0).mask.count()) / 2000.0;
  EXPECT_GE(frac, 0.45);
  EXPECT_LE(frac, 0.55);
}

TEST(MaskSampler, KeepRateWithinThreeSigma) {
  const Matrix a = Matrix::Ones(1, 10);
  for (double p : {0.1, 0.3, 0.7}) {
    MaskSampler s(MaskModel(p), 6);
    MaskedRow r;
    std::size_t kept = 0;
    const std::size_t rounds = 10000;
    for (std::size_t t = 0; t < rounds; ++t) {
      s.sample(a, 0, r);
      kept += static_cast<std::size_t>(r.mask.count());
    }
    const double n = static_cast<double>(rounds * 10);
    const double sigma = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(static_cast<double>(kept) / n, p, 3.0 * sigma) << "p=" << p;
  }
}

TEST(MaskSampler, ValuesMatchMask) {
  SplitMix64 rng(7);
  const Matrix a = testing_util::gaussian_matrix(4, 12, rng);
  MaskSampler s(MaskModel(0.4), 8);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index i = t % 4;
    const MaskedRow r = s.sample(a, i);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      EXPECT_EQ(r.values[j], r.mask[j] ? a(i, j) : 0.0);
    }
  }
}

TEST(MaskSampler, IndexOutOfRange) {
  MaskSampler s(MaskModel(0.5), 1);
  EXPECT_THROW(s.sample(Matrix::Ones(2, 2), 2), std::out_of_range);
}

TEST(MaskSampler, ExplicitMaskReplays) {
  MaskMatrix m(2, 2);
  m << true, false, false, true;
  MaskSampler s = MaskSampler::from_mask(m, 0.5);
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_EQ(s.sample(a, 0).values, Vector((Vector(2) << 1, 0).finished()));
  EXPECT_EQ(s.sample(a, 1).values, Vector((Vector(2) << 0, 4).finished()));
  EXPECT_THROW(s.sample(Matrix::Ones(3, 2), 0), std::invalid_argument);
}

TEST(MaskEnumeration, WeightsSumToOne) {
  for (int n = 1; n <= 3; ++n) {
    const auto e = enumerate_masks(n);
    EXPECT_EQ(e.size(), 1U << n);
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
      double total = 0.0;
      for (std::uint32_t c = 0; c < e.size(); ++c) {
        total += e.weight(c, p);
      }
      EXPECT_NEAR(total, 1.0, 1e-15) << "n=" << n << " p=" << p;
    }
  }
}

TEST(MaskEnumeration, MaskBitsAndWeight) {
  const auto e = enumerate_masks(3);
  const Mask m = e.mask(0b101);
  EXPECT_TRUE(m[0]);
  EXPECT_FALSE(m[1]);
  EXPECT_TRUE(m[2]);
  EXPECT_DOUBLE_EQ(e.weight(0b101, 0.5), 0.125);
  EXPECT_DOUBLE_EQ(e.weight(0b111, 0.3), 0.3 * 0.3 * 0.3);
}

TEST(MaskEnumeration, WidthGuard) {
  EXPECT_NO_THROW(enumerate_masks(kMaxEnumerationWidth));
  EXPECT_THROW(enumerate_masks(kMaxEnumerationWidth + 1), std::invalid_argument);
}

}  // namespace
}  // namespace msgd
