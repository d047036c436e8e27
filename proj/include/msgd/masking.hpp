#ifndef MSGD_MASKING_HPP
#define MSGD_MASKING_HPP

// Bernoulli missingness: every entry is observed independently with
// probability p. Rows are masked either freshly on every draw or from a
// mask that is fixed for the whole matrix.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgd/error.hpp"
#include "msgd/linalg.hpp"
#include "msgd/random.hpp"

namespace msgd {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class MaskMode { kResampleEachIteration, kFrozenMatrixMask };

class MaskModel {
 public:
  explicit MaskModel(double p, MaskMode mode = MaskMode::kResampleEachIteration) : p_(p), mode_(mode) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw ConfigError("observation probability p must lie in (0, 1], got " + std::to_string(p));
    }
  }

  double p() const noexcept { return p_; }
  MaskMode mode() const noexcept { return mode_; }

 private:
  double p_;
  MaskMode mode_;
};

/// One observed row: the mask (diagonal of D_i) and the masked values.
struct MaskedRow {
  Mask mask;
  Vector values;  // A_ij where observed, 0 elsewhere

  Eigen::Index size() const noexcept { return values.size(); }
};

inline void apply_mask(const Matrix& a, Eigen::Index i, const Mask& mask, MaskedRow& out) {
  const Eigen::Index n = a.cols();
  if (mask.size() != n) {
    throw std::invalid_argument("mask length does not match the number of columns");
  }
  out.mask.resize(n);
  out.values.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.mask[j] = mask[j];
    out.values[j] = mask[j] ? a(i, j) : 0.0;
  }
}

inline MaskedRow apply_mask(const Matrix& a, Eigen::Index i, const Mask& mask) {
  MaskedRow out;
  apply_mask(a, i, mask, out);
  return out;
}

/// Draw a fresh mask for row i into `out` (buffers are reused).
inline void sample_masked_row(const Matrix& a, Eigen::Index i, double p, SplitMix64& rng, MaskedRow& out) {
  const Eigen::Index n = a.cols();
  out.mask.resize(n);
  out.values.resize(n);
  const double* row = a.data() + i * n;
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool keep = rng.bernoulli(p);
    out.mask[j] = keep;
    out.values[j] = keep ? row[j] : 0.0;
  }
}

/// Produces masked rows according to a MaskModel. Owns its generator
/// state; one sampler per trial.
///
/// In frozen mode the mask of row i is a pure function of (seed, i): it is
/// drawn on first access, cached, and replayed on every later access
/// regardless of the order rows are visited in.
class MaskSampler {
 public:
  MaskSampler(MaskModel model, std::uint64_t seed)
      : model_(model), stream_(derive_seed(seed, 0)), frozen_key_(derive_seed(seed, 1)) {}

  /// Frozen sampler replaying an explicit per-entry mask.
  static MaskSampler from_mask(MaskMatrix mask, double p) {
    MaskSampler s(MaskModel(p, MaskMode::kFrozenMatrixMask), 0);
    s.explicit_ = std::move(mask);
    return s;
  }

  const MaskModel& model() const noexcept { return model_; }

  void sample(const Matrix& a, Eigen::Index i, MaskedRow& out) {
    if (i < 0 || i >= a.rows()) {
      throw std::out_of_range("row index " + std::to_string(i) + " out of range for " +
                              std::to_string(a.rows()) + " rows");
    }
    if (model_.mode() == MaskMode::kResampleEachIteration) {
      sample_masked_row(a, i, model_.p(), stream_, out);
      return;
    }
    apply_mask(a, i, frozen_row(a, i), out);
  }

  MaskedRow sample(const Matrix& a, Eigen::Index i) {
    MaskedRow out;
    sample(a, i, out);
    return out;
  }

 private:
  const Mask& frozen_row(const Matrix& a, Eigen::Index i) {
    if (explicit_) {
      if (explicit_->rows() != a.rows() || explicit_->cols() != a.cols()) {
        throw std::invalid_argument("frozen mask shape does not match matrix shape");
      }
      scratch_ = explicit_->row(i).transpose();
      return scratch_;
    }
    if (cache_.size() != static_cast<std::size_t>(a.rows())) {
      cache_.assign(static_cast<std::size_t>(a.rows()), std::nullopt);
    }
    auto& slot = cache_[static_cast<std::size_t>(i)];
    if (!slot) {
      SplitMix64 row_rng(derive_seed(frozen_key_, static_cast<std::uint64_t>(i)));
      Mask m(a.cols());
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        m[j] = row_rng.bernoulli(model_.p());
      }
      slot = std::move(m);
    }
    return *slot;
  }

  MaskModel model_;
  SplitMix64 stream_;
  std::uint64_t frozen_key_;
  std::vector<std::optional<Mask>> cache_;
  std::optional<MaskMatrix> explicit_;
  Mask scratch_;
};

/// Draw a complete m x n mask with entries kept with probability p.
inline MaskMatrix sample_mask_matrix(Eigen::Index rows, Eigen::Index cols, double p, SplitMix64& rng) {
  MaskMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = rng.bernoulli(p);
    }
  }
  return m;
}

inline constexpr int kMaxEnumerationWidth = 20;

/// All 2^n per-row masks. Mask number `code` keeps column j iff bit j of
/// `code` is set; its probability under Bernoulli(p) is p^kept (1-p)^dropped.
class MaskEnumeration {
 public:
  explicit MaskEnumeration(int n) : n_(n) {
    if (n < 0 || n > kMaxEnumerationWidth) {
      throw std::invalid_argument("mask enumeration width " + std::to_string(n) +
                                  " exceeds the guard n <= " + std::to_string(kMaxEnumerationWidth));
    }
  }

  int width() const noexcept { return n_; }
  std::uint32_t size() const noexcept { return std::uint32_t{1} << n_; }

  Mask mask(std::uint32_t code) const {
    Mask m(n_);
    for (int j = 0; j < n_; ++j) {
      m[j] = ((code >> j) & 1U) != 0;
    }
    return m;
  }

  double weight(std::uint32_t code, double p) const {
    const int kept = __builtin_popcount(code);
    return std::pow(p, kept) * std::pow(1.0 - p, n_ - kept);
  }

 private:
  int n_;
};

inline MaskEnumeration enumerate_masks(int n) { return MaskEnumeration(n); }

}  // namespace msgd

#endif  // MSGD_MASKING_HPP
