#ifndef MSGD_TESTS_TEST_UTIL_HPP
#define MSGD_TESTS_TEST_UTIL_HPP

#include <random>

#include "msgd/linalg.hpp"
#include "msgd/random.hpp"

namespace msgd::testing_util {

inline Matrix gaussian_matrix(Eigen::Index m, Eigen::Index n, SplitMix64& rng) {
  std::normal_distribution<double> nd;
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = nd(rng);
    }
  }
  return a;
}

inline Vector gaussian_vector(Eigen::Index n, SplitMix64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v[j] = nd(rng);
  }
  return v;
}

}  // namespace msgd::testing_util

#endif  // MSGD_TESTS_TEST_UTIL_HPP
