#pragma once

#include <Eigen/Dense>

#include <optional>

#include "maxsurf/error.hpp"

namespace test_support {

/// Kind of the maxsurf::Error thrown by f, or nullopt if it returns normally.
template <class F>
std::optional<maxsurf::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const maxsurf::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Eigen::VectorXd axis(int n, double eta) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  a[n - 1] = eta;
  return a;
}

}  // namespace test_support

#define CHECK_ERROR_KIND(expr, kind) \
  CHECK(test_support::error_kind([&] { (void)(expr); }) == std::optional<maxsurf::ErrorKind>(kind))
