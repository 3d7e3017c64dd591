// Small helpers shared by the test files.
#pragma once

#include "irmean/types.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <initializer_list>

namespace testing_support {

/// Code of the irmean::Error thrown by f (test failure if none is thrown).
inline irmean::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const irmean::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no irmean::Error thrown";
  return irmean::ErrorCode::InvalidParams;
}

inline irmean::Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  const auto n = static_cast<irmean::Index>(values.size());
  const auto p = static_cast<irmean::Index>(values.begin()->size());
  irmean::Matrix m(n, p);
  irmean::Index i = 0;
  for (const auto& row : values) {
    irmean::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline irmean::Vector vec(std::initializer_list<double> values) {
  irmean::Vector v(static_cast<irmean::Index>(values.size()));
  irmean::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace testing_support
