#ifndef QEKIT_TESTS_TEST_UTIL_HPP
#define QEKIT_TESTS_TEST_UTIL_HPP

#include <functional>

#include "qekit/errors.hpp"

namespace qekit_test {

/// Runs f and reports which error code it threw (or none).
inline bool throws_code(qekit::Err expect, const std::function<void()>& f) {
  try {
    f();
  } catch (const qekit::Error& e) {
    return e.code() == expect;
  } catch (...) {
    return false;
  }
  return false;
}

}  // namespace qekit_test

#endif  // QEKIT_TESTS_TEST_UTIL_HPP
