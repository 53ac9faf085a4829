#pragma once

#include <gtest/gtest.h>

#include "ookgate/error.hpp"

namespace ookgate::testing {

// The Errc thrown by f, failing the test when nothing is thrown.
template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ookgate::Error thrown";
  return Errc::InvariantViolation;
}

}  // namespace ookgate::testing
