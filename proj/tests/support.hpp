#pragma once

#include "oracles.hpp"

#include <doctest.h>

namespace testsupport {

template <class F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const DyadError& e) {
    return e.kind();
  }
  FAIL("expected a DyadError");
  return ErrorKind::InvalidArgument;
}

}  // namespace testsupport
