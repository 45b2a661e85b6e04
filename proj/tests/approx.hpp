#pragma once

#include "doctest.h"

// doctest::Approx adds 1.0 to the tolerance scale, which turns it into an
// absolute check for SI quantities far below unity. rel() is purely relative.
inline doctest::Approx rel(double value, double eps = 1e-12) {
  return doctest::Approx(value).epsilon(eps).scale(0.0);
}
