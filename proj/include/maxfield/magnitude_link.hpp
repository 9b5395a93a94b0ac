#pragma once

#include <cmath>

namespace maxfield {

/// Maps an event magnitude m to a length scale exp(d (m - c)).
/// d = 0 switches the dependence on m off (the max-stable case).
struct MagnitudeLink {
  double c = 0.0;
  double d = 0.0;

  double scale(double m) const { return std::exp(d * (m - c)); }
  bool active() const { return d != 0.0; }
};

}  // namespace maxfield
