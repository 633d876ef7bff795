#pragma once

#include <memory>

namespace delaygauge {

/// Cubic Hermite basis on [0,1]: values y0, y1 and tangents m0, m1 (already
/// scaled to the unit interval).
inline double hermite_cubic(double y0, double m0, double y1, double m1, double w) {
    const double w2 = w * w, w3 = w2 * w;
    return (2 * w3 - 3 * w2 + 1) * y0 + (w3 - 2 * w2 + w) * m0 +
           (-2 * w3 + 3 * w2) * y1 + (w3 - w2) * m1;
}

}  // namespace delaygauge
