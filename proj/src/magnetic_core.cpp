#include "magtrace/magnetic_core.hpp"

#include "magtrace/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace magtrace {

MagneticConfig make_config(double ell)
{
    if (!std::isfinite(ell) || ell <= 0.0) {
        throw DomainError("ell must be a positive finite magnetic length, got " + std::to_string(ell));
    }
    double const omega = std::numbers::pi * (2.0 * ell) * (2.0 * ell);
    double const scale = 1.0 / (2.0 * std::numbers::pi * ell * ell);
    // scale * omega / 2 == 1 up to rounding of the two divisions
    if (std::abs(scale * omega * 0.5 - 1.0) > 8.0 * std::numeric_limits<double>::epsilon()) {
        throw ComputationError("inconsistent magnetic constants for ell = " + std::to_string(ell));
    }
    return MagneticConfig(ell, omega, scale);
}

} // namespace magtrace
