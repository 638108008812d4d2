#pragma once

#include <numbers>

namespace magtrace {

/// Magnetic length and the constants derived from it.
///
/// omega_ell = pi (2 ell)^2 is the area factor relating the canonical trace to
/// the trace per unit volume, idos_scale = 1/(2 pi ell^2) is the IDOS scale
/// factor. Their product with the 1/2 from the trace normalisation is one.
class MagneticConfig {
public:
    double ell() const noexcept { return ell_; }
    double omega_ell() const noexcept { return omega_ell_; }
    double idos_scale() const noexcept { return idos_scale_; }

    friend MagneticConfig make_config(double ell);

private:
    MagneticConfig(double ell, double omega, double scale)
        : ell_(ell), omega_ell_(omega), idos_scale_(scale) {}

    double ell_;
    double omega_ell_;
    double idos_scale_;
};

/// Throws DomainError for non-positive or non-finite ell.
MagneticConfig make_config(double ell);

} // namespace magtrace
