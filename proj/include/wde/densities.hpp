#pragma once

#include <span>

#include "wde/gmrf.hpp"
#include "wde/sample.hpp"

namespace wde {

/// f(x) = 2 x_1 on [0,1]^2. Lipschitz on its support, so the Hoelder
/// embedding gives s' = 1/d = 1/2 for the isotropic tensor basis.
double ramp_pdf(std::span<const double> x);

/// Integral of ramp_pdf squared: int_0^1 4 x^2 dx = 4/3.
inline constexpr double kRampL2NormSq = 4.0 / 3.0;

/// Inverse transform of a uniform pair: x_1 = sqrt(u_1), x_2 = u_2.
void ramp_from_uniforms(double u1, double u2, std::span<double> out);

/// Ramp-distributed points from the first two field components via
/// U_i = Phi(Z_i); the spatial dependence of the chain carries over.
Sample transform_to_ramp(const MultiField& field);

/// Squared L2 norm of the mixture target, in closed form.
double target_l2_norm_sq(double rho);

}  // namespace wde
