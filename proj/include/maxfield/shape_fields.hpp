#pragma once

#include <string_view>

#include "maxfield/magnitude_link.hpp"

namespace maxfield {

/// Centred one-dimensional densities, each parameterized by its standard
/// deviation s: Gauss N(0, s^2), Laplace with scale s/sqrt(2), uniform on
/// [-s sqrt(3), s sqrt(3)].
enum class ShapeFamily { Gauss, Laplace, Uniform };

std::string_view to_string(ShapeFamily family);
/// Accepts "gauss", "laplace", "uniform" (case-insensitive).
ShapeFamily parse_family(std::string_view name);

/// s = exp(d (m - c)).
inline double scale_from_magnitude(double m, const MagnitudeLink& link) { return link.scale(m); }

/// log f(x; s). -infinity outside the support of the uniform family.
double log_density(ShapeFamily family, double x, double s);

/// sup_x log f(x; s), attained at x = 0.
double peak_log_density(ShapeFamily family, double s);

/// Half-width beyond which |x| is outside the support (+infinity for Gauss
/// and Laplace).
double support_half_width(ShapeFamily family, double s);

}  // namespace maxfield
