#pragma once

#include "specmono/types.hpp"

namespace specmono::champagne {

/// Radial data of H = |p|^2/2 - r^2 + r^4 at energy E and angular momentum j.
struct Radial {
    double action = 0.0;  // I_r = (1/pi) int p_r dr, even in j
    double period = 0.0;  // T = 2 int dr / p_r
    double theta = 0.0;   // rotation angle 2 int j / (r^2 p_r) dr, odd in j
    double r_inner = 0.0;
    double r_outer = 0.0;
};

/// Minimum of the effective potential j^2/(2r^2) - r^2 + r^4.
double effective_minimum(double j);

/// At j = 0 with E > 0 the rotation angle takes its limit from j > 0 (pi).
Radial radial(double E, double j, int nodes);

/// Angular sector 0..3 of c around the focus-focus value; sector 0 holds the
/// ray E > 0, j = 0.
int sector(const Vec2& c);

/// Sector 0 uses the branch I_r + max(0, -j) so that it is smooth across
/// j = 0 for E > 0; the other sectors use I_r and are cut along that ray.
double branch_shift(double j, int sector);
double branch_shift_slope(double j, int sector);

/// Energy with I_r(E, j) = action; throws OutsideRegularRegion when action <= 0.
double energy_for_action(double action, double j, int nodes);

}  // namespace specmono::champagne
