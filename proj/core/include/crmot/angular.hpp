#pragma once

#include "crmot/half_integer.hpp"

namespace crmot {

// Wigner 3j symbol evaluated with the Racah closed-form sum. Arguments are
// exact half-integers; selection-rule violations return 0, structurally
// impossible inputs (negative j, m out of range, non-integer perimeter) throw.
double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3,
                HalfInt m1, HalfInt m2, HalfInt m3);

// <j1 m1 j2 m2 | J M>, Condon-Shortley phase.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                      HalfInt J, HalfInt M);

// Convenience wrappers taking plain doubles; any argument farther than 1e-9
// from a half-integer raises ConfigError.
double wigner3j(double j1, double j2, double j3,
                double m1, double m2, double m3);
double clebsch_gordan(double j1, double m1, double j2, double m2,
                      double J, double M);

// Mean of |<Jg m; 1 q | Je m+q>|^2 over all 2Jg+1 ground sublevels and the
// three polarizations. This is the average line-strength factor that scales
// an isotropic MOT light field (3/7 for Jg=3 -> Je=4, 2/5 for 9/2 -> 11/2).
double average_cg_squared(HalfInt Jg, HalfInt Je);

}  // namespace crmot
