#pragma once

namespace tweedie {

/// Regularized lower incomplete gamma P(a, x). Power series below x = a + 1,
/// Lentz continued fraction for the upper tail above it.
double reg_lower_incomplete_gamma(double a, double x);

/// Regularized incomplete beta I_x(a, b) by continued fraction, evaluated on
/// whichever side of the mean (a + 1) / (a + b + 2) converges faster.
double reg_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `dof`
/// degrees of freedom (dof may be fractional).
double student_t_two_sided_p(double t, double dof);

}  // namespace tweedie
