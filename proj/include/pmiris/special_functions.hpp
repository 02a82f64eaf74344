#pragma once

namespace pmiris::special {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1],
/// continued fraction (modified Lentz) to ~1e-15 relative.
double incomplete_beta(double a, double b, double x);

/// Regularized lower / upper incomplete gamma P(s, x), Q(s, x) for s > 0, x >= 0.
double gamma_p(double s, double x);
double gamma_q(double s, double x);

/// Upper tail of F(d1, d2) at f, computed without cancellation for tiny p.
double f_survival(double f, double d1, double d2);

/// Upper tail of chi-squared with k degrees of freedom.
double chi2_survival(double x, double k);

}  // namespace pmiris::special
