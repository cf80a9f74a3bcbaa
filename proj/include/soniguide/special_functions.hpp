#ifndef SONIGUIDE_SPECIAL_FUNCTIONS_HPP
#define SONIGUIDE_SPECIAL_FUNCTIONS_HPP

namespace soniguide {

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz),
// relative accuracy ~1e-14 for moderate a, b.
double incomplete_beta(double x, double a, double b);

// P(F > f) for an F(df1, df2) variate. df may be non-integer.
double f_survival(double f, double df1, double df2);

}  // namespace soniguide

#endif  // SONIGUIDE_SPECIAL_FUNCTIONS_HPP
