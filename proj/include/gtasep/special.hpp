#pragma once

namespace gtasep {

// Ai(z) through boost (Bessel-function representation).
double airy_ai(double z);
// Ai(z) from the ray-pair contour integral of exp(t^3/3 - z t).
double airy_ai_contour(double z);
// Maclaurin series in long double; reliable for |z| <~ 6.
double airy_ai_series(double z);

// I_n(x) by the ascending series.
double bessel_i(int n, double x);
// I_n(x) by the trapezoidal rule for the loop integral of t^{-n-1} e^{(x/2)(t+1/t)}.
double bessel_i_contour(int n, double x);

// sqrt(r/u) I_1(2 sqrt(u r)) as an entire function of u >= 0 (value r at u = 0).
double bessel_transport(double r, double u);

double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace gtasep
