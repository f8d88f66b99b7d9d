#pragma once

namespace outsel::special {

// Standard normal.
double normalPdf(double x);
double normalCdf(double x);
double normalSf(double x);
/// log Phi(x), finite for every finite x (asymptotic series once erfc underflows).
double normalLogCdf(double x);
/// log(1 - Phi(x)).
double normalLogSf(double x);
double normalQuantile(double p);

/// Regularized incomplete gamma P(a, x) and its complement Q(a, x).
double gammaP(double a, double x);
double gammaQ(double a, double x);
double logGammaP(double a, double x);
double logGammaQ(double a, double x);

/// Regularized incomplete beta I_x(a, b). The complement is evaluated from
/// I_{1-x}(b, a) with 1 - x passed explicitly to avoid cancellation.
double betaI(double a, double b, double x);
double betaIComplement(double a, double b, double x, double oneMinusX);
double logBetaI(double a, double b, double x, double oneMinusX);

double chiSquaredCdf(double x, double df);
double chiSquaredSf(double x, double df);
double chiSquaredLogCdf(double x, double df);
double chiSquaredLogSf(double x, double df);

double fisherCdf(double x, double d1, double d2);
double fisherSf(double x, double d1, double d2);
double fisherLogCdf(double x, double d1, double d2);
double fisherLogSf(double x, double d1, double d2);

double studentCdf(double t, double df);
double studentSf(double t, double df);
/// Two-sided tail 2 P(T > |t|).
double studentTwoSided(double t, double df);
double studentQuantile(double p, double df);

}  // namespace outsel::special
