#pragma once

#include <cmath>

namespace bemtrack {

/// Bessel function of the first kind, order zero.
///
/// Power series below the crossover, Hankel asymptotic expansion beyond.
/// The crossover sits at |z| = 16 so the asymptotic truncation error
/// (~e^{-2z}) stays below 1e-13; the series is summed in long double to
/// absorb its alternating-term cancellation. Absolute accuracy ~1e-13
/// over the real line.
inline double bessel_j0(double z) {
    const double x = std::abs(z);
    if (x < 16.0) {
        const long double q = static_cast<long double>(x) * x / 4.0L;
        long double term = 1.0L;
        long double sum = 1.0L;
        for (int k = 1; k <= 64; ++k) {
            term *= -q / (static_cast<long double>(k) * k);
            sum += term;
            if (std::abs(static_cast<double>(term)) < 1e-20) {
                break;
            }
        }
        return static_cast<double>(sum);
    }

    // Hankel expansion: J0(x) = sqrt(2/(pi x)) (P cos w - Q sin w), w = x - pi/4,
    // P = sum_j (-1)^j b_{2j} x^{-2j}, Q = sum_j (-1)^j b_{2j+1} x^{-2j-1},
    // b_k = (-1)^k ((2k-1)!!)^2 / (k! 8^k). Truncated at the smallest term.
    long double p = 0.0L;
    long double q = 0.0L;
    long double s = 1.0L;  // (-1)^(m/2 rounded) * b_m / x^m, built incrementally
    long double prev_mag = 1e30L;
    for (int m = 0; m <= 40; ++m) {
        const long double mag = std::abs(static_cast<double>(s));
        if (mag > prev_mag) {
            break;  // asymptotic tail started growing
        }
        prev_mag = mag;
        if (m % 4 == 0) {
            p += s;
        } else if (m % 4 == 1) {
            q += s;
        } else if (m % 4 == 2) {
            p -= s;
        } else {
            q -= s;
        }
        // s_{m+1} = s_m * b_{m+1}/b_m / x with b_{m+1}/b_m = -(2m+1)^2/(8(m+1))
        const long double ratio = -static_cast<long double>(2 * m + 1) * (2 * m + 1) /
                                  (8.0L * (m + 1) * static_cast<long double>(x));
        s *= ratio;
        if (mag < 1e-19L) {
            break;
        }
    }
    const double w = x - 0.25 * 3.141592653589793238462643383279502884;
    const double amp = std::sqrt(2.0 / (3.141592653589793238462643383279502884 * x));
    return amp * (static_cast<double>(p) * std::cos(w) - static_cast<double>(q) * std::sin(w));
}

}  // namespace bemtrack
