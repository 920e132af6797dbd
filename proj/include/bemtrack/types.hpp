#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bemtrack {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Invalid configuration or malformed input. CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown: non-PSD statistics, rank-deficient acquisition,
/// singular innovation covariance. CLI exit code 3.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Deterministic engine derived from a master seed and stream keys, so
/// independent Monte Carlo workers get independent, reproducible streams.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0,
                                std::uint64_t substream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(substream),
                      static_cast<std::uint32_t>(substream >> 32)};
    return std::mt19937_64(seq);
}

/// Circular complex Gaussian vector with E|v_i|^2 = 1.
inline CVec randn_complex(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    CVec v(n);
    for (Index i = 0; i < n; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v[i] = Complex(re, im) * M_SQRT1_2;
    }
    return v;
}

template <typename Derived>
Eigen::MatrixXcd hermitized(const Eigen::MatrixBase<Derived>& m) {
    return 0.5 * (m + m.adjoint());
}

/// Smallest eigenvalue of a Hermitian matrix (input symmetrized first).
template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Nearest Hermitian PSD matrix: eigenvalues clamped at zero.
template <typename Derived>
CMat clamp_psd(const Eigen::MatrixBase<Derived>& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(m));
    RVec ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

/// Hermitian PSD square root, tolerant of tiny negative eigenvalues.
template <typename Derived>
CMat psd_sqrt(const Eigen::MatrixBase<Derived>& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitized(m));
    RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace bemtrack
