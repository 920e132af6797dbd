#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "bemtrack/ofdm.hpp"
#include "bemtrack/types.hpp"

namespace bemtrack::bem {

enum class BasisKind { Low, High, Concat };

/// Complex-exponential basis: column d is e^{j(2pi/N) k f_d} over sample
/// index k, with integer discrete frequencies f_d. Distinct frequencies make
/// the columns orthogonal, B^H B = N I.
struct BemBasis {
    CMat matrix;
    std::vector<int> freq_indices;
    BasisKind kind = BasisKind::Low;

    Index samples() const { return matrix.rows(); }
    Index order() const { return matrix.cols(); }
};

namespace detail {

inline CMat exponential_columns(Index n, const std::vector<int>& freqs) {
    CMat b(n, static_cast<Index>(freqs.size()));
    for (Index d = 0; d < b.cols(); ++d) {
        const long long f = freqs[static_cast<std::size_t>(d)];
        for (Index k = 0; k < n; ++k) {
            const long long r = ((k * f) % n + n) % n;
            b(k, d) = std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
        }
    }
    return b;
}

inline std::vector<int> basis_frequencies(BasisKind kind, Index nc) {
    std::vector<int> freqs;
    const int half = static_cast<int>(nc - 1) / 2;
    switch (kind) {
        case BasisKind::Low:
            // m - (Nc-1)/2 for m = 0..Nc-1: {-half, ..., +half}
            for (int m = 0; m < nc; ++m) {
                freqs.push_back(m - half);
            }
            break;
        case BasisKind::High:
            // 2m - (Nc-1) for m = 0..Nc-1: even frequencies {-2*half, ..., +2*half}
            for (int m = 0; m < nc; ++m) {
                freqs.push_back(2 * m - 2 * half);
            }
            break;
        case BasisKind::Concat: {
            // Deduplicated union of the Low and High frequency sets of order Nc.
            std::set<int> merged;
            for (int f : basis_frequencies(BasisKind::Low, nc)) {
                merged.insert(f);
            }
            for (int f : basis_frequencies(BasisKind::High, nc)) {
                merged.insert(f);
            }
            freqs.assign(merged.begin(), merged.end());
            break;
        }
    }
    return freqs;
}

}  // namespace detail

inline BemBasis make_basis(BasisKind kind, Index n, Index nc) {
    if (nc < 1 || nc > n) {
        throw ConfigError("basis order must satisfy 1 <= Nc <= N");
    }
    if (nc % 2 == 0) {
        throw ConfigError("Low/High bases need an odd Nc (centered frequency set)");
    }
    BemBasis basis;
    basis.kind = kind;
    basis.freq_indices = detail::basis_frequencies(kind, nc);
    if (static_cast<Index>(basis.freq_indices.size()) > n) {
        throw ConfigError("merged basis order exceeds N");
    }
    basis.matrix = detail::exponential_columns(n, basis.freq_indices);
    return basis;
}

/// Least-squares coefficients c = (B^H B)^{-1} B^H h.
inline CVec project_taps(const BemBasis& basis, const CVec& taps) {
    const CMat gram = basis.matrix.adjoint() * basis.matrix;
    return gram.ldlt().solve(basis.matrix.adjoint() * taps);
}

/// Tap trajectory h = B c (modelling error dropped).
inline CVec reconstruct_taps(const BemBasis& basis, const CVec& coeffs) {
    return basis.matrix * coeffs;
}

/// Coefficient correlation R_c = (B^H B)^{-1} B^H R_h B (B^H B)^{-1}.
inline CMat coeff_correlation(const BemBasis& basis, const CMat& tap_corr) {
    if (tap_corr.rows() != basis.samples() || tap_corr.cols() != basis.samples()) {
        throw ConfigError("tap correlation dimension does not match the basis");
    }
    const CMat gram = basis.matrix.adjoint() * basis.matrix;
    const auto solver = gram.ldlt();
    const CMat inner = basis.matrix.adjoint() * tap_corr * basis.matrix;
    return solver.solve(solver.solve(inner.adjoint()).adjoint());
}

/// Measurement matrix S_n mapping stacked BEM coefficients to the received
/// time-domain symbol: S_n c = H_n x_n for any in-span channel.
///
/// Column (l*Nc + d) reduces exactly to b_d .* x(( . - l) mod N) with
/// x = F^H X; this folds in the scale factor sqrt(N) relative to the raw
/// [D_d diag(X) f_l] column form under the unitary DFT convention (the
/// identity above pins the scale, see the oracle tests).
inline CMat build_measurement_matrix(const BemBasis& basis, const CVec& freq_symbols, int taps) {
    const Index n = basis.samples();
    if (freq_symbols.size() != n) {
        throw ConfigError("frequency symbol vector does not match the basis size");
    }
    const Index nc = basis.order();
    const CVec x = ofdm::idft(freq_symbols);
    CMat s(n, static_cast<Index>(taps) * nc);
    CVec shifted(n);
    for (int l = 0; l < taps; ++l) {
        for (Index q = 0; q < n; ++q) {
            shifted[q] = x[((q - l) % n + n) % n];
        }
        for (Index d = 0; d < nc; ++d) {
            s.col(l * nc + d) = basis.matrix.col(d).cwiseProduct(shifted);
        }
    }
    return s;
}

}  // namespace bemtrack::bem
