#pragma once

#include <map>
#include <vector>

#include "bemtrack/types.hpp"

namespace bemtrack::ofdm {

enum class ConstellationKind { Bpsk, Qpsk };

/// Unit-energy alphabet with Gray bit mapping.
struct Constellation {
    ConstellationKind kind;
    CVec points;
    int bits_per_symbol;

    static Constellation bpsk() {
        Constellation c;
        c.kind = ConstellationKind::Bpsk;
        c.points = CVec(2);
        c.points << Complex(1.0, 0.0), Complex(-1.0, 0.0);
        c.bits_per_symbol = 1;
        return c;
    }

    static Constellation qpsk() {
        // Gray ring: 00, 01, 11, 10 map to (+,+), (+,-), (-,-), (-,+).
        Constellation c;
        c.kind = ConstellationKind::Qpsk;
        c.points = CVec(4);
        c.points << Complex(M_SQRT1_2, M_SQRT1_2), Complex(M_SQRT1_2, -M_SQRT1_2),
            Complex(-M_SQRT1_2, -M_SQRT1_2), Complex(-M_SQRT1_2, M_SQRT1_2);
        c.bits_per_symbol = 2;
        return c;
    }
};

inline CVec map_symbols(const std::vector<std::uint8_t>& bits, const Constellation& c) {
    if (bits.size() % static_cast<std::size_t>(c.bits_per_symbol) != 0) {
        throw ConfigError("bit count not divisible by bits per symbol");
    }
    const Index n = static_cast<Index>(bits.size()) / c.bits_per_symbol;
    CVec out(n);
    for (Index i = 0; i < n; ++i) {
        if (c.kind == ConstellationKind::Bpsk) {
            out[i] = Complex(bits[i] ? -1.0 : 1.0, 0.0);
        } else {
            const double re = bits[2 * i] ? -M_SQRT1_2 : M_SQRT1_2;
            const double im = bits[2 * i + 1] ? -M_SQRT1_2 : M_SQRT1_2;
            out[i] = Complex(re, im);
        }
    }
    return out;
}

inline std::vector<std::uint8_t> demap_symbols(const CVec& symbols, const Constellation& c) {
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(symbols.size()) * c.bits_per_symbol);
    for (Index i = 0; i < symbols.size(); ++i) {
        if (c.kind == ConstellationKind::Bpsk) {
            bits.push_back(symbols[i].real() < 0.0 ? 1 : 0);
        } else {
            bits.push_back(symbols[i].real() < 0.0 ? 1 : 0);
            bits.push_back(symbols[i].imag() < 0.0 ? 1 : 0);
        }
    }
    return bits;
}

/// Nearest constellation point; ties break to the lowest index.
inline Index slice_index(Complex z, const Constellation& c) {
    Index best = 0;
    double best_d2 = std::norm(z - c.points[0]);
    for (Index i = 1; i < c.points.size(); ++i) {
        const double d2 = std::norm(z - c.points[i]);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

inline std::vector<std::uint8_t> random_bits(std::size_t count, std::mt19937_64& rng) {
    std::vector<std::uint8_t> bits(count);
    for (auto& b : bits) {
        b = static_cast<std::uint8_t>(rng() & 1u);
    }
    return bits;
}

/// Unitary DFT matrix, [F]_{k,m} = e^{-j2pi km/N}/sqrt(N). Phases are reduced
/// with exact integer arithmetic so columns stay orthogonal to ~1e-15.
inline CMat dft_matrix(Index n) {
    CMat f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index k = 0; k < n; ++k) {
        for (Index m = 0; m < n; ++m) {
            const Index r = (k * m) % n;
            const double phase = -2.0 * kPi * static_cast<double>(r) / static_cast<double>(n);
            f(k, m) = std::polar(scale, phase);
        }
    }
    return f;
}

inline const CMat& cached_dft_matrix(Index n) {
    thread_local std::map<Index, CMat> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, dft_matrix(n)).first;
    }
    return it->second;
}

/// Unitary DFT of a time-domain vector.
inline CVec dft(const CVec& x) { return cached_dft_matrix(x.size()) * x; }

/// Unitary inverse DFT of a frequency-domain vector.
inline CVec idft(const CVec& x) { return cached_dft_matrix(x.size()).adjoint() * x; }

/// IDFT plus cyclic prefix: output[0..Ng) replicates output[N..N+Ng).
inline CVec ofdm_modulate(const CVec& freq_symbols, Index ng) {
    const Index n = freq_symbols.size();
    if (ng >= n) {
        throw ConfigError("cyclic prefix length must be smaller than the DFT size");
    }
    const CVec x = idft(freq_symbols);
    CVec out(n + ng);
    out.head(ng) = x.tail(ng);
    out.tail(n) = x;
    return out;
}

/// Unitary DFT of a CP-stripped received symbol.
inline CVec ofdm_demodulate(const CVec& time_samples) { return dft(time_samples); }

}  // namespace bemtrack::ofdm
