#pragma once

#include <cmath>

#include "bemtrack/bessel.hpp"
#include "bemtrack/ofdm.hpp"
#include "bemtrack/types.hpp"

namespace bemtrack::channel {

/// WSS multipath profile. Per-tap variances are the power delay profile
/// converted to linear scale and normalized to unit total power, which
/// fixes the SNR definition.
struct ChannelProfile {
    int taps = 0;
    RVec pdp_db;
    RVec sigma2;
    double fd_hz = 0.0;
    double ts_s = 0.0;
    Index samples_per_symbol = 0;  // N + Ng

    static ChannelProfile from_pdp(const RVec& pdp_db, double fd_hz, double ts_s,
                                   Index samples_per_symbol) {
        if (pdp_db.size() < 1) {
            throw ConfigError("power delay profile needs at least one tap");
        }
        if (fd_hz < 0.0 || ts_s <= 0.0 || samples_per_symbol < 1) {
            throw ConfigError("invalid Doppler, sample interval, or symbol length");
        }
        ChannelProfile p;
        p.taps = static_cast<int>(pdp_db.size());
        p.pdp_db = pdp_db;
        p.sigma2 = (pdp_db / 10.0).unaryExpr([](double e) { return std::pow(10.0, e); });
        p.sigma2 /= p.sigma2.sum();
        p.fd_hz = fd_hz;
        p.ts_s = ts_s;
        p.samples_per_symbol = samples_per_symbol;
        return p;
    }

    /// The four-tap (0,-1,-3,-9) dB profile used throughout the experiments.
    static ChannelProfile standard(double fd_hz, double ts_s, Index samples_per_symbol) {
        RVec pdp(4);
        pdp << 0.0, -1.0, -3.0, -9.0;
        return from_pdp(pdp, fd_hz, ts_s, samples_per_symbol);
    }
};

/// Jakes temporal correlation of tap l across one OFDM symbol at symbol lag
/// p: [R]_{k,m} = sigma_l^2 J0(2 pi fd Ts (k - m + p Ns)).
inline RMat jakes_correlation_matrix(const ChannelProfile& profile, int tap, int lag, Index n) {
    if (tap < 0 || tap >= profile.taps) {
        throw ConfigError("tap index out of range");
    }
    const double s2 = profile.sigma2[tap];
    const double step = 2.0 * kPi * profile.fd_hz * profile.ts_s;
    const Index offset = static_cast<Index>(lag) * profile.samples_per_symbol;
    // Toeplitz in k-m: evaluate J0 once per distinct sample lag.
    RVec by_lag(2 * n - 1);
    for (Index d = -(n - 1); d <= n - 1; ++d) {
        by_lag[d + n - 1] = s2 * bessel_j0(step * static_cast<double>(d + offset));
    }
    RMat r(n, n);
    for (Index k = 0; k < n; ++k) {
        for (Index m = 0; m < n; ++m) {
            r(k, m) = by_lag[k - m + n - 1];
        }
    }
    return r;
}

/// Time-domain channel matrix: [H]_{q,m} = h_l(q) at l = (q-m) mod N for
/// l < L, zero otherwise. Taps are the columns of an N x L matrix.
inline CMat build_channel_matrix(const CMat& taps) {
    const Index n = taps.rows();
    const Index l_count = taps.cols();
    CMat h = CMat::Zero(n, n);
    for (Index l = 0; l < l_count; ++l) {
        for (Index q = 0; q < n; ++q) {
            h(q, ((q - l) % n + n) % n) = taps(q, l);
        }
    }
    return h;
}

/// y = H x + w with circular complex Gaussian noise of covariance
/// sigma_w2 I (per-component variance sigma_w2/2).
inline CVec apply_channel(const CMat& h, const CVec& x, double sigma_w2, std::mt19937_64& rng) {
    if (sigma_w2 < 0.0) {
        throw ConfigError("noise variance must be non-negative");
    }
    CVec y = h * x;
    if (sigma_w2 > 0.0) {
        y += std::sqrt(sigma_w2) * randn_complex(x.size(), rng);
    }
    return y;
}

/// Frequency-domain channel matrix G = F H F^H (diagonal iff H circulant).
inline CMat freq_channel(const CMat& h) {
    const CMat& f = ofdm::cached_dft_matrix(h.rows());
    return f * h * f.adjoint();
}

}  // namespace bemtrack::channel
