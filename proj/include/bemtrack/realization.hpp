#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <utility>
#include <vector>

#include "bemtrack/bem.hpp"
#include "bemtrack/channel.hpp"
#include "bemtrack/config.hpp"
#include "bemtrack/kalman.hpp"

namespace bemtrack::channel {

/// Ground-truth frame channel: per-symbol N x L tap trajectories, the
/// active-model schedule (1 or 2), and the BEM coefficient trajectories
/// that generated them (taps are in-span by construction).
struct ChannelRealization {
    std::vector<CMat> taps;         // per symbol: N x L
    std::vector<int> schedule;      // 1 or 2
    std::vector<CVec> true_coeffs;  // per symbol: stacked L*Nc of the active model
    ChannelProfile profile;

    int frame_len() const { return static_cast<int>(taps.size()); }
    Index samples() const { return taps.empty() ? 0 : taps.front().rows(); }
};

inline CMat build_channel_matrix(const ChannelRealization& real, int n) {
    if (n < 0 || n >= real.frame_len()) {
        throw ConfigError("symbol index outside the frame");
    }
    return build_channel_matrix(real.taps[static_cast<std::size_t>(n)]);
}

namespace detail {

/// Stationary sampler for one AR block: c_0 ~ CN(0, R0), then
/// c_n = A c_{n-1} + u_n with u ~ CN(0, U).
struct BlockSampler {
    CMat a;
    CMat stationary_sqrt;
    CMat noise_sqrt;
};

inline std::vector<BlockSampler> make_samplers(const kalman::ArModel& ar) {
    std::vector<BlockSampler> samplers;
    const Index nc = ar.block_size;
    for (int l = 0; l < ar.blocks; ++l) {
        const CMat a = ar.transition.block(l * nc, l * nc, nc, nc);
        const CMat u = ar.process_noise.block(l * nc, l * nc, nc, nc);
        const CMat r = hermitized(ar.stationary.block(l * nc, l * nc, nc, nc));
        if (min_eigenvalue(r) < -1e-8 * std::max(r.real().trace() / nc, 1e-300)) {
            throw NumericalError("stationary coefficient covariance is indefinite");
        }
        samplers.push_back({a, psd_sqrt(clamp_psd(r)), psd_sqrt(u)});
    }
    return samplers;
}

}  // namespace detail

/// Generates a BEM-switching frame: taps follow the first basis/AR pair for
/// the first half of the frame and the second pair afterwards, with a fresh
/// stationary coefficient draw at the switch.
inline ChannelRealization generate_bem_channel(const sim::SimConfig& cfg,
                                               const ChannelProfile& profile,
                                               const std::array<bem::BemBasis, 2>& bases,
                                               const std::array<kalman::ArModel, 2>& ar,
                                               std::mt19937_64& rng) {
    if (cfg.frame_len % 2 != 0) {
        throw ConfigError("frame length must be even for the mid-frame model switch");
    }
    for (int j = 0; j < 2; ++j) {
        if (ar[j].blocks != profile.taps || ar[j].block_size != bases[j].order() ||
            bases[j].samples() != cfg.N) {
            throw ConfigError("bases/AR models inconsistent with the profile and N");
        }
    }
    ChannelRealization real;
    real.profile = profile;
    real.taps.reserve(cfg.frame_len);
    real.schedule.reserve(cfg.frame_len);
    real.true_coeffs.reserve(cfg.frame_len);

    const std::array<std::vector<detail::BlockSampler>, 2> samplers = {
        detail::make_samplers(ar[0]), detail::make_samplers(ar[1])};

    std::vector<CVec> coeffs(static_cast<std::size_t>(profile.taps));
    const int half = cfg.frame_len / 2;
    for (int n = 0; n < cfg.frame_len; ++n) {
        const int model = n < half ? 0 : 1;
        const auto& model_samplers = samplers[model];
        const Index nc = bases[model].order();
        const bool fresh = (n == 0 || n == half);
        CMat taps_n(cfg.N, profile.taps);
        CVec stacked(nc * profile.taps);
        for (int l = 0; l < profile.taps; ++l) {
            const auto& sampler = model_samplers[static_cast<std::size_t>(l)];
            if (fresh) {
                coeffs[l] = sampler.stationary_sqrt * randn_complex(nc, rng);
            } else {
                coeffs[l] = sampler.a * coeffs[l] + sampler.noise_sqrt * randn_complex(nc, rng);
            }
            stacked.segment(l * nc, nc) = coeffs[l];
            taps_n.col(l) = bases[model].matrix * coeffs[l];
        }
        real.taps.push_back(std::move(taps_n));
        real.true_coeffs.push_back(std::move(stacked));
        real.schedule.push_back(model + 1);
    }
    return real;
}

/// Binary tap dump for cross-checking with external tools. Little-endian:
/// header {uint32 N, uint32 L, uint32 frame_len}, then complex64
/// (float32 re, float32 im) samples ordered tap-major: for each tap l,
/// for each symbol n, for each sample q.
inline void dump_realization(const std::string& path, const ChannelRealization& real) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot open '" + path + "' for writing");
    }
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(real.samples()),
                                     static_cast<std::uint32_t>(real.profile.taps),
                                     static_cast<std::uint32_t>(real.frame_len())};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (int l = 0; l < real.profile.taps; ++l) {
        for (int n = 0; n < real.frame_len(); ++n) {
            for (Index q = 0; q < real.samples(); ++q) {
                const Complex v = real.taps[static_cast<std::size_t>(n)](q, l);
                const float re = static_cast<float>(v.real());
                const float im = static_cast<float>(v.imag());
                out.write(reinterpret_cast<const char*>(&re), sizeof(re));
                out.write(reinterpret_cast<const char*>(&im), sizeof(im));
            }
        }
    }
    if (!out) {
        throw ConfigError("failed while writing '" + path + "'");
    }
}

/// Reads a dump back as {N, L, frame_len} plus float32-precision taps.
inline std::pair<std::array<std::uint32_t, 3>, std::vector<CMat>> load_realization_dump(
    const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path + "' for reading");
    }
    std::array<std::uint32_t, 3> header{};
    in.read(reinterpret_cast<char*>(header.data()), sizeof(std::uint32_t) * 3);
    const Index n = header[0];
    const int taps = static_cast<int>(header[1]);
    const int frame = static_cast<int>(header[2]);
    std::vector<CMat> out(static_cast<std::size_t>(frame), CMat::Zero(n, taps));
    for (int l = 0; l < taps; ++l) {
        for (int sym = 0; sym < frame; ++sym) {
            for (Index q = 0; q < n; ++q) {
                float re = 0.0F;
                float im = 0.0F;
                in.read(reinterpret_cast<char*>(&re), sizeof(re));
                in.read(reinterpret_cast<char*>(&im), sizeof(im));
                out[static_cast<std::size_t>(sym)](q, l) = Complex(re, im);
            }
        }
    }
    if (!in) {
        throw ConfigError("truncated realization dump '" + path + "'");
    }
    return {header, out};
}

}  // namespace bemtrack::channel
