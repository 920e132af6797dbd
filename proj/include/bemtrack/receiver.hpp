#pragma once

#include <array>
#include <string>
#include <vector>

#include "bemtrack/config.hpp"
#include "bemtrack/imm.hpp"
#include "bemtrack/realization.hpp"

namespace bemtrack::rx {

enum class EstimatorKind { Imm, SingleLow, SingleHigh, SingleConcat };

inline std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Imm:
            return "imm";
        case EstimatorKind::SingleLow:
            return "low";
        case EstimatorKind::SingleHigh:
            return "high";
        case EstimatorKind::SingleConcat:
            return "concat";
    }
    return "unknown";
}

struct FrameOptions {
    EstimatorKind kind = EstimatorKind::Imm;
    bool genie = false;  // detection replaced by the true symbols (test isolation)
};

struct Detection {
    CVec freq_decisions;  // hard decisions X_hat
    CVec time_decisions;  // their IDFT x_hat
};

/// Equalizes one received symbol with the previous tap estimate: solves the
/// regularized system (H^H H + sigma_w2 I) x = H^H y over the full N x N
/// channel (ICI makes per-subcarrier equalization invalid), demodulates and
/// hard-slices. A zero estimate yields x = 0 and the slicer's deterministic
/// tie-break (lowest-index constellation point).
inline Detection equalize_and_detect(const CMat& taps_prev, const CVec& received,
                                     const ofdm::Constellation& constellation, double sigma_w2) {
    const Index n = received.size();
    const CMat h = channel::build_channel_matrix(taps_prev);
    CVec x;
    const CVec rhs = h.adjoint() * received;
    if (rhs.norm() == 0.0) {
        x = CVec::Zero(n);
    } else {
        CMat a = h.adjoint() * h;
        a.diagonal().array() += sigma_w2;
        x = a.ldlt().solve(rhs);
    }
    const CVec freq = ofdm::dft(x);
    Detection det;
    det.freq_decisions.resize(n);
    for (Index k = 0; k < n; ++k) {
        det.freq_decisions[k] = constellation.points[ofdm::slice_index(freq[k], constellation)];
    }
    det.time_decisions = ofdm::idft(det.freq_decisions);
    return det;
}

/// Per-symbol estimator trace over one frame.
struct FrameResult {
    std::vector<CMat> tap_estimates;  // per symbol: N x L
    std::vector<CVec> detected;       // per symbol: frequency-domain decisions
    RMat mode_trace;                  // frame x 2 mode probabilities (IMM only, else 0 x 2)
    RMat loglik_trace;                // frame x 2 log-likelihoods (IMM only)
    RVec per_tap_mse;
};

namespace detail {

/// Known preamble frequency symbols, a fixed function of the master seed.
inline std::vector<CVec> preamble_symbols(const sim::SimConfig& cfg) {
    auto rng = make_rng(cfg.seed, 0x70AD5u);
    const auto constellation = cfg.preamble_constellation();
    std::vector<CVec> out;
    for (int k = 0; k < cfg.K; ++k) {
        const auto bits = ofdm::random_bits(
            static_cast<std::size_t>(cfg.N) * constellation.bits_per_symbol, rng);
        out.push_back(ofdm::map_symbols(bits, constellation));
    }
    return out;
}

struct SingleTracker {
    bem::BemBasis basis;
    kalman::ArModel ar;
    kalman::KalmanState state;
};

struct ImmTracker {
    imm::ImmState state;
};

}  // namespace detail

/// Runs acquisition plus decision-directed tracking over one frame and
/// scores the per-tap MSE against the realization's ground truth.
///
/// Symbols 0..K-1 carry the known preamble: per-symbol LS acquisition, no
/// detection. From symbol K on, the previous symbol's combined tap estimate
/// equalizes the received symbol, the detected symbols rebuild the
/// measurement matrices, and one estimator step runs.
inline FrameResult run_frame(const sim::SimConfig& cfg, const channel::ChannelRealization& real,
                             const FrameOptions& options, double sigma_w2, std::mt19937_64& rng) {
    if (real.frame_len() != cfg.frame_len || real.samples() != cfg.N) {
        throw ConfigError("realization does not match the configuration");
    }
    if (sigma_w2 <= 0.0) {
        throw ConfigError("run_frame needs sigma_w2 > 0");
    }
    const auto& profile = real.profile;
    const int taps = profile.taps;
    const auto payload = cfg.payload_constellation();
    const auto preamble_x = detail::preamble_symbols(cfg);

    const bool is_imm = options.kind == EstimatorKind::Imm;
    std::vector<bem::BemBasis> bases;
    if (is_imm) {
        bases.push_back(bem::make_basis(bem::BasisKind::Low, cfg.N, cfg.Nc));
        bases.push_back(bem::make_basis(bem::BasisKind::High, cfg.N, cfg.Nc));
    } else if (options.kind == EstimatorKind::SingleLow) {
        bases.push_back(bem::make_basis(bem::BasisKind::Low, cfg.N, cfg.Nc));
    } else if (options.kind == EstimatorKind::SingleHigh) {
        bases.push_back(bem::make_basis(bem::BasisKind::High, cfg.N, cfg.Nc));
    } else {
        bases.push_back(bem::make_basis(bem::BasisKind::Concat, cfg.N, cfg.Nc));
    }
    std::vector<kalman::ArModel> models;
    models.reserve(bases.size());
    for (const auto& b : bases) {
        models.push_back(kalman::ar_from_profile(profile, b));
    }

    FrameResult result;
    result.tap_estimates.reserve(cfg.frame_len);
    result.detected.reserve(cfg.frame_len);
    if (is_imm) {
        result.mode_trace.resize(cfg.frame_len, 2);
        result.loglik_trace.resize(cfg.frame_len, 2);
    } else {
        result.mode_trace.resize(0, 2);
        result.loglik_trace.resize(0, 2);
    }

    // --- Acquisition over the preamble ---
    std::vector<CVec> preamble_y;
    std::vector<std::vector<CMat>> preamble_s(bases.size());
    for (int k = 0; k < cfg.K; ++k) {
        const CVec x = ofdm::idft(preamble_x[static_cast<std::size_t>(k)]);
        const CMat h = channel::build_channel_matrix(real, k);
        preamble_y.push_back(channel::apply_channel(h, x, sigma_w2, rng));
        for (std::size_t b = 0; b < bases.size(); ++b) {
            preamble_s[b].push_back(bem::build_measurement_matrix(
                bases[b], preamble_x[static_cast<std::size_t>(k)], taps));
        }
    }
    std::vector<kalman::Acquisition> acq;
    for (std::size_t b = 0; b < bases.size(); ++b) {
        acq.push_back(kalman::ls_acquire(preamble_y, preamble_s[b], sigma_w2));
    }
    for (int k = 0; k < cfg.K; ++k) {
        CMat est = CMat::Zero(cfg.N, taps);
        if (is_imm) {
            for (int j = 0; j < 2; ++j) {
                est += cfg.mu0[j] *
                       imm::coeffs_to_taps(bases[static_cast<std::size_t>(j)],
                                           acq[static_cast<std::size_t>(j)].per_symbol
                                               [static_cast<std::size_t>(k)]);
            }
        } else {
            est = imm::coeffs_to_taps(bases[0],
                                      acq[0].per_symbol[static_cast<std::size_t>(k)]);
        }
        result.tap_estimates.push_back(std::move(est));
        result.detected.push_back(preamble_x[static_cast<std::size_t>(k)]);
        if (is_imm) {
            result.mode_trace.row(k) = cfg.mu0.transpose();
            result.loglik_trace.row(k).setZero();
        }
    }

    detail::SingleTracker single;
    detail::ImmTracker tracker;
    if (is_imm) {
        tracker.state.filters = {acq[0].state, acq[1].state};
        tracker.state.mu = cfg.mu0;
        tracker.state.transition = cfg.P;
        tracker.state.bases = {bases[0], bases[1]};
        tracker.state.ar = {models[0], models[1]};
    } else {
        single.basis = bases[0];
        single.ar = models[0];
        single.state = acq[0].state;
    }

    // --- Decision-directed tracking ---
    for (int n = cfg.K; n < cfg.frame_len; ++n) {
        const auto bits =
            ofdm::random_bits(static_cast<std::size_t>(cfg.N) * payload.bits_per_symbol, rng);
        const CVec x_true_freq = ofdm::map_symbols(bits, payload);
        const CVec x_true = ofdm::idft(x_true_freq);
        const CMat h = channel::build_channel_matrix(real, n);
        const CVec y = channel::apply_channel(h, x_true, sigma_w2, rng);

        CVec x_hat_freq;
        if (options.genie) {
            x_hat_freq = x_true_freq;
        } else {
            x_hat_freq =
                equalize_and_detect(result.tap_estimates.back(), y, payload, sigma_w2)
                    .freq_decisions;
        }

        if (is_imm) {
            const std::array<CMat, 2> s = {
                bem::build_measurement_matrix(bases[0], x_hat_freq, taps),
                bem::build_measurement_matrix(bases[1], x_hat_freq, taps)};
            auto [next, output] = imm::imm_step(tracker.state, s, y, sigma_w2);
            tracker.state = std::move(next);
            result.tap_estimates.push_back(std::move(output.taps_combined));
            result.mode_trace.row(n) = output.mu.transpose();
            result.loglik_trace.row(n) = output.log_likelihood.transpose();
        } else {
            const CMat s = bem::build_measurement_matrix(single.basis, x_hat_freq, taps);
            const auto predicted = kalman::predict(single.state, single.ar);
            auto res = kalman::update(predicted, s, y, sigma_w2);
            single.state = std::move(res.state);
            result.tap_estimates.push_back(
                imm::coeffs_to_taps(single.basis, single.state.coeffs));
        }
        result.detected.push_back(std::move(x_hat_freq));
    }

    // --- Per-tap MSE over the whole frame (truth vs. per-symbol estimate) ---
    result.per_tap_mse = RVec::Zero(taps);
    for (int n = 0; n < cfg.frame_len; ++n) {
        const auto& est = result.tap_estimates[static_cast<std::size_t>(n)];
        const auto& truth = real.taps[static_cast<std::size_t>(n)];
        for (int l = 0; l < taps; ++l) {
            result.per_tap_mse[l] += (est.col(l) - truth.col(l)).squaredNorm();
        }
    }
    result.per_tap_mse /= static_cast<double>(cfg.frame_len) * static_cast<double>(cfg.N);
    return result;
}

}  // namespace bemtrack::rx
