#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "bemtrack/bem.hpp"
#include "bemtrack/kalman.hpp"
#include "bemtrack/types.hpp"

namespace bemtrack::imm {

/// Two mode-matched Kalman filters plus the Markov switching machinery.
/// Both filters share the stacked coefficient dimension L*Nc.
struct ImmState {
    std::array<kalman::KalmanState, 2> filters;
    Eigen::Vector2d mu;
    Eigen::Matrix2d transition;  // p^(ij): row i = from-model, column j = to-model
    std::array<bem::BemBasis, 2> bases;
    std::array<kalman::ArModel, 2> ar;
};

struct MixingProbs {
    Eigen::Matrix2d mu_cond;  // (i, j): model i at n-1 given model j at n
    Eigen::Vector2d c_bar;
};

/// Mixing probabilities mu^(i|j) = p^(ij) mu^(i) / c_bar^(j) with
/// c_bar^(j) = sum_i p^(ij) mu^(i). A zero c_bar^(j) means model j is
/// unreachable this step; its mixing column falls back to the model's own
/// state so downstream stays finite (the mode weight stays exactly zero).
inline MixingProbs calc_mixing_probs(const Eigen::Matrix2d& transition,
                                     const Eigen::Vector2d& mu_prev) {
    MixingProbs mp;
    mp.c_bar = transition.transpose() * mu_prev;
    if (!(mp.c_bar.maxCoeff() > 0.0)) {
        throw NumericalError("all mixing normalizations vanished (degenerate prior)");
    }
    for (int j = 0; j < 2; ++j) {
        if (mp.c_bar[j] > 0.0) {
            for (int i = 0; i < 2; ++i) {
                mp.mu_cond(i, j) = transition(i, j) * mu_prev[i] / mp.c_bar[j];
            }
        } else {
            mp.mu_cond.col(j) = Eigen::Vector2d::Unit(j);
        }
    }
    return mp;
}

/// Mixed initial condition per filter: convex state combination plus the
/// spread-of-the-means covariance term.
inline std::array<kalman::KalmanState, 2> mix_initial_conditions(
    const std::array<kalman::KalmanState, 2>& filters, const Eigen::Matrix2d& mu_cond) {
    if (filters[0].dim() != filters[1].dim()) {
        throw ConfigError("mode-matched filters must share the state dimension");
    }
    std::array<kalman::KalmanState, 2> mixed;
    for (int j = 0; j < 2; ++j) {
        CVec c = mu_cond(0, j) * filters[0].coeffs + mu_cond(1, j) * filters[1].coeffs;
        CMat m = CMat::Zero(filters[0].dim(), filters[0].dim());
        for (int i = 0; i < 2; ++i) {
            const CVec d = filters[i].coeffs - c;
            m += mu_cond(i, j) * (filters[i].cov + d * d.adjoint());
        }
        mixed[j].coeffs = std::move(c);
        mixed[j].cov = hermitized(m);
        mixed[j].kind = kalman::StateKind::Filtered;
    }
    return mixed;
}

/// Log-likelihood of the innovation under the circular complex Gaussian:
/// log L = -N log(pi) - log det(Q) - v^H Q^{-1} v.
inline double model_likelihood(const CVec& innovation, const CMat& innovation_cov) {
    Eigen::LLT<CMat> llt(hermitized(innovation_cov));
    if (llt.info() != Eigen::Success) {
        throw NumericalError("innovation covariance is not positive definite");
    }
    double log_det = 0.0;
    const auto& l = llt.matrixLLT();
    for (Index i = 0; i < l.rows(); ++i) {
        log_det += 2.0 * std::log(l(i, i).real());
    }
    const double quad = innovation.dot(llt.solve(innovation)).real();
    return -static_cast<double>(innovation.size()) * std::log(kPi) - log_det - quad;
}

/// mu^(j) = L^(j) c_bar^(j) / c, computed with max-log subtraction.
inline Eigen::Vector2d update_mode_probs(const Eigen::Vector2d& log_likelihoods,
                                         const Eigen::Vector2d& c_bar) {
    Eigen::Vector2d logw;
    for (int j = 0; j < 2; ++j) {
        logw[j] = c_bar[j] > 0.0 ? log_likelihoods[j] + std::log(c_bar[j])
                                 : -std::numeric_limits<double>::infinity();
    }
    const double shift = logw.maxCoeff();
    if (!std::isfinite(shift)) {
        throw NumericalError("both mode likelihoods vanished");
    }
    Eigen::Vector2d mu = (logw.array() - shift).exp();
    mu /= mu.sum();
    return mu;
}

struct ImmOutput {
    CVec c_combined;
    CMat cov_combined;
    CMat taps_combined;  // N x L tap-domain mixture used by the equalizer
    Eigen::Vector2d mu;
    Eigen::Vector2d log_likelihood;
};

/// Tap trajectories B c_l for a stacked coefficient vector, one column per tap.
inline CMat coeffs_to_taps(const bem::BemBasis& basis, const CVec& stacked) {
    const Index nc = basis.order();
    const Index taps = stacked.size() / nc;
    CMat out(basis.samples(), taps);
    for (Index l = 0; l < taps; ++l) {
        out.col(l) = basis.matrix * stacked.segment(l * nc, nc);
    }
    return out;
}

/// Moment-matched combination in coefficient space (spread term included)
/// plus the tap-domain mixture sum_j mu_j B_j c_j.
inline ImmOutput combine(const std::array<kalman::KalmanState, 2>& filters,
                         const Eigen::Vector2d& mu, const std::array<bem::BemBasis, 2>& bases) {
    ImmOutput out;
    out.mu = mu;
    out.c_combined = mu[0] * filters[0].coeffs + mu[1] * filters[1].coeffs;
    CMat m = CMat::Zero(filters[0].dim(), filters[0].dim());
    for (int j = 0; j < 2; ++j) {
        const CVec d = filters[j].coeffs - out.c_combined;
        m += mu[j] * (filters[j].cov + d * d.adjoint());
    }
    out.cov_combined = hermitized(m);
    out.taps_combined = mu[0] * coeffs_to_taps(bases[0], filters[0].coeffs) +
                        mu[1] * coeffs_to_taps(bases[1], filters[1].coeffs);
    return out;
}

/// One full IMM cycle: mixing probabilities, mixed initial conditions,
/// mode-matched predict/update with likelihoods, mode-probability update,
/// and estimate combination.
inline std::pair<ImmState, ImmOutput> imm_step(const ImmState& state,
                                               const std::array<CMat, 2>& measurement,
                                               const CVec& received, double sigma_w2) {
    const MixingProbs mp = calc_mixing_probs(state.transition, state.mu);
    const auto mixed = mix_initial_conditions(state.filters, mp.mu_cond);

    ImmState next = state;
    Eigen::Vector2d log_lik;
    for (int j = 0; j < 2; ++j) {
        const auto predicted = kalman::predict(mixed[j], state.ar[j]);
        auto res = kalman::update(predicted, measurement[j], received, sigma_w2);
        log_lik[j] = model_likelihood(res.innovation, res.innovation_cov);
        next.filters[j] = std::move(res.state);
    }
    next.mu = update_mode_probs(log_lik, mp.c_bar);

    ImmOutput out = combine(next.filters, next.mu, state.bases);
    out.log_likelihood = log_lik;
    return {std::move(next), std::move(out)};
}

}  // namespace bemtrack::imm
