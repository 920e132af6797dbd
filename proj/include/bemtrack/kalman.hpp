#pragma once

#include <vector>

#include "bemtrack/bem.hpp"
#include "bemtrack/channel.hpp"
#include "bemtrack/types.hpp"

namespace bemtrack::kalman {

/// First-order AR dynamics of the stacked BEM coefficients: block-diagonal
/// transition A and Hermitian PSD process-noise covariance U, one block of
/// size Nc per channel tap.
struct ArModel {
    CMat transition;
    CMat process_noise;
    CMat stationary;  // lag-0 coefficient covariance, the AR fixed point
    Index block_size = 0;
    int blocks = 0;

    Index dim() const { return transition.rows(); }
};

/// Yule-Walker fit per tap: A_l = R^(1) (R^(0))^{-1} and
/// U_l = R^(0) - A_l R^(-1) (the sign that keeps stationarity; the
/// resulting Schur complement is clamped to the nearest Hermitian PSD
/// matrix when rounding leaves tiny negative eigenvalues).
inline ArModel derive_ar_model(const std::vector<CMat>& rc0, const std::vector<CMat>& rc1,
                               const std::vector<CMat>& rcm1) {
    if (rc0.empty() || rc0.size() != rc1.size() || rc0.size() != rcm1.size()) {
        throw ConfigError("need matching per-tap correlation lists for lags 0, +1, -1");
    }
    const Index nc = rc0.front().rows();
    ArModel model;
    model.block_size = nc;
    model.blocks = static_cast<int>(rc0.size());
    model.transition = CMat::Zero(nc * model.blocks, nc * model.blocks);
    model.process_noise = CMat::Zero(nc * model.blocks, nc * model.blocks);
    model.stationary = CMat::Zero(nc * model.blocks, nc * model.blocks);
    for (int l = 0; l < model.blocks; ++l) {
        const CMat r0 = hermitized(rc0[l]);
        Eigen::SelfAdjointEigenSolver<CMat> es(r0);
        const double ev_max = es.eigenvalues().maxCoeff();
        if (!(ev_max > 0.0)) {
            throw NumericalError("lag-0 coefficient correlation is not positive");
        }
        if (es.eigenvalues().minCoeff() < -1e-8 * ev_max) {
            throw NumericalError("lag-0 coefficient correlation is indefinite");
        }
        // Relative ridge keeps the solve sane when the basis captures
        // frequencies the Doppler spectrum barely excites.
        const double ridge = 1e-13 * ev_max;
        const auto solver = (r0 + ridge * CMat::Identity(nc, nc)).ldlt();
        const CMat a = solver.solve(rc1[l].adjoint()).adjoint();
        CMat u = r0 - a * rcm1[l];
        u = hermitized(u);
        if (min_eigenvalue(u) < -1e-8 * std::max(u.real().trace() / nc, ridge)) {
            throw NumericalError("Yule-Walker process noise is indefinite");
        }
        u = clamp_psd(u);
        model.transition.block(l * nc, l * nc, nc, nc) = a;
        model.process_noise.block(l * nc, l * nc, nc, nc) = u;
        model.stationary.block(l * nc, l * nc, nc, nc) = clamp_psd(r0);
    }
    return model;
}

/// Jakes statistics -> per-tap coefficient correlations -> AR model.
inline ArModel ar_from_profile(const channel::ChannelProfile& profile, const bem::BemBasis& basis) {
    const Index n = basis.samples();
    std::vector<CMat> rc0;
    std::vector<CMat> rc1;
    std::vector<CMat> rcm1;
    for (int l = 0; l < profile.taps; ++l) {
        rc0.push_back(bem::coeff_correlation(basis, jakes_correlation_matrix(profile, l, 0, n)));
        rc1.push_back(bem::coeff_correlation(basis, jakes_correlation_matrix(profile, l, 1, n)));
        rcm1.push_back(bem::coeff_correlation(basis, jakes_correlation_matrix(profile, l, -1, n)));
    }
    return derive_ar_model(rc0, rc1, rcm1);
}

enum class StateKind { Predicted, Filtered };

struct KalmanState {
    CVec coeffs;
    CMat cov;
    StateKind kind = StateKind::Filtered;

    Index dim() const { return coeffs.size(); }
};

/// Single-symbol LS solve c = (S^H S)^{-1} S^H y.
inline CVec ls_solve(const CMat& s, const CVec& y) {
    const CMat gram = s.adjoint() * s;
    Eigen::LDLT<CMat> solver(gram);
    const RVec d = solver.vectorD().real();
    if (solver.info() != Eigen::Success || d.minCoeff() <= 1e-12 * d.maxCoeff()) {
        throw NumericalError("measurement matrix is rank deficient in acquisition");
    }
    return solver.solve(s.adjoint() * y);
}

struct Acquisition {
    std::vector<CVec> per_symbol;  // one LS estimate per preamble symbol
    KalmanState state;             // last symbol's estimate, LS error covariance
};

/// Per-symbol preamble LS; the tracker is handed the last symbol's estimate
/// with M0 = sigma_w2 (S^H S)^{-1}.
inline Acquisition ls_acquire(const std::vector<CVec>& received,
                              const std::vector<CMat>& measurement, double sigma_w2) {
    if (received.empty() || received.size() != measurement.size()) {
        throw ConfigError("preamble symbol and measurement matrix counts differ");
    }
    Acquisition acq;
    for (std::size_t k = 0; k < received.size(); ++k) {
        acq.per_symbol.push_back(ls_solve(measurement[k], received[k]));
    }
    const CMat& last = measurement.back();
    const CMat gram = last.adjoint() * last;
    acq.state.coeffs = acq.per_symbol.back();
    acq.state.cov = hermitized(
        gram.ldlt().solve(CMat::Identity(gram.rows(), gram.cols())) * sigma_w2);
    acq.state.kind = StateKind::Filtered;
    return acq;
}

/// Time update: c <- A c, M <- A M A^H + U.
inline KalmanState predict(const KalmanState& state, const ArModel& ar) {
    if (state.kind != StateKind::Filtered) {
        throw std::logic_error("predict expects a filtered state");
    }
    if (state.dim() != ar.dim()) {
        throw ConfigError("state and AR model dimensions differ");
    }
    KalmanState out;
    out.coeffs = ar.transition * state.coeffs;
    out.cov = hermitized(ar.transition * state.cov * ar.transition.adjoint() + ar.process_noise);
    out.kind = StateKind::Predicted;
    return out;
}

struct UpdateResult {
    KalmanState state;
    CVec innovation;
    CMat innovation_cov;
};

/// Measurement update with gain K = M S^H Q^{-1}, Q = sigma_w2 I + S M S^H.
/// The posterior covariance is re-hermitized; if that still leaves it
/// indefinite the Joseph form is used instead.
inline UpdateResult update(const KalmanState& state, const CMat& s, const CVec& y,
                           double sigma_w2) {
    if (state.kind != StateKind::Predicted) {
        throw std::logic_error("update expects a predicted state");
    }
    if (sigma_w2 <= 0.0) {
        throw ConfigError("measurement update needs sigma_w2 > 0");
    }
    UpdateResult res;
    const CMat sm = s * state.cov;  // S M
    CMat q = sm * s.adjoint();
    q.diagonal().array() += sigma_w2;
    q = hermitized(q);
    Eigen::LLT<CMat> llt(q);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("innovation covariance is not positive definite");
    }
    const CMat gain = llt.solve(sm).adjoint();  // M S^H Q^{-1}
    res.innovation = y - s * state.coeffs;
    res.state.coeffs = state.coeffs + gain * res.innovation;
    res.state.cov = hermitized(state.cov - gain * sm);
    res.state.kind = StateKind::Filtered;
    res.innovation_cov = q;

    const Index dim = state.dim();
    const double scale = std::max(res.state.cov.real().trace() / static_cast<double>(dim), 0.0);
    if (min_eigenvalue(res.state.cov) < -1e-10 * std::max(scale, 1e-300)) {
        const CMat ident = CMat::Identity(dim, dim);
        const CMat j = ident - gain * s;
        res.state.cov =
            hermitized(j * state.cov * j.adjoint() + sigma_w2 * (gain * gain.adjoint()));
    }
    return res;
}

}  // namespace bemtrack::kalman
