#include "otfs_scma/channel.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>

namespace otfs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int wrap(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

}  // namespace

bool ChannelRealization::fractional() const {
    if (neighbor_span != 0) return true;
    for (const auto& p : paths) {
        if (p.doppler_frac != 0.0) return true;
    }
    return false;
}

ChannelRealization sample_channel(int P, const GridSpec& spec, const ChannelOptions& opts, Rng& rng) {
    spec.validate();
    if (P < 1) {
        fail(ValidationError::Kind::InvalidConfig, "path count must be at least 1");
    }
    if (P > spec.M || P > spec.N) {
        fail(ValidationError::Kind::InvalidConfig,
             "P=" + std::to_string(P) + " taps would exceed a " + std::to_string(spec.N) + "x" +
                 std::to_string(spec.M) + " grid");
    }
    if (opts.fractional && opts.neighbor_span < 0) {
        fail(ValidationError::Kind::InvalidConfig, "neighbor span must be non-negative");
    }

    ChannelRealization ch;
    ch.neighbor_span = opts.fractional ? opts.neighbor_span : 0;

    std::uniform_int_distribution<int> tap(0, P - 1);
    std::set<std::pair<int, int>> used{{0, 0}};
    std::vector<std::pair<int, int>> taps{{0, 0}};
    while (static_cast<int>(taps.size()) < P) {
        const int l = tap(rng);
        const int k = tap(rng);
        if (used.insert({l, k}).second) taps.emplace_back(l, k);
    }

    // Real and imaginary parts each carry half of the 1/P path power.
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 / P));
    std::uniform_real_distribution<double> frac(-0.5, 0.5);
    for (const auto& [l, k] : taps) {
        ChannelPath p;
        p.delay_tap = l;
        p.doppler_tap = k;
        const double re = gauss(rng);
        const double im = gauss(rng);
        p.gain = {re, im};
        if (opts.fractional) p.doppler_frac = frac(rng);
        ch.paths.push_back(p);
    }
    return ch;
}

cplx doppler_beta(int q, double kappa, int N) {
    cplx acc{};
    for (int n = 0; n < N; ++n) {
        acc += std::polar(1.0, -kTwoPi * n * (-q - kappa) / N);
    }
    return acc;
}

CoefficientMatrix build_coefficient_matrix(const ChannelRealization& ch, const GridSpec& spec) {
    spec.validate();
    const int N = spec.N;
    const int M = spec.M;
    for (const auto& p : ch.paths) {
        if (p.delay_tap < 0 || p.delay_tap >= M) {
            fail(ValidationError::Kind::InvalidChannel,
                 "delay tap " + std::to_string(p.delay_tap) + " outside [0, " + std::to_string(M) + ")");
        }
        if (std::abs(p.doppler_frac) > 0.5) {
            fail(ValidationError::Kind::InvalidChannel, "fractional Doppler offset outside [-0.5, 0.5]");
        }
    }
    if (ch.neighbor_span < 0) {
        fail(ValidationError::Kind::InvalidChannel, "neighbor span must be non-negative");
    }

    const int span = ch.neighbor_span;
    std::vector<Eigen::Triplet<cplx>> triplets;
    triplets.reserve(spec.slots() * ch.paths.size() * static_cast<std::size_t>(2 * span + 1));

    for (const auto& p : ch.paths) {
        const double nu = p.doppler_tap + p.doppler_frac;
        std::vector<cplx> beta;
        for (int q = -span; q <= span; ++q) beta.push_back(doppler_beta(q, p.doppler_frac, N));

        for (int k = 0; k < N; ++k) {
            for (int l = 0; l < M; ++l) {
                const cplx phase = std::polar(1.0, kTwoPi * (static_cast<double>(l - p.delay_tap) / M) * (nu / N));
                const int src_l = wrap(l - p.delay_tap, M);
                for (int q = -span; q <= span; ++q) {
                    const int src_k = wrap(k - p.doppler_tap + q, N);
                    const cplx b = beta[static_cast<std::size_t>(q + span)];
                    cplx alpha;
                    if (l >= p.delay_tap) {
                        alpha = b / static_cast<double>(N);
                    } else {
                        alpha = (b - 1.0) / static_cast<double>(N) *
                                std::polar(1.0, -kTwoPi * static_cast<double>(src_k) / N);
                    }
                    triplets.emplace_back(static_cast<int>(spec.index(k, l)),
                                          static_cast<int>(spec.index(src_k, src_l)), p.gain * phase * alpha);
                }
            }
        }
    }

    const auto n = static_cast<Eigen::Index>(spec.slots());
    CoefficientMatrix H{spec, SparseCMatrix(n, n)};
    H.entries.setFromTriplets(triplets.begin(), triplets.end());
    H.entries.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return v != cplx{}; });
    H.entries.makeCompressed();
    return H;
}

CVector apply_awgn(const CVector& y_clean, double N0, Rng& rng) {
    if (!(N0 >= 0.0)) {
        fail(ValidationError::Kind::InvalidParameter, "noise variance must be non-negative");
    }
    if (N0 == 0.0) return y_clean;
    std::normal_distribution<double> gauss(0.0, std::sqrt(N0 / 2.0));
    CVector y = y_clean;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        y[i] += cplx(re, im);
    }
    return y;
}

std::vector<int> row_nonzeros(const SparseCMatrix& H) {
    std::vector<int> counts(static_cast<std::size_t>(H.rows()), 0);
    for (Eigen::Index r = 0; r < H.outerSize(); ++r) {
        for (SparseCMatrix::InnerIterator it(H, r); it; ++it) {
            if (it.value() != cplx{}) ++counts[static_cast<std::size_t>(it.row())];
        }
    }
    return counts;
}

std::vector<int> col_nonzeros(const SparseCMatrix& H) {
    std::vector<int> counts(static_cast<std::size_t>(H.cols()), 0);
    for (Eigen::Index r = 0; r < H.outerSize(); ++r) {
        for (SparseCMatrix::InnerIterator it(H, r); it; ++it) {
            if (it.value() != cplx{}) ++counts[static_cast<std::size_t>(it.col())];
        }
    }
    return counts;
}

}  // namespace otfs
