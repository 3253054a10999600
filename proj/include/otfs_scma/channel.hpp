#pragma once

#include <vector>

#include "otfs_scma/common.hpp"
#include "otfs_scma/grid.hpp"

namespace otfs {

struct ChannelPath {
    cplx gain{};
    int delay_tap = 0;        // l_tau, integer delay bins
    int doppler_tap = 0;      // k_nu, integer Doppler bins
    double doppler_frac = 0;  // kappa_nu in [-0.5, 0.5]

    friend bool operator==(const ChannelPath&, const ChannelPath&) = default;
};

struct ChannelRealization {
    std::vector<ChannelPath> paths;
    // Neighboring Doppler taps (each side) that a fractional path leaks into.
    int neighbor_span = 0;

    bool fractional() const;

    friend bool operator==(const ChannelRealization&, const ChannelRealization&) = default;
};

struct ChannelOptions {
    bool fractional = false;
    int neighbor_span = 2;
};

// Sparse MN x MN map from vectorized input to vectorized output grid.
struct CoefficientMatrix {
    GridSpec spec;
    SparseCMatrix entries;
};

// Path 0 is the line-of-sight (0,0) path. The other P-1 paths draw (delay,
// Doppler) taps uniformly from {0..P-1}^2, rejecting repeats. Gains are i.i.d.
// CN(0, 1/P). In fractional mode every path gets a uniform Doppler offset.
ChannelRealization sample_channel(int P, const GridSpec& spec, const ChannelOptions& opts, Rng& rng);

// Rectangular-pulse delay-Doppler input-output relation as a sparse matrix,
// summing q over [-N_i, N_i] per path. Exact zeros are pruned.
CoefficientMatrix build_coefficient_matrix(const ChannelRealization& ch, const GridSpec& spec);

// beta(q) = sum_{n=0}^{N-1} exp(-j2pi n(-q-kappa)/N); equals N at kappa = -q.
cplx doppler_beta(int q, double kappa, int N);

// Adds CN(0, N0) noise per entry.
CVector apply_awgn(const CVector& y_clean, double N0, Rng& rng);

// Per-row and per-column structural nonzero counts.
std::vector<int> row_nonzeros(const SparseCMatrix& H);
std::vector<int> col_nonzeros(const SparseCMatrix& H);

}  // namespace otfs
