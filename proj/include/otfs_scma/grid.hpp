#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otfs_scma/common.hpp"

namespace otfs {

// Frame geometry: N Doppler bins (rows) by M delay bins (columns).
struct GridSpec {
    int N = 1;
    int M = 1;

    std::size_t slots() const { return static_cast<std::size_t>(N) * static_cast<std::size_t>(M); }

    // Row-wise vector index of cell (k, l).
    std::size_t index(int k, int l) const {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(M) + static_cast<std::size_t>(l);
    }

    void validate() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// N x M complex array stored Doppler-major. Holds x[k,l], y[k,l] in the
// delay-Doppler domain and X[n,m], Y[n,m] in the time-frequency domain.
class DelayDopplerGrid {
public:
    explicit DelayDopplerGrid(GridSpec spec);
    DelayDopplerGrid(GridSpec spec, std::vector<cplx> cells);

    const GridSpec& spec() const { return spec_; }

    cplx& operator()(int k, int l) { return cells_[spec_.index(k, l)]; }
    const cplx& operator()(int k, int l) const { return cells_[spec_.index(k, l)]; }

    std::span<const cplx> cells() const { return cells_; }
    std::span<cplx> cells() { return cells_; }

    bool all_finite() const;

private:
    GridSpec spec_;
    std::vector<cplx> cells_;
};

// X[n,m] = 1/(NM) sum_k sum_l x[k,l] exp(j2pi(nk/N - ml/M))
DelayDopplerGrid isfft(const DelayDopplerGrid& x);

// y[k,l] = sum_n sum_m Y[n,m] exp(-j2pi(nk/N - ml/M))
DelayDopplerGrid sfft(const DelayDopplerGrid& Y);

// Row-wise vectorization, index k*M + l.
CVector vectorize(const DelayDopplerGrid& g);
DelayDopplerGrid devectorize(const CVector& v, const GridSpec& spec);

// Dense matrices of the two transforms acting on vectorized grids, so that
// vectorize(sfft(Y)) == sfft_matrix(spec) * vectorize(Y).
CMatrix sfft_matrix(const GridSpec& spec);
CMatrix isfft_matrix(const GridSpec& spec);

}  // namespace otfs
