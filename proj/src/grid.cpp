#include "otfs_scma/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace otfs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Twiddle table w[i] = exp(sign * j2pi * i / n).
std::vector<cplx> twiddles(int n, double sign) {
    std::vector<cplx> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = std::polar(1.0, sign * kTwoPi * i / n);
    }
    return w;
}

// Separable evaluation of
//   out[a,b] = scale * sum_r sum_s in[r,s] exp(j2pi(row_sign*a*r/N + col_sign*b*s/M)).
// Both transforms are instances with opposite signs. The phase index is
// reduced mod N (resp. M) so the tables stay exact.
DelayDopplerGrid separable_dft(const DelayDopplerGrid& in, double row_sign, double col_sign,
                               double scale) {
    const GridSpec& spec = in.spec();
    const int N = spec.N;
    const int M = spec.M;
    const auto wr = twiddles(N, row_sign);
    const auto wc = twiddles(M, col_sign);

    // Pass 1: along delay (columns) for each row.
    std::vector<cplx> tmp(spec.slots());
    for (int r = 0; r < N; ++r) {
        for (int b = 0; b < M; ++b) {
            cplx acc{};
            for (int s = 0; s < M; ++s) {
                acc += in(r, s) * wc[static_cast<std::size_t>((b * s) % M)];
            }
            tmp[spec.index(r, b)] = acc;
        }
    }

    // Pass 2: along Doppler (rows).
    DelayDopplerGrid out(spec);
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < M; ++b) {
            cplx acc{};
            for (int r = 0; r < N; ++r) {
                acc += tmp[spec.index(r, b)] * wr[static_cast<std::size_t>((a * r) % N)];
            }
            out(a, b) = scale * acc;
        }
    }
    return out;
}

}  // namespace

void GridSpec::validate() const {
    if (N < 1 || M < 1) {
        fail(ValidationError::Kind::InvalidConfig,
             "grid dimensions must be positive (N=" + std::to_string(N) +
                 ", M=" + std::to_string(M) + ")");
    }
}

DelayDopplerGrid::DelayDopplerGrid(GridSpec spec) : spec_(spec) {
    spec_.validate();
    cells_.assign(spec_.slots(), cplx{});
}

DelayDopplerGrid::DelayDopplerGrid(GridSpec spec, std::vector<cplx> cells)
    : spec_(spec), cells_(std::move(cells)) {
    spec_.validate();
    if (cells_.size() != spec_.slots()) {
        fail(ValidationError::Kind::Dimension,
             "grid holds " + std::to_string(cells_.size()) + " cells, expected " +
                 std::to_string(spec_.slots()));
    }
}

bool DelayDopplerGrid::all_finite() const {
    for (const auto& c : cells_) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    }
    return true;
}

DelayDopplerGrid isfft(const DelayDopplerGrid& x) {
    const double scale = 1.0 / static_cast<double>(x.spec().slots());
    return separable_dft(x, +1.0, -1.0, scale);
}

DelayDopplerGrid sfft(const DelayDopplerGrid& Y) {
    return separable_dft(Y, -1.0, +1.0, 1.0);
}

CVector vectorize(const DelayDopplerGrid& g) {
    const auto cells = g.cells();
    CVector v(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) v[static_cast<Eigen::Index>(i)] = cells[i];
    return v;
}

DelayDopplerGrid devectorize(const CVector& v, const GridSpec& spec) {
    spec.validate();
    if (static_cast<std::size_t>(v.size()) != spec.slots()) {
        fail(ValidationError::Kind::Dimension,
             "vector length " + std::to_string(v.size()) + " does not match N*M = " +
                 std::to_string(spec.slots()));
    }
    return DelayDopplerGrid(spec, std::vector<cplx>(v.data(), v.data() + v.size()));
}

CMatrix sfft_matrix(const GridSpec& spec) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(spec.slots());
    CMatrix G(n, n);
    for (int k = 0; k < spec.N; ++k) {
        for (int l = 0; l < spec.M; ++l) {
            for (int nn = 0; nn < spec.N; ++nn) {
                for (int m = 0; m < spec.M; ++m) {
                    const double phase = -kTwoPi * (static_cast<double>((nn * k) % spec.N) / spec.N -
                                                    static_cast<double>((m * l) % spec.M) / spec.M);
                    G(static_cast<Eigen::Index>(spec.index(k, l)),
                      static_cast<Eigen::Index>(spec.index(nn, m))) = std::polar(1.0, phase);
                }
            }
        }
    }
    return G;
}

CMatrix isfft_matrix(const GridSpec& spec) {
    // The transform pair is exact, and sfft_matrix is sqrt(NM) times a unitary.
    return sfft_matrix(spec).adjoint() / static_cast<double>(spec.slots());
}

}  // namespace otfs
