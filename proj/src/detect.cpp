#include "otfs_scma/detect.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace otfs {

namespace {

constexpr double kNoiseFloor = 1e-12;

LmmseOutput lmmse_from_gram(const CMatrix& gram_plus_noise, const CVector& y, double n0,
                            const std::function<CVector(const CVector&)>& apply_adjoint) {
    Eigen::LLT<CMatrix> llt(gram_plus_noise);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("LMMSE system H H^* + N0 I is not positive definite after regularization");
    }
    const CVector w = llt.solve(y);
    if (!w.allFinite()) throw NumericalError("LMMSE solve produced non-finite values");

    // tr(A^{-1}) = ||L^{-1}||_F^2 for A = L L^*.
    const auto n = gram_plus_noise.rows();
    const CMatrix Linv = llt.matrixL().solve(CMatrix::Identity(n, n));
    LmmseOutput out;
    out.estimate = apply_adjoint(w);
    out.error_variance = n0 * Linv.squaredNorm() / static_cast<double>(n);
    return out;
}

void check_square(Eigen::Index rows, Eigen::Index cols, Eigen::Index ylen) {
    if (rows != cols || rows != ylen) {
        fail(ValidationError::Kind::Dimension, "LMMSE needs a square H matching y (H is " + std::to_string(rows) +
                                                   "x" + std::to_string(cols) + ", y has " +
                                                   std::to_string(ylen) + ")");
    }
}

}  // namespace

// ============================================================================
// LMMSE
// ============================================================================

LmmseOutput lmmse_equalize(const CoefficientMatrix& H, const CVector& y, double N0) {
    const auto& h = H.entries;
    check_square(h.rows(), h.cols(), y.size());
    const double n0 = std::max(N0, kNoiseFloor);
    const SparseCMatrix adj = h.adjoint();
    const SparseCMatrix gram = h * adj;
    CMatrix a = CMatrix(gram);
    a.diagonal().array() += n0;
    return lmmse_from_gram(a, y, n0, [&](const CVector& w) { return CVector(adj * w); });
}

LmmseOutput lmmse_equalize(const CMatrix& H, const CVector& y, double N0) {
    check_square(H.rows(), H.cols(), y.size());
    const double n0 = std::max(N0, kNoiseFloor);
    CMatrix a = H * H.adjoint();
    a.diagonal().array() += n0;
    return lmmse_from_gram(a, y, n0, [&](const CVector& w) { return CVector(H.adjoint() * w); });
}

CVector lmmse_detect(const CoefficientMatrix& H, const CVector& y, double N0) {
    const auto& h = H.entries;
    check_square(h.rows(), h.cols(), y.size());
    const double n0 = std::max(N0, kNoiseFloor);
    const SparseCMatrix adj = h.adjoint();
    CMatrix a = CMatrix(SparseCMatrix(h * adj));
    a.diagonal().array() += n0;
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("LMMSE system H H^* + N0 I is not positive definite after regularization");
    }
    return adj * llt.solve(y);
}

CVector lmmse_detect(const CMatrix& H, const CVector& y, double N0) {
    check_square(H.rows(), H.cols(), y.size());
    const double n0 = std::max(N0, kNoiseFloor);
    CMatrix a = H * H.adjoint();
    a.diagonal().array() += n0;
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("LMMSE system H H^* + N0 I is not positive definite after regularization");
    }
    return H.adjoint() * llt.solve(y);
}

// ============================================================================
// Downlink SCMA MPA
// ============================================================================

EffectiveFactorGraph scma_block_graph(const ScmaCodebookSet& set) {
    EffectiveFactorGraph g(set.resources(), set.users(), set.dv());
    for (int j = 0; j < set.users(); ++j) {
        const auto& sup = set.support(j);
        for (std::size_t t = 0; t < sup.size(); ++t) {
            std::vector<cplx> unit(sup.size(), cplx{});
            unit[t] = 1.0;
            g.add_edge(sup[t], j, std::move(unit));
        }
    }
    // Keep M_d in ascending variable order.
    for (auto& ids : g.observation_edges) {
        std::sort(ids.begin(), ids.end(),
                  [&](int a, int b) { return g.edges[static_cast<std::size_t>(a)].variable < g.edges[static_cast<std::size_t>(b)].variable; });
    }
    return g;
}

VariableAlphabets scma_block_alphabets(const ScmaCodebookSet& set) {
    VariableAlphabets va;
    for (int j = 0; j < set.users(); ++j) {
        Alphabet a;
        for (int m = 0; m < set.alphabet_size(); ++m) a.push_back(set.compressed_codeword(j, m));
        va.alphabets.push_back(std::move(a));
        va.of_variable.push_back(j);
    }
    return va;
}

DownlinkDetection scma_mpa_downlink(const DelayDopplerGrid& x_sum_hat, const ScmaCodebookSet& set,
                                    AllocationScheme scheme, double N0_eff, const DetectorConfig& cfg) {
    const int K = set.resources();
    check_allocation(scheme, x_sum_hat.spec(), K);
    DownlinkDetection out;
    if (!(N0_eff > 0.0)) {
        N0_eff = kNoiseFloor;
        out.noise_floored = true;
    }
    const auto graph = scma_block_graph(set);
    const auto alphabets = scma_block_alphabets(set);
    const int blocks = blocks_per_frame(x_sum_hat.spec(), K);
    out.symbols.assign(static_cast<std::size_t>(set.users()), std::vector<int>(static_cast<std::size_t>(blocks)));

    CVector y(K);
    for (int b = 0; b < blocks; ++b) {
        const auto obs = extract_block(x_sum_hat, scheme, K, b);
        for (int k = 0; k < K; ++k) y[k] = obs[static_cast<std::size_t>(k)];
        const auto r = run_mpa(graph, alphabets, y, N0_eff, cfg);
        for (int j = 0; j < set.users(); ++j) {
            out.symbols[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)] = r.decisions[static_cast<std::size_t>(j)];
        }
        out.total_iterations += r.iterations;
        ++out.mpa_runs;
    }
    return out;
}

// ============================================================================
// Uplink
// ============================================================================

CompressedUplink compress_uplink(const std::vector<CoefficientMatrix>& H_list, const ScmaCodebookSet& set,
                                 AllocationScheme scheme, const GridSpec& spec) {
    const int J = set.users();
    const int K = set.resources();
    if (static_cast<int>(H_list.size()) != J) {
        fail(ValidationError::Kind::Dimension, "expected " + std::to_string(J) + " coefficient matrices, got " +
                                                   std::to_string(H_list.size()));
    }
    for (const auto& H : H_list) {
        if (!(H.spec == spec)) fail(ValidationError::Kind::Dimension, "coefficient matrices differ in grid shape");
    }
    check_allocation(scheme, spec, K);

    const auto mn = static_cast<int>(spec.slots());
    const int blocks = blocks_per_frame(spec, K);
    CompressedUplink out;
    out.dv = set.dv();

    std::vector<Eigen::Triplet<cplx>> triplets;
    int col = 0;
    for (int j = 0; j < J; ++j) {
        const SparseCMatrixCol Hj = H_list[static_cast<std::size_t>(j)].entries;
        const auto& sup = set.support(j);
        for (int b = 0; b < blocks; ++b) {
            for (std::size_t t = 0; t < sup.size(); ++t) {
                const Cell cell = block_cell(scheme, spec, K, b, sup[t]);
                const auto src = static_cast<int>(spec.index(cell.k, cell.l));
                for (SparseCMatrixCol::InnerIterator it(Hj, src); it; ++it) {
                    triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
                }
                out.columns.push_back({j, b, static_cast<int>(t), sup[t], j * mn + src});
                ++col;
            }
        }
    }
    out.matrix = SparseCMatrixCol(mn, col);
    out.matrix.setFromTriplets(triplets.begin(), triplets.end());
    out.matrix.makeCompressed();
    return out;
}

EffectiveFactorGraph build_effective_graph(const SparseCMatrixCol& H_compr, int dv) {
    if (dv < 1 || H_compr.cols() % dv != 0) {
        fail(ValidationError::Kind::Structure, "compressed width " + std::to_string(H_compr.cols()) +
                                                   " is not a multiple of dv=" + std::to_string(dv));
    }
    const int variables = static_cast<int>(H_compr.cols() / dv);
    EffectiveFactorGraph g(static_cast<int>(H_compr.rows()), variables, dv);
    std::vector<std::vector<int>> obs_vars(static_cast<std::size_t>(H_compr.rows()));
    for (int c = 0; c < variables; ++c) {
        std::map<int, std::vector<cplx>> slices;
        for (int t = 0; t < dv; ++t) {
            for (SparseCMatrixCol::InnerIterator it(H_compr, c * dv + t); it; ++it) {
                if (it.value() == cplx{}) continue;
                auto& s = slices[static_cast<int>(it.row())];
                if (s.empty()) s.assign(static_cast<std::size_t>(dv), cplx{});
                s[static_cast<std::size_t>(t)] = it.value();
            }
        }
        for (auto& [d, slice] : slices) g.add_edge(d, c, std::move(slice));
    }
    return g;
}

UplinkDetection uplink_mpa_detect(const CVector& y, const EffectiveFactorGraph& graph, const ScmaCodebookSet& set,
                                  double N0, const DetectorConfig& cfg, const MpaObserver& observer) {
    const int J = set.users();
    const int K = set.resources();
    const int mn = graph.observation_count;
    if (mn % K != 0 || graph.variable_count * K != J * mn) {
        fail(ValidationError::Kind::Structure, "graph has " + std::to_string(graph.variable_count) +
                                                   " variable nodes, expected J*MN/K = " +
                                                   std::to_string(J * mn / std::max(K, 1)));
    }
    if (graph.coefficient_length != set.dv()) {
        fail(ValidationError::Kind::Structure, "graph slices do not match the codebook dv");
    }

    VariableAlphabets alphabets;
    for (int j = 0; j < J; ++j) {
        Alphabet a;
        for (int m = 0; m < set.alphabet_size(); ++m) a.push_back(set.compressed_codeword(j, m));
        alphabets.alphabets.push_back(std::move(a));
    }
    const int blocks = mn / K;
    for (int c = 0; c < graph.variable_count; ++c) alphabets.of_variable.push_back(c * K / mn);

    UplinkDetection out;
    out.mpa = run_mpa(graph, alphabets, y, N0, cfg, observer);
    out.symbols.assign(static_cast<std::size_t>(J), std::vector<int>(static_cast<std::size_t>(blocks)));
    for (int c = 0; c < graph.variable_count; ++c) {
        out.symbols[static_cast<std::size_t>(c / blocks)][static_cast<std::size_t>(c % blocks)] =
            out.mpa.decisions[static_cast<std::size_t>(c)];
    }
    return out;
}

}  // namespace otfs
