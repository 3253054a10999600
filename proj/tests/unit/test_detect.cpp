#include <doctest.h>

#include <random>

#include "otfs_scma/detect.hpp"
#include "otfs_scma/oracle.hpp"
#include "otfs_scma/sim.hpp"

using namespace otfs;

namespace {

CVector random_vector(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> g;
    CVector v(n);
    for (auto& c : v) c = {g(rng), g(rng)};
    return v;
}

std::vector<std::vector<int>> random_symbols(int users, int count, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<std::vector<int>> s(static_cast<std::size_t>(users), std::vector<int>(static_cast<std::size_t>(count)));
    for (auto& row : s) {
        for (int& v : row) v = pick(rng);
    }
    return s;
}

CoefficientMatrix identity_channel(const GridSpec& spec) {
    ChannelRealization ch;
    ch.paths.push_back({cplx(1, 0), 0, 0, 0.0});
    return build_coefficient_matrix(ch, spec);
}

}  // namespace

TEST_CASE("LMMSE closed forms") {
    Rng rng = derive_stream(40, 0, 0);
    const CVector y = random_vector(6, rng);
    const CMatrix I = CMatrix::Identity(6, 6);
    CHECK((lmmse_detect(I, y, 1e-12) - y).cwiseAbs().maxCoeff() < 1e-9);
    const CVector scaled = lmmse_detect(CMatrix(2.0 * I), y, 1.0);
    CHECK((scaled - 0.4 * y).cwiseAbs().maxCoeff() < 1e-12);

    const auto eq = lmmse_equalize(CMatrix(2.0 * I), y, 1.0);
    CHECK((eq.estimate - 0.4 * y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(eq.error_variance == doctest::Approx(0.2).epsilon(1e-12));  // N0 / (|h|^2 + N0)

    const GridSpec spec{2, 3};
    const auto Hid = identity_channel(spec);
    CHECK((lmmse_detect(Hid, y, 0.0) - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("LMMSE inverts a noiseless P=2 channel") {
    const GridSpec spec{8, 8};
    for (int t = 0; t < 10; ++t) {
        Rng rng = derive_stream(41, static_cast<std::uint64_t>(t), 0);
        const auto H = build_coefficient_matrix(sample_channel(2, spec, {}, rng), spec);
        const CVector x = random_vector(64, rng);
        const CVector xhat = lmmse_detect(H, CVector(H.entries * x), 0.0);
        CHECK((xhat - x).norm() / x.norm() < 1e-6);
        // Dense and sparse paths agree.
        CHECK((lmmse_detect(CMatrix(H.entries), CVector(H.entries * x), 0.0) - xhat).norm() < 1e-8);
    }
}

TEST_CASE("LMMSE error variance matches the dense formula") {
    const GridSpec spec{4, 4};
    Rng rng = derive_stream(42, 0, 0);
    const auto H = build_coefficient_matrix(sample_channel(3, spec, {}, rng), spec);
    const double N0 = 0.3;
    const CMatrix h = CMatrix(H.entries);
    CMatrix A = h * h.adjoint();
    A.diagonal().array() += N0;
    const double expected = N0 * A.inverse().trace().real() / 16.0;
    CHECK(lmmse_equalize(H, random_vector(16, rng), N0).error_variance == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("LMMSE dimension checks") {
    CHECK_THROWS_AS(lmmse_detect(CMatrix::Identity(4, 4), CVector::Zero(3), 0.1), ValidationError);
    CHECK_THROWS_AS(lmmse_detect(CMatrix::Identity(4, 3), CVector::Zero(4), 0.1), ValidationError);
}

TEST_CASE("downlink block MPA agrees with the MAP oracle at 10 dB") {
    const auto set = default_codebooks();
    const double N0 = noise_from_snr(10.0, set, Link::Downlink);
    const GridSpec spec{4, 1};
    int agree = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        Rng rng = derive_stream(43, static_cast<std::uint64_t>(t), 0);
        const auto s = random_symbols(6, 1, rng);
        std::vector<DelayDopplerGrid> grids;
        for (const auto& w : encode(s, set)) grids.push_back(allocate_grid(w, AllocationScheme::DopplerBlocks, spec));
        const CVector y = apply_awgn(vectorize(superimpose(grids)), N0, rng);
        const auto det = scma_mpa_downlink(devectorize(y, spec), set, AllocationScheme::DopplerBlocks, N0, {});
        const auto map = oracle::brute_force_map_downlink_block(std::vector<cplx>(y.begin(), y.end()), set, N0);
        bool same = true;
        for (int j = 0; j < 6; ++j) same = same && det.symbols[static_cast<std::size_t>(j)][0] == map[static_cast<std::size_t>(j)];
        agree += same;
    }
    CHECK(agree >= 990);
}

TEST_CASE("downlink MPA floors a non-positive noise level") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 4};
    Rng rng = derive_stream(44, 0, 0);
    const auto s = random_symbols(6, 4, rng);
    std::vector<DelayDopplerGrid> grids;
    for (const auto& w : encode(s, set)) grids.push_back(allocate_grid(w, AllocationScheme::DelayBlocks, spec));
    const auto det = scma_mpa_downlink(superimpose(grids), set, AllocationScheme::DelayBlocks, 0.0, {});
    CHECK(det.noise_floored);
    CHECK(det.symbols == s);
    CHECK(det.mpa_runs == 4);
}

TEST_CASE("uplink compression: 3MN columns for the 6x4 system on a 4x4 grid") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 4};
    Rng rng = derive_stream(45, 0, 0);
    std::vector<CoefficientMatrix> Hs;
    for (int j = 0; j < 6; ++j) Hs.push_back(build_coefficient_matrix(sample_channel(2, spec, {}, rng), spec));
    for (auto scheme : {AllocationScheme::DopplerBlocks, AllocationScheme::DelayBlocks}) {
        const auto compr = compress_uplink(Hs, set, scheme, spec);
        CHECK(compr.matrix.rows() == 16);
        CHECK(compr.matrix.cols() == 48);
        CHECK(compr.columns.size() == 48);

        // Independent mask: the nonzero cells of each user's allocated grid.
        const auto s = random_symbols(6, 4, rng);
        const auto words = encode(s, set);
        std::vector<int> expected;
        for (int j = 0; j < 6; ++j) {
            const auto g = allocate_grid(words[static_cast<std::size_t>(j)], scheme, spec);
            for (std::size_t i = 0; i < 16; ++i) {
                if (g.cells()[i] != cplx{}) expected.push_back(j * 16 + static_cast<int>(i));
            }
        }
        std::vector<int> kept;
        for (const auto& c : compr.columns) kept.push_back(c.source_column);
        std::sort(kept.begin(), kept.end());
        CHECK(kept == expected);

        // Each surviving column is the corresponding column of [H_1 ... H_J].
        for (std::size_t c = 0; c < compr.columns.size(); ++c) {
            const auto& o = compr.columns[c];
            const CMatrix Hj = CMatrix(Hs[static_cast<std::size_t>(o.user)].entries);
            const CMatrix col = CMatrix(compr.matrix.col(static_cast<Eigen::Index>(c)));
            CHECK((col - Hj.col(o.source_column - o.user * 16)).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("compression keeps every column of a full-support single user") {
    const cplx a(0.5, 0.0);
    const cplx b(0.0, 0.5);
    const ScmaCodebookSet set(2, 2, {{{a, b}, {b, a}}});
    const GridSpec spec{2, 2};
    Rng rng = derive_stream(46, 0, 0);
    const auto compr = compress_uplink({build_coefficient_matrix(sample_channel(2, spec, {}, rng), spec)}, set,
                                       AllocationScheme::DopplerBlocks, spec);
    CHECK(compr.matrix.cols() == 4);
}

TEST_CASE("effective graph: 16 observation and 24 variable nodes") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 4};
    Rng rng = derive_stream(47, 0, 0);
    std::vector<CoefficientMatrix> Hs;
    for (int j = 0; j < 6; ++j) Hs.push_back(build_coefficient_matrix(sample_channel(2, spec, {}, rng), spec));
    const auto compr = compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec);
    const auto g = build_effective_graph(compr.matrix, compr.dv);
    CHECK(g.observation_count == 16);
    CHECK(g.variable_count == 24);
    CHECK(g.coefficient_length == 2);
    CHECK_THROWS_AS(build_effective_graph(compr.matrix, 5), ValidationError);
}

TEST_CASE("LoS channels give disjoint copies of the base factor graph") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 4};
    std::vector<CoefficientMatrix> Hs(6, identity_channel(spec));
    const auto compr = compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec);
    const auto g = build_effective_graph(compr.matrix, compr.dv);
    for (int d = 0; d < g.observation_count; ++d) CHECK(g.observation_degree(d) == 3);
    for (int c = 0; c < g.variable_count; ++c) CHECK(g.variable_degree(c) == 2);
    // Variable (user j, block b) touches exactly the block's cells at j's support.
    for (int c = 0; c < g.variable_count; ++c) {
        const int j = c / 4;
        const int b = c % 4;
        std::vector<int> obs;
        for (int e : g.variable_edges[static_cast<std::size_t>(c)]) obs.push_back(g.edges[static_cast<std::size_t>(e)].observation);
        std::sort(obs.begin(), obs.end());
        std::vector<int> expected;
        for (int k : set.support(j)) {
            const Cell cell = block_cell(AllocationScheme::DopplerBlocks, spec, 4, b, k);
            expected.push_back(static_cast<int>(spec.index(cell.k, cell.l)));
        }
        std::sort(expected.begin(), expected.end());
        CHECK(obs == expected);
    }
}

TEST_CASE("mean degrees respect P*dv and P*df") {
    const auto set = default_codebooks();
    const GridSpec spec{8, 8};
    for (int P = 2; P <= 4; ++P) {
        for (int t = 0; t < 20; ++t) {
            Rng rng = derive_stream(48, static_cast<std::uint64_t>(P), static_cast<std::uint64_t>(t));
            std::vector<CoefficientMatrix> Hs;
            for (int j = 0; j < 6; ++j) Hs.push_back(build_coefficient_matrix(sample_channel(P, spec, {}, rng), spec));
            const auto compr = compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec);
            const auto g = build_effective_graph(compr.matrix, compr.dv);
            CHECK(g.mean_variable_degree() <= P * set.dv() + 1e-12);
            CHECK(g.mean_observation_degree() <= P * set.df() + 1e-12);
        }
    }
}

TEST_CASE("uplink over identity channels equals per-block downlink detection") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 4};
    const double N0 = 0.15;
    for (int t = 0; t < 10; ++t) {
        Rng rng = derive_stream(49, static_cast<std::uint64_t>(t), 0);
        const auto s = random_symbols(6, 4, rng);
        std::vector<DelayDopplerGrid> grids;
        for (const auto& w : encode(s, set)) grids.push_back(allocate_grid(w, AllocationScheme::DopplerBlocks, spec));
        const CVector y = apply_awgn(vectorize(superimpose(grids)), N0, rng);

        std::vector<CoefficientMatrix> Hs(6, identity_channel(spec));
        const auto compr = compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec);
        const auto up = uplink_mpa_detect(y, build_effective_graph(compr.matrix, compr.dv), set, N0, {});
        const auto down = scma_mpa_downlink(devectorize(y, spec), set, AllocationScheme::DopplerBlocks, N0, {});
        CHECK(up.symbols == down.symbols);
    }
}

TEST_CASE("uplink MPA agrees with joint MAP on a small frame") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 1};  // one block, 6 variables
    int agree = 0;
    int total = 0;
    for (int t = 0; t < 40; ++t) {
        Rng rng = derive_stream(50, static_cast<std::uint64_t>(t), 0);
        std::vector<CoefficientMatrix> Hs;
        for (int j = 0; j < 6; ++j) Hs.push_back(build_coefficient_matrix(sample_channel(1, spec, {}, rng), spec));
        const auto s = random_symbols(6, 1, rng);
        const auto words = encode(s, set);
        CVector y = CVector::Zero(4);
        for (int j = 0; j < 6; ++j) {
            y += Hs[static_cast<std::size_t>(j)].entries *
                 vectorize(allocate_grid(words[static_cast<std::size_t>(j)], AllocationScheme::DopplerBlocks, spec));
        }
        const double N0 = noise_from_snr(14.0, set, Link::Uplink);
        y = apply_awgn(y, N0, rng);
        const auto compr = compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec);
        const auto up = uplink_mpa_detect(y, build_effective_graph(compr.matrix, compr.dv), set, N0, {});
        const auto map = oracle::brute_force_map_uplink(y, CMatrix(compr.matrix), set, N0);
        for (int j = 0; j < 6; ++j) {
            agree += up.symbols[static_cast<std::size_t>(j)][0] == map[static_cast<std::size_t>(j)];
            ++total;
        }
    }
    CHECK(agree >= total * 95 / 100);
}

TEST_CASE("uplink structure checks") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 4};
    std::vector<CoefficientMatrix> Hs(5, identity_channel(spec));
    CHECK_THROWS_AS(compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec), ValidationError);
    Hs.push_back(identity_channel(GridSpec{4, 8}));
    CHECK_THROWS_AS(compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec), ValidationError);

    std::vector<CoefficientMatrix> ok(6, identity_channel(spec));
    const auto compr = compress_uplink(ok, set, AllocationScheme::DopplerBlocks, spec);
    const auto g = build_effective_graph(compr.matrix, compr.dv);
    CHECK_THROWS_AS(uplink_mpa_detect(CVector::Zero(16), g, extend_to_eight_users(set), 0.1, {}), ValidationError);
}
