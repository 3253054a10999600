#include <doctest.h>

#include <random>

#include "otfs_scma/channel.hpp"
#include "otfs_scma/detect.hpp"
#include "otfs_scma/oracle.hpp"

using namespace otfs;

TEST_CASE("enumeration count") {
    CHECK(oracle::enumeration_count(4, 6) == 4096);
    CHECK(oracle::enumeration_count(4, 12) == 16'777'216);
    CHECK(oracle::enumeration_count(4, 40) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("downlink block oracle recovers clean superpositions") {
    const auto set = default_codebooks();
    for (int code = 0; code < 4096; code += 37) {
        std::vector<int> s(6);
        std::vector<cplx> y(4, cplx{});
        int c = code;
        for (int j = 0; j < 6; ++j, c /= 4) {
            s[static_cast<std::size_t>(j)] = c % 4;
            for (int k = 0; k < 4; ++k) y[static_cast<std::size_t>(k)] += set.codeword(j, c % 4)[static_cast<std::size_t>(k)];
        }
        CHECK(oracle::brute_force_map_downlink_block(y, set, 0.01) == s);
    }
    CHECK_THROWS_AS(oracle::brute_force_map_downlink_block(std::vector<cplx>(3), set, 0.1), ValidationError);
}

TEST_CASE("uplink oracle recovers a clean frame") {
    const auto set = default_codebooks();
    const GridSpec spec{4, 1};
    Rng rng = derive_stream(60, 0, 0);
    std::vector<CoefficientMatrix> Hs;
    for (int j = 0; j < 6; ++j) Hs.push_back(build_coefficient_matrix(sample_channel(1, spec, {}, rng), spec));
    const auto compr = compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec);
    const std::vector<int> s = {3, 0, 2, 1, 1, 2};
    CVector x(12);
    for (int c = 0; c < 6; ++c) {
        const auto w = set.compressed_codeword(c, s[static_cast<std::size_t>(c)]);
        x[2 * c] = w[0];
        x[2 * c + 1] = w[1];
    }
    const CMatrix H = CMatrix(compr.matrix);
    CHECK(oracle::brute_force_map_uplink(H * x, H, set, 1e-3) == s);
}

TEST_CASE("uplink oracle enforces its budget and shapes") {
    const auto set = default_codebooks();
    const CMatrix H = CMatrix::Identity(8, 24);
    oracle::OracleBudget tight;
    tight.max_enumerations = 1000;
    CHECK_THROWS_AS(oracle::brute_force_map_uplink(CVector::Zero(8), H, set, 0.1, tight), ComplexityError);
    CHECK_THROWS_AS(oracle::brute_force_map_uplink(CVector::Zero(7), H, set, 0.1), ValidationError);
    CHECK_THROWS_AS(oracle::brute_force_map_uplink(CVector::Zero(8), CMatrix::Identity(8, 23), set, 0.1),
                    ValidationError);
}

TEST_CASE("oracle ties go to the lexicographically first assignment") {
    const auto set = default_codebooks();
    const CMatrix H = CMatrix::Zero(4, 12);
    CHECK(oracle::brute_force_map_uplink(CVector::Zero(4), H, set, 0.1) == std::vector<int>(6, 0));
}
