#include <doctest.h>

#include <random>

#include "otfs_scma/channel.hpp"
#include "otfs_scma/detect.hpp"
#include "otfs_scma/mpa.hpp"
#include "otfs_scma/oracle.hpp"

using namespace otfs;

namespace {

// Plain linear-probability sum-product on the same schedule: all observation
// updates, then all variable updates, then posteriors.
std::vector<std::vector<double>> reference_mpa(const EffectiveFactorGraph& g, const VariableAlphabets& alph,
                                               const CVector& y, double N0, int iterations) {
    const std::size_t E = g.edges.size();
    std::vector<std::vector<double>> U(E);
    std::vector<std::vector<double>> V(E);
    for (std::size_t e = 0; e < E; ++e) {
        const std::size_t A = alph[g.edges[e].variable].size();
        U[e].assign(A, 1.0 / double(A));
        V[e].assign(A, 1.0 / double(A));
    }
    auto dot = [&](std::size_t e, std::size_t m) {
        const auto& w = alph[g.edges[e].variable][m];
        cplx s{};
        for (std::size_t t = 0; t < w.size(); ++t) s += g.edges[e].coefficients[t] * w[t];
        return s;
    };
    auto normalize = [](std::vector<double>& p) {
        double s = 0.0;
        for (double v : p) s += v;
        for (double& v : p) v /= s;
    };
    std::vector<std::vector<double>> post(static_cast<std::size_t>(g.variable_count));
    for (int it = 0; it < iterations; ++it) {
        for (int d = 0; d < g.observation_count; ++d) {
            const auto& ids = g.observation_edges[static_cast<std::size_t>(d)];
            for (int target : ids) {
                std::vector<double> out(U[static_cast<std::size_t>(target)].size(), 0.0);
                std::vector<int> others;
                for (int e : ids) {
                    if (e != target) others.push_back(e);
                }
                std::vector<std::size_t> digit(others.size(), 0);
                while (true) {
                    cplx interference{};
                    double weight = 1.0;
                    for (std::size_t i = 0; i < others.size(); ++i) {
                        interference += dot(static_cast<std::size_t>(others[i]), digit[i]);
                        weight *= V[static_cast<std::size_t>(others[i])][digit[i]];
                    }
                    for (std::size_t m = 0; m < out.size(); ++m) {
                        const cplx r = y[d] - interference - dot(static_cast<std::size_t>(target), m);
                        out[m] += std::exp(-std::norm(r) / N0) * weight;
                    }
                    std::size_t pos = others.size();
                    bool done = true;
                    while (pos-- > 0) {
                        if (++digit[pos] < V[static_cast<std::size_t>(others[pos])].size()) {
                            done = false;
                            break;
                        }
                        digit[pos] = 0;
                    }
                    if (done) break;
                }
                normalize(out);
                U[static_cast<std::size_t>(target)] = out;
            }
        }
        for (int c = 0; c < g.variable_count; ++c) {
            const auto& ids = g.variable_edges[static_cast<std::size_t>(c)];
            for (int target : ids) {
                std::vector<double> out(V[static_cast<std::size_t>(target)].size(), 1.0);
                for (int e : ids) {
                    if (e == target) continue;
                    for (std::size_t m = 0; m < out.size(); ++m) out[m] *= U[static_cast<std::size_t>(e)][m];
                }
                normalize(out);
                V[static_cast<std::size_t>(target)] = out;
            }
            std::vector<double> p(alph[c].size(), 1.0);
            for (int e : ids) {
                for (std::size_t m = 0; m < p.size(); ++m) p[m] *= U[static_cast<std::size_t>(e)][m];
            }
            normalize(p);
            post[static_cast<std::size_t>(c)] = p;
        }
    }
    return post;
}

std::vector<int> random_symbols(int count, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<int> s(static_cast<std::size_t>(count));
    for (int& v : s) v = pick(rng);
    return s;
}

CVector block_observation(const ScmaCodebookSet& set, const std::vector<int>& symbols) {
    CVector y = CVector::Zero(set.resources());
    for (int j = 0; j < set.users(); ++j) {
        for (int k = 0; k < set.resources(); ++k) y[k] += set.codeword(j, symbols[static_cast<std::size_t>(j)])[static_cast<std::size_t>(k)];
    }
    return y;
}

// A small uplink graph: N=4, M=2, default set, P=2 channels.
struct SmallUplink {
    EffectiveFactorGraph graph;
    VariableAlphabets alphabets;
    CVector y;
};

SmallUplink small_uplink(std::uint64_t seed, double N0) {
    const auto set = default_codebooks();
    const GridSpec spec{4, 2};
    Rng rng = derive_stream(seed, 0, 0);
    std::vector<CoefficientMatrix> Hs;
    for (int j = 0; j < 6; ++j) Hs.push_back(build_coefficient_matrix(sample_channel(2, spec, {}, rng), spec));
    const auto compr = compress_uplink(Hs, set, AllocationScheme::DopplerBlocks, spec);
    SmallUplink s;
    s.graph = build_effective_graph(compr.matrix, compr.dv);
    for (int j = 0; j < 6; ++j) {
        Alphabet a;
        for (int m = 0; m < 4; ++m) a.push_back(set.compressed_codeword(j, m));
        s.alphabets.alphabets.push_back(a);
    }
    for (int c = 0; c < s.graph.variable_count; ++c) s.alphabets.of_variable.push_back(c * 4 / 8);
    CVector x(s.graph.variable_count * 2);
    for (int c = 0; c < s.graph.variable_count; ++c) {
        const auto w = set.compressed_codeword(c * 4 / 8, (c * 7 + 1) % 4);
        x[2 * c] = w[0];
        x[2 * c + 1] = w[1];
    }
    s.y = apply_awgn(CVector(compr.matrix * x), N0, rng);
    return s;
}

}  // namespace

TEST_CASE("log-domain engine reproduces linear-domain sum-product") {
    const auto set = default_codebooks();
    const auto g = scma_block_graph(set);
    const auto alph = scma_block_alphabets(set);
    for (int t = 0; t < 20; ++t) {
        Rng rng = derive_stream(30, static_cast<std::uint64_t>(t), 0);
        const double N0 = 0.05 + 0.05 * t;
        const CVector y = apply_awgn(block_observation(set, random_symbols(6, rng)), N0, rng);
        DetectorConfig cfg;
        cfg.max_iter = 1 + t % 5;
        const auto r = run_mpa(g, alph, y, N0, cfg);
        const auto ref = reference_mpa(g, alph, y, N0, r.iterations);
        for (int c = 0; c < 6; ++c) {
            for (int m = 0; m < 4; ++m) CHECK(r.posteriors[c][m] == doctest::Approx(ref[c][m]).epsilon(1e-9));
        }
    }
}

TEST_CASE("uplink graph: engine matches the linear-domain reference") {
    const auto s = small_uplink(31, 0.2);
    DetectorConfig cfg;
    cfg.max_iter = 4;
    cfg.convergence_tol = 1e-15;
    const auto r = run_mpa(s.graph, s.alphabets, s.y, 0.2, cfg);
    const auto ref = reference_mpa(s.graph, s.alphabets, s.y, 0.2, r.iterations);
    for (int c = 0; c < s.graph.variable_count; ++c) {
        for (int m = 0; m < 4; ++m) CHECK(r.posteriors[c][m] == doctest::Approx(ref[c][m]).epsilon(1e-8));
    }
}

TEST_CASE("messages and posteriors stay probability vectors") {
    const auto s = small_uplink(32, 0.05);
    int observed = 0;
    auto check = [&](const MpaState& st) {
        ++observed;
        for (std::size_t e = 0; e < st.edge_count(); ++e) {
            for (const auto& msg : {st.to_variable(static_cast<int>(e)), st.to_observation(static_cast<int>(e))}) {
                double sum = 0.0;
                for (double p : msg) {
                    CHECK(p >= 0.0);
                    sum += p;
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
        for (int c = 0; c < st.variable_count(); ++c) {
            double sum = 0.0;
            for (double p : st.posterior(c)) sum += p;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    };
    DetectorConfig cfg;
    cfg.max_iter = 6;
    const auto r = run_mpa(s.graph, s.alphabets, s.y, 0.05, cfg, check);
    CHECK(observed == r.iterations);
    CHECK(r.iterations <= 6);
}

TEST_CASE("a single user reduces to nearest-codeword detection") {
    const cplx a(0.6, 0.1);
    const ScmaCodebookSet set(2, 4, {{{a, a}, {-a, a}, {a, -a}, {-a, -a}}});
    const auto g = scma_block_graph(set);
    const auto alph = scma_block_alphabets(set);
    for (int t = 0; t < 50; ++t) {
        Rng rng = derive_stream(33, static_cast<std::uint64_t>(t), 0);
        CVector y(2);
        std::normal_distribution<double> n;
        y << cplx(n(rng), n(rng)), cplx(n(rng), n(rng));
        const auto r = run_mpa(g, alph, y, 0.3, {});
        int best = 0;
        double best_d = 1e300;
        for (int m = 0; m < 4; ++m) {
            const double d = std::norm(y[0] - set.codeword(0, m)[0]) + std::norm(y[1] - set.codeword(0, m)[1]);
            if (d < best_d) {
                best_d = d;
                best = m;
            }
        }
        CHECK(r.decisions[0] == best);
    }
}

TEST_CASE("noiseless blocks are recovered exactly") {
    const auto set = default_codebooks();
    const auto g = scma_block_graph(set);
    const auto alph = scma_block_alphabets(set);
    for (int t = 0; t < 200; ++t) {
        Rng rng = derive_stream(34, static_cast<std::uint64_t>(t), 0);
        const auto s = random_symbols(6, rng);
        const CVector y = block_observation(set, s);
        const auto r = run_mpa(g, alph, y, 1e-3, {});
        CHECK(r.decisions == s);
        CHECK(r.decisions == oracle::brute_force_map_downlink_block(std::vector<cplx>(y.begin(), y.end()), set, 1e-3));
    }
}

TEST_CASE("ties resolve to the lowest symbol index") {
    const cplx a(0.5, 0.5);
    const ScmaCodebookSet set(1, 2, {{{a}, {-a}}});
    const auto r = run_mpa(scma_block_graph(set), scma_block_alphabets(set), CVector::Zero(1), 1.0, {});
    CHECK(r.decisions[0] == 0);
    CHECK(r.posteriors[0][0] == doctest::Approx(0.5));
}

TEST_CASE("convergence is reported") {
    const auto set = default_codebooks();
    Rng rng = derive_stream(35, 0, 0);
    const auto r = run_mpa(scma_block_graph(set), scma_block_alphabets(set),
                           block_observation(set, random_symbols(6, rng)), 1e-3, {});
    CHECK(r.converged);
    CHECK(r.iterations < 10);
}

TEST_CASE("damping keeps decisions on clean data") {
    const auto set = default_codebooks();
    Rng rng = derive_stream(36, 0, 0);
    const auto s = random_symbols(6, rng);
    DetectorConfig cfg;
    cfg.damping = 0.6;
    cfg.max_iter = 30;
    const auto r = run_mpa(scma_block_graph(set), scma_block_alphabets(set), block_observation(set, s), 1e-2, cfg);
    CHECK(r.decisions == s);
}

TEST_CASE("enumeration cap") {
    const auto s = small_uplink(37, 0.1);
    DetectorConfig cfg;
    cfg.enumeration_cap = 2;
    try {
        run_mpa(s.graph, s.alphabets, s.y, 0.1, cfg);
        FAIL("expected ComplexityError");
    } catch (const ComplexityError& e) {
        CHECK(e.required() >= 64);
    }
}

TEST_CASE("configuration and graph validation") {
    DetectorConfig cfg;
    cfg.max_iter = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.convergence_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.damping = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);

    EffectiveFactorGraph g(2, 2, 2);
    CHECK_THROWS_AS(g.add_edge(2, 0, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(g.add_edge(0, 3, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(g.add_edge(0, 0, {1.0}), ValidationError);
    CHECK_THROWS_AS(g.add_edge(0, 0, {0.0, 0.0}), ValidationError);
    g.add_edge(0, 0, {1.0, 0.0});
    CHECK_THROWS_AS(g.add_edge(0, 0, {0.0, 1.0}), ValidationError);

    const auto set = default_codebooks();
    CHECK_THROWS_AS(run_mpa(scma_block_graph(set), scma_block_alphabets(set), CVector::Zero(3), 0.1, {}),
                    ValidationError);
}
