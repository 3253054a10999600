#include "otfs_scma/oracle.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <string>
#include <thread>

namespace otfs::oracle {

namespace {

struct Best {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<int> assignment;
};

// Depth-first lexicographic search. Each level owns its residual so no
// rounding accumulates along the enumeration.
class Search {
public:
    Search(const std::vector<std::vector<CVector>>& contrib, std::size_t rows)
        : contrib_(contrib), residual_(contrib.size() + 1, CVector(static_cast<Eigen::Index>(rows))),
          current_(contrib.size(), 0) {}

    Best run(const CVector& start, std::size_t first_level) {
        residual_[first_level] = start;
        descend(first_level);
        return best_;
    }

    void fix(std::size_t level, int symbol) { current_[level] = symbol; }

private:
    void descend(std::size_t level) {
        const auto& r = residual_[level];
        const auto& options = contrib_[level];
        if (level + 1 == contrib_.size()) {
            for (std::size_t m = 0; m < options.size(); ++m) {
                const double cost = (r - options[m]).squaredNorm();
                if (cost < best_.cost) {
                    current_[level] = static_cast<int>(m);
                    best_.cost = cost;
                    best_.assignment = current_;
                }
            }
            return;
        }
        for (std::size_t m = 0; m < options.size(); ++m) {
            current_[level] = static_cast<int>(m);
            residual_[level + 1] = r - options[m];
            descend(level + 1);
        }
    }

    const std::vector<std::vector<CVector>>& contrib_;
    std::vector<CVector> residual_;
    std::vector<int> current_;
    Best best_;
};

}  // namespace

std::uint64_t enumeration_count(int alphabet, int count) {
    std::uint64_t total = 1;
    for (int i = 0; i < count; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(alphabet)) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        total *= static_cast<std::uint64_t>(alphabet);
    }
    return total;
}

std::vector<int> brute_force_map_uplink(const CVector& y, const CMatrix& H_all_compr, const ScmaCodebookSet& set,
                                        double /*N0*/, const OracleBudget& budget) {
    const int dv = set.dv();
    const int K = set.resources();
    const int A = set.alphabet_size();
    if (H_all_compr.rows() != y.size()) {
        fail(ValidationError::Kind::Dimension, "y and H_all_compr disagree on the observation count");
    }
    if (H_all_compr.cols() % dv != 0) {
        fail(ValidationError::Kind::Structure, "compressed width is not a multiple of dv");
    }
    const auto variables = static_cast<int>(H_all_compr.cols() / dv);
    const auto mn = static_cast<int>(y.size());
    if (variables == 0) return {};
    if (static_cast<long long>(variables) * K != static_cast<long long>(set.users()) * mn) {
        fail(ValidationError::Kind::Structure, "variable count does not equal J*MN/K");
    }

    const std::uint64_t required = enumeration_count(A, variables);
    if (required > budget.max_enumerations) {
        throw ComplexityError("joint MAP needs " + std::to_string(required) + " assignments, budget is " +
                                  std::to_string(budget.max_enumerations),
                              required);
    }

    // contrib[c][m] = H_c x_m, the full received-signal footprint of a choice.
    std::vector<std::vector<CVector>> contrib(static_cast<std::size_t>(variables));
    for (int c = 0; c < variables; ++c) {
        const int user = c * K / mn;
        const auto block = H_all_compr.middleCols(static_cast<Eigen::Index>(c) * dv, dv);
        for (int m = 0; m < A; ++m) {
            const auto word = set.compressed_codeword(user, m);
            CVector x(dv);
            for (int t = 0; t < dv; ++t) x[t] = word[static_cast<std::size_t>(t)];
            contrib[static_cast<std::size_t>(c)].push_back(block * x);
        }
    }

    if (variables == 1) {
        Search s(contrib, static_cast<std::size_t>(mn));
        return s.run(y, 0).assignment;
    }

    // Partition by the first variable's symbol; reduce in symbol order so the
    // lexicographically first minimizer survives.
    std::vector<std::future<Best>> parts;
    for (int m = 0; m < A; ++m) {
        parts.push_back(std::async(std::launch::async, [&, m] {
            Search s(contrib, static_cast<std::size_t>(mn));
            s.fix(0, m);
            return s.run(y - contrib[0][static_cast<std::size_t>(m)], 1);
        }));
    }
    Best best;
    for (auto& p : parts) {
        Best b = p.get();
        if (b.cost < best.cost) best = std::move(b);
    }
    return best.assignment;
}

std::vector<int> brute_force_map_downlink_block(const std::vector<cplx>& y_block, const ScmaCodebookSet& set,
                                                double /*N0*/) {
    const int J = set.users();
    const int K = set.resources();
    if (static_cast<int>(y_block.size()) != K) {
        fail(ValidationError::Kind::Dimension, "block observation must have K entries");
    }
    std::vector<std::vector<CVector>> contrib(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) {
        for (int m = 0; m < set.alphabet_size(); ++m) {
            CVector x(K);
            for (int k = 0; k < K; ++k) x[k] = set.codeword(j, m)[static_cast<std::size_t>(k)];
            contrib[static_cast<std::size_t>(j)].push_back(x);
        }
    }
    CVector y(K);
    for (int k = 0; k < K; ++k) y[k] = y_block[static_cast<std::size_t>(k)];
    Search s(contrib, static_cast<std::size_t>(K));
    return s.run(y, 0).assignment;
}

}  // namespace otfs::oracle
