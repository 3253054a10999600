#pragma once

#include <cstdint>
#include <vector>

#include "otfs_scma/common.hpp"
#include "otfs_scma/scma.hpp"

namespace otfs::oracle {

// Exhaustive maximum-likelihood references for desk-sized instances. Nothing
// here touches the message-passing code; the likelihood is evaluated from the
// full residual of every candidate assignment.

struct OracleBudget {
    std::uint64_t max_enumerations = 20'000'000;
};

// argmin ||y - H x||^2 over every joint assignment of the JMN/K variable
// nodes (dv consecutive columns each, user floor(c K / MN)). Enumeration is
// lexicographic in (variable, symbol); the first minimizer wins ties.
// Throws ComplexityError when A^(JMN/K) exceeds the budget.
std::vector<int> brute_force_map_uplink(const CVector& y, const CMatrix& H_all_compr, const ScmaCodebookSet& set,
                                        double N0, const OracleBudget& budget = {});

// argmin ||y_block - sum_j x_j||^2 over all A^J codeword combinations.
std::vector<int> brute_force_map_downlink_block(const std::vector<cplx>& y_block, const ScmaCodebookSet& set,
                                                double N0);

// A^count, saturating at UINT64_MAX.
std::uint64_t enumeration_count(int alphabet, int count);

}  // namespace otfs::oracle
