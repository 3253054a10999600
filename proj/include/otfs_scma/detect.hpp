#pragma once

#include <vector>

#include "otfs_scma/channel.hpp"
#include "otfs_scma/common.hpp"
#include "otfs_scma/grid.hpp"
#include "otfs_scma/mpa.hpp"
#include "otfs_scma/scma.hpp"

namespace otfs {

using SparseCMatrixCol = Eigen::SparseMatrix<cplx>;

// ============================================================================
// Downlink: LMMSE over the delay-Doppler plane, then per-block SCMA MPA
// ============================================================================

struct LmmseOutput {
    CVector estimate;
    // N0 * tr((H H^* + N0 I)^{-1}) / MN: mean error variance of the estimate
    // under a unit-power input prior.
    double error_variance = 0.0;
};

// x = H^* (H H^* + N0 I)^{-1} y. N0 is floored at 1e-12.
CVector lmmse_detect(const CoefficientMatrix& H, const CVector& y, double N0);
CVector lmmse_detect(const CMatrix& H, const CVector& y, double N0);

LmmseOutput lmmse_equalize(const CoefficientMatrix& H, const CVector& y, double N0);
LmmseOutput lmmse_equalize(const CMatrix& H, const CVector& y, double N0);

struct DownlinkDetection {
    std::vector<std::vector<int>> symbols;  // [user][block]
    long total_iterations = 0;
    int mpa_runs = 0;
    bool noise_floored = false;  // N0_eff <= 0 was replaced by 1e-12
};

// K resource observations, J user variables, unit coefficient slices picking
// each user's support entry at that resource.
EffectiveFactorGraph scma_block_graph(const ScmaCodebookSet& set);
VariableAlphabets scma_block_alphabets(const ScmaCodebookSet& set);

DownlinkDetection scma_mpa_downlink(const DelayDopplerGrid& x_sum_hat, const ScmaCodebookSet& set,
                                    AllocationScheme scheme, double N0_eff, const DetectorConfig& cfg);

// ============================================================================
// Uplink: single-stage joint MPA over the effective factor graph
// ============================================================================

// Where a column of the compressed matrix came from.
struct ColumnOrigin {
    int user = 0;
    int block = 0;
    int support_entry = 0;  // 0..dv-1
    int resource = 0;       // codeword entry, 0..K-1
    int source_column = 0;  // column of [H_1, ..., H_J]
};

struct CompressedUplink {
    SparseCMatrixCol matrix;  // MN x (J MN dv / K)
    std::vector<ColumnOrigin> columns;
    int dv = 0;
};

// Drops the columns of [H_1 ... H_J] that multiply structurally zero entries
// of the stacked input. Surviving columns are ordered by (user, block,
// support entry) so each codeword's dv columns are adjacent.
CompressedUplink compress_uplink(const std::vector<CoefficientMatrix>& H_list, const ScmaCodebookSet& set,
                                 AllocationScheme scheme, const GridSpec& spec);

// Groups consecutive dv columns into one variable node; edge (d, c) iff the
// slice h_dc is not all zero.
EffectiveFactorGraph build_effective_graph(const SparseCMatrixCol& H_compr, int dv);

struct UplinkDetection {
    std::vector<std::vector<int>> symbols;  // [user][block]
    MpaResult mpa;
};

// Variable c belongs to user floor(c K / MN) and block c mod (MN / K).
UplinkDetection uplink_mpa_detect(const CVector& y, const EffectiveFactorGraph& graph, const ScmaCodebookSet& set,
                                  double N0, const DetectorConfig& cfg, const MpaObserver& observer = {});

}  // namespace otfs
