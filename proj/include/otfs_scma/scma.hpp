#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otfs_scma/common.hpp"
#include "otfs_scma/grid.hpp"

namespace otfs {

using Codeword = std::vector<cplx>;

// K x J binary occupancy matrix; F(k, j) = 1 iff user j uses resource k.
class FactorMatrix {
public:
    FactorMatrix() = default;
    FactorMatrix(int K, int J) : K_(K), J_(J), bits_(static_cast<std::size_t>(K) * J, 0) {}
    FactorMatrix(int K, int J, std::initializer_list<int> row_major);

    int resources() const { return K_; }
    int users() const { return J_; }

    std::uint8_t operator()(int k, int j) const { return bits_[static_cast<std::size_t>(k) * J_ + j]; }
    std::uint8_t& operator()(int k, int j) { return bits_[static_cast<std::size_t>(k) * J_ + j]; }

    int column_weight(int j) const;
    int row_weight(int k) const;

    friend bool operator==(const FactorMatrix&, const FactorMatrix&) = default;

private:
    int K_ = 0;
    int J_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Validated set of J user codebooks, each holding A length-K codewords that
// share one support of size dv.
class ScmaCodebookSet {
public:
    // Throws ValidationError (Dimension or Codebook) on any inconsistency.
    ScmaCodebookSet(int K, int A, std::vector<std::vector<Codeword>> codebooks);

    int users() const { return J_; }
    int resources() const { return K_; }
    int alphabet_size() const { return A_; }
    int dv() const { return dv_; }
    // Maximum row weight of the factor matrix (the common weight when regular).
    int df() const { return df_; }
    bool regular() const { return regular_; }
    double overloading() const { return static_cast<double>(J_) / K_; }
    int bits_per_symbol() const;

    const Codeword& codeword(int user, int symbol) const {
        return codebooks_[static_cast<std::size_t>(user)][static_cast<std::size_t>(symbol)];
    }
    const std::vector<Codeword>& codebook(int user) const { return codebooks_[static_cast<std::size_t>(user)]; }
    const std::vector<std::vector<Codeword>>& codebooks() const { return codebooks_; }

    // Ascending resource indices occupied by the user.
    const std::vector<int>& support(int user) const { return supports_[static_cast<std::size_t>(user)]; }

    // The dv nonzero entries of a codeword, in support order.
    std::vector<cplx> compressed_codeword(int user, int symbol) const;

    const FactorMatrix& factor() const { return factor_; }

    // Mean codeword energy over all users and symbols.
    double mean_codeword_energy() const;

private:
    int J_ = 0;
    int K_ = 0;
    int A_ = 0;
    int dv_ = 0;
    int df_ = 0;
    bool regular_ = true;
    std::vector<std::vector<Codeword>> codebooks_;
    std::vector<std::vector<int>> supports_;
    FactorMatrix factor_;
};

enum class AllocationScheme {
    DopplerBlocks,  // Scheme 1: K x 1 blocks along Doppler
    DelayBlocks,    // Scheme 2: 1 x K blocks along delay
};

// ============================================================================
// Codebook ingestion
// ============================================================================

ScmaCodebookSet codebooks_from_json(const nlohmann::json& doc);
nlohmann::json codebooks_to_json(const ScmaCodebookSet& set);
ScmaCodebookSet load_codebooks(const std::filesystem::path& path);

// Built-in 6x4, A=4, dv=2 set on the supports of the reference factor matrix.
// Entry values are rotated QPSK repeated on both resources, not a published
// optimized codebook.
ScmaCodebookSet default_codebooks();

// The 4x6 reference factor matrix that the default set and the 8-user
// extension are defined against.
FactorMatrix reference_factor_matrix();

// 4x8 matrix of the 200%-overloaded extension.
FactorMatrix extended_factor_matrix();

FactorMatrix factor_matrix(const ScmaCodebookSet& set);

// 6x4 -> 8x4. User 7 reuses user 3's resources and user 8 user 4's, carrying
// the nonzero values of users 4 and 3 respectively (1-based numbering).
ScmaCodebookSet extend_to_eight_users(const ScmaCodebookSet& set);

// ============================================================================
// Mapping onto the delay-Doppler plane
// ============================================================================

// symbols[user][position] -> codewords[user][position].
std::vector<std::vector<Codeword>> encode(const std::vector<std::vector<int>>& symbols,
                                          const ScmaCodebookSet& set);

// Number of length-K codeword blocks per frame (MN/K).
int blocks_per_frame(const GridSpec& spec, int K);

// Throws Allocation when the scheme's divisibility requirement fails.
void check_allocation(AllocationScheme scheme, const GridSpec& spec, int K);

// Cell (k, l) holding entry `entry` of block `block`.
struct Cell {
    int k;
    int l;
};
Cell block_cell(AllocationScheme scheme, const GridSpec& spec, int K, int block, int entry);

DelayDopplerGrid allocate_grid(const std::vector<Codeword>& codewords, AllocationScheme scheme,
                               const GridSpec& spec);

// Reads the K entries of one block back out of a grid.
std::vector<cplx> extract_block(const DelayDopplerGrid& grid, AllocationScheme scheme, int K, int block);

DelayDopplerGrid superimpose(const std::vector<DelayDopplerGrid>& grids);

// Natural binary mapping between symbol indices and bits (MSB first).
void symbol_to_bits(int symbol, int bits, std::vector<std::uint8_t>& out);
int bit_errors(int sent, int detected);

std::string to_string(AllocationScheme scheme);
AllocationScheme allocation_scheme_from_string(const std::string& s);

}  // namespace otfs
