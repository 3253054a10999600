#include "otfs_scma/scma.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

namespace otfs {

using Kind = ValidationError::Kind;

// ============================================================================
// FactorMatrix
// ============================================================================

FactorMatrix::FactorMatrix(int K, int J, std::initializer_list<int> row_major) : FactorMatrix(K, J) {
    if (row_major.size() != bits_.size()) {
        fail(Kind::Dimension, "factor matrix initializer has wrong size");
    }
    std::size_t i = 0;
    for (int v : row_major) bits_[i++] = v != 0 ? 1 : 0;
}

int FactorMatrix::column_weight(int j) const {
    int w = 0;
    for (int k = 0; k < K_; ++k) w += (*this)(k, j);
    return w;
}

int FactorMatrix::row_weight(int k) const {
    int w = 0;
    for (int j = 0; j < J_; ++j) w += (*this)(k, j);
    return w;
}

// ============================================================================
// ScmaCodebookSet
// ============================================================================

ScmaCodebookSet::ScmaCodebookSet(int K, int A, std::vector<std::vector<Codeword>> codebooks)
    : J_(static_cast<int>(codebooks.size())), K_(K), A_(A), codebooks_(std::move(codebooks)) {
    if (J_ < 1) fail(Kind::Codebook, "codebook set has no users");
    if (K_ < 1) fail(Kind::Codebook, "codeword length K must be positive");
    if (A_ < 2) fail(Kind::Codebook, "alphabet size A must be at least 2");

    factor_ = FactorMatrix(K_, J_);
    for (int j = 0; j < J_; ++j) {
        const auto& book = codebooks_[static_cast<std::size_t>(j)];
        if (static_cast<int>(book.size()) != A_) {
            fail(Kind::Codebook, "user " + std::to_string(j) + " has " + std::to_string(book.size()) +
                                     " codewords, expected A=" + std::to_string(A_));
        }
        std::vector<int> support;
        for (int m = 0; m < A_; ++m) {
            const auto& cw = book[static_cast<std::size_t>(m)];
            if (static_cast<int>(cw.size()) != K_) {
                fail(Kind::Dimension, "user " + std::to_string(j) + " codeword " + std::to_string(m) +
                                          " has length " + std::to_string(cw.size()) + ", expected K=" +
                                          std::to_string(K_));
            }
            std::vector<int> s;
            for (int k = 0; k < K_; ++k) {
                const cplx v = cw[static_cast<std::size_t>(k)];
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                    fail(Kind::Codebook, "non-finite codeword entry for user " + std::to_string(j));
                }
                if (v != cplx{}) s.push_back(k);
            }
            if (m == 0) {
                support = s;
            } else if (s != support) {
                fail(Kind::Codebook, "user " + std::to_string(j) + " codeword " + std::to_string(m) +
                                         " does not share the support of codeword 0");
            }
        }
        if (support.empty()) fail(Kind::Codebook, "user " + std::to_string(j) + " has an empty support");
        for (int a = 0; a < A_; ++a) {
            for (int b = a + 1; b < A_; ++b) {
                if (book[static_cast<std::size_t>(a)] == book[static_cast<std::size_t>(b)]) {
                    fail(Kind::Codebook, "user " + std::to_string(j) + " has duplicate codewords " +
                                             std::to_string(a) + " and " + std::to_string(b));
                }
            }
        }
        if (j == 0) {
            dv_ = static_cast<int>(support.size());
        } else if (static_cast<int>(support.size()) != dv_) {
            fail(Kind::Codebook, "user " + std::to_string(j) + " occupies " + std::to_string(support.size()) +
                                     " resources, other users occupy dv=" + std::to_string(dv_));
        }
        for (int k : support) factor_(k, j) = 1;
        supports_.push_back(std::move(support));
    }

    df_ = 0;
    for (int k = 0; k < K_; ++k) df_ = std::max(df_, factor_.row_weight(k));
    for (int k = 0; k < K_; ++k) regular_ = regular_ && factor_.row_weight(k) == df_;
}

int ScmaCodebookSet::bits_per_symbol() const {
    int b = 0;
    while ((1 << b) < A_) ++b;
    return b;
}

std::vector<cplx> ScmaCodebookSet::compressed_codeword(int user, int symbol) const {
    const auto& cw = codeword(user, symbol);
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(dv_));
    for (int k : support(user)) out.push_back(cw[static_cast<std::size_t>(k)]);
    return out;
}

double ScmaCodebookSet::mean_codeword_energy() const {
    double e = 0.0;
    for (const auto& book : codebooks_) {
        for (const auto& cw : book) {
            for (const auto& v : cw) e += std::norm(v);
        }
    }
    return e / (static_cast<double>(J_) * A_);
}

// ============================================================================
// Ingestion
// ============================================================================

ScmaCodebookSet codebooks_from_json(const nlohmann::json& doc) {
    try {
        const int J = doc.at("J").get<int>();
        const int K = doc.at("K").get<int>();
        const int A = doc.at("A").get<int>();
        const auto& users = doc.at("codebooks");
        if (!users.is_array() || static_cast<int>(users.size()) != J) {
            fail(Kind::Codebook, "declared J=" + std::to_string(J) + " but codebooks lists " +
                                     std::to_string(users.is_array() ? users.size() : 0) + " users");
        }
        std::vector<std::vector<Codeword>> books;
        for (const auto& user : users) {
            std::vector<Codeword> book;
            for (const auto& word : user) {
                Codeword cw;
                for (const auto& entry : word) {
                    cw.emplace_back(entry.at("re").get<double>(), entry.at("im").get<double>());
                }
                book.push_back(std::move(cw));
            }
            books.push_back(std::move(book));
        }
        return ScmaCodebookSet(K, A, std::move(books));
    } catch (const nlohmann::json::exception& e) {
        fail(Kind::Codebook, std::string("malformed codebook document: ") + e.what());
    }
}

nlohmann::json codebooks_to_json(const ScmaCodebookSet& set) {
    nlohmann::json users = nlohmann::json::array();
    for (const auto& book : set.codebooks()) {
        nlohmann::json words = nlohmann::json::array();
        for (const auto& cw : book) {
            nlohmann::json entries = nlohmann::json::array();
            for (const auto& v : cw) entries.push_back({{"re", v.real()}, {"im", v.imag()}});
            words.push_back(std::move(entries));
        }
        users.push_back(std::move(words));
    }
    return {{"J", set.users()}, {"K", set.resources()}, {"A", set.alphabet_size()}, {"codebooks", users}};
}

ScmaCodebookSet load_codebooks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Kind::Codebook, "cannot open codebook file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(Kind::Codebook, "cannot parse " + path.string() + ": " + e.what());
    }
    return codebooks_from_json(doc);
}

FactorMatrix reference_factor_matrix() {
    return FactorMatrix(4, 6,
                        {1, 0, 1, 0, 1, 0,  //
                         0, 1, 1, 0, 0, 1,  //
                         1, 0, 0, 1, 0, 1,  //
                         0, 1, 0, 1, 1, 0});
}

FactorMatrix extended_factor_matrix() {
    return FactorMatrix(4, 8,
                        {1, 0, 1, 0, 1, 0, 1, 0,  //
                         0, 1, 1, 0, 0, 1, 1, 0,  //
                         1, 0, 0, 1, 0, 1, 0, 1,  //
                         0, 1, 0, 1, 1, 0, 0, 1});
}

ScmaCodebookSet default_codebooks() {
    constexpr int J = 6;
    constexpr int K = 4;
    constexpr int A = 4;
    const FactorMatrix F = reference_factor_matrix();
    // QPSK with natural-binary labels: MSB picks the real sign, LSB the imaginary.
    const double h = 1.0 / std::sqrt(2.0);
    const cplx qpsk[A] = {{h, h}, {h, -h}, {-h, h}, {-h, -h}};

    std::vector<std::vector<Codeword>> books(J);
    for (int j = 0; j < J; ++j) {
        const cplx rot = std::polar(1.0, std::numbers::pi * j / J);
        for (int m = 0; m < A; ++m) {
            Codeword cw(K, cplx{});
            // Two nonzeros of energy 1/2 each keep every codeword at unit energy.
            for (int k = 0; k < K; ++k) {
                if (F(k, j)) cw[static_cast<std::size_t>(k)] = qpsk[m] * rot * h;
            }
            books[static_cast<std::size_t>(j)].push_back(std::move(cw));
        }
    }
    return ScmaCodebookSet(K, A, std::move(books));
}

FactorMatrix factor_matrix(const ScmaCodebookSet& set) { return set.factor(); }

ScmaCodebookSet extend_to_eight_users(const ScmaCodebookSet& set) {
    if (set.users() != 6 || set.resources() != 4 || !(set.factor() == reference_factor_matrix())) {
        fail(Kind::UnsupportedExtension,
             "the 8-user extension is defined only for the 6x4 system with the reference factor matrix");
    }
    auto books = set.codebooks();
    // Users 3 and 4 (1-based) have disjoint supports; the new users swap their
    // value patterns onto each other's resources.
    auto relocate = [&](int value_user, int support_user) {
        std::vector<Codeword> book;
        for (int m = 0; m < set.alphabet_size(); ++m) {
            const auto values = set.compressed_codeword(value_user, m);
            Codeword cw(static_cast<std::size_t>(set.resources()), cplx{});
            const auto& sup = set.support(support_user);
            for (std::size_t t = 0; t < sup.size(); ++t) cw[static_cast<std::size_t>(sup[t])] = values[t];
            book.push_back(std::move(cw));
        }
        return book;
    };
    books.push_back(relocate(3, 2));  // user 7: values of user 4 on user 3's resources
    books.push_back(relocate(2, 3));  // user 8: values of user 3 on user 4's resources
    return ScmaCodebookSet(set.resources(), set.alphabet_size(), std::move(books));
}

// ============================================================================
// Encoding and allocation
// ============================================================================

std::vector<std::vector<Codeword>> encode(const std::vector<std::vector<int>>& symbols,
                                          const ScmaCodebookSet& set) {
    if (static_cast<int>(symbols.size()) != set.users()) {
        fail(Kind::Dimension, "expected symbols for " + std::to_string(set.users()) + " users, got " +
                                  std::to_string(symbols.size()));
    }
    std::vector<std::vector<Codeword>> out(symbols.size());
    for (int j = 0; j < set.users(); ++j) {
        const auto& row = symbols[static_cast<std::size_t>(j)];
        if (row.size() != symbols.front().size()) {
            fail(Kind::Dimension, "users carry different symbol counts");
        }
        for (int s : row) {
            if (s < 0 || s >= set.alphabet_size()) {
                fail(Kind::InvalidSymbol, "symbol " + std::to_string(s) + " outside [0, " +
                                              std::to_string(set.alphabet_size()) + ")");
            }
            out[static_cast<std::size_t>(j)].push_back(set.codeword(j, s));
        }
    }
    return out;
}

int blocks_per_frame(const GridSpec& spec, int K) { return static_cast<int>(spec.slots() / static_cast<std::size_t>(K)); }

void check_allocation(AllocationScheme scheme, const GridSpec& spec, int K) {
    spec.validate();
    if (K < 1) fail(Kind::Allocation, "codeword length must be positive");
    if (scheme == AllocationScheme::DopplerBlocks && spec.N % K != 0) {
        fail(Kind::Allocation, "Doppler-block allocation needs K | N (K=" + std::to_string(K) +
                                   ", N=" + std::to_string(spec.N) + ")");
    }
    if (scheme == AllocationScheme::DelayBlocks && spec.M % K != 0) {
        fail(Kind::Allocation, "delay-block allocation needs K | M (K=" + std::to_string(K) +
                                   ", M=" + std::to_string(spec.M) + ")");
    }
}

Cell block_cell(AllocationScheme scheme, const GridSpec& spec, int K, int block, int entry) {
    if (scheme == AllocationScheme::DopplerBlocks) {
        return {K * (block / spec.M) + entry, block % spec.M};
    }
    return {block % spec.N, K * (block / spec.N) + entry};
}

DelayDopplerGrid allocate_grid(const std::vector<Codeword>& codewords, AllocationScheme scheme,
                               const GridSpec& spec) {
    if (codewords.empty()) fail(Kind::Dimension, "no codewords to allocate");
    const int K = static_cast<int>(codewords.front().size());
    check_allocation(scheme, spec, K);
    const int blocks = blocks_per_frame(spec, K);
    if (static_cast<int>(codewords.size()) != blocks) {
        fail(Kind::Dimension, "allocation needs MN/K = " + std::to_string(blocks) + " codewords, got " +
                                  std::to_string(codewords.size()));
    }
    DelayDopplerGrid grid(spec);
    for (int b = 0; b < blocks; ++b) {
        const auto& cw = codewords[static_cast<std::size_t>(b)];
        if (static_cast<int>(cw.size()) != K) fail(Kind::Dimension, "codewords differ in length");
        for (int i = 0; i < K; ++i) {
            const Cell c = block_cell(scheme, spec, K, b, i);
            grid(c.k, c.l) = cw[static_cast<std::size_t>(i)];
        }
    }
    return grid;
}

std::vector<cplx> extract_block(const DelayDopplerGrid& grid, AllocationScheme scheme, int K, int block) {
    std::vector<cplx> out(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        const Cell c = block_cell(scheme, grid.spec(), K, block, i);
        out[static_cast<std::size_t>(i)] = grid(c.k, c.l);
    }
    return out;
}

DelayDopplerGrid superimpose(const std::vector<DelayDopplerGrid>& grids) {
    if (grids.empty()) fail(Kind::Dimension, "nothing to superimpose");
    DelayDopplerGrid sum(grids.front().spec());
    for (const auto& g : grids) {
        if (!(g.spec() == sum.spec())) fail(Kind::Dimension, "superimposed grids differ in shape");
        auto dst = sum.cells();
        const auto src = g.cells();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return sum;
}

void symbol_to_bits(int symbol, int bits, std::vector<std::uint8_t>& out) {
    for (int b = bits - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((symbol >> b) & 1));
}

int bit_errors(int sent, int detected) { return std::popcount(static_cast<unsigned>(sent ^ detected)); }

std::string to_string(AllocationScheme scheme) {
    return scheme == AllocationScheme::DopplerBlocks ? "doppler_blocks" : "delay_blocks";
}

AllocationScheme allocation_scheme_from_string(const std::string& s) {
    if (s == "doppler_blocks" || s == "scheme1" || s == "1") return AllocationScheme::DopplerBlocks;
    if (s == "delay_blocks" || s == "scheme2" || s == "2") return AllocationScheme::DelayBlocks;
    fail(Kind::InvalidConfig, "unknown allocation scheme '" + s + "'");
}

}  // namespace otfs
