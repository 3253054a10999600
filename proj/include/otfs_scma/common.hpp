#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace otfs {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// Every random draw in the library goes through a caller-owned engine.
using Rng = std::mt19937_64;

// ============================================================================
// Errors
// ============================================================================

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: caller-side mistakes that are detectable before any numerics run.
class ValidationError : public Error {
public:
    enum class Kind {
        Dimension,
        InvalidConfig,
        InvalidChannel,
        InvalidParameter,
        InvalidSymbol,
        Allocation,
        Codebook,
        UnsupportedExtension,
        Structure,
    };

    ValidationError(Kind kind, const std::string& what)
        : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Exhaustive enumeration would exceed a configured cap.
class ComplexityError : public Error {
public:
    ComplexityError(const std::string& what, std::uint64_t required)
        : Error(what), required_(required) {}

    // Enumeration count that would have been needed.
    std::uint64_t required() const noexcept { return required_; }

private:
    std::uint64_t required_;
};

[[noreturn]] inline void fail(ValidationError::Kind kind, const std::string& what) {
    throw ValidationError(kind, what);
}

// ============================================================================
// Seeding
// ============================================================================

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream derivation: the engine for (seed, a, b) does not depend
// on how many other streams were created or in which order.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ splitmix64(a + 0x632be59bd9b4e019ULL));
    s = splitmix64(s ^ splitmix64(b + 0x85157af5b34f1c2bULL));
    return Rng(s);
}

}  // namespace otfs
