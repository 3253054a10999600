#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otfs_scma/channel.hpp"
#include "otfs_scma/common.hpp"
#include "otfs_scma/grid.hpp"
#include "otfs_scma/mpa.hpp"
#include "otfs_scma/scma.hpp"

namespace otfs {

enum class Link { Downlink, Uplink };

enum class System {
    OtfsScma,
    OtfsOma2,  // two users on disjoint halves of the delay axis
    OtfsOma4,  // four users on interleaved Doppler rows
    OfdmScma,  // SCMA codewords placed directly on the time-frequency grid
};

std::string to_string(Link link);
std::string to_string(System system);
Link link_from_string(const std::string& s);
System system_from_string(const std::string& s);

struct SimConfig {
    GridSpec spec{8, 8};
    Link link = Link::Downlink;
    System system = System::OtfsScma;
    AllocationScheme scheme = AllocationScheme::DopplerBlocks;
    std::string codebook_path;     // empty: built-in default set
    bool extend_to_eight = false;  // 200% overloading via the 8-user extension
    int P = 2;
    bool fractional = false;
    int neighbor_span = 2;
    std::vector<double> snr_points;  // E_b/N_0 in dB
    int frames = 50'000;
    std::uint64_t seed = 1;
    DetectorConfig detector;
    std::optional<double> noise_override;  // fixes N0 at every SNR point
    int workers = 0;                       // 0: SIM_WORKERS, else hardware concurrency

    // Throws ValidationError::InvalidConfig (or Allocation) on any violation.
    void validate() const;
};

struct BerRecord {
    double snr_db = 0.0;
    std::uint64_t frames_run = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t total_bits = 0;
    double ber = 0.0;
    std::vector<double> per_user_ber;
    double mean_mpa_iterations = 0.0;

    friend bool operator==(const BerRecord&, const BerRecord&) = default;
};

// N0 = E_b 10^(-snr/10) with E_b = E_s / log2(A).
double noise_from_snr(double snr_db, double symbol_energy, double bits_per_symbol);
// E_s is the codebook's mean codeword energy. The downlink uses the same
// per-user E_b as the uplink.
double noise_from_snr(double snr_db, const ScmaCodebookSet& set, Link link);

// The codebook set a config simulates with (loaded or default, extended if asked).
ScmaCodebookSet resolve_codebooks(const SimConfig& config);

std::vector<BerRecord> run_ber(const SimConfig& config);
std::vector<BerRecord> run_ber(const SimConfig& config, const ScmaCodebookSet& set);

// Runs `config` with system forced to OfdmScma.
std::vector<BerRecord> ofdm_scma_run(const SimConfig& config);

// ============================================================================
// OMA baselines
// ============================================================================

// Cells owned by `user`, in fill order. Two users split the delay axis into
// halves (row by row); four users take Doppler rows k = user (mod 4)
// (column by column).
std::vector<Cell> oma_cells(int user_count, int user, const GridSpec& spec);

std::vector<DelayDopplerGrid> oma_allocate(int user_count, const std::vector<std::vector<cplx>>& user_symbols,
                                           const GridSpec& spec);

// Unit-energy QPSK, natural-binary labels.
const std::vector<cplx>& qpsk_constellation();

// ============================================================================
// Persistence
// ============================================================================

inline constexpr const char* kCsvHeader = "snr_db,frames,bit_errors,total_bits,ber,mean_iters";

void write_csv(std::ostream& out, const std::vector<BerRecord>& records);
std::string csv_string(const std::vector<BerRecord>& records);

// "a:b:step", inclusive of b.
std::vector<double> parse_snr_range(const std::string& spec);

// A config file may list several path counts; everything else is one SimConfig.
struct ConfigFile {
    SimConfig config;
    std::vector<int> path_counts;
};

ConfigFile config_from_json(const nlohmann::json& doc);
ConfigFile load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const SimConfig& config);

// SIM_WORKERS if set and positive, else std::thread::hardware_concurrency().
int default_worker_count();

}  // namespace otfs
