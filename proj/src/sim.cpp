#include "otfs_scma/sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "otfs_scma/detect.hpp"

namespace otfs {

using Kind = ValidationError::Kind;

// ============================================================================
// Enum names
// ============================================================================

std::string to_string(Link link) { return link == Link::Downlink ? "downlink" : "uplink"; }

std::string to_string(System system) {
    switch (system) {
        case System::OtfsScma: return "otfs_scma";
        case System::OtfsOma2: return "otfs_oma2";
        case System::OtfsOma4: return "otfs_oma4";
        case System::OfdmScma: return "ofdm_scma";
    }
    return "unknown";
}

Link link_from_string(const std::string& s) {
    if (s == "downlink") return Link::Downlink;
    if (s == "uplink") return Link::Uplink;
    fail(Kind::InvalidConfig, "unknown link '" + s + "' (expected downlink or uplink)");
}

System system_from_string(const std::string& s) {
    if (s == "otfs_scma") return System::OtfsScma;
    if (s == "otfs_oma2") return System::OtfsOma2;
    if (s == "otfs_oma4") return System::OtfsOma4;
    if (s == "ofdm_scma") return System::OfdmScma;
    fail(Kind::InvalidConfig, "unknown system '" + s + "'");
}

// ============================================================================
// Config validation
// ============================================================================

void SimConfig::validate() const {
    spec.validate();
    if (frames < 1) fail(Kind::InvalidConfig, "frames must be at least 1");
    if (snr_points.empty()) fail(Kind::InvalidConfig, "at least one SNR point is required");
    for (double s : snr_points) {
        if (!std::isfinite(s)) fail(Kind::InvalidConfig, "SNR points must be finite");
    }
    if (P < 1 || P > spec.M || P > spec.N) {
        fail(Kind::InvalidConfig, "P=" + std::to_string(P) + " must lie in [1, min(M, N)]");
    }
    if (fractional && neighbor_span < 0) fail(Kind::InvalidConfig, "neighbor_span must be non-negative");
    if (noise_override && !(*noise_override >= 0.0)) fail(Kind::InvalidConfig, "noise_override must be >= 0");
    if (workers < 0) fail(Kind::InvalidConfig, "workers must be non-negative");
    detector.validate();

    switch (system) {
        case System::OtfsScma:
        case System::OfdmScma:
            // K is only known once the codebook is loaded; run_ber re-checks.
            if (system == System::OfdmScma && link == Link::Uplink) {
                fail(Kind::InvalidConfig, "ofdm_scma is a downlink-only baseline");
            }
            break;
        case System::OtfsOma2:
            if (spec.M % 2 != 0) fail(Kind::Allocation, "two-user OMA needs an even M");
            break;
        case System::OtfsOma4:
            if (spec.N % 4 != 0) fail(Kind::Allocation, "four-user OMA needs N divisible by 4");
            break;
    }
}

// ============================================================================
// Noise
// ============================================================================

double noise_from_snr(double snr_db, double symbol_energy, double bits_per_symbol) {
    const double eb = symbol_energy / bits_per_symbol;
    return eb * std::pow(10.0, -snr_db / 10.0);
}

double noise_from_snr(double snr_db, const ScmaCodebookSet& set, Link /*link*/) {
    return noise_from_snr(snr_db, set.mean_codeword_energy(), std::log2(static_cast<double>(set.alphabet_size())));
}

// ============================================================================
// OMA placement
// ============================================================================

const std::vector<cplx>& qpsk_constellation() {
    static const std::vector<cplx> points = [] {
        const double h = 1.0 / std::sqrt(2.0);
        return std::vector<cplx>{{h, h}, {h, -h}, {-h, h}, {-h, -h}};
    }();
    return points;
}

std::vector<Cell> oma_cells(int user_count, int user, const GridSpec& spec) {
    spec.validate();
    std::vector<Cell> cells;
    if (user_count == 2) {
        if (spec.M % 2 != 0) fail(Kind::Allocation, "two-user OMA needs an even M");
        const int half = spec.M / 2;
        for (int k = 0; k < spec.N; ++k) {
            for (int l = user * half; l < (user + 1) * half; ++l) cells.push_back({k, l});
        }
    } else if (user_count == 4) {
        if (spec.N % 4 != 0) fail(Kind::Allocation, "four-user OMA needs N divisible by 4");
        for (int l = 0; l < spec.M; ++l) {
            for (int k = user; k < spec.N; k += 4) cells.push_back({k, l});
        }
    } else {
        fail(Kind::InvalidConfig, "OMA supports 2 or 4 users");
    }
    return cells;
}

std::vector<DelayDopplerGrid> oma_allocate(int user_count, const std::vector<std::vector<cplx>>& user_symbols,
                                           const GridSpec& spec) {
    if (static_cast<int>(user_symbols.size()) != user_count) {
        fail(Kind::Dimension, "expected symbols for " + std::to_string(user_count) + " users");
    }
    std::vector<DelayDopplerGrid> grids;
    for (int u = 0; u < user_count; ++u) {
        const auto cells = oma_cells(user_count, u, spec);
        const auto& syms = user_symbols[static_cast<std::size_t>(u)];
        if (syms.size() != cells.size()) {
            fail(Kind::Dimension, "user " + std::to_string(u) + " must place exactly " +
                                      std::to_string(cells.size()) + " symbols");
        }
        DelayDopplerGrid g(spec);
        for (std::size_t i = 0; i < cells.size(); ++i) g(cells[i].k, cells[i].l) = syms[i];
        grids.push_back(std::move(g));
    }
    return grids;
}

// ============================================================================
// Frame simulation
// ============================================================================

namespace {

struct FrameOutcome {
    std::vector<std::uint64_t> user_errors;
    std::vector<std::uint64_t> user_bits;
    long iterations = 0;
    long mpa_runs = 0;
};

std::vector<std::vector<int>> draw_symbols(int users, int count, int alphabet, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, alphabet - 1);
    std::vector<std::vector<int>> s(static_cast<std::size_t>(users), std::vector<int>(static_cast<std::size_t>(count)));
    for (auto& row : s) {
        for (int& v : row) v = pick(rng);
    }
    return s;
}

void count_errors(const std::vector<std::vector<int>>& sent, const std::vector<std::vector<int>>& detected,
                  int bits_per_symbol, FrameOutcome& out) {
    out.user_errors.assign(sent.size(), 0);
    out.user_bits.assign(sent.size(), 0);
    for (std::size_t j = 0; j < sent.size(); ++j) {
        for (std::size_t i = 0; i < sent[j].size(); ++i) {
            out.user_errors[j] += static_cast<std::uint64_t>(bit_errors(sent[j][i], detected[j][i]));
        }
        out.user_bits[j] = sent[j].size() * static_cast<std::uint64_t>(bits_per_symbol);
    }
}

int nearest_qpsk(cplx v) {
    const auto& pts = qpsk_constellation();
    int best = 0;
    for (int m = 1; m < static_cast<int>(pts.size()); ++m) {
        if (std::norm(v - pts[static_cast<std::size_t>(m)]) < std::norm(v - pts[static_cast<std::size_t>(best)])) best = m;
    }
    return best;
}

class FrameRunner {
public:
    FrameRunner(const SimConfig& cfg, const ScmaCodebookSet& set) : cfg_(cfg), set_(set) {
        opts_.fractional = cfg.fractional;
        opts_.neighbor_span = cfg.neighbor_span;
        if (cfg.system == System::OfdmScma) {
            G_ = sfft_matrix(cfg.spec);
            Ginv_ = isfft_matrix(cfg.spec);
        }
    }

    FrameOutcome run(Rng& rng, double N0) const {
        switch (cfg_.system) {
            case System::OtfsScma:
            case System::OfdmScma:
                return cfg_.link == Link::Downlink ? scma_downlink(rng, N0) : scma_uplink(rng, N0);
            case System::OtfsOma2: return oma(2, rng, N0);
            case System::OtfsOma4: return oma(4, rng, N0);
        }
        return {};
    }

private:
    // One receiver per frame decodes every user over its own channel draw.
    FrameOutcome scma_downlink(Rng& rng, double N0) const {
        const GridSpec& spec = cfg_.spec;
        const int blocks = blocks_per_frame(spec, set_.resources());
        const auto symbols = draw_symbols(set_.users(), blocks, set_.alphabet_size(), rng);
        const auto ch = sample_channel(cfg_.P, spec, opts_, rng);
        const auto H = build_coefficient_matrix(ch, spec);

        const auto codewords = encode(symbols, set_);
        std::vector<DelayDopplerGrid> grids;
        for (const auto& cw : codewords) grids.push_back(allocate_grid(cw, cfg_.scheme, spec));
        const CVector x = vectorize(superimpose(grids));

        LmmseOutput eq;
        if (cfg_.system == System::OfdmScma) {
            // Symbols sit on the time-frequency grid; the delay-Doppler channel
            // acts on their SFFT image.
            const CMatrix Heff = Ginv_ * (H.entries * G_);
            const CVector y = apply_awgn(Heff * x, N0, rng);
            eq = lmmse_equalize(Heff, y, N0);
        } else {
            const CVector y = apply_awgn(H.entries * x, N0, rng);
            eq = lmmse_equalize(H, y, N0);
        }
        const auto det = scma_mpa_downlink(devectorize(eq.estimate, spec), set_, cfg_.scheme, eq.error_variance,
                                           cfg_.detector);
        FrameOutcome out;
        count_errors(symbols, det.symbols, set_.bits_per_symbol(), out);
        out.iterations = det.total_iterations;
        out.mpa_runs = det.mpa_runs;
        return out;
    }

    FrameOutcome scma_uplink(Rng& rng, double N0) const {
        const GridSpec& spec = cfg_.spec;
        const int blocks = blocks_per_frame(spec, set_.resources());
        const auto symbols = draw_symbols(set_.users(), blocks, set_.alphabet_size(), rng);
        std::vector<CoefficientMatrix> Hs;
        for (int j = 0; j < set_.users(); ++j) {
            Hs.push_back(build_coefficient_matrix(sample_channel(cfg_.P, spec, opts_, rng), spec));
        }
        const auto codewords = encode(symbols, set_);
        CVector y = CVector::Zero(static_cast<Eigen::Index>(spec.slots()));
        for (int j = 0; j < set_.users(); ++j) {
            const auto g = allocate_grid(codewords[static_cast<std::size_t>(j)], cfg_.scheme, spec);
            y += Hs[static_cast<std::size_t>(j)].entries * vectorize(g);
        }
        y = apply_awgn(y, N0, rng);

        const auto compr = compress_uplink(Hs, set_, cfg_.scheme, spec);
        const auto graph = build_effective_graph(compr.matrix, compr.dv);
        const auto det = uplink_mpa_detect(y, graph, set_, N0, cfg_.detector);
        FrameOutcome out;
        count_errors(symbols, det.symbols, set_.bits_per_symbol(), out);
        out.iterations = det.mpa.iterations;
        out.mpa_runs = 1;
        return out;
    }

    FrameOutcome oma(int users, Rng& rng, double N0) const {
        const GridSpec& spec = cfg_.spec;
        const int per_user = static_cast<int>(spec.slots()) / users;
        const auto symbols = draw_symbols(users, per_user, 4, rng);
        const auto& pts = qpsk_constellation();
        std::vector<std::vector<cplx>> values(static_cast<std::size_t>(users));
        for (int u = 0; u < users; ++u) {
            for (int s : symbols[static_cast<std::size_t>(u)]) values[static_cast<std::size_t>(u)].push_back(pts[static_cast<std::size_t>(s)]);
        }
        const auto grids = oma_allocate(users, values, spec);

        std::vector<std::vector<int>> detected(static_cast<std::size_t>(users));
        FrameOutcome out;
        if (cfg_.link == Link::Downlink) {
            const auto H = build_coefficient_matrix(sample_channel(cfg_.P, spec, opts_, rng), spec);
            const CVector y = apply_awgn(H.entries * vectorize(superimpose(grids)), N0, rng);
            const auto xhat = devectorize(lmmse_detect(H, y, N0), spec);
            for (int u = 0; u < users; ++u) {
                for (const Cell& c : oma_cells(users, u, spec)) detected[static_cast<std::size_t>(u)].push_back(nearest_qpsk(xhat(c.k, c.l)));
            }
        } else {
            std::vector<CoefficientMatrix> Hs;
            for (int u = 0; u < users; ++u) Hs.push_back(build_coefficient_matrix(sample_channel(cfg_.P, spec, opts_, rng), spec));
            CVector y = CVector::Zero(static_cast<Eigen::Index>(spec.slots()));
            for (int u = 0; u < users; ++u) y += Hs[static_cast<std::size_t>(u)].entries * vectorize(grids[static_cast<std::size_t>(u)]);
            y = apply_awgn(y, N0, rng);

            // Scalar variables, one per occupied cell, in (user, fill order).
            std::vector<Eigen::Triplet<cplx>> triplets;
            int col = 0;
            for (int u = 0; u < users; ++u) {
                const SparseCMatrixCol Hu = Hs[static_cast<std::size_t>(u)].entries;
                for (const Cell& c : oma_cells(users, u, spec)) {
                    for (SparseCMatrixCol::InnerIterator it(Hu, static_cast<Eigen::Index>(spec.index(c.k, c.l))); it; ++it) {
                        triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
                    }
                    ++col;
                }
            }
            SparseCMatrixCol compr(static_cast<Eigen::Index>(spec.slots()), col);
            compr.setFromTriplets(triplets.begin(), triplets.end());
            const auto graph = build_effective_graph(compr, 1);
            VariableAlphabets alph;
            Alphabet q;
            for (const auto& p : pts) q.push_back({p});
            alph.alphabets.push_back(std::move(q));
            alph.of_variable.assign(static_cast<std::size_t>(graph.variable_count), 0);
            const auto r = run_mpa(graph, alph, y, N0, cfg_.detector);
            for (int c = 0; c < graph.variable_count; ++c) {
                detected[static_cast<std::size_t>(c / per_user)].push_back(r.decisions[static_cast<std::size_t>(c)]);
            }
            out.iterations = r.iterations;
            out.mpa_runs = 1;
        }
        count_errors(symbols, detected, 2, out);
        return out;
    }

    const SimConfig& cfg_;
    const ScmaCodebookSet& set_;
    ChannelOptions opts_;
    CMatrix G_;
    CMatrix Ginv_;
};

}  // namespace

int default_worker_count() {
    if (const char* env = std::getenv("SIM_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ScmaCodebookSet resolve_codebooks(const SimConfig& config) {
    ScmaCodebookSet set = config.codebook_path.empty() ? default_codebooks() : load_codebooks(config.codebook_path);
    if (config.extend_to_eight) set = extend_to_eight_users(set);
    return set;
}

std::vector<BerRecord> run_ber(const SimConfig& config) { return run_ber(config, resolve_codebooks(config)); }

std::vector<BerRecord> run_ber(const SimConfig& config, const ScmaCodebookSet& set) {
    config.validate();
    const bool scma = config.system == System::OtfsScma || config.system == System::OfdmScma;
    if (scma) check_allocation(config.scheme, config.spec, set.resources());
    if (config.system == System::OfdmScma && config.spec.slots() > 4096) {
        fail(Kind::InvalidConfig, "ofdm_scma builds dense MN x MN matrices; grid too large");
    }

    const FrameRunner runner(config, set);
    const int workers = std::min(config.workers > 0 ? config.workers : default_worker_count(), config.frames);

    std::vector<BerRecord> records;
    for (std::size_t si = 0; si < config.snr_points.size(); ++si) {
        const double snr = config.snr_points[si];
        double N0 = 0.0;
        if (config.noise_override) {
            N0 = *config.noise_override;
        } else if (scma) {
            N0 = noise_from_snr(snr, set, config.link);
        } else {
            N0 = noise_from_snr(snr, 1.0, 2.0);
        }

        std::vector<FrameOutcome> outcomes(static_cast<std::size_t>(config.frames));
        std::atomic<int> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            while (true) {
                const int f = next.fetch_add(1);
                if (f >= config.frames) return;
                try {
                    Rng rng = derive_stream(config.seed, si, static_cast<std::uint64_t>(f));
                    outcomes[static_cast<std::size_t>(f)] = runner.run(rng, N0);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(config.frames);
                    return;
                }
            }
        };
        if (workers <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        }
        if (error) std::rethrow_exception(error);

        BerRecord rec;
        rec.snr_db = snr;
        rec.frames_run = static_cast<std::uint64_t>(config.frames);
        std::vector<std::uint64_t> ue;
        std::vector<std::uint64_t> ub;
        long iters = 0;
        long runs = 0;
        for (const auto& o : outcomes) {
            ue.resize(o.user_errors.size(), 0);
            ub.resize(o.user_bits.size(), 0);
            for (std::size_t j = 0; j < o.user_errors.size(); ++j) {
                ue[j] += o.user_errors[j];
                ub[j] += o.user_bits[j];
            }
            iters += o.iterations;
            runs += o.mpa_runs;
        }
        for (std::size_t j = 0; j < ue.size(); ++j) {
            rec.bit_errors += ue[j];
            rec.total_bits += ub[j];
            rec.per_user_ber.push_back(ub[j] ? static_cast<double>(ue[j]) / static_cast<double>(ub[j]) : 0.0);
        }
        rec.ber = rec.total_bits ? static_cast<double>(rec.bit_errors) / static_cast<double>(rec.total_bits) : 0.0;
        rec.mean_mpa_iterations = runs ? static_cast<double>(iters) / static_cast<double>(runs) : 0.0;
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<BerRecord> ofdm_scma_run(const SimConfig& config) {
    SimConfig c = config;
    c.system = System::OfdmScma;
    return run_ber(c);
}

// ============================================================================
// Persistence
// ============================================================================

void write_csv(std::ostream& out, const std::vector<BerRecord>& records) {
    out << kCsvHeader << '\n';
    char line[256];
    for (const auto& r : records) {
        std::snprintf(line, sizeof line, "%.10g,%llu,%llu,%llu,%.10g,%.6f\n", r.snr_db,
                      static_cast<unsigned long long>(r.frames_run), static_cast<unsigned long long>(r.bit_errors),
                      static_cast<unsigned long long>(r.total_bits), r.ber, r.mean_mpa_iterations);
        out << line;
    }
}

std::string csv_string(const std::vector<BerRecord>& records) {
    std::ostringstream os;
    write_csv(os, records);
    return os.str();
}

std::vector<double> parse_snr_range(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(Kind::InvalidConfig, "bad SNR range '" + spec + "' (expected a:b:step)");
        }
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        fail(Kind::InvalidConfig, "bad SNR range '" + spec + "' (expected a:b:step with step > 0, b >= a)");
    }
    std::vector<double> out;
    const double tol = 1e-9 * parts[2];
    for (int i = 0;; ++i) {
        const double v = parts[0] + i * parts[2];
        if (v > parts[1] + tol) break;
        out.push_back(v);
    }
    return out;
}

namespace {

template <typename T>
T get_field(const nlohmann::json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(Kind::InvalidConfig, std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace

ConfigFile config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail(Kind::InvalidConfig, "config must be a JSON object");
    static const std::vector<std::string> known = {
        "M", "N", "link", "system", "scheme", "codebook", "extend_to_eight", "P", "fractional", "neighbor_span",
        "snr_db", "frames", "seed", "detector", "noise_override", "workers"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            fail(Kind::InvalidConfig, "unknown config field '" + key + "'");
        }
    }

    ConfigFile f;
    SimConfig& c = f.config;
    if (doc.contains("M")) c.spec.M = get_field<int>(doc, "M");
    if (doc.contains("N")) c.spec.N = get_field<int>(doc, "N");
    if (doc.contains("link")) c.link = link_from_string(get_field<std::string>(doc, "link"));
    if (doc.contains("system")) c.system = system_from_string(get_field<std::string>(doc, "system"));
    if (doc.contains("scheme")) c.scheme = allocation_scheme_from_string(get_field<std::string>(doc, "scheme"));
    if (doc.contains("codebook") && !doc.at("codebook").is_null()) c.codebook_path = get_field<std::string>(doc, "codebook");
    if (doc.contains("extend_to_eight")) c.extend_to_eight = get_field<bool>(doc, "extend_to_eight");
    if (doc.contains("P")) {
        if (doc.at("P").is_array()) {
            f.path_counts = get_field<std::vector<int>>(doc, "P");
        } else {
            f.path_counts = {get_field<int>(doc, "P")};
        }
        if (f.path_counts.empty()) fail(Kind::InvalidConfig, "P list is empty");
    } else {
        f.path_counts = {c.P};
    }
    c.P = f.path_counts.front();
    if (doc.contains("fractional")) c.fractional = get_field<bool>(doc, "fractional");
    if (doc.contains("neighbor_span")) c.neighbor_span = get_field<int>(doc, "neighbor_span");
    if (doc.contains("snr_db")) {
        if (doc.at("snr_db").is_string()) {
            c.snr_points = parse_snr_range(get_field<std::string>(doc, "snr_db"));
        } else {
            c.snr_points = get_field<std::vector<double>>(doc, "snr_db");
        }
    }
    if (doc.contains("frames")) c.frames = get_field<int>(doc, "frames");
    if (doc.contains("seed")) c.seed = get_field<std::uint64_t>(doc, "seed");
    if (doc.contains("detector")) {
        const auto& d = doc.at("detector");
        if (!d.is_object()) fail(Kind::InvalidConfig, "detector must be an object");
        for (const auto& [key, value] : d.items()) {
            if (key != "max_iter" && key != "convergence_tol" && key != "damping" && key != "enumeration_cap") {
                fail(Kind::InvalidConfig, "unknown detector field '" + key + "'");
            }
        }
        if (d.contains("max_iter")) c.detector.max_iter = get_field<int>(d, "max_iter");
        if (d.contains("convergence_tol")) c.detector.convergence_tol = get_field<double>(d, "convergence_tol");
        if (d.contains("damping")) c.detector.damping = get_field<double>(d, "damping");
        if (d.contains("enumeration_cap")) c.detector.enumeration_cap = get_field<int>(d, "enumeration_cap");
    }
    if (doc.contains("noise_override") && !doc.at("noise_override").is_null()) {
        c.noise_override = get_field<double>(doc, "noise_override");
    }
    if (doc.contains("workers")) c.workers = get_field<int>(doc, "workers");
    return f;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Kind::InvalidConfig, "cannot open config file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(Kind::InvalidConfig, "cannot parse " + path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

nlohmann::json config_to_json(const SimConfig& c) {
    nlohmann::json doc = {
        {"M", c.spec.M},
        {"N", c.spec.N},
        {"link", to_string(c.link)},
        {"system", to_string(c.system)},
        {"scheme", to_string(c.scheme)},
        {"extend_to_eight", c.extend_to_eight},
        {"P", c.P},
        {"fractional", c.fractional},
        {"neighbor_span", c.neighbor_span},
        {"snr_db", c.snr_points},
        {"frames", c.frames},
        {"seed", c.seed},
        {"detector",
         {{"max_iter", c.detector.max_iter},
          {"convergence_tol", c.detector.convergence_tol},
          {"damping", c.detector.damping},
          {"enumeration_cap", c.detector.enumeration_cap}}},
        {"workers", c.workers},
    };
    doc["codebook"] = c.codebook_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(c.codebook_path);
    doc["noise_override"] = c.noise_override ? nlohmann::json(*c.noise_override) : nlohmann::json(nullptr);
    return doc;
}

}  // namespace otfs
