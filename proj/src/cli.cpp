#include "otfs_scma/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "otfs_scma/sim.hpp"

namespace otfs {

namespace {

namespace fs = std::filesystem;

struct Overrides {
    std::string config;
    std::optional<int> M, N, frames, workers;
    std::vector<int> P;
    std::optional<std::string> snr, link, system, scheme, codebook;
    std::optional<std::uint64_t> seed;
    bool fractional = false;
    bool extend = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
        cmd.add_option("--M", M, "delay bins");
        cmd.add_option("--N", N, "Doppler bins");
        cmd.add_option("--P", P, "path count(s)")->expected(1, -1);
        cmd.add_option("--snr", snr, "SNR sweep a:b:step in dB");
        cmd.add_option("--frames", frames, "frames per SNR point");
        cmd.add_option("--seed", seed, "master seed");
        cmd.add_option("--link", link, "downlink | uplink");
        cmd.add_option("--system", system, "otfs_scma | otfs_oma2 | otfs_oma4 | ofdm_scma");
        cmd.add_option("--scheme", scheme, "doppler_blocks | delay_blocks");
        cmd.add_option("--codebook", codebook, "codebook JSON file");
        cmd.add_option("--workers", workers, "worker threads (default SIM_WORKERS or all cores)");
        cmd.add_flag("--fractional", fractional, "fractional Doppler");
        cmd.add_flag("--extend-to-eight", extend, "use the 8-user (200%) extension");
    }

    ConfigFile resolve() const {
        ConfigFile f;
        if (!config.empty()) {
            f = load_config(config);
        } else {
            f.path_counts = {f.config.P};
            f.config.snr_points = parse_snr_range("0:14:2");
        }
        SimConfig& c = f.config;
        if (M) c.spec.M = *M;
        if (N) c.spec.N = *N;
        if (!P.empty()) f.path_counts = P;
        if (snr) c.snr_points = parse_snr_range(*snr);
        if (frames) c.frames = *frames;
        if (seed) c.seed = *seed;
        if (link) c.link = link_from_string(*link);
        if (system) c.system = system_from_string(*system);
        if (scheme) c.scheme = allocation_scheme_from_string(*scheme);
        if (codebook) c.codebook_path = *codebook;
        if (workers) c.workers = *workers;
        if (fractional) c.fractional = true;
        if (extend) c.extend_to_eight = true;
        c.P = f.path_counts.front();
        return f;
    }
};

void write_file(const fs::path& path, const std::vector<BerRecord>& records) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_csv(out, records);
}

int run_command(const Overrides& o, const std::string& out_file, const std::string& out_dir, std::ostream& out) {
    const ConfigFile f = o.resolve();
    const ScmaCodebookSet set = resolve_codebooks(f.config);
    const bool single = f.path_counts.size() == 1;
    for (int P : f.path_counts) {
        SimConfig c = f.config;
        c.P = P;
        const auto records = run_ber(c, set);
        if (single && out_dir.empty()) {
            if (out_file.empty()) {
                write_csv(out, records);
            } else {
                write_file(out_file, records);
            }
        } else {
            const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
            const fs::path path = dir / (to_string(c.system) + "_P" + std::to_string(P) + ".csv");
            write_file(path, records);
            out << path.string() << '\n';
        }
    }
    return 0;
}

int sweep_command(const Overrides& o, const std::vector<std::string>& systems, const std::string& out_dir,
                  std::ostream& out) {
    const ConfigFile f = o.resolve();
    std::vector<System> list;
    for (const auto& s : systems) list.push_back(system_from_string(s));
    if (list.empty()) list.push_back(f.config.system);
    const ScmaCodebookSet set = resolve_codebooks(f.config);
    for (System s : list) {
        for (int P : f.path_counts) {
            SimConfig c = f.config;
            c.system = s;
            c.P = P;
            const fs::path path = fs::path(out_dir) / (to_string(s) + "_P" + std::to_string(P) + ".csv");
            write_file(path, run_ber(c, set));
            out << path.string() << '\n';
        }
    }
    return 0;
}

int validate_codebook_command(const std::string& path, std::ostream& out) {
    const auto set = load_codebooks(path);
    out << "J=" << set.users() << " K=" << set.resources() << " A=" << set.alphabet_size() << " dv=" << set.dv()
        << " df=" << set.df() << (set.regular() ? " regular" : " irregular") << " overloading=" << set.overloading()
        << '\n';
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"OTFS-SCMA link-level simulator", "otfs_scma"};
    app.require_subcommand(1);

    Overrides run_opts;
    std::string out_file;
    std::string run_dir;
    auto* run = app.add_subcommand("run", "BER simulation over an SNR sweep");
    run_opts.attach(*run);
    run->add_option("--out", out_file, "CSV output file (single P; default stdout)");
    run->add_option("--out-dir", run_dir, "directory for per-P CSV files");

    Overrides sweep_opts;
    std::vector<std::string> systems;
    std::string sweep_dir = ".";
    auto* sweep = app.add_subcommand("sweep", "multi-P comparison, one CSV per (system, P)");
    sweep_opts.attach(*sweep);
    sweep->add_option("--systems", systems, "systems to compare")->expected(1, -1);
    sweep->add_option("--out-dir", sweep_dir, "output directory");

    std::string codebook_path;
    auto* validate = app.add_subcommand("validate-codebook", "check a codebook file and print its parameters");
    validate->add_option("path", codebook_path, "codebook JSON")->required();

    // CLI11 parses in reverse order.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        if (*run) return run_command(run_opts, out_file, run_dir, out);
        if (*sweep) return sweep_command(sweep_opts, systems, sweep_dir, out);
        if (*validate) return validate_codebook_command(codebook_path, out);
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace otfs
