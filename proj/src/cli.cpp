// SPDX-License-Identifier: MIT
#include "gcdtc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcdtc/imaging.hpp"
#include "gcdtc/solver.hpp"

namespace gcdtc::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

// Shortest text that parses back to the same double.
std::string exact(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_doubles(const std::string& list, const char* what) {
    std::vector<double> values;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string("--") + what + ": cannot parse '" + item + "'");
        }
    }
    if (values.empty()) throw UsageError(std::string("--") + what + " needs at least one value");
    return values;
}

std::vector<std::string> parse_words(const std::string& list) {
    std::vector<std::string> words;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) words.push_back(item);
    return words;
}

void require_input(const std::string& path, const char* flag) {
    if (!fs::is_regular_file(path)) throw UsageError(std::string(flag) + ": no such file '" + path + "'");
}

void require_output(const std::string& path, const char* flag) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
        throw UsageError(std::string(flag) + ": directory '" + parent.string() + "' does not exist");
    }
}

// Flags shared by complete, ramp and bench.
struct SolverFlags {
    std::string loss = "poisson";
    std::string rho = "10,10,0";
    std::size_t rank = 300;
    std::optional<double> alpha;
    double epsilon = 1e-3;
    double tol = 1e-6;
    std::size_t max_sweeps = 500;
    std::uint64_t seed = 0;
    bool auto_alpha = false;
    double ramp_factor = 1.5;
    std::size_t probe_sweeps = 20;
    bool allow_negative = false;
    bool strict = false;
    bool quiet = false;

    void add_to(CLI::App& app, bool with_loss, bool with_seed) {
        if (with_loss) app.add_option("--loss", loss, "poisson | gaussian")->capture_default_str();
        app.add_option("--rho", rho, "comma-separated QV weights, one per mode")->capture_default_str();
        app.add_option("--rank", rank, "CP rank R")->capture_default_str()->check(CLI::PositiveNumber);
        app.add_option("--alpha", alpha, "step size (start value with --auto-alpha)");
        app.add_option("--epsilon", epsilon, "reconstruction shift")->capture_default_str();
        app.add_option("--tol", tol, "relative objective change to stop at")->capture_default_str();
        app.add_option("--max-sweeps", max_sweeps, "sweep budget")->capture_default_str();
        if (with_seed) app.add_option("--seed", seed, "initialisation seed")->capture_default_str();
        app.add_flag("--auto-alpha", auto_alpha, "pick alpha with the ramp heuristic");
        app.add_option("--ramp-factor", ramp_factor, "alpha multiplier per ramp step")->capture_default_str();
        app.add_option("--probe-sweeps", probe_sweeps, "sweeps per ramp probe")->capture_default_str();
        app.add_flag("--allow-negative", allow_negative, "skip the nonnegativity projection");
        app.add_flag("--strict", strict, "treat collapse as failure");
        app.add_flag("--quiet", quiet, "no per-sweep progress on stderr");
    }

    SolverConfig config(LossKind kind, std::size_t order) const {
        SolverConfig cfg;
        cfg.loss = kind;
        cfg.rank = rank;
        cfg.epsilon = epsilon;
        cfg.tol = tol;
        cfg.max_sweeps = max_sweeps;
        cfg.seed = seed;
        cfg.nonnegative = !allow_negative;
        cfg.rho = parse_doubles(rho, "rho");
        if (cfg.rho.size() != order) {
            throw UsageError("--rho has " + std::to_string(cfg.rho.size()) +
                             " values but the tensor has order " + std::to_string(order));
        }
        if (!(ramp_factor > 1.0)) throw UsageError("--ramp-factor must be > 1");
        if (probe_sweeps == 0) throw UsageError("--probe-sweeps must be >= 1");
        return cfg;
    }

    // Explicit alpha, or the ramp result starting from --alpha (default 1e-6).
    double choose_alpha(const DenseTensor& t, const ObservationMask& mask, SolverConfig cfg,
                         std::ostream& err) const {
        if (!auto_alpha) {
            if (!alpha) throw UsageError("--alpha is required unless --auto-alpha is given");
            return *alpha;
        }
        cfg.alpha = alpha.value_or(1e-6);
        const AlphaRampResult ramp = alpha_ramp(t, mask, cfg, ramp_factor, probe_sweeps);
        if (!quiet) {
            err << "auto-alpha: " << ramp.alpha << " after " << ramp.probes << " probes\n";
        }
        return ramp.alpha;
    }
};

LossKind loss_flag(const std::string& name) {
    try {
        return parse_loss(name);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--loss: ") + e.what());
    }
}

SweepObserver progress(std::ostream& err, bool quiet) {
    if (quiet) return {};
    return [&err](const SolverState& s) {
        err << "sweep " << s.sweeps << " objective " << format("%.10g", s.history.back()) << '\n';
    };
}

// ------------------------------------------------------------- corrupt

struct CorruptArgs {
    std::string input;
    double mr = 0.0;
    std::uint64_t seed = 0;
    std::string out_image;
    std::string out_mask;
};

int cmd_corrupt(const CorruptArgs& a, std::ostream& out) {
    require_input(a.input, "--input");
    require_output(a.out_image, "--out-image");
    require_output(a.out_mask, "--out-mask");
    if (!(a.mr >= 0.0 && a.mr < 1.0)) throw UsageError("--mr must lie in [0, 1)");
    const DenseTensor img = read_ppm(a.input);
    auto [t, mask] = corrupt(img, CorruptionSpec{a.mr, a.seed});
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!mask[i]) t[i] = 0.0;
    }
    write_ppm(t, a.out_image);
    write_mask_pgm(mask, a.out_mask);
    out << "missing " << (mask.size() - mask.observed_count()) << " of " << mask.size() << '\n';
    return 0;
}

// ------------------------------------------------------------ complete

struct CompleteArgs {
    std::string input;
    std::string mask;
    std::string output;
    std::string history;
    SolverFlags solver;
};

void load_pair(const std::string& image_path, const std::string& mask_path, DenseTensor& img,
               ObservationMask& mask) {
    img = read_ppm(image_path);
    try {
        mask = read_mask_pgm(mask_path, img.shape());
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
}

int report_solve(const CompletionResult& r, double alpha, const SolverFlags& flags, std::ostream& out,
                 std::ostream& err) {
    out << "termination " << to_string(r.reason) << '\n';
    out << "objective " << format("%.10g", r.history.back()) << '\n';
    out << "sweeps " << r.sweeps << '\n';
    out << "alpha " << exact(alpha) << '\n';
    if (r.reason == Termination::Collapsed) {
        err << "warning: model collapsed to zero at sweep " << r.sweeps << '\n';
        if (flags.strict) return 1;
    }
    return 0;
}

int cmd_complete(const CompleteArgs& a, std::ostream& out, std::ostream& err) {
    require_input(a.input, "--input");
    require_input(a.mask, "--mask");
    require_output(a.output, "--output");
    if (!a.history.empty()) require_output(a.history, "--history");
    if (!a.solver.alpha && !a.solver.auto_alpha) {
        throw UsageError("--alpha is required unless --auto-alpha is given");
    }
    const LossKind kind = loss_flag(a.solver.loss);

    DenseTensor img;
    ObservationMask mask;
    load_pair(a.input, a.mask, img, mask);
    SolverConfig cfg = a.solver.config(kind, img.order());
    cfg.alpha = a.solver.choose_alpha(img, mask, cfg, err);

    const CompletionResult r = solve(img, mask, cfg, progress(err, a.solver.quiet));
    write_ppm(r.completed, a.output);
    if (!a.history.empty()) write_history_csv(r.history, a.history);
    return report_solve(r, cfg.alpha, a.solver, out, err);
}

// ---------------------------------------------------------------- psnr

struct PsnrArgs {
    std::string ref;
    std::string test;
    std::string mask;
};

int cmd_psnr(const PsnrArgs& a, std::ostream& out) {
    require_input(a.ref, "--ref");
    require_input(a.test, "--test");
    if (!a.mask.empty()) require_input(a.mask, "--mask");
    const DenseTensor ref = read_ppm(a.ref);
    const DenseTensor test = read_ppm(a.test);
    if (ref.shape() != test.shape()) throw UsageError("--ref and --test have different shapes");
    out << "psnr_all " << format("%.2f", psnr(test, ref)) << '\n';
    if (!a.mask.empty()) {
        ObservationMask mask;
        try {
            mask = read_mask_pgm(a.mask, ref.shape());
        } catch (const std::runtime_error& e) {
            throw UsageError(e.what());
        }
        out << "psnr_missing " << format("%.2f", psnr_missing(test, ref, mask)) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------- ramp

int cmd_ramp(const CompleteArgs& a, std::ostream& out, std::ostream& err) {
    require_input(a.input, "--input");
    require_input(a.mask, "--mask");
    if (!a.output.empty()) require_output(a.output, "--output");
    if (!a.history.empty()) require_output(a.history, "--history");
    if (!a.solver.alpha) throw UsageError("--alpha (the ramp start) is required");
    const LossKind kind = loss_flag(a.solver.loss);

    DenseTensor img;
    ObservationMask mask;
    load_pair(a.input, a.mask, img, mask);
    SolverConfig cfg = a.solver.config(kind, img.order());
    cfg.alpha = *a.solver.alpha;

    AlphaRampResult ramp;
    try {
        ramp = alpha_ramp(img, mask, cfg, a.solver.ramp_factor, a.solver.probe_sweeps);
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    out << "alpha " << exact(ramp.alpha) << '\n';
    out << "failing_alpha "
        << (ramp.failing_alpha ? exact(*ramp.failing_alpha) : std::string("none")) << '\n';
    out << "probes " << ramp.probes << '\n';

    if (a.output.empty() && a.history.empty()) return 0;
    cfg.alpha = ramp.alpha;
    const CompletionResult r = solve(img, mask, cfg, progress(err, a.solver.quiet));
    if (!a.output.empty()) write_ppm(r.completed, a.output);
    if (!a.history.empty()) write_history_csv(r.history, a.history);
    return report_solve(r, cfg.alpha, a.solver, out, err);
}

// --------------------------------------------------------------- bench

struct BenchArgs {
    std::string input;
    std::string mrs = "0.6,0.7,0.8";
    std::string losses = "poisson,gaussian";
    std::string seeds = "0";
    std::string report;
    SolverFlags solver;
};

std::string csv_safe(std::string s) {
    std::ranges::replace(s, ',', ';');
    std::ranges::replace(s, '\n', ' ');
    return s;
}

double median(std::vector<double> v) {
    std::ranges::sort(v);
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
    require_input(a.input, "--input");
    require_output(a.report, "--report");
    if (!a.solver.alpha && !a.solver.auto_alpha) {
        throw UsageError("--alpha is required unless --auto-alpha is given");
    }
    const std::vector<double> mrs = parse_doubles(a.mrs, "mrs");
    for (double mr : mrs) {
        if (!(mr >= 0.0 && mr < 1.0)) throw UsageError("--mrs values must lie in [0, 1)");
    }
    std::vector<LossKind> losses;
    for (const std::string& name : parse_words(a.losses)) losses.push_back(loss_flag(name));
    std::vector<std::uint64_t> seeds;
    for (const std::string& s : parse_words(a.seeds)) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw UsageError("--seeds: cannot parse '" + s + "'");
        }
    }
    if (losses.empty() || seeds.empty()) throw UsageError("--losses and --seeds need values");

    const DenseTensor img = read_ppm(a.input);
    // Validates --rho against the image order before any run starts.
    (void)a.solver.config(losses.front(), img.order());

    std::ofstream report(a.report, std::ios::trunc);
    if (!report) throw std::runtime_error("cannot open " + a.report + " for writing");
    report << kBenchHeader << '\n';

    const std::string image_name = fs::path(a.input).filename().string();
    std::map<std::pair<double, std::string>, std::vector<double>> summary;
    bool any_error = false;
    bool any_collapse = false;
    for (double mr : mrs) {
        for (LossKind kind : losses) {
            for (std::uint64_t seed : seeds) {
                SolverFlags flags = a.solver;
                flags.seed = seed;
                SolverConfig cfg = flags.config(kind, img.order());
                const auto [t, mask] = corrupt(img, CorruptionSpec{mr, seed});

                std::string status = "ok";
                std::string all = "nan";
                std::string missing = "nan";
                std::size_t sweeps = 0;
                const auto start = std::chrono::steady_clock::now();
                try {
                    cfg.alpha = flags.choose_alpha(t, mask, cfg, err);
                    const CompletionResult r = solve(t, mask, cfg);
                    const double p_all = psnr(r.completed, img);
                    all = format("%.4f", p_all);
                    missing = format("%.4f", psnr_missing(r.completed, img, mask));
                    sweeps = r.sweeps;
                    summary[{mr, std::string(to_string(kind))}].push_back(p_all);
                    if (r.reason == Termination::Collapsed) {
                        status = "collapsed";
                        any_collapse = true;
                    }
                } catch (const std::exception& e) {
                    status = "error: " + csv_safe(e.what());
                    any_error = true;
                }
                const double seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

                report << image_name << ',' << format("%g", mr) << ',' << to_string(kind) << ','
                       << seed << ',' << all << ',' << missing << ',' << sweeps << ','
                       << format("%.3f", seconds) << ',' << status << '\n';
                out << "run mr=" << format("%g", mr) << " loss=" << to_string(kind)
                    << " seed=" << seed << " psnr_all=" << all << " psnr_missing=" << missing
                    << " status=" << status << '\n';
                if (!a.solver.quiet) err << "bench: finished mr=" << mr << " loss=" << to_string(kind) << " seed=" << seed << '\n';
            }
        }
    }
    for (const auto& [key, values] : summary) {
        out << "median mr=" << format("%g", key.first) << " loss=" << key.second
            << " psnr_all=" << format("%.4f", median(values)) << " runs=" << values.size() << '\n';
    }
    if (!report) throw std::runtime_error("write failed for " + a.report);
    return any_error || (any_collapse && a.solver.strict) ? 1 : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Low-rank tensor completion with likelihood losses and smoothness priors", "gcdtc"};
    app.require_subcommand(1);

    CorruptArgs corrupt_args;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "hide a random fraction of voxels");
    corrupt_cmd->add_option("--input", corrupt_args.input, "P5/P6 image")->required();
    corrupt_cmd->add_option("--mr", corrupt_args.mr, "missing rate in [0, 1)")->required();
    corrupt_cmd->add_option("--seed", corrupt_args.seed, "mask seed")->capture_default_str();
    corrupt_cmd->add_option("--out-image", corrupt_args.out_image, "preview with missing voxels at 0")->required();
    corrupt_cmd->add_option("--out-mask", corrupt_args.out_mask, "P5 mask (255 observed, 0 missing)")->required();

    CompleteArgs complete_args;
    auto* complete_cmd = app.add_subcommand("complete", "fill missing voxels");
    complete_cmd->add_option("--input", complete_args.input, "P5/P6 image")->required();
    complete_cmd->add_option("--mask", complete_args.mask, "P5 mask")->required();
    complete_cmd->add_option("--output", complete_args.output, "completed image")->required();
    complete_cmd->add_option("--history", complete_args.history, "objective history CSV");
    complete_args.solver.add_to(*complete_cmd, true, true);

    PsnrArgs psnr_args;
    auto* psnr_cmd = app.add_subcommand("psnr", "compare two images");
    psnr_cmd->add_option("--ref", psnr_args.ref, "reference image")->required();
    psnr_cmd->add_option("--test", psnr_args.test, "image under test")->required();
    psnr_cmd->add_option("--mask", psnr_args.mask, "mask; adds the missing-only PSNR");

    CompleteArgs ramp_args;
    auto* ramp_cmd = app.add_subcommand("ramp", "increase alpha until the model collapses");
    ramp_cmd->add_option("--input", ramp_args.input, "P5/P6 image")->required();
    ramp_cmd->add_option("--mask", ramp_args.mask, "P5 mask")->required();
    ramp_cmd->add_option("--output", ramp_args.output, "optionally complete at the chosen alpha");
    ramp_cmd->add_option("--history", ramp_args.history, "objective history CSV of that run");
    ramp_args.solver.add_to(*ramp_cmd, true, true);

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "missing-rate x loss x seed grid");
    bench_cmd->add_option("--input", bench_args.input, "P5/P6 image")->required();
    bench_cmd->add_option("--mrs", bench_args.mrs, "comma-separated missing rates")->capture_default_str();
    bench_cmd->add_option("--losses", bench_args.losses, "comma-separated losses")->capture_default_str();
    bench_cmd->add_option("--seeds", bench_args.seeds, "comma-separated seeds")->capture_default_str();
    bench_cmd->add_option("--report", bench_args.report, "CSV report")->required();
    bench_args.solver.add_to(*bench_cmd, false, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*corrupt_cmd) return cmd_corrupt(corrupt_args, out);
        if (*complete_cmd) return cmd_complete(complete_args, out, err);
        if (*psnr_cmd) return cmd_psnr(psnr_args, out);
        if (*ramp_cmd) return cmd_ramp(ramp_args, out, err);
        if (*bench_cmd) return cmd_bench(bench_args, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace gcdtc::cli
