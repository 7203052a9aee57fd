// bpopt: design and measure binary linear block codes under belief
// propagation decoding.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bpc/channel.hpp"
#include "bpc/decoder.hpp"
#include "bpc/errors.hpp"
#include "bpc/eval.hpp"
#include "bpc/grad.hpp"
#include "bpc/optimizer.hpp"
#include "bpc/parity_check.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kDefaultSeed = 1;

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bpc::ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw bpc::ParseError("cannot write file: " + path);
    out << content;
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Every run drops exactly one manifest next to its primary output.
void write_manifest(const std::string& out_path, const std::string& command,
                    const json& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs,
                    std::optional<std::uint64_t> code_before,
                    std::optional<std::uint64_t> code_after) {
    json m{{"command", command},
           {"config", config},
           {"seed", seed},
           {"outputs", outputs},
           {"versions", {{"bpopt", kVersion}, {"manifest", 1}}}};
    if (code_before) m["code_fingerprint_before"] = hex64(*code_before);
    if (code_after) m["code_fingerprint_after"] = hex64(*code_after);
    write_file(out_path + ".manifest.json", m.dump(2) + "\n");
}

bpc::ParityCheck load_code_checked(const std::string& path) {
    bpc::ParityCheck code = bpc::load_code_file(path);
    bpc::make_parity_check(code.h); // validate shape
    const auto zeros = bpc::zero_columns(code);
    if (!zeros.empty())
        std::cerr << "warning: " << path << " has " << zeros.size()
                  << " all-zero column(s); those variables are channel-only\n";
    return code;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw bpc::ParseError("bad numeric list entry: " + item);
        }
    }
    if (out.empty()) throw bpc::ParseError("empty numeric list");
    return out;
}

// LLR file: "B n" header then B rows of n reals.
bpc::RealMatrix load_llr_file(const std::string& path) {
    std::istringstream in(read_file(path));
    int frames = 0, n = 0;
    if (!(in >> frames >> n) || frames < 1 || n < 1)
        throw bpc::ParseError("bad LLR header in " + path);
    bpc::RealMatrix l(frames, n);
    for (auto& v : l.v)
        if (!(in >> v)) throw bpc::ParseError("truncated LLR matrix in " + path);
    return l;
}

struct ChannelArgs {
    std::string family = "awgn";
    double rho = 0.1;
    double burst_scale = std::numbers::sqrt2;
    bool exact_llr = false;

    bpc::ChannelSpec spec(double snr_db, double rate) const {
        bpc::ChannelSpec s;
        s.family = bpc::channel_family_from_string(family);
        s.ebn0_db = snr_db;
        s.rate = rate;
        s.rho = rho;
        s.burst_scale = burst_scale;
        s.bursty_exact_llr = exact_llr;
        return s;
    }
};

void add_channel_flags(CLI::App* cmd, ChannelArgs& args) {
    cmd->add_option("--channel", args.family, "awgn|fading|bursty")
        ->check(CLI::IsMember({"awgn", "fading", "bursty"}));
    cmd->add_option("--rho", args.rho, "burst probability (bursty)");
    cmd->add_option("--burst-scale", args.burst_scale, "burst sigma multiplier (bursty)");
    cmd->add_flag("--exact-mixture-llr", args.exact_llr,
                  "use the exact two-component LLR on the bursty channel");
}

int run_decode(const std::string& code_path, const std::string& llr_path, bool simulate,
               const ChannelArgs& chan, double snr, int frames, int iters,
               const std::string& variant, std::uint64_t seed, const std::string& out) {
    const bpc::ParityCheck code = load_code_checked(code_path);
    bpc::RealMatrix llr_batch;
    if (simulate) {
        const auto spec = chan.spec(snr, code.rate());
        const std::vector<double> symbols(code.n(), 1.0);
        llr_batch = bpc::llr(bpc::transmit(symbols, spec, seed, frames));
    } else {
        llr_batch = load_llr_file(llr_path);
        if (llr_batch.cols != code.n())
            throw bpc::DimensionMismatch("LLR width does not match code length");
    }

    bpc::BpConfig cfg;
    cfg.iterations = iters;
    cfg.variant = bpc::bp_variant_from_string(variant);
    const bpc::DecodeResult res =
        cfg.variant == bpc::BpVariant::SumProduct
            ? bpc::edge_bp_decode(llr_batch, code, cfg)
            : bpc::min_sum_decode(llr_batch, code, cfg);

    std::ostringstream body;
    body << "frame,bit,soft,hard\n";
    body << std::setprecision(17);
    for (int f = 0; f < res.frames; ++f)
        for (int i = 0; i < res.n; ++i)
            body << f << ',' << i << ',' << res.soft.at(f, i) << ','
                 << int(res.hard[static_cast<std::size_t>(f) * res.n + i]) << '\n';
    write_file(out, body.str());

    json config{{"code", code_path}, {"iters", iters}, {"variant", variant}};
    if (simulate) {
        config["simulate"] = {{"channel", chan.family}, {"snr_db", snr}, {"frames", frames}};
    } else {
        config["llr"] = llr_path;
    }
    write_manifest(out, "decode", config, seed, {out}, bpc::code_fingerprint(code),
                   std::nullopt);
    return bpc::kExitOk;
}

int run_eval(const std::string& code_path, const ChannelArgs& chan, const std::string& snrs,
             const std::string& iters_list, const std::string& variant, std::uint64_t min_frames,
             std::uint64_t min_errors, std::uint64_t max_frames, const std::string& mode_str,
             std::uint64_t seed, const std::string& out) {
    const bpc::ParityCheck code = load_code_checked(code_path);
    const auto snr_values = parse_list(snrs);
    const auto iter_values = parse_list(iters_list);
    const bpc::EvalMode mode = mode_str == "random" ? bpc::EvalMode::RandomCodewords
                                                    : bpc::EvalMode::ZeroCodeword;

    std::vector<bpc::ChannelSpec> specs;
    for (double s : snr_values) specs.push_back(chan.spec(s, code.rate()));

    bpc::StopRule stop;
    stop.min_frames = min_frames;
    stop.min_frame_errors = min_errors;
    stop.max_frames = max_frames;

    bpc::EvalReport all;
    for (double t : iter_values) {
        bpc::BpConfig cfg;
        cfg.iterations = static_cast<int>(t);
        cfg.variant = bpc::bp_variant_from_string(variant);
        const bpc::EvalReport rep = bpc::monte_carlo(code, specs, cfg, stop, mode, seed);
        all.rows.insert(all.rows.end(), rep.rows.begin(), rep.rows.end());
    }
    write_file(out, bpc::report_to_csv(all));

    json config{{"code", code_path},      {"channel", chan.family},
                {"snrs", snr_values},     {"iters", iter_values},
                {"variant", variant},     {"min_frames", min_frames},
                {"min_errors", min_errors}, {"max_frames", max_frames},
                {"mode", mode_str}};
    write_manifest(out, "eval", config, seed, {out}, bpc::code_fingerprint(code),
                   std::nullopt);
    return bpc::kExitOk;
}

int run_optimize(const std::string& init_path, const std::string& random_spec,
                 const std::string& config_path, std::optional<std::uint64_t> seed_override,
                 const std::string& out, const std::string& trace_path) {
    bpc::TrainConfig cfg;
    if (!config_path.empty()) cfg = bpc::train_config_from_json(read_file(config_path));
    if (seed_override) cfg.seed = *seed_override;

    bpc::ParityCheck h0{bpc::BitMatrix(1, 2)};
    if (!random_spec.empty()) {
        const auto parts = parse_list(random_spec);
        if (parts.size() != 3) throw bpc::ParseError("--random needs n,k,p");
        h0 = bpc::random_systematic(static_cast<int>(parts[0]), static_cast<int>(parts[1]),
                                    parts[2], cfg.seed);
    } else {
        h0 = load_code_checked(init_path);
    }

    const bpc::OptimizeResult res = bpc::optimize(h0, cfg);
    bpc::save_code_file(res.code, out);
    if (!trace_path.empty()) write_file(trace_path, res.trace.to_csv());

    json config = json::parse(bpc::to_json(cfg));
    config["init"] = random_spec.empty() ? init_path : ("random:" + random_spec);
    std::vector<std::string> outputs{out};
    if (!trace_path.empty()) outputs.push_back(trace_path);
    write_manifest(out, "optimize", config, cfg.seed, outputs, bpc::code_fingerprint(h0),
                   bpc::code_fingerprint(res.code));
    return bpc::kExitOk;
}

int run_stats(const std::string& code_path, const std::string& compare_path) {
    const bpc::ParityCheck code = load_code_checked(code_path);
    const bpc::CodeStats s = bpc::stats(code);
    std::cout << "n " << code.n() << " k " << code.k() << "\n";
    std::cout << "density " << s.density << "\n";
    switch (s.girth_kind) {
    case bpc::GirthKind::Finite: std::cout << "girth " << s.girth << "\n"; break;
    case bpc::GirthKind::Acyclic: std::cout << "girth acyclic\n"; break;
    case bpc::GirthKind::AtLeastCap: std::cout << "girth >= " << s.girth_cap << "\n"; break;
    }
    auto degrees = [](const std::vector<int>& d) {
        int lo = d[0], hi = d[0];
        for (int v : d) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return std::pair<int, int>(lo, hi);
    };
    const auto [rlo, rhi] = degrees(s.row_degrees);
    const auto [clo, chi] = degrees(s.col_degrees);
    std::cout << "row_degree " << rlo << ".." << rhi << "\n";
    std::cout << "col_degree " << clo << ".." << chi << "\n";
    if (!compare_path.empty()) {
        const bpc::ParityCheck other = load_code_checked(compare_path);
        std::cout << "sparsity_delta " << bpc::sparsity_delta(code, other) << "\n";
    }
    return bpc::kExitOk;
}

int run_gain(const std::string& base_path, const std::string& ours_path) {
    const bpc::EvalReport base = bpc::report_from_csv(read_file(base_path));
    const bpc::EvalReport ours = bpc::report_from_csv(read_file(ours_path));
    const bpc::GainStats g = bpc::db_gain(base, ours);
    std::cout << "mean_db " << g.mean_db << "\n"
              << "std_db " << g.std_db << "\n"
              << "min_db " << g.min_db << "\n"
              << "max_db " << g.max_db << "\n";
    return bpc::kExitOk;
}

int run_sweep(const std::string& init_path, const std::string& grid_path,
              const std::string& config_path, std::optional<std::uint64_t> seed_override,
              const std::string& out) {
    const bpc::ParityCheck h0 = load_code_checked(init_path);
    bpc::TrainConfig base;
    if (!config_path.empty()) base = bpc::train_config_from_json(read_file(config_path));
    if (seed_override) base.seed = *seed_override;
    const bpc::SweepGrid grid = bpc::sweep_grid_from_json(read_file(grid_path));

    const auto entries = bpc::sweep(h0, base, grid);
    const std::string stem = std::filesystem::path(out).stem().string();
    const std::string dir = std::filesystem::path(out).parent_path().string();

    std::ostringstream csv;
    csv << "rank,mean_ber,snr_lower,syndrome_filter,soft_h_eps,code_file\n";
    std::vector<std::string> outputs{out};
    csv << std::setprecision(17);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const double lower =
            *std::min_element(e.cfg.snr_set.begin(), e.cfg.snr_set.end());
        std::string code_file =
            (dir.empty() ? stem : dir + "/" + stem) + "_rank" + std::to_string(i) + ".alist";
        bpc::save_code_file(e.code, code_file);
        outputs.push_back(code_file);
        csv << i << ',' << e.mean_ber << ',' << lower << ',' << (e.cfg.syndrome_filter ? 1 : 0)
            << ',' << (e.cfg.soft_h_eps ? *e.cfg.soft_h_eps : 0.0) << ',' << code_file << '\n';
    }
    write_file(out, csv.str());

    json config{{"init", init_path}, {"grid", json::parse(read_file(grid_path))}};
    write_manifest(out, "sweep", config, base.seed, outputs, bpc::code_fingerprint(h0),
                   std::nullopt);
    return bpc::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary code design and evaluation under belief propagation"};
    app.require_subcommand(1);

    int workers = 0;
    app.add_option("--workers", workers, "worker thread count (0 = library default)");

    // decode
    auto* decode = app.add_subcommand("decode", "decode LLR frames with a given code");
    std::string d_code, d_llr, d_out = "decoded.csv", d_variant = "sumproduct";
    ChannelArgs d_chan;
    double d_snr = 4.0;
    int d_frames = 16, d_iters = 5;
    bool d_simulate = false;
    std::uint64_t d_seed = kDefaultSeed;
    decode->add_option("--code", d_code, "parity check file (alist or dense)")->required();
    decode->add_option("--llr", d_llr, "LLR input file (header 'B n')");
    decode->add_flag("--simulate", d_simulate, "simulate channel LLRs instead of --llr");
    add_channel_flags(decode, d_chan);
    decode->add_option("--snr", d_snr, "Eb/N0 in dB for --simulate");
    decode->add_option("--frames", d_frames, "frame count for --simulate");
    decode->add_option("--iters", d_iters, "decoder iterations");
    decode->add_option("--variant", d_variant, "sumproduct|minsum")
        ->check(CLI::IsMember({"sumproduct", "minsum"}));
    decode->add_option("--seed", d_seed, "rng seed");
    decode->add_option("--out", d_out, "output CSV (frame,bit,soft,hard)");

    // eval
    auto* eval = app.add_subcommand("eval", "Monte Carlo BER/FER measurement");
    std::string e_code, e_snrs = "3,4,5,6,7", e_iters = "5", e_variant = "sumproduct";
    std::string e_mode = "zero", e_out = "report.csv";
    ChannelArgs e_chan;
    std::uint64_t e_min_frames = 100000, e_min_errors = 50, e_max_frames = 10000000;
    std::uint64_t e_seed = kDefaultSeed;
    eval->add_option("--code", e_code)->required();
    add_channel_flags(eval, e_chan);
    eval->add_option("--snrs", e_snrs, "comma-separated Eb/N0 list");
    eval->add_option("--iters", e_iters, "comma-separated iteration counts");
    eval->add_option("--variant", e_variant)->check(CLI::IsMember({"sumproduct", "minsum"}));
    eval->add_option("--min-frames", e_min_frames);
    eval->add_option("--min-errors", e_min_errors);
    eval->add_option("--max-frames", e_max_frames);
    eval->add_option("--mode", e_mode, "zero|random")
        ->check(CLI::IsMember({"zero", "random"}));
    eval->add_option("--seed", e_seed);
    eval->add_option("--out", e_out, "report CSV path");

    // optimize
    auto* opt = app.add_subcommand("optimize", "learn a code by gradient line search");
    std::string o_init, o_random, o_config, o_out = "learned.alist", o_trace;
    std::uint64_t o_seed = 0;
    bool o_seed_set = false;
    opt->add_option("--init", o_init, "initial parity check file");
    opt->add_option("--random", o_random, "random systematic init: n,k,p");
    opt->add_option("--config", o_config, "TrainConfig JSON file");
    opt->add_option("--seed", o_seed, "seed override")->each([&](const std::string&) {
        o_seed_set = true;
    });
    opt->add_option("--out", o_out, "learned code output (alist)");
    opt->add_option("--trace", o_trace, "per-iteration trace CSV");

    // stats
    auto* st = app.add_subcommand("stats", "density, girth and degree profile");
    std::string s_code, s_compare;
    st->add_option("--code", s_code)->required();
    st->add_option("--compare", s_compare, "second code for sparsity delta");

    // gain
    auto* gn = app.add_subcommand("gain", "dB improvement statistics between reports");
    std::string g_base, g_ours;
    gn->add_option("--base", g_base)->required();
    gn->add_option("--ours", g_ours)->required();

    // sweep
    auto* sw = app.add_subcommand("sweep", "hyperparameter sweep and ranking");
    std::string w_init, w_grid, w_config, w_out = "ranking.csv";
    std::uint64_t w_seed = 0;
    bool w_seed_set = false;
    sw->add_option("--init", w_init)->required();
    sw->add_option("--grid", w_grid, "sweep grid JSON")->required();
    sw->add_option("--config", w_config, "base TrainConfig JSON");
    sw->add_option("--seed", w_seed)->each([&](const std::string&) { w_seed_set = true; });
    sw->add_option("--out", w_out, "ranking CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? bpc::kExitOk : bpc::kExitParse;
    }

#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#endif

    try {
        if (decode->parsed()) {
            if (!d_simulate && d_llr.empty())
                throw bpc::ParseError("decode needs --llr or --simulate");
            return run_decode(d_code, d_llr, d_simulate, d_chan, d_snr, d_frames, d_iters,
                              d_variant, d_seed, d_out);
        }
        if (eval->parsed())
            return run_eval(e_code, e_chan, e_snrs, e_iters, e_variant, e_min_frames,
                            e_min_errors, e_max_frames, e_mode, e_seed, e_out);
        if (opt->parsed()) {
            if (o_init.empty() == o_random.empty())
                throw bpc::ParseError("optimize needs exactly one of --init or --random");
            return run_optimize(o_init, o_random, o_config,
                                o_seed_set ? std::optional<std::uint64_t>(o_seed)
                                           : std::nullopt,
                                o_out, o_trace);
        }
        if (st->parsed()) return run_stats(s_code, s_compare);
        if (gn->parsed()) return run_gain(g_base, g_ours);
        if (sw->parsed())
            return run_sweep(w_init, w_grid, w_config,
                             w_seed_set ? std::optional<std::uint64_t>(w_seed) : std::nullopt,
                             w_out);
    } catch (const bpc::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bpc::kExitParse;
    } catch (const bpc::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bpc::kExitDimension;
    } catch (const bpc::RankDeficient& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bpc::kExitDimension;
    } catch (const bpc::InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bpc::kExitParse;
    } catch (const bpc::NumericalFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bpc::kExitNumerical;
    } catch (const bpc::FilterStarvation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bpc::kExitStarvation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bpc::kExitParse;
    }
    return bpc::kExitOk;
}
