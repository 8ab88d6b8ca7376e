// smnuc command line: capacity, optimize, baseline, bler, compare.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "smnuc/smnuc.hpp"

using namespace smnuc;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::size_t workers = 0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app->add_option("--workers", c.workers, "Worker threads (0: $SMNUC_WORKERS or hardware)")->capture_default_str();
}

// Scheme by name, or a constellation file for anything else.
Scheme resolve_scheme(const std::string& spec, std::size_t m, std::size_t n_t, RunManifest& manifest) {
    if (spec == "sm") return scheme_sm(m, n_t);
    if (spec == "smp-nf") return scheme_smp_no_feedback(m, n_t);
    if (spec == "smp-csi") return scheme_smp_perfect_csi(m, n_t);
    if (spec == "initial") return {"initial", initial_signal_set(m, n_t)};
    const fs::path path(spec);
    if (!fs::exists(path)) fail("scheme", "'" + spec + "' is neither sm|smp-nf|smp-csi|initial nor a constellation file");
    manifest.add_input(path);
    auto f = read_signal_set(path);
    if (f.set.order() != m || f.set.n_t() != n_t) {
        fail("scheme", spec + " has M=" + std::to_string(f.set.order()) + ", n_t=" + std::to_string(f.set.n_t()) +
                           "; expected M=" + std::to_string(m) + ", n_t=" + std::to_string(n_t));
    }
    return f.as_scheme();
}

std::vector<double> parse_snr_list(const std::vector<double>& list, const std::optional<std::vector<double>>& grid) {
    if (grid) {
        if (grid->size() != 3) fail("snr", "--snr-grid expects LO HI STEP");
        return snr_grid((*grid)[0], (*grid)[1], (*grid)[2]);
    }
    if (list.empty()) fail("snr", "give --snr or --snr-grid");
    return list;
}

struct StopOpts {
    std::size_t min_errors = 100;
    std::size_t max_blocks = 100000;
    std::size_t batch = 128;

    StopRule rule() const { return {min_errors, max_blocks, batch, std::nullopt}; }
    nlohmann::json json() const { return {{"min_errors", min_errors}, {"max_blocks", max_blocks}, {"batch", batch}}; }
};

void add_stop(CLI::App* app, StopOpts& s) {
    app->add_option("--min-errors", s.min_errors, "Stop after this many block errors")->capture_default_str();
    app->add_option("--max-blocks", s.max_blocks, "Block cap per SNR point")->capture_default_str();
    app->add_option("--batch", s.batch, "Blocks between stop-rule checks")->capture_default_str();
}

struct LinkOpts {
    int mcs = 10;
    std::size_t n_t = 2;
    std::string fading = "fast";
    std::size_t codeword = kDefaultCodewordTarget;
    std::string codec = "ldpc";
    int max_iters = 50;
};

void add_link(CLI::App* app, LinkOpts& l) {
    app->add_option("--mcs", l.mcs, "MCS id (0,4,9,10,13,16,17,22,28)")->capture_default_str();
    app->add_option("--n-t", l.n_t, "Transmit antennas")->capture_default_str();
    app->add_option("--fading", l.fading, "fast | block | awgn")->capture_default_str();
    app->add_option("--codeword-bits", l.codeword, "Target codeword length")->capture_default_str();
    app->add_option("--codec", l.codec, "ldpc | uncoded")->capture_default_str();
    app->add_option("--max-iters", l.max_iters, "Decoder iterations")->capture_default_str();
}

FecConfig make_fec(const LinkOpts& l, const McsEntry& mcs) {
    FecConfig fec = fec_config_for(mcs, l.codeword);
    fec.codec = parse_codec_kind(l.codec);
    if (fec.codec == CodecKind::uncoded) fec.info_bits = fec.codeword_bits;
    fec.max_iters = l.max_iters;
    return fec;
}

nlohmann::json link_json(const LinkOpts& l, const FecConfig& fec) {
    return {{"mcs", l.mcs},           {"n_t", l.n_t},           {"fading", l.fading},
            {"codec", l.codec},       {"info_bits", fec.info_bits}, {"codeword_bits", fec.codeword_bits},
            {"max_iters", l.max_iters}, {"min_sum_scale", fec.min_sum_scale}, {"interleaver_seed", fec.interleaver_seed},
            {"code_seed", fec.code_seed}};
}

void print_rows(const std::vector<BlerRow>& rows) { std::cout << bler_csv(rows); }

// ---------------------------------------------------------------------------

int run_capacity(const std::string& constellation, std::size_t m, std::size_t n_t, const std::string& scheme,
                 const std::vector<double>& snrs, std::size_t samples, bool fixed, const Common& c,
                 const std::string& out) {
    RunManifest unused;
    const SmSignalSet set =
        constellation.empty() ? resolve_scheme(scheme, m, n_t, unused).set : read_signal_set(constellation).set;
    std::string csv = "snr_db,ami,std_error,n_samples\n";
    for (double s : snrs) {
        const McOptions mc{samples, c.seed, c.workers};
        const AmiEstimate e = fixed ? estimate_bicm_ami_fixed_channel(set, unit_channel(set.n_t(), 1.0), SnrPoint{s}, mc)
                                    : estimate_bicm_ami(set, SnrPoint{s}, mc);
        csv += format_double(s) + "," + format_double(e.value) + "," + format_double(e.std_error) + "," +
               std::to_string(e.n_samples) + "\n";
    }
    if (out.empty()) std::cout << csv;
    else write_file(out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial-modulation constellation and pre-scaling design"};
    app.require_subcommand(1);

    // capacity
    auto* cap = app.add_subcommand("capacity", "BICM-AMI of a signal set over Rayleigh fading");
    Common cap_c;
    std::string cap_file, cap_scheme = "initial", cap_out;
    std::size_t cap_m = 0, cap_nt = 0, cap_samples = kOptimizationSamples;
    std::vector<double> cap_snr;
    std::optional<std::vector<double>> cap_grid;
    bool cap_fixed = false;
    cap->add_option("--constellation", cap_file, "Constellation file");
    cap->add_option("--scheme", cap_scheme, "sm | smp-nf | initial (when no file)")->capture_default_str();
    cap->add_option("-M,--order", cap_m, "Modulation order");
    cap->add_option("--n-t", cap_nt, "Transmit antennas");
    cap->add_option("--snr", cap_snr, "SNR list in dB");
    cap->add_option("--snr-grid", cap_grid, "LO HI STEP in dB")->expected(3);
    cap->add_option("--samples", cap_samples, "Monte-Carlo samples")->capture_default_str();
    cap->add_flag("--fixed-channel", cap_fixed, "h_k = 1 instead of Rayleigh");
    cap->add_option("-o,--out", cap_out, "CSV output file (default stdout)");
    add_common(cap, cap_c);

    // optimize
    auto* opt = app.add_subcommand("optimize", "PSO design of NUC and pre-scaling");
    Common opt_c;
    OptimizeConfig ocfg;
    std::size_t opt_m = 16, opt_nt = 2;
    std::optional<int> opt_mcs;
    std::optional<double> opt_rate;
    std::string opt_mode = "capacity-anchor", opt_out = "optimize_out";
    LinkOpts opt_link;
    StopOpts opt_stop;
    opt->add_option("-M,--order", opt_m, "Modulation order")->capture_default_str();
    opt->add_option("--n-t", opt_nt, "Transmit antennas")->capture_default_str();
    opt->add_option("--mcs", opt_mcs, "MCS id (sets the code rate)");
    opt->add_option("--rate", opt_rate, "Explicit code rate R' relative to log2(M N_t)");
    opt->add_option("--mode", opt_mode, "coded | capacity-anchor")->capture_default_str();
    opt->add_option("--particles", ocfg.pso.particles)->capture_default_str();
    opt->add_option("--iterations", ocfg.pso.iterations)->capture_default_str();
    opt->add_option("--inertia", ocfg.pso.inertia)->capture_default_str();
    opt->add_option("--cognitive", ocfg.pso.cognitive)->capture_default_str();
    opt->add_option("--social", ocfg.pso.social)->capture_default_str();
    opt->add_option("--velocity-clamp", ocfg.pso.velocity_clamp)->capture_default_str();
    opt->add_option("--init-sigma", ocfg.pso.init_sigma)->capture_default_str();
    opt->add_option("--pso-samples", ocfg.pso_samples, "AMI samples per objective evaluation")->capture_default_str();
    opt->add_option("--anchor-samples", ocfg.anchor_samples, "AMI samples for the capacity anchor")->capture_default_str();
    opt->add_option("--xi", ocfg.xi_db, "Outer stop threshold in dB")->capture_default_str();
    opt->add_option("--max-outer", ocfg.max_outer, "Outer iteration cap")->capture_default_str();
    opt->add_option("--bler-target", ocfg.bler_target)->capture_default_str();
    opt->add_flag("--reseed-each-iteration", ocfg.reseed_each_iteration, "Fresh objective seed every PSO iteration");
    opt->add_option("-o,--out", opt_out, "Output directory")->capture_default_str();
    opt->add_option("--codeword-bits", opt_link.codeword, "Target codeword length (coded mode)")->capture_default_str();
    opt->add_option("--fading", opt_link.fading, "fast | block | awgn (coded mode)")->capture_default_str();
    add_stop(opt, opt_stop);
    add_common(opt, opt_c);

    // baseline
    auto* base = app.add_subcommand("baseline", "Write a baseline signal set file");
    std::string base_scheme = "sm", base_out;
    std::size_t base_m = 16, base_nt = 2;
    base->add_option("--scheme", base_scheme, "sm | smp-nf | smp-csi | initial")->capture_default_str();
    base->add_option("-M,--order", base_m)->capture_default_str();
    base->add_option("--n-t", base_nt)->capture_default_str();
    base->add_option("-o,--out", base_out, "Output file (default stdout)");

    // bler
    auto* bl = app.add_subcommand("bler", "BLER versus SNR for one scheme");
    Common bl_c;
    LinkOpts bl_link;
    StopOpts bl_stop;
    std::string bl_scheme = "sm", bl_out = "bler_out";
    std::vector<double> bl_snr;
    std::optional<std::vector<double>> bl_grid;
    add_link(bl, bl_link);
    add_stop(bl, bl_stop);
    add_common(bl, bl_c);
    bl->add_option("--scheme", bl_scheme, "sm | smp-nf | smp-csi | initial | constellation file")->capture_default_str();
    bl->add_option("--snr", bl_snr, "SNR list in dB");
    bl->add_option("--snr-grid", bl_grid, "LO HI STEP in dB")->expected(3);
    bl->add_option("-o,--out", bl_out, "Output directory")->capture_default_str();

    // compare
    auto* cmp = app.add_subcommand("compare", "Waterfall SNRs and gains over SM");
    Common cmp_c;
    LinkOpts cmp_link;
    StopOpts cmp_stop;
    std::vector<std::string> cmp_schemes{"sm", "smp-nf", "smp-csi"};
    std::string cmp_out = "compare_out";
    double cmp_target = 1e-2, cmp_lo = -10.0, cmp_hi = 40.0, cmp_step = 0.1, cmp_coarse = 1.0;
    bool cmp_no_decisive = false;
    add_link(cmp, cmp_link);
    add_stop(cmp, cmp_stop);
    add_common(cmp, cmp_c);
    cmp->add_option("--scheme", cmp_schemes, "Schemes or constellation files (sm is always included)")->capture_default_str();
    cmp->add_option("--bler-target", cmp_target)->capture_default_str();
    cmp->add_option("--snr-lo", cmp_lo)->capture_default_str();
    cmp->add_option("--snr-hi", cmp_hi)->capture_default_str();
    cmp->add_option("--snr-step", cmp_step)->capture_default_str();
    cmp->add_option("--coarse-step", cmp_coarse)->capture_default_str();
    cmp->add_flag("--no-decisive", cmp_no_decisive, "Measure every point to the full stop rule");
    cmp->add_option("-o,--out", cmp_out, "Output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cap) {
            return run_capacity(cap_file, cap_m, cap_nt, cap_scheme, parse_snr_list(cap_snr, cap_grid), cap_samples, cap_fixed,
                                cap_c, cap_out);
        }

        if (*base) {
            RunManifest unused;
            const Scheme s = resolve_scheme(base_scheme, base_m, base_nt, unused);
            const std::string text = serialize_signal_set(s.set, s.id, s.mode);
            if (base_out.empty()) std::cout << text;
            else write_file(base_out, text);
            return 0;
        }

        if (*opt) {
            RunManifest manifest;
            manifest.command = "optimize";
            manifest.started_at = utc_timestamp();
            ocfg.mode = parse_anchor_mode(opt_mode);
            ocfg.seed = opt_c.seed;
            ocfg.workers = opt_c.workers;
            double rate = 0.0;
            if (opt_mcs) {
                const McsEntry mcs = mcs_entry(*opt_mcs, opt_nt);
                if (mcs.order != opt_m) fail("optimize", "MCS " + std::to_string(*opt_mcs) + " uses M=" + std::to_string(mcs.order));
                rate = mcs.code_rate_sm;
                ocfg.mcs_id = mcs.id;
                if (ocfg.mode == AnchorMode::coded) {
                    opt_link.mcs = mcs.id;
                    opt_link.n_t = opt_nt;
                    ocfg.fec = make_fec(opt_link, mcs);
                }
            } else if (opt_rate) {
                rate = *opt_rate;
                if (ocfg.mode == AnchorMode::coded) {
                    McsEntry custom{-1, opt_m, rate * ilog2(opt_m * opt_nt) / ilog2(opt_m), opt_nt, rate};
                    ocfg.fec = make_fec(opt_link, custom);
                }
            } else {
                fail("optimize", "give --mcs or --rate");
            }
            if (!(rate > 0.0 && rate < 1.0)) fail("optimize", "code rate must lie in (0, 1)");
            ocfg.target_bits = rate * ilog2(opt_m * opt_nt);
            ocfg.fading = parse_fading_model(opt_link.fading);
            ocfg.search.stop = opt_stop.rule();
            ocfg.search.seed = opt_c.seed;
            ocfg.search.workers = opt_c.workers;

            const OptimizeResult res = optimize(initial_signal_set(opt_m, opt_nt), ocfg);

            const fs::path dir(opt_out);
            write_signal_set(dir / "constellation.json", res.best, "proposed");
            std::string trace = "iteration,anchor_snr_db,global_best_ami,snr_db,accepted\n";
            trace += "0,,," + format_double(res.state.snr_trace.front()) + ",1\n";
            for (const auto& r : res.state.outer) {
                trace += std::to_string(r.iteration) + "," + format_double(r.anchor_snr_db) + "," + format_double(r.global_best_ami) +
                         "," + format_double(r.snr_db) + "," + (r.accepted ? "1" : "0") + "\n";
            }
            write_file(dir / "trace.csv", trace);
            std::string pso = "outer,iteration,global_best_ami\n";
            for (std::size_t i = 0; i < res.state.pso_traces.size(); ++i) {
                for (std::size_t t = 0; t < res.state.pso_traces[i].size(); ++t) {
                    pso += std::to_string(i + 1) + "," + std::to_string(t) + "," + format_double(res.state.pso_traces[i][t]) + "\n";
                }
            }
            write_file(dir / "pso_trace.csv", pso);
            manifest.seed = opt_c.seed;
            manifest.workers = resolve_workers(opt_c.workers);
            manifest.config = {{"M", opt_m},
                               {"n_t", opt_nt},
                               {"mcs", opt_mcs ? *opt_mcs : -1},
                               {"rate", rate},
                               {"mode", to_string(ocfg.mode)},
                               {"target_bits", ocfg.target_bits},
                               {"particles", ocfg.pso.particles},
                               {"iterations", ocfg.pso.iterations},
                               {"inertia", ocfg.pso.inertia},
                               {"cognitive", ocfg.pso.cognitive},
                               {"social", ocfg.pso.social},
                               {"velocity_clamp", ocfg.pso.velocity_clamp},
                               {"init_sigma", ocfg.pso.init_sigma},
                               {"pso_samples", ocfg.pso_samples},
                               {"anchor_samples", ocfg.anchor_samples},
                               {"anchor_lo_db", ocfg.anchor_lo_db},
                               {"anchor_hi_db", ocfg.anchor_hi_db},
                               {"anchor_tol_db", ocfg.anchor_tol_db},
                               {"xi_db", ocfg.xi_db},
                               {"max_outer", ocfg.max_outer},
                               {"reseed_each_iteration", ocfg.reseed_each_iteration},
                               {"bler_target", ocfg.bler_target},
                               {"stop", opt_stop.json()},
                               {"fading", opt_link.fading},
                               {"codeword_bits", ocfg.fec ? ocfg.fec->codeword_bits : 0},
                               {"info_bits", ocfg.fec ? ocfg.fec->info_bits : 0}};
            manifest.finished_at = utc_timestamp();
            manifest.write(dir / "manifest.json");
            std::cout << "SNR_0 " << format_double(res.state.snr_trace.front()) << " dB, final "
                      << format_double(res.best_snr_db) << " dB (" << res.state.stop_reason << ")\n";
            return 0;
        }

        if (*bl) {
            RunManifest manifest;
            manifest.command = "bler";
            manifest.started_at = utc_timestamp();
            const McsEntry mcs = mcs_entry(bl_link.mcs, bl_link.n_t);
            const Scheme scheme = resolve_scheme(bl_scheme, mcs.order, bl_link.n_t, manifest);
            const FecConfig fec = make_fec(bl_link, mcs);
            const LinkSetup link(scheme, fec, mcs.id, parse_fading_model(bl_link.fading));
            const auto snrs = parse_snr_list(bl_snr, bl_grid);
            const auto rows = sweep_bler(link, snrs, bl_stop.rule(), bl_c.seed, bl_c.workers);
            manifest.seed = bl_c.seed;
            manifest.workers = resolve_workers(bl_c.workers);
            manifest.config = link_json(bl_link, fec);
            manifest.config["scheme"] = bl_scheme;
            manifest.config["snr_db"] = snrs;
            manifest.config["stop"] = bl_stop.json();
            manifest.finished_at = utc_timestamp();
            export_results(rows, bl_out, manifest);
            print_rows(rows);
            return 0;
        }

        if (*cmp) {
            RunManifest manifest;
            manifest.command = "compare";
            manifest.started_at = utc_timestamp();
            const McsEntry mcs = mcs_entry(cmp_link.mcs, cmp_link.n_t);
            std::vector<Scheme> schemes{scheme_sm(mcs.order, mcs.n_t)};
            for (const auto& s : cmp_schemes) {
                if (s != "sm") schemes.push_back(resolve_scheme(s, mcs.order, mcs.n_t, manifest));
            }
            WaterfallSearch search;
            search.lo_db = cmp_lo;
            search.hi_db = cmp_hi;
            search.step_db = cmp_step;
            search.coarse_step_db = cmp_coarse;
            search.stop = cmp_stop.rule();
            search.decisive = !cmp_no_decisive;
            search.seed = cmp_c.seed;
            search.workers = cmp_c.workers;
            const FecConfig fec = make_fec(cmp_link, mcs);
            const Comparison result =
                compare_schemes(mcs, schemes, search, fec, cmp_target, parse_fading_model(cmp_link.fading), "sm");
            manifest.seed = cmp_c.seed;
            manifest.workers = resolve_workers(cmp_c.workers);
            manifest.config = link_json(cmp_link, fec);
            manifest.config["schemes"] = cmp_schemes;
            manifest.config["bler_target"] = cmp_target;
            manifest.config["search"] = {{"lo_db", cmp_lo}, {"hi_db", cmp_hi}, {"step_db", cmp_step}, {"coarse_step_db", cmp_coarse},
                                         {"decisive", !cmp_no_decisive}};
            manifest.config["stop"] = cmp_stop.json();
            manifest.finished_at = utc_timestamp();
            export_results(result.evaluations, cmp_out, manifest);
            write_file(fs::path(cmp_out) / "comparison.csv", comparison_csv(result.table));
            std::cout << comparison_csv(result.table);
            return 0;
        }
    } catch (const RangeExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
