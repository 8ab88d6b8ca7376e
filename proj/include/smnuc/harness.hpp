#pragma once

// SNR sweeps, scheme comparison at the BLER waterfall, and result export.

#include <filesystem>
#include <string>
#include <vector>

#include "smnuc/baselines.hpp"
#include "smnuc/errors.hpp"
#include "smnuc/fec.hpp"
#include "smnuc/io.hpp"
#include "smnuc/link.hpp"

namespace smnuc {

inline std::vector<double> snr_grid(double lo_db, double hi_db, double step_db) {
    if (!(step_db > 0.0) || !(hi_db >= lo_db)) fail("snr_grid", "need step > 0 and hi >= lo");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::llround((hi_db - lo_db) / step_db));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo_db + static_cast<double>(i) * step_db);
    return out;
}

inline std::vector<BlerRow> sweep_bler(const LinkSetup& link, const std::vector<double>& snrs_db, const StopRule& stop,
                                       std::uint64_t seed, std::size_t workers = 0) {
    std::vector<BlerRow> rows;
    rows.reserve(snrs_db.size());
    for (double s : snrs_db) rows.push_back(simulate_bler(link, SnrPoint{s}, stop, seed, workers));
    return rows;
}

struct ComparisonRow {
    std::string scheme;
    int mcs = -1;
    std::size_t n_t = 0;
    double waterfall_snr_db = 0.0;
    double gain_db = 0.0;  // SNR(sm) - SNR(scheme)
};

struct Comparison {
    std::vector<ComparisonRow> table;
    std::vector<BlerRow> evaluations;  // every BLER point measured by the searches
};

// Waterfall SNR at bler_target for every scheme, gains relative to the
// scheme with id reference_id (which must be in the list). All schemes share
// the codec and the search seed.
inline Comparison compare_schemes(const McsEntry& mcs, const std::vector<Scheme>& schemes, const WaterfallSearch& search,
                                  const FecConfig& fec, double bler_target, FadingModel fading,
                                  const std::string& reference_id) {
    if (schemes.empty()) fail("compare_schemes", "no schemes");
    std::shared_ptr<const FecCodec> codec = make_codec(fec);
    Comparison out;
    double reference = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : schemes) {
        if (s.set.order() != mcs.order || s.set.n_t() != mcs.n_t) {
            fail("compare_schemes", "scheme '" + s.id + "' does not match the MCS order and n_t");
        }
        const LinkSetup link(s, fec, codec, mcs.id, fading);
        WaterfallResult wf = find_waterfall_snr(link, bler_target, search);
        out.table.push_back({s.id, mcs.id, mcs.n_t, wf.snr_db, 0.0});
        for (auto& r : wf.evaluations) out.evaluations.push_back(std::move(r));
        if (s.id == reference_id) reference = wf.snr_db;
    }
    if (std::isnan(reference)) fail("compare_schemes", "reference scheme '" + reference_id + "' not in the list");
    for (auto& r : out.table) r.gain_db = reference - r.waterfall_snr_db;
    return out;
}

inline Comparison compare_schemes(const McsEntry& mcs, const std::vector<Scheme>& schemes, const WaterfallSearch& search,
                                  double bler_target = 1e-2, FadingModel fading = FadingModel::fast,
                                  const std::string& reference_id = "sm",
                                  std::size_t codeword_target = kDefaultCodewordTarget) {
    return compare_schemes(mcs, schemes, search, fec_config_for(mcs, codeword_target), bler_target, fading, reference_id);
}

inline constexpr const char* kComparisonCsvHeader = "scheme,mcs,n_t,waterfall_snr_db,gain_db";

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string s = std::string(kComparisonCsvHeader) + "\n";
    for (const auto& r : rows) {
        s += r.scheme + "," + std::to_string(r.mcs) + "," + std::to_string(r.n_t) + "," + format_double(r.waterfall_snr_db) +
             "," + format_double(r.gain_db) + "\n";
    }
    return s;
}

struct ExportedFiles {
    std::filesystem::path csv;
    std::filesystem::path plot;
    std::filesystem::path manifest;
};

// Writes <dir>/<stem>.csv, <dir>/<stem>.dat and <dir>/manifest.json.
inline ExportedFiles export_results(const std::vector<BlerRow>& rows, const std::filesystem::path& dir,
                                    const RunManifest& manifest, const std::string& stem = "bler") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail("export_results", "cannot create " + dir.string() + ": " + ec.message());
    ExportedFiles f{dir / (stem + ".csv"), dir / (stem + ".dat"), dir / "manifest.json"};
    write_file(f.csv, bler_csv(rows));
    write_file(f.plot, bler_plot_data(rows));
    manifest.write(f.manifest);
    return f;
}

inline std::vector<BlerRow> read_bler_csv(const std::filesystem::path& path) { return parse_bler_csv(read_file(path)); }

}  // namespace smnuc
