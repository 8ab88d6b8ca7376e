#pragma once

// File formats: constellation/pre-scaling JSON, BLER CSV, plot data, run
// manifests and git-style content hashes.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smnuc/baselines.hpp"
#include "smnuc/constellation.hpp"
#include "smnuc/errors.hpp"
#include "smnuc/link.hpp"

namespace smnuc {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// Hashing

inline std::string sha1_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) {
        throw std::runtime_error("sha1_hex: digest failed");
    }
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

/// Same id `git hash-object` assigns to a blob with this content.
inline std::string git_blob_hash(std::string_view content) {
    std::string data = "blob " + std::to_string(content.size());
    data.push_back('\0');
    data.append(content);
    return sha1_hex(data);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("read_file", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("write_file", "cannot write " + path.string());
    out << content;
    if (!out) fail("write_file", "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Constellation file
//
// {
//   "format": "smnuc-constellation", "version": 1,
//   "scheme": "...", "M": 16, "n_t": 2, "prescaling_mode": "fixed",
//   "symbols": [[I, Q], ...],          17 significant digits
//   "pre_scaling": [[I, Q], ...],
//   "labeling": [symbol index of label 0, of label 1, ...]
// }

struct SignalSetFile {
    std::string scheme = "custom";
    PrescalingMode mode = PrescalingMode::fixed;
    SmSignalSet set;

    Scheme as_scheme() const { return {scheme, set, mode}; }
};

inline std::string to_string(PrescalingMode m) {
    return m == PrescalingMode::fixed ? "fixed" : "csi-phase-compensated";
}

inline PrescalingMode parse_prescaling_mode(const std::string& s) {
    if (s == "fixed") return PrescalingMode::fixed;
    if (s == "csi-phase-compensated") return PrescalingMode::csi_phase_compensated;
    fail("parse_prescaling_mode", "unknown mode '" + s + "'");
}

inline std::string serialize_signal_set(const SmSignalSet& set, const std::string& scheme = "custom",
                                        PrescalingMode mode = PrescalingMode::fixed) {
    auto pairs = [](std::span<const cplx> xs) {
        std::string s = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            s += (i ? ",\n    [" : "\n    [") + format_double(xs[i].real()) + ", " + format_double(xs[i].imag()) + "]";
        }
        return s + "\n  ]";
    };
    std::string labels = "[";
    const auto lab = set.constellation().labeling();
    for (std::size_t i = 0; i < lab.size(); ++i) labels += (i ? ", " : "") + std::to_string(lab[i]);
    labels += "]";
    std::ostringstream os;
    os << "{\n"
       << "  \"format\": \"smnuc-constellation\",\n"
       << "  \"version\": 1,\n"
       << "  \"scheme\": " << nlohmann::json(scheme).dump() << ",\n"
       << "  \"M\": " << set.order() << ",\n"
       << "  \"n_t\": " << set.n_t() << ",\n"
       << "  \"prescaling_mode\": \"" << to_string(mode) << "\",\n"
       << "  \"symbols\": " << pairs(set.constellation().symbols()) << ",\n"
       << "  \"pre_scaling\": " << pairs(set.pre_scaling().coefficients()) << ",\n"
       << "  \"labeling\": " << labels << "\n"
       << "}\n";
    return os.str();
}

inline SignalSetFile parse_signal_set(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("parse_signal_set", std::string("invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "smnuc-constellation") fail("parse_signal_set", "not an smnuc-constellation file");
    if (j.value("version", 0) != 1) fail("parse_signal_set", "unsupported version");
    auto points = [&](const char* key) {
        std::vector<cplx> out;
        for (const auto& p : j.at(key)) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        return out;
    };
    const auto m = j.at("M").get<std::size_t>();
    const auto n_t = j.at("n_t").get<std::size_t>();
    auto symbols = points("symbols");
    auto alphas = points("pre_scaling");
    auto labeling = j.at("labeling").get<std::vector<std::uint32_t>>();
    if (symbols.size() != m) fail("parse_signal_set", "symbol count differs from M");
    if (alphas.size() != n_t) fail("parse_signal_set", "pre-scaling count differs from n_t");
    SignalSetFile f{j.value("scheme", "custom"), parse_prescaling_mode(j.value("prescaling_mode", "fixed")),
                    build_signal_set(Constellation(std::move(symbols), std::move(labeling)), PreScaling(std::move(alphas)), n_t)};
    return f;
}

inline void write_signal_set(const std::filesystem::path& path, const SmSignalSet& set, const std::string& scheme = "custom",
                             PrescalingMode mode = PrescalingMode::fixed) {
    write_file(path, serialize_signal_set(set, scheme, mode));
}

inline SignalSetFile read_signal_set(const std::filesystem::path& path) { return parse_signal_set(read_file(path)); }

// ---------------------------------------------------------------------------
// BLER rows

inline constexpr const char* kBlerCsvHeader = "scheme,mcs,n_t,snr_db,blocks,block_errors,bler,ci_low,ci_high,stop_reason";

inline std::string bler_csv(const std::vector<BlerRow>& rows) {
    std::string s = std::string(kBlerCsvHeader) + "\n";
    for (const auto& r : rows) {
        s += r.scheme + "," + std::to_string(r.mcs) + "," + std::to_string(r.n_t) + "," + format_double(r.snr_db) + "," +
             std::to_string(r.blocks) + "," + std::to_string(r.block_errors) + "," + format_double(r.bler) + "," +
             format_double(r.ci_low) + "," + format_double(r.ci_high) + "," + r.stop_reason + "\n";
    }
    return s;
}

inline std::vector<BlerRow> parse_bler_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kBlerCsvHeader) fail("parse_bler_csv", "unexpected header");
    std::vector<BlerRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 10) fail("parse_bler_csv", "expected 10 columns: " + line);
        BlerRow r;
        r.scheme = f[0];
        r.mcs = std::stoi(f[1]);
        r.n_t = std::stoul(f[2]);
        r.snr_db = std::stod(f[3]);
        r.blocks = std::stoul(f[4]);
        r.block_errors = std::stoul(f[5]);
        r.bler = std::stod(f[6]);
        r.ci_low = std::stod(f[7]);
        r.ci_high = std::stod(f[8]);
        r.stop_reason = f[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

// gnuplot-style: one index block per scheme, columns snr_db bler ci_low ci_high.
inline std::string bler_plot_data(const std::vector<BlerRow>& rows) {
    std::map<std::string, std::vector<const BlerRow*>> by_scheme;
    for (const auto& r : rows) by_scheme[r.scheme + " n_t=" + std::to_string(r.n_t) + " mcs=" + std::to_string(r.mcs)].push_back(&r);
    std::string s;
    for (auto& [name, rs] : by_scheme) {
        std::sort(rs.begin(), rs.end(), [](const BlerRow* a, const BlerRow* b) { return a->snr_db < b->snr_db; });
        s += "# " + name + "\n# snr_db bler ci_low ci_high\n";
        for (const auto* r : rs) {
            s += format_double(r->snr_db) + " " + format_double(r->bler) + " " + format_double(r->ci_low) + " " +
                 format_double(r->ci_high) + "\n";
        }
        s += "\n\n";
    }
    return s;
}

// ---------------------------------------------------------------------------
// Run manifest

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::map<std::string, std::string> input_hashes;  // path -> git blob id
    std::string started_at;
    std::string finished_at;

    void add_input(const std::filesystem::path& path) { input_hashes[path.string()] = git_blob_hash(read_file(path)); }

    // Hash of everything that determines the results (timestamps excluded).
    std::string config_hash() const {
        nlohmann::json j{{"command", command}, {"config", config}, {"seed", seed}, {"workers", workers}, {"inputs", input_hashes}};
        return sha1_hex(j.dump());
    }

    nlohmann::json to_json() const {
        return {{"tool", "smnuc"},
                {"command", command},
                {"config", config},
                {"seed", seed},
                {"workers", workers},
                {"inputs", input_hashes},
                {"config_hash", config_hash()},
                {"started_at", started_at},
                {"finished_at", finished_at}};
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.config = j.at("config");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.workers = j.at("workers").get<std::size_t>();
        m.input_hashes = j.at("inputs").get<std::map<std::string, std::string>>();
        m.started_at = j.value("started_at", "");
        m.finished_at = j.value("finished_at", "");
        return m;
    }

    void write(const std::filesystem::path& path) const { write_file(path, to_json().dump(2) + "\n"); }
};

}  // namespace smnuc
