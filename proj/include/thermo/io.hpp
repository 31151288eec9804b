// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "thermo/cocycle.hpp"
#include "thermo/common.hpp"
#include "thermo/ergodic.hpp"
#include "thermo/families.hpp"
#include "thermo/potential.hpp"
#include "thermo/pressure.hpp"
#include "thermo/sft.hpp"
#include "thermo/transfer.hpp"
#include "thermo/typicality.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace thermo {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Number formatting and parsing. Both go through <charconv>, so neither
// depends on the C locale.

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_real_text(const std::string& text, const std::string& field) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || text.empty())
        throw Error(ErrorKind::Validation, "field '" + field + "': '" + text + "' is not a decimal number");
    if (!std::isfinite(v)) throw Error(ErrorKind::Validation, "field '" + field + "': value must be finite");
    return v;
}

// Reals arrive as decimal strings; plain JSON numbers are accepted too.
inline double json_real(const Json& j, const std::string& field) {
    if (j.is_string()) return parse_real_text(j.get<std::string>(), field);
    if (j.is_number()) return j.get<double>();
    throw Error(ErrorKind::Validation, "field '" + field + "': expected a decimal string");
}

inline std::int64_t json_int(const Json& j, const std::string& field) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        std::int64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty()) return v;
    }
    throw Error(ErrorKind::Validation, "field '" + field + "': expected an integer");
}

inline std::uint64_t json_uint(const Json& j, const std::string& field) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        std::uint64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty()) return v;
    }
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return std::uint64_t(j.get<std::int64_t>());
    throw Error(ErrorKind::Validation, "field '" + field + "': expected a non-negative integer");
}

inline std::int64_t json_int_in(const Json& j, const std::string& field, std::int64_t lo, std::int64_t hi) {
    auto v = json_int(j, field);
    if (v < lo || v > hi)
        throw Error(ErrorKind::Validation,
                    "field '" + field + "': " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    return v;
}

inline const Json& json_require(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key))
        throw Error(ErrorKind::Validation, "field '" + path + key + "': missing");
    return obj.at(key);
}

inline std::vector<double> json_real_list(const Json& j, const std::string& field) {
    if (!j.is_array()) throw Error(ErrorKind::Validation, "field '" + field + "': expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(json_real(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct TGrid {
    double start = 0.0, stop = 0.0;
    std::size_t count = 1;

    std::vector<double> values() const {
        std::vector<double> v;
        if (count == 1) return {start};
        for (std::size_t i = 0; i < count; ++i)
            v.push_back(start + (stop - start) * double(i) / double(count - 1));
        return v;
    }
};

struct LdpSection {
    LdpMode mode = LdpMode::Norm;
    double epsilon = 0.2;
    std::size_t n_min = 4, n_max = 14;
    std::size_t xi_window = 6;
};

struct GibbsSection {
    std::vector<double> t_values{-0.1, 0.1};
    std::size_t n_max = 10;
    int M = 0;  // 0: use the top-level M
};

struct TypicalitySection {
    std::size_t max_period = 8;
    std::size_t max_connect = 8;
};

struct LyapunovSection {
    std::size_t length = 4000;
    std::size_t reps = 64;
    std::size_t exact_depth = 12;
};

struct FamilySpec {
    std::string kind;  // prop-9-1 | prop-9-2 | rotations | shear | explicit
    double lambda = 0.0;
    double theta = 0.0;
    std::vector<double> angles;
};

struct ExperimentConfig {
    std::string name;
    FamilySpec family;
    Subshift shift;
    OneStepCocycle cocycle;
    Potential psi;
    TGrid t_grid;
    std::size_t n = 10;
    int M = 2048;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    LdpSection ldp;
    GibbsSection gibbs;
    TypicalitySection typicality;
    LyapunovSection lyapunov;
    Json source;  // parsed document, used for hashing
};

inline OneStepCocycle family_cocycle(const FamilySpec& f) {
    if (f.kind == "prop-9-1") return diagonal_rotation_cocycle(f.lambda, f.theta);
    if (f.kind == "prop-9-2") return diagonal_swap_rotation_cocycle(f.lambda, f.theta);
    if (f.kind == "rotations") return rotation_cocycle(f.angles);
    if (f.kind == "shear") return shear_cocycle();
    throw Error(ErrorKind::Validation, "field 'family.kind': unknown family '" + f.kind + "'");
}

inline FamilySpec parse_family(const Json& j) {
    FamilySpec f;
    if (!j.is_object()) throw Error(ErrorKind::Validation, "field 'family': expected an object");
    const auto& kind = json_require(j, "kind", "family.");
    if (!kind.is_string()) throw Error(ErrorKind::Validation, "field 'family.kind': expected a string");
    f.kind = kind.get<std::string>();
    if (f.kind == "prop-9-1" || f.kind == "prop-9-2") {
        f.lambda = json_real(json_require(j, "lambda", "family."), "family.lambda");
        f.theta = json_real(json_require(j, "theta", "family."), "family.theta");
        if (!(f.lambda > 1.0)) throw Error(ErrorKind::Validation, "field 'family.lambda': must exceed 1");
    } else if (f.kind == "rotations") {
        f.angles = json_real_list(json_require(j, "angles", "family."), "family.angles");
        if (f.angles.empty()) throw Error(ErrorKind::Validation, "field 'family.angles': empty");
    } else if (f.kind != "shear") {
        throw Error(ErrorKind::Validation, "field 'family.kind': unknown family '" + f.kind + "'");
    }
    return f;
}

inline std::vector<Matrix> parse_matrices(const Json& j) {
    if (!j.is_array() || j.empty()) throw Error(ErrorKind::Validation, "field 'matrices': expected a nonempty array");
    std::vector<Matrix> out;
    std::size_t d = 0;
    for (std::size_t a = 0; a < j.size(); ++a) {
        const std::string base = "matrices[" + std::to_string(a) + "]";
        const auto& rows = j[a];
        if (!rows.is_array() || rows.empty()) throw Error(ErrorKind::Validation, "field '" + base + "': expected rows");
        if (d == 0) d = rows.size();
        if (rows.size() != d)
            throw Error(ErrorKind::Validation, "field '" + base + "': has " + std::to_string(rows.size()) +
                                                   " rows, expected " + std::to_string(d));
        Matrix m(d, d);
        for (std::size_t r = 0; r < d; ++r) {
            const std::string rf = base + "[" + std::to_string(r) + "]";
            if (!rows[r].is_array() || rows[r].size() != d)
                throw Error(ErrorKind::Validation, "field '" + rf + "': row must have " + std::to_string(d) + " entries");
            for (std::size_t k = 0; k < d; ++k)
                m(Eigen::Index(r), Eigen::Index(k)) = json_real(rows[r][k], rf + "[" + std::to_string(k) + "]");
        }
        out.push_back(m);
    }
    return out;
}

inline ExperimentConfig parse_config(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Validation, "config: top level must be an object");
    ExperimentConfig cfg;
    cfg.source = j;
    cfg.name = j.value("name", std::string("experiment"));

    std::vector<Matrix> mats;
    if (j.contains("family")) {
        cfg.family = parse_family(j.at("family"));
        if (j.contains("matrices"))
            throw Error(ErrorKind::Validation, "field 'matrices': give either 'family' or 'matrices', not both");
        try {
            mats = family_cocycle(cfg.family).mats();
        } catch (const Error& e) {
            throw Error(ErrorKind::Validation, std::string("field 'family': ") + e.what());
        }
    } else {
        cfg.family.kind = "explicit";
        mats = parse_matrices(json_require(j, "matrices", ""));
    }
    int q = int(mats.size());
    if (j.contains("alphabet_size")) {
        auto declared = json_int_in(j.at("alphabet_size"), "alphabet_size", 1, 255);
        if (declared != q)
            throw Error(ErrorKind::Validation, "field 'alphabet_size': " + std::to_string(declared) + " but " +
                                                   std::to_string(q) + " matrices");
    }
    try {
        cfg.cocycle = OneStepCocycle(mats);
    } catch (const Error& e) {
        throw Error(ErrorKind::Validation, std::string("field 'matrices': ") + e.what());
    }

    std::vector<std::vector<int>> adj(q, std::vector<int>(q, 1));
    if (j.contains("adjacency")) {
        const auto& a = j.at("adjacency");
        if (!a.is_array() || int(a.size()) != q)
            throw Error(ErrorKind::Validation, "field 'adjacency': expected " + std::to_string(q) + " rows");
        for (int r = 0; r < q; ++r) {
            const std::string rf = "adjacency[" + std::to_string(r) + "]";
            if (!a[r].is_array() || int(a[r].size()) != q)
                throw Error(ErrorKind::Validation, "field '" + rf + "': expected " + std::to_string(q) + " entries");
            for (int k = 0; k < q; ++k)
                adj[r][k] = int(json_int_in(a[r][k], rf + "[" + std::to_string(k) + "]", 0, 1));
        }
    }
    try {
        cfg.shift = new_subshift(q, adj);
    } catch (const Error& e) {
        throw Error(ErrorKind::Validation, std::string("field 'adjacency': ") + to_string(e.kind()) + ": " + e.what());
    }

    std::vector<double> psi(q, 0.0);
    if (j.contains("psi")) {
        psi = json_real_list(j.at("psi"), "psi");
        if (int(psi.size()) != q)
            throw Error(ErrorKind::Validation, "field 'psi': expected " + std::to_string(q) + " values");
    }
    cfg.psi = Potential::per_symbol(psi);

    const auto& tg = json_require(j, "t_grid", "");
    if (!tg.is_object()) throw Error(ErrorKind::Validation, "field 't_grid': expected {start, stop, count}");
    cfg.t_grid.start = json_real(json_require(tg, "start", "t_grid."), "t_grid.start");
    cfg.t_grid.stop = json_real(json_require(tg, "stop", "t_grid."), "t_grid.stop");
    cfg.t_grid.count = std::size_t(json_int(json_require(tg, "count", "t_grid."), "t_grid.count"));
    if (json_int(tg.at("count"), "t_grid.count") < 1)
        throw Error(ErrorKind::Validation, "field 't_grid.count': must be >= 1 (empty grid)");
    if (cfg.t_grid.count > 1 && !(cfg.t_grid.stop > cfg.t_grid.start))
        throw Error(ErrorKind::Validation, "field 't_grid.stop': must exceed start when count > 1");

    if (j.contains("n")) cfg.n = std::size_t(json_int_in(j.at("n"), "n", 1, 64));
    if (j.contains("M")) cfg.M = int(json_int_in(j.at("M"), "M", 64, 1 << 20));
    if (j.contains("seed")) cfg.seed = json_uint(j.at("seed"), "seed");
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) throw Error(ErrorKind::Validation, "field 'output_dir': expected a string");
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    if (count_words(cfg.shift, cfg.n) > kEnumerationCap)
        throw Error(ErrorKind::Validation, "field 'n': " + std::to_string(cfg.n) + " exceeds the enumeration cap");

    if (j.contains("ldp")) {
        const auto& l = j.at("ldp");
        if (l.contains("mode")) {
            if (!l.at("mode").is_string()) throw Error(ErrorKind::Validation, "field 'ldp.mode': expected a string");
            try {
                cfg.ldp.mode = parse_ldp_mode(l.at("mode").get<std::string>());
            } catch (const Error& e) {
                throw Error(ErrorKind::Validation, std::string("field 'ldp.mode': ") + e.what());
            }
        }
        if (l.contains("epsilon")) cfg.ldp.epsilon = json_real(l.at("epsilon"), "ldp.epsilon");
        if (l.contains("n_min")) cfg.ldp.n_min = std::size_t(json_int_in(l.at("n_min"), "ldp.n_min", 1, 64));
        if (l.contains("n_max")) cfg.ldp.n_max = std::size_t(json_int_in(l.at("n_max"), "ldp.n_max", 1, 64));
        if (l.contains("xi_window")) cfg.ldp.xi_window = std::size_t(json_int_in(l.at("xi_window"), "ldp.xi_window", 1, 64));
        if (!(cfg.ldp.epsilon > 0)) throw Error(ErrorKind::Validation, "field 'ldp.epsilon': must be positive");
        if (cfg.ldp.n_max < cfg.ldp.n_min) throw Error(ErrorKind::Validation, "field 'ldp.n_max': below n_min");
    }
    if (j.contains("gibbs")) {
        const auto& g = j.at("gibbs");
        if (g.contains("t")) cfg.gibbs.t_values = json_real_list(g.at("t"), "gibbs.t");
        if (g.contains("n_max")) cfg.gibbs.n_max = std::size_t(json_int_in(g.at("n_max"), "gibbs.n_max", 2, 64));
        if (g.contains("M")) cfg.gibbs.M = int(json_int_in(g.at("M"), "gibbs.M", 64, 1 << 20));
        if (cfg.gibbs.t_values.empty()) throw Error(ErrorKind::Validation, "field 'gibbs.t': empty");
    }
    if (j.contains("typicality")) {
        const auto& t = j.at("typicality");
        if (t.contains("max_period"))
            cfg.typicality.max_period = std::size_t(json_int_in(t.at("max_period"), "typicality.max_period", 1, 16));
        if (t.contains("max_connect"))
            cfg.typicality.max_connect = std::size_t(json_int_in(t.at("max_connect"), "typicality.max_connect", 1, 16));
    }
    if (j.contains("lyapunov")) {
        const auto& l = j.at("lyapunov");
        if (l.contains("length")) cfg.lyapunov.length = std::size_t(json_int_in(l.at("length"), "lyapunov.length", 1, 1 << 24));
        if (l.contains("reps")) cfg.lyapunov.reps = std::size_t(json_int_in(l.at("reps"), "lyapunov.reps", 1, 1 << 20));
        if (l.contains("exact_depth"))
            cfg.lyapunov.exact_depth = std::size_t(json_int_in(l.at("exact_depth"), "lyapunov.exact_depth", 1, 64));
    }
    return cfg;
}

// Parse errors are reported with line and column.
inline Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorKind::Validation,
                    origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Validation, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(parse_json_text(read_file(path), path)); }

// ---------------------------------------------------------------------------
// Hashing and manifest

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Hash of the canonical config dump plus every override that changes results.
inline std::string config_hash(const ExperimentConfig& cfg, const Json& overrides) {
    return hex64(fnv1a64(cfg.source.dump() + "|" + overrides.dump()));
}

inline Json module_versions() {
    Json m;
    for (const char* name : {"sft", "cocycle", "projective", "potential", "pressure", "transfer", "ergodic",
                             "typicality", "cli"})
        m[name] = kVersion;
    return m;
}

struct RunInfo {
    std::string subcommand;
    std::string config_path;
    Json overrides = Json::object();
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::vector<std::string> outputs;
};

inline Json manifest_json(const ExperimentConfig& cfg, const RunInfo& run) {
    Json m;
    m["tool"] = "thermo";
    m["version"] = kVersion;
    m["subcommand"] = run.subcommand;
    m["config_name"] = cfg.name;
    m["config_path"] = run.config_path;
    m["config_hash"] = "fnv1a64:" + config_hash(cfg, run.overrides);
    m["overrides"] = run.overrides;
    m["modules"] = module_versions();
    m["seed"] = std::to_string(run.seed);
    m["threads"] = run.threads;
    m["outputs"] = run.outputs;
    return m;
}

// ---------------------------------------------------------------------------
// Output files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw Error(ErrorKind::InvalidArgument, "csv row width mismatch");
        rows_.push_back(std::move(cells));
        return *this;
    }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

    void write(const std::filesystem::path& path) const { write_text(path, str()); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(ErrorKind::Validation, "missing column " + name);
    }
};

inline CsvData parse_csv(const std::string& text) {
    CsvData d;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            d.header = std::move(cells);
            first = false;
        } else {
            d.rows.push_back(std::move(cells));
        }
    }
    return d;
}

inline const std::vector<std::string> kPressureCurveHeader{
    "t", "n", "p_n", "lower", "upper", "slope", "log_rho", "log_rho_plus_ptop"};
inline const std::vector<std::string> kGibbsHeader{"t", "n", "min_ratio", "max_ratio", "growth_factor", "band_growth",
                                                   "defect"};
inline const std::vector<std::string> kLdpHeader{"mode", "epsilon", "n", "mass", "rate_fit"};

// log_rho may be empty (d != 2); the two spectral columns are then "nan".
inline CsvTable pressure_curve_table(const PressureCurve& curve, const std::vector<double>& log_rho, double p_top) {
    CsvTable tab(kPressureCurveHeader);
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const auto& e = curve.estimates[i];
        double lr = i < log_rho.size() ? log_rho[i] : std::numeric_limits<double>::quiet_NaN();
        tab.row({format_real(e.t), std::to_string(e.n), format_real(e.p_n), format_real(e.lower), format_real(e.upper),
                 format_real(curve.slopes[i]), format_real(lr), format_real(lr + p_top)});
    }
    return tab;
}

inline Json spectral_entry(const SpectralData& sd) {
    Json j;
    j["t"] = format_real(sd.t);
    j["rho"] = format_real(sd.rho);
    j["log_rho"] = format_real(sd.log_rho());
    j["gap_est"] = format_real(sd.gap_est);
    j["M"] = sd.M;
    j["iterations"] = sd.iterations;
    j["adjoint_iterations"] = sd.adjoint_iterations;
    j["residual"] = format_real(sd.residual);
    j["adjoint_residual"] = format_real(sd.adjoint_residual);
    return j;
}

inline Json spectral_json(const std::vector<SpectralData>& list) {
    Json arr = Json::array();
    for (const auto& sd : list) arr.push_back(spectral_entry(sd));
    return arr;
}

inline void append_gibbs_rows(CsvTable& tab, double t, const std::vector<GibbsRatioRow>& rows) {
    for (const auto& r : rows)
        tab.row({format_real(t), std::to_string(r.n), format_real(r.min_ratio), format_real(r.max_ratio),
                 format_real(r.growth_factor), format_real(r.band_growth), format_real(r.defect)});
}

inline CsvTable ldp_table_csv(const LdpTable& t) {
    CsvTable tab(kLdpHeader);
    for (const auto& r : t.rows)
        tab.row({to_string(t.mode), format_real(t.epsilon), std::to_string(r.n), format_real(r.mass),
                 format_real(t.rate_fit)});
    return tab;
}

inline Json typicality_json(const TypicalityResult& res, int q) {
    Json j;
    j["status"] = res.certified ? "certified" : "inconclusive";
    Json bounds;
    bounds["max_period"] = res.max_period;
    bounds["max_connect"] = res.max_connect;
    bounds["periodic_words_tested"] = res.periodic_tested;
    if (res.certificate) {
        const auto& c = *res.certificate;
        j["p"] = format_word(c.p, q);
        j["z"] = format_word(c.z, q);
        j["l"] = c.z.size();
        Json mods = Json::array();
        for (double m : c.eigen_moduli) mods.push_back(format_real(m));
        j["eigen_moduli"] = mods;
        j["min_relative_gap"] = format_real(c.min_relative_gap);
        j["min_independence_sv"] = format_real(c.min_independence_sv);
        j["tol_eig"] = format_real(c.tol_eig);
        j["tol_rank"] = format_real(c.tol_rank);
    } else {
        j["p"] = nullptr;
        j["z"] = nullptr;
        j["l"] = nullptr;
        j["eigen_moduli"] = Json::array();
        j["min_independence_sv"] = nullptr;
        j["max_modulus_gap"] = format_real(res.max_modulus_gap);
        Json cands = Json::array();
        for (const auto& cnd : res.best_candidates)
            cands.push_back({{"p", format_word(cnd.p, q)}, {"failed", cnd.failed}, {"margin", format_real(cnd.margin)}});
        j["candidates"] = cands;
    }
    j["search_bounds"] = bounds;
    j["reason"] = res.reason;
    return j;
}

} // namespace thermo
