#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "periheat/cell.hpp"
#include "periheat/geometry.hpp"
#include "periheat/grids.hpp"

namespace periheat {

using json = nlohmann::json;

inline json to_json(const BoundaryMap& m) {
    auto vec = [](const Eigen::VectorXd& v) {
        std::vector<double> out(v.data(), v.data() + v.size());
        return out;
    };
    return json{{"degree", m.degree()},
                {"cos_x", vec(m.cos_x)},
                {"sin_x", vec(m.sin_x)},
                {"cos_y", vec(m.cos_y)},
                {"sin_y", vec(m.sin_y)}};
}

inline BoundaryMap boundary_map_from_json(const json& j) {
    const int deg = j.at("degree").get<int>();
    BoundaryMap m = BoundaryMap::zero(deg);
    auto load = [&](const char* key, Eigen::VectorXd& dst) {
        const auto v = j.at(key).get<std::vector<double>>();
        if (static_cast<int>(v.size()) != deg + 1)
            throw std::invalid_argument(std::string("boundary map field '") + key +
                                        "' must have degree+1 entries");
        for (int k = 0; k <= deg; ++k) dst[k] = v[k];
    };
    load("cos_x", m.cos_x);
    load("sin_x", m.sin_x);
    load("cos_y", m.cos_y);
    load("sin_y", m.sin_y);
    return m;
}

inline Cell2 cell_from_json(const json& j) {
    const auto q = j.get<std::vector<double>>();
    if (q.size() != 2) throw std::invalid_argument("cell must be [q11, q22]");
    return Cell2({q[0], q[1]});
}

inline Representation representation_from_string(const std::string& s) {
    if (s == "direct") return Representation::direct;
    if (s == "spectral") return Representation::spectral;
    if (s == "auto") return Representation::automatic;
    throw std::invalid_argument("representation must be one of direct|spectral|auto");
}

/// Separable catalog entry amp·t^tpow·trig(freq·s); a density spec is a sum
/// of such terms.
struct SeparableTerm {
    double amp = 1.0;
    double tpow = 1.0;
    std::string trig = "one"; // one | cos | sin
    int freq = 0;

    double operator()(double t, double s) const {
        double sp = 1.0;
        if (trig == "cos") sp = std::cos(freq * s);
        else if (trig == "sin") sp = std::sin(freq * s);
        return amp * std::pow(t, tpow) * sp;
    }
};

struct DensitySpec {
    std::vector<SeparableTerm> terms;
    std::string csv_path; ///< alternative: raw M×N grid from CSV

    bool from_csv() const { return !csv_path.empty(); }

    double eval(double t, double s) const {
        double v = 0.0;
        for (const auto& term : terms) v += term(t, s);
        return v;
    }
};

inline DensitySpec density_spec_from_json(const json& j) {
    DensitySpec spec;
    if (j.is_object() && j.contains("csv")) {
        spec.csv_path = j.at("csv").get<std::string>();
        return spec;
    }
    if (!j.is_array()) throw std::invalid_argument("density spec must be a term array or {\"csv\": path}");
    for (const auto& tj : j) {
        SeparableTerm term;
        term.amp = tj.value("amp", 1.0);
        term.tpow = tj.value("tpow", 1.0);
        term.trig = tj.value("trig", std::string("one"));
        term.freq = tj.value("freq", 0);
        if (term.trig != "one" && term.trig != "cos" && term.trig != "sin")
            throw std::invalid_argument("density term trig must be one|cos|sin");
        if (!(term.tpow > 0.0))
            throw std::invalid_argument("density term needs tpow > 0 to vanish at t=0");
        spec.terms.push_back(term);
    }
    return spec;
}

inline DensityGrid density_grid_from_csv(const std::string& path, int M, int N) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open density CSV: " + path);
    DensityGrid rho(M, N);
    std::string line;
    int k = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (k >= M) throw std::invalid_argument("density CSV has more than M rows: " + path);
        std::stringstream ss(line);
        std::string cellv;
        int i = 0;
        while (std::getline(ss, cellv, ',')) {
            if (i >= N) throw std::invalid_argument("density CSV row has more than N columns: " + path);
            rho.values(k, i) = std::stod(cellv);
            ++i;
        }
        if (i != N) throw std::invalid_argument("density CSV row has fewer than N columns: " + path);
        ++k;
    }
    if (k != M) throw std::invalid_argument("density CSV has fewer than M rows: " + path);
    return rho;
}

// ---------------------------------------------------------------------------
// Deterministic CSV output
// ---------------------------------------------------------------------------

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// CSV sink with a provenance comment (config hash) and a header row;
/// all values printed with %.17g.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns,
              std::uint64_t config_hash)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_hash));
        out_ << "# config=" << hex << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }

    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            out_ << format_g17(vals[i]) << (i + 1 < vals.size() ? "," : "\n");
    }

    void raw_row(const std::vector<std::string>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            out_ << vals[i] << (i + 1 < vals.size() ? "," : "\n");
    }

private:
    std::ofstream out_;
};

} // namespace periheat
