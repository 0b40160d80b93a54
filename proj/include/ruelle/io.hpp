#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruelle/ifs.hpp"
#include "ruelle/measure.hpp"

namespace ruelle {

using json = nlohmann::ordered_json;

// CSV convention: comma separator, '.' decimal point, 17 significant digits,
// header row.
inline std::string format_g17(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_g17(values[i]);
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline json measure_to_json(const Measure& m) {
    json j;
    switch (m.kind) {
    case MeasureKind::Histogram:
        j["kind"] = "histogram";
        j["n"] = m.n;
        j["cells"] = m.cells;
        break;
    case MeasureKind::Atomic: {
        j["kind"] = "atomic";
        json atoms = json::array();
        for (const auto& a : m.atoms) atoms.push_back({a.x, a.mass});
        j["atoms"] = atoms;
        break;
    }
    case MeasureKind::ClosedForm:
        j["kind"] = "closed_form";
        j["label"] = m.label;
        break;
    }
    return j;
}

inline json cylinder_table_to_json(const IFSMeasure& m) {
    json j;
    j["map"] = m.map_label;
    j["p"] = m.pvec.p;
    j["tail_mass"] = m.pvec.tail_mass;
    json levels = json::array();
    for (const auto& level : m.levels) {
        json nodes = json::array();
        for (const auto& node : level) {
            json e;
            e["word"] = node.word;
            e["lo"] = node.cell.lo;
            e["hi"] = node.cell.hi;
            e["mass"] = node.mass;
            nodes.push_back(std::move(e));
        }
        levels.push_back(std::move(nodes));
    }
    j["levels"] = std::move(levels);
    return j;
}

// samples as a little-endian float64 array plus a JSON manifest
inline void write_samples_binary(const std::filesystem::path& path,
                                 const std::vector<double>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    for (double x : samples) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        unsigned char buf[8];
        for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
        out.write(reinterpret_cast<const char*>(buf), 8);
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << "\n";
}

} // namespace ruelle
