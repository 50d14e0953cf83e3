#include "cestfit/spectrum_io.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "cestfit/errors.hpp"

namespace cestfit::io {

namespace {

// 17 significant digits round-trip any double exactly.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string spectrum_file_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "spectrum_%03zu.csv", index);
    return buf;
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << "offset_ppm,z\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << fmt(s.offsets_ppm()[i]) << ',' << fmt(s.z()[i]) << '\n';
    if (!out)
        throw IoError("write failed: " + path.string());
}

Spectrum read_spectrum_csv(const std::filesystem::path& path, double b1_ut) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "offset_ppm,z")
        throw IoError(path.string() + ": expected header 'offset_ppm,z'");
    std::vector<double> offsets, z;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError(path.string() + ": malformed row '" + line + "'");
        std::size_t used = 0;
        offsets.push_back(std::stod(line.substr(0, comma), &used));
        z.push_back(std::stod(line.substr(comma + 1), &used));
    }
    return Spectrum(std::move(offsets), std::move(z), b1_ut);
}

} // namespace

void write_spectrum_set(const std::filesystem::path& dir, const SpectrumSet& set) {
    std::filesystem::create_directories(dir);
    nlohmann::json meta;
    meta["spectra"] = nlohmann::json::array();
    for (std::size_t i = 0; i < set.size(); ++i) {
        const std::string name = spectrum_file_name(i);
        write_spectrum_csv(dir / name, set.spectra()[i]);
        meta["spectra"].push_back({{"file", name}, {"b1_ut", set.spectra()[i].b1_ut()}});
    }
    if (set.label()) {
        nlohmann::json labels = nlohmann::json::object();
        for (const auto& [solute, conc_mm] : *set.label())
            labels[solute] = conc_mm;
        meta["labels"] = std::move(labels);
    }
    std::ofstream out(dir / "meta.json");
    if (!out)
        throw IoError("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
}

SpectrumSet read_spectrum_set(const std::filesystem::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in)
        throw IoError("cannot read " + (dir / "meta.json").string());
    nlohmann::json meta;
    try {
        in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw IoError((dir / "meta.json").string() + ": " + e.what());
    }
    std::vector<Spectrum> spectra;
    for (const auto& entry : meta.at("spectra"))
        spectra.push_back(read_spectrum_csv(dir / entry.at("file").get<std::string>(),
                                            entry.at("b1_ut").get<double>()));
    std::optional<LabelMap> label;
    if (meta.contains("labels")) {
        LabelMap m;
        for (const auto& [solute, conc] : meta.at("labels").items())
            m[solute] = conc.get<double>();
        label = std::move(m);
    }
    return SpectrumSet(std::move(spectra), std::move(label));
}

std::string set_dir_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "set_%05zu", index);
    return buf;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<SpectrumSet>& sets,
                   const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = extra.is_object() ? extra : nlohmann::json::object();
    manifest["sets"] = nlohmann::json::array();
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const std::string name = set_dir_name(i);
        write_spectrum_set(dir / name, sets[i]);
        manifest["sets"].push_back(name);
    }
    std::ofstream out(dir / "manifest.json");
    if (!out)
        throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

nlohmann::json read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in)
        throw IoError("cannot read " + (dir / "manifest.json").string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError((dir / "manifest.json").string() + ": " + e.what());
    }
    return manifest;
}

std::vector<SpectrumSet> read_dataset(const std::filesystem::path& dir) {
    const nlohmann::json manifest = read_manifest(dir);
    std::vector<SpectrumSet> sets;
    for (const auto& name : manifest.at("sets"))
        sets.push_back(read_spectrum_set(dir / name.get<std::string>()));
    return sets;
}

} // namespace cestfit::io
