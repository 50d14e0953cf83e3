#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "cestfit/spectrum.hpp"

namespace cestfit::io {

// On-disk layout for one SpectrumSet:
//   <dir>/meta.json   b1 list, file names, optional labels
//   <dir>/<name>.csv  header "offset_ppm,z", one row per offset
// Floats are written with 17 significant digits and round-trip exactly.
void write_spectrum_set(const std::filesystem::path& dir, const SpectrumSet& set);
SpectrumSet read_spectrum_set(const std::filesystem::path& dir);

// Canonical subdirectory name of set `index` inside a dataset ("set_00042").
std::string set_dir_name(std::size_t index);

// A dataset is a directory of SpectrumSet subdirectories plus manifest.json
// listing them in order. extra fields (generator settings, seeds) are merged
// into the manifest object.
void write_dataset(const std::filesystem::path& dir, const std::vector<SpectrumSet>& sets,
                   const nlohmann::json& extra = nlohmann::json::object());
std::vector<SpectrumSet> read_dataset(const std::filesystem::path& dir);
nlohmann::json read_manifest(const std::filesystem::path& dir);

} // namespace cestfit::io
