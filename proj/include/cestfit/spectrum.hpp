#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cestfit/errors.hpp"

namespace cestfit {

// A single Z-spectrum: normalized water signal versus saturation frequency
// offset, acquired at one saturation amplitude B1.
class Spectrum {
public:
    Spectrum(std::vector<double> offsets_ppm, std::vector<double> z, double b1_ut);

    const std::vector<double>& offsets_ppm() const { return offsets_ppm_; }
    const std::vector<double>& z() const { return z_; }
    double b1_ut() const { return b1_ut_; }
    std::size_t size() const { return offsets_ppm_.size(); }

private:
    std::vector<double> offsets_ppm_; // strictly increasing
    std::vector<double> z_;
    double b1_ut_;
};

// Concentration labels: solute name -> millimolar.
using LabelMap = std::map<std::string, double>;

// Spectra of one sample across saturation amplitudes, sharing an offset grid.
class SpectrumSet {
public:
    explicit SpectrumSet(std::vector<Spectrum> spectra,
                         std::optional<LabelMap> label = std::nullopt);

    const std::vector<Spectrum>& spectra() const { return spectra_; }
    const std::optional<LabelMap>& label() const { return label_; }
    const std::vector<double>& offsets_ppm() const { return spectra_.front().offsets_ppm(); }
    std::size_t size() const { return spectra_.size(); }

    // Spectrum with b1 closest to the requested value (exact within 1e-9).
    const Spectrum& at_b1(double b1_ut) const;

private:
    std::vector<Spectrum> spectra_;
    std::optional<LabelMap> label_;
};

enum class MetricKind { Mtr, MtrAsym, MtrRex, MtrRexLhs };

std::string to_string(MetricKind kind);

struct MetricCurve {
    std::vector<double> offsets_ppm;
    std::vector<double> values;
    MetricKind kind = MetricKind::Mtr;
};

} // namespace cestfit
