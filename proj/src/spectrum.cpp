#include "cestfit/spectrum.hpp"

#include <cmath>
#include <utility>

namespace cestfit {

Spectrum::Spectrum(std::vector<double> offsets_ppm, std::vector<double> z, double b1_ut)
    : offsets_ppm_(std::move(offsets_ppm)), z_(std::move(z)), b1_ut_(b1_ut) {
    if (offsets_ppm_.size() != z_.size())
        throw LengthMismatch("Spectrum: offsets and z length mismatch");
    if (offsets_ppm_.size() < 3)
        throw ConfigError("Spectrum: need at least 3 samples");
    for (std::size_t i = 1; i < offsets_ppm_.size(); ++i) {
        if (!(offsets_ppm_[i] > offsets_ppm_[i - 1]))
            throw ConfigError("Spectrum: offsets must be strictly increasing");
    }
    if (!(b1_ut_ > 0.0))
        throw NonPositiveAmplitude("Spectrum: b1 must be > 0");
}

SpectrumSet::SpectrumSet(std::vector<Spectrum> spectra, std::optional<LabelMap> label)
    : spectra_(std::move(spectra)), label_(std::move(label)) {
    if (spectra_.empty())
        throw ConfigError("SpectrumSet: need at least one spectrum");
    const auto& grid = spectra_.front().offsets_ppm();
    for (const auto& s : spectra_) {
        if (s.offsets_ppm() != grid)
            throw GridMismatch("SpectrumSet: member spectra must share the offset grid");
    }
    for (std::size_t i = 0; i < spectra_.size(); ++i) {
        for (std::size_t j = i + 1; j < spectra_.size(); ++j) {
            if (std::abs(spectra_[i].b1_ut() - spectra_[j].b1_ut()) < 1e-12)
                throw ConfigError("SpectrumSet: b1 values must be pairwise distinct");
        }
    }
}

const Spectrum& SpectrumSet::at_b1(double b1_ut) const {
    for (const auto& s : spectra_) {
        if (std::abs(s.b1_ut() - b1_ut) < 1e-9)
            return s;
    }
    throw ConfigError("SpectrumSet: no spectrum at requested b1");
}

std::string to_string(MetricKind kind) {
    switch (kind) {
    case MetricKind::Mtr: return "MTR";
    case MetricKind::MtrAsym: return "MTR_asym";
    case MetricKind::MtrRex: return "MTR_Rex";
    case MetricKind::MtrRexLhs: return "MTR_Rex_LHS";
    }
    return "unknown";
}

} // namespace cestfit
