#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cestfit/field_context.hpp"
#include "cestfit/models/params.hpp"
#include "cestfit/spectrum.hpp"

namespace cestfit::synth {

// Solute template: exchange parameters are fixed chemistry, the pool size
// scales linearly with concentration as f_over_r1a = scale * mM.
struct SolutePool {
    std::string name;
    double k = 0.0;
    double r2 = 0.0;
    double d_omega_ppm = 0.0;
    double f_over_r1a_per_mm = 0.0;
};

// Phantom batch layout: the cartesian product of the per-solute concentration
// grids defines the phantoms, each sampled `replicates` times with fresh
// noise. Combo indices are row-major with solute 0 slowest.
struct PhantomSpec {
    std::vector<SolutePool> solutes;
    std::vector<std::vector<double>> concentrations_mm; // one grid per solute
    double r2a_over_r1a = 1.4;
    std::vector<double> b1_ut{1.2, 1.6, 2.0, 2.4};
    std::vector<double> offsets_ppm = default_offsets();
    double noise_sigma = 0.005;
    int replicates = 50;
    std::uint64_t seed = 0;
    FieldContext ctx;

    // 129 points over [-5, 5] ppm.
    static std::vector<double> default_offsets();

    // Two-solute glucose/lactate batch over {5, 15, 30} mM each.
    static PhantomSpec defaults();

    void validate() const;

    std::size_t combo_count() const;
    std::vector<double> concentrations_of(std::size_t combo) const;
    models::ZModelParams true_params(std::size_t combo) const;
    LabelMap label(std::size_t combo) const;
};

PhantomSpec phantom_spec_from_json(const nlohmann::json& doc);
nlohmann::json phantom_spec_to_json(const PhantomSpec& spec);
PhantomSpec load_phantom_spec(const std::string& path);
void save_phantom_spec(const PhantomSpec& spec, const std::string& path);

// Generated batch. Sets are combo-major, replicate-minor; each SpectrumSet
// carries its concentration labels, value payloads never do.
struct PhantomDataset {
    PhantomSpec spec;
    std::vector<SpectrumSet> sets;

    std::size_t combo_of(std::size_t set_index) const {
        return set_index / static_cast<std::size_t>(spec.replicates);
    }
};

// Evaluates the analytical Z model per B1 and adds seeded Gaussian noise on
// Z, clamped to (0, 1.05]. sigma == 0 reproduces the model values exactly.
// Each set draws from its own stream (seed + set index), so generation is
// order-independent and bitwise reproducible.
PhantomDataset generate(const PhantomSpec& spec);

// Re-evaluates every spectrum at offsets - shift, optionally jittering the
// shift per spectrum (normal, sigma in ppm, drawn from `seed`). Noise streams
// are reused from the generating spec, so a zero shift with zero jitter
// reproduces the input bitwise. Throws ShiftTooLarge when an effective shift
// reaches half the grid span.
PhantomDataset inject_b0_shift(const PhantomDataset& data, double shift_ppm,
                               double jitter_sigma_ppm = 0.0, std::uint64_t seed = 0);

// Dataset directory layout from spectrum_io plus the generating spec in the
// manifest (key "generator").
void write_phantom_dataset(const std::filesystem::path& dir, const PhantomDataset& data);
PhantomDataset read_phantom_dataset(const std::filesystem::path& dir);

} // namespace cestfit::synth
