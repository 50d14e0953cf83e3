#include "cestfit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cestfit/errors.hpp"
#include "cestfit/models/forward.hpp"
#include "cestfit/rng.hpp"
#include "cestfit/spectrum_io.hpp"
#include "cestfit/units.hpp"

namespace cestfit::synth {

namespace {

// Lowest Z a noisy sample may take; keeps Z strictly positive so downstream
// reciprocal metrics stay finite.
constexpr double kZFloor = 1e-6;
constexpr double kZCeil = 1.05;

} // namespace

std::vector<double> PhantomSpec::default_offsets() {
    std::vector<double> offsets(129);
    for (std::size_t i = 0; i < offsets.size(); ++i)
        offsets[i] = -5.0 + 10.0 * static_cast<double>(i) / 128.0;
    return offsets;
}

PhantomSpec PhantomSpec::defaults() {
    PhantomSpec spec;
    spec.solutes = {
        {"glucose", 600.0, 40.0, 2.1, 2e-5},
        {"lactate", 500.0, 30.0, 0.8, 2e-5},
    };
    spec.concentrations_mm = {{5.0, 15.0, 30.0}, {5.0, 15.0, 30.0}};
    return spec;
}

void PhantomSpec::validate() const {
    ctx.validate();
    if (solutes.empty())
        throw ConfigError("PhantomSpec: at least one solute required");
    if (concentrations_mm.size() != solutes.size())
        throw ConfigError("PhantomSpec: one concentration grid per solute required");
    for (const auto& grid : concentrations_mm) {
        if (grid.empty())
            throw ConfigError("PhantomSpec: empty concentration grid");
        for (double c : grid)
            if (!(c > 0.0))
                throw ConfigError("PhantomSpec: concentrations must be > 0");
    }
    for (const SolutePool& s : solutes) {
        if (s.name.empty())
            throw ConfigError("PhantomSpec: solute name required");
        if (!(s.k > 0.0) || !(s.r2 >= 0.0) || !(s.f_over_r1a_per_mm > 0.0))
            throw ConfigError("PhantomSpec: invalid solute template for " + s.name);
    }
    if (!(r2a_over_r1a >= 0.0))
        throw ConfigError("PhantomSpec: r2a_over_r1a must be >= 0");
    if (b1_ut.empty())
        throw ConfigError("PhantomSpec: at least one B1 value required");
    for (double b1 : b1_ut)
        if (!(b1 > 0.0))
            throw ConfigError("PhantomSpec: B1 values must be > 0");
    if (offsets_ppm.size() < 3)
        throw ConfigError("PhantomSpec: need at least 3 offsets");
    if (!(noise_sigma >= 0.0))
        throw ConfigError("PhantomSpec: noise sigma must be >= 0");
    if (replicates < 1)
        throw ConfigError("PhantomSpec: replicates must be >= 1");
}

std::size_t PhantomSpec::combo_count() const {
    std::size_t n = 1;
    for (const auto& grid : concentrations_mm)
        n *= grid.size();
    return n;
}

std::vector<double> PhantomSpec::concentrations_of(std::size_t combo) const {
    if (combo >= combo_count())
        throw IndexOutOfRange("PhantomSpec: combo index out of range");
    std::vector<double> conc(solutes.size());
    for (std::size_t s = solutes.size(); s-- > 0;) {
        const auto& grid = concentrations_mm[s];
        conc[s] = grid[combo % grid.size()];
        combo /= grid.size();
    }
    return conc;
}

models::ZModelParams PhantomSpec::true_params(std::size_t combo) const {
    const std::vector<double> conc = concentrations_of(combo);
    models::ZModelParams p;
    p.r2a_over_r1a = r2a_over_r1a;
    for (std::size_t s = 0; s < solutes.size(); ++s) {
        const SolutePool& tmpl = solutes[s];
        p.pools.push_back(
            {tmpl.f_over_r1a_per_mm * conc[s], tmpl.k, tmpl.r2, tmpl.d_omega_ppm});
    }
    return p;
}

LabelMap PhantomSpec::label(std::size_t combo) const {
    const std::vector<double> conc = concentrations_of(combo);
    LabelMap labels;
    for (std::size_t s = 0; s < solutes.size(); ++s)
        labels[solutes[s].name] = conc[s];
    return labels;
}

PhantomSpec phantom_spec_from_json(const nlohmann::json& doc) {
    PhantomSpec spec;
    if (!doc.contains("solutes") || !doc["solutes"].is_array())
        throw ConfigError("phantom spec: 'solutes' array required");
    spec.concentrations_mm.clear();
    for (const auto& s : doc["solutes"]) {
        SolutePool pool;
        pool.name = s.at("name").get<std::string>();
        pool.k = s.at("k").get<double>();
        pool.r2 = s.at("r2").get<double>();
        pool.d_omega_ppm = s.at("d_omega_ppm").get<double>();
        pool.f_over_r1a_per_mm = s.at("f_over_r1a_per_mm").get<double>();
        spec.solutes.push_back(std::move(pool));
        spec.concentrations_mm.push_back(
            s.at("concentrations_mm").get<std::vector<double>>());
    }
    if (doc.contains("r2a_over_r1a"))
        spec.r2a_over_r1a = doc["r2a_over_r1a"].get<double>();
    if (doc.contains("b1_ut"))
        spec.b1_ut = doc["b1_ut"].get<std::vector<double>>();
    if (doc.contains("offsets_ppm"))
        spec.offsets_ppm = doc["offsets_ppm"].get<std::vector<double>>();
    if (doc.contains("noise_sigma"))
        spec.noise_sigma = doc["noise_sigma"].get<double>();
    if (doc.contains("replicates"))
        spec.replicates = doc["replicates"].get<int>();
    if (doc.contains("seed"))
        spec.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("b0_tesla"))
        spec.ctx.b0_tesla = doc["b0_tesla"].get<double>();
    spec.validate();
    return spec;
}

nlohmann::json phantom_spec_to_json(const PhantomSpec& spec) {
    nlohmann::json doc;
    doc["solutes"] = nlohmann::json::array();
    for (std::size_t s = 0; s < spec.solutes.size(); ++s) {
        const SolutePool& pool = spec.solutes[s];
        doc["solutes"].push_back({{"name", pool.name},
                                  {"k", pool.k},
                                  {"r2", pool.r2},
                                  {"d_omega_ppm", pool.d_omega_ppm},
                                  {"f_over_r1a_per_mm", pool.f_over_r1a_per_mm},
                                  {"concentrations_mm", spec.concentrations_mm[s]}});
    }
    doc["r2a_over_r1a"] = spec.r2a_over_r1a;
    doc["b1_ut"] = spec.b1_ut;
    doc["offsets_ppm"] = spec.offsets_ppm;
    doc["noise_sigma"] = spec.noise_sigma;
    doc["replicates"] = spec.replicates;
    doc["seed"] = spec.seed;
    doc["b0_tesla"] = spec.ctx.b0_tesla;
    return doc;
}

PhantomSpec load_phantom_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open phantom spec: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("phantom spec " + path + ": " + e.what());
    }
    return phantom_spec_from_json(doc);
}

void save_phantom_spec(const PhantomSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write phantom spec: " + path);
    out << phantom_spec_to_json(spec).dump(2) << '\n';
}

namespace {

// One noisy spectrum set for a given truth; rng is the per-set noise stream.
SpectrumSet synthesize_set(const PhantomSpec& spec, const models::ZModelParams& truth,
                           const LabelMap& labels, Rng& rng) {
    std::vector<Spectrum> spectra;
    spectra.reserve(spec.b1_ut.size());
    for (double b1 : spec.b1_ut) {
        const double w1 = b1_to_radps(b1, spec.ctx);
        std::vector<double> z = models::z_forward(truth, spec.offsets_ppm, w1, spec.ctx);
        if (spec.noise_sigma > 0.0) {
            for (double& zi : z)
                zi = std::clamp(zi + spec.noise_sigma * rng.normal(), kZFloor, kZCeil);
        }
        spectra.emplace_back(spec.offsets_ppm, std::move(z), b1);
    }
    return SpectrumSet(std::move(spectra), labels);
}

} // namespace

PhantomDataset generate(const PhantomSpec& spec) {
    spec.validate();
    PhantomDataset data;
    data.spec = spec;
    const std::size_t combos = spec.combo_count();
    const std::size_t reps = static_cast<std::size_t>(spec.replicates);
    data.sets.reserve(combos * reps);
    for (std::size_t combo = 0; combo < combos; ++combo) {
        const models::ZModelParams truth = spec.true_params(combo);
        const LabelMap labels = spec.label(combo);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const std::size_t set_index = combo * reps + rep;
            Rng rng(spec.seed + set_index);
            data.sets.push_back(synthesize_set(spec, truth, labels, rng));
        }
    }
    return data;
}

PhantomDataset inject_b0_shift(const PhantomDataset& data, double shift_ppm,
                               double jitter_sigma_ppm, std::uint64_t seed) {
    const PhantomSpec& spec = data.spec;
    spec.validate();
    const double half_span = 0.5 * (spec.offsets_ppm.back() - spec.offsets_ppm.front());

    PhantomDataset out;
    out.spec = spec;
    out.sets.reserve(data.sets.size());
    std::vector<double> shifted(spec.offsets_ppm.size());
    for (std::size_t set_index = 0; set_index < data.sets.size(); ++set_index) {
        const std::size_t combo = data.combo_of(set_index);
        const models::ZModelParams truth = spec.true_params(combo);
        const LabelMap labels = spec.label(combo);
        Rng noise_rng(spec.seed + set_index); // same stream as generate()
        Rng jitter_rng(seed + set_index);

        std::vector<Spectrum> spectra;
        spectra.reserve(spec.b1_ut.size());
        for (double b1 : spec.b1_ut) {
            double shift = shift_ppm;
            if (jitter_sigma_ppm > 0.0)
                shift += jitter_sigma_ppm * jitter_rng.normal();
            if (!(std::abs(shift) < half_span))
                throw ShiftTooLarge("inject_b0_shift: |" + std::to_string(shift) +
                                    "| ppm reaches the grid half-span");
            for (std::size_t i = 0; i < shifted.size(); ++i)
                shifted[i] = spec.offsets_ppm[i] - shift;

            const double w1 = b1_to_radps(b1, spec.ctx);
            std::vector<double> z = models::z_forward(truth, shifted, w1, spec.ctx);
            if (spec.noise_sigma > 0.0) {
                for (double& zi : z)
                    zi = std::clamp(zi + spec.noise_sigma * noise_rng.normal(), kZFloor,
                                    kZCeil);
            }
            spectra.emplace_back(spec.offsets_ppm, std::move(z), b1);
        }
        out.sets.emplace_back(std::move(spectra), labels);
    }
    return out;
}

void write_phantom_dataset(const std::filesystem::path& dir, const PhantomDataset& data) {
    nlohmann::json extra;
    extra["generator"] = phantom_spec_to_json(data.spec);
    io::write_dataset(dir, data.sets, extra);
}

PhantomDataset read_phantom_dataset(const std::filesystem::path& dir) {
    PhantomDataset data;
    const nlohmann::json manifest = io::read_manifest(dir);
    if (!manifest.contains("generator"))
        throw ConfigError("dataset manifest lacks the 'generator' spec");
    data.spec = phantom_spec_from_json(manifest["generator"]);
    data.sets = io::read_dataset(dir);
    return data;
}

} // namespace cestfit::synth
