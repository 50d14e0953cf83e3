// cestfit command line: synthesize phantom datasets, fit them with the
// classical solvers or a trained network, train, predict, evaluate, and
// benchmark. Exit codes: 0 success (per-row fit failures are flagged in the
// output, never dropped), 2 usage or configuration error, 1 internal error.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cestfit/errors.hpp"
#include "cestfit/eval.hpp"
#include "cestfit/field_context.hpp"
#include "cestfit/models/bounds.hpp"
#include "cestfit/models/params.hpp"
#include "cestfit/neural/network.hpp"
#include "cestfit/rng.hpp"
#include "cestfit/solvers/fit.hpp"
#include "cestfit/spectrum_io.hpp"
#include "cestfit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cestfit;

namespace {

bool g_quiet = false;

// Shortest representation that round-trips to the same double.
std::string fmt_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return doc;
}

void write_json_file(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out)
        throw IoError("write failed for " + path.string());
}

// Input datasets are read-only; everything lands in --out.
void ensure_output_dir(const fs::path& out, const fs::path& data) {
    if (!data.empty() && fs::weakly_canonical(out) == fs::weakly_canonical(data))
        throw ConfigError("--out must differ from the input dataset directory");
    fs::create_directories(out);
}

FieldContext context_of(const json& manifest) {
    if (manifest.contains("generator") && manifest["generator"].contains("b0_tesla"))
        return FieldContext(manifest["generator"]["b0_tesla"].get<double>());
    return FieldContext();
}

// Bounds precedence: explicit --bounds file, else presets built from the
// solutes recorded in the dataset manifest.
models::ModelBounds resolve_bounds(const std::string& bounds_path, const std::string& model_name,
                                   const fs::path& data_dir, const FieldContext& ctx) {
    if (!bounds_path.empty()) {
        models::ModelBounds mb = models::load_model_bounds(bounds_path, ctx);
        if (!model_name.empty() && mb.kind != models::model_kind_from_string(model_name))
            throw ConfigError("bounds file is for model '" + models::to_string(mb.kind) +
                              "', requested '" + model_name + "'");
        return mb;
    }
    if (model_name.empty())
        throw ConfigError("pass --model or --bounds");
    const models::ModelKind kind = models::model_kind_from_string(model_name);
    const json manifest = io::read_manifest(data_dir);
    if (!manifest.contains("generator") || !manifest["generator"].contains("solutes"))
        throw ConfigError("dataset manifest has no generator solutes; pass --bounds");
    std::vector<models::PoolSite> sites;
    for (const auto& s : manifest["generator"]["solutes"])
        sites.push_back({s.at("name").get<std::string>(), s.at("d_omega_ppm").get<double>()});
    if (kind == models::ModelKind::Lorentzian)
        return models::lorentzian_bounds(sites, 0.05, 1.0, ctx);
    return models::exchange_bounds(kind, sites);
}

// Run metadata written next to the row file; eval reads pool and layout
// names from here instead of requiring the bounds again.
json run_sidecar(const std::string& command, const std::string& method,
                 const models::ModelBounds& mb, const FieldContext& ctx, const fs::path& data,
                 std::uint64_t seed) {
    return json{{"command", command},
                {"method", method},
                {"model", models::to_string(mb.kind)},
                {"dataset", data.string()},
                {"pool_names", mb.pool_names},
                {"param_names", models::layout_names(mb.kind, mb.pool_names)},
                {"seed", seed},
                {"bounds", models::model_bounds_to_json(mb, ctx)}};
}

json fit_row(std::size_t index, const SpectrumSet& set, models::ModelKind kind,
             const models::ModelBounds& mb, solvers::SolverKind solver,
             const solvers::SolverConfig& scfg, const FieldContext& ctx) {
    json row{{"index", index},
             {"set", io::set_dir_name(index)},
             {"fold", -1},
             {"error", nullptr},
             {"converged", false}};
    try {
        const solvers::FitResult r = solvers::fit(kind, set, mb, solver, ctx, scfg);
        row["params"] = r.params;
        row["objective"] = r.objective_value;
        row["iterations"] = r.iterations;
        row["function_evals"] = r.function_evals;
        row["converged"] = r.converged;
        row["reason"] = r.reason;
    } catch (const Error& e) {
        row["error"] = e.what();
    }
    return row;
}

// Fans out across sets; rows are emitted in input order as soon as they are
// ready and flushed, so an interrupt loses at most the in-flight fits.
void fit_all(const std::vector<SpectrumSet>& sets, models::ModelKind kind,
             const models::ModelBounds& mb, solvers::SolverKind solver,
             const solvers::SolverConfig& scfg, const FieldContext& ctx, int jobs,
             const std::function<void(const json&)>& emit) {
    const std::size_t n = sets.size();
    std::vector<std::optional<json>> done(n);
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            json row = fit_row(i, sets[i], kind, mb, solver, scfg, ctx);
            {
                std::lock_guard<std::mutex> lock(mu);
                done[i] = std::move(row);
            }
            cv.notify_one();
        }
    };
    const int threads = std::max(1, std::min(jobs, static_cast<int>(n)));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back(work);
    {
        std::unique_lock<std::mutex> lock(mu);
        for (std::size_t i = 0; i < n; ++i) {
            cv.wait(lock, [&] { return done[i].has_value(); });
            emit(*done[i]);
            done[i].reset();
        }
    }
    for (std::thread& t : pool)
        t.join();
}

// One row per requested set from a single checkpoint; the objective column
// is the mean squared reconstruction error of the decoded parameters.
std::vector<json> network_rows(const neural::NetworkState& state,
                               const std::vector<SpectrumSet>& sets,
                               const std::vector<std::size_t>& indices,
                               const models::ModelBounds& mb, const FieldContext& ctx,
                               int fold) {
    std::vector<SpectrumSet> subset;
    subset.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= sets.size())
            throw ConfigError("prediction index " + std::to_string(i) + " outside dataset");
        subset.push_back(sets[i]);
    }
    const std::vector<neural::SampleData> samples = neural::encode_inputs(mb.kind, subset, ctx);
    const neural::Prediction pred = neural::predict(state, samples, mb, ctx);
    std::vector<json> rows;
    rows.reserve(indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const double mse = (pred.reconstructions[j] - samples[j].x).array().square().mean();
        rows.push_back(json{{"index", indices[j]},
                            {"set", io::set_dir_name(indices[j])},
                            {"fold", fold},
                            {"error", nullptr},
                            {"converged", true},
                            {"reason", "network"},
                            {"iterations", 0},
                            {"function_evals", 0},
                            {"objective", mse},
                            {"params", pred.params[j]}});
    }
    return rows;
}

void print_fit_summary(const std::vector<json>& rows) {
    if (g_quiet)
        return;
    std::size_t converged = 0, flagged = 0, failed = 0;
    std::vector<double> objectives;
    for (const json& row : rows) {
        if (!row["error"].is_null()) {
            ++failed;
            continue;
        }
        objectives.push_back(row["objective"].get<double>());
        (row["converged"].get<bool>() ? converged : flagged) += 1;
    }
    double median = 0.0;
    if (!objectives.empty()) {
        std::sort(objectives.begin(), objectives.end());
        median = objectives[objectives.size() / 2];
    }
    std::printf("rows: %zu  converged: %zu  not converged: %zu  errors: %zu  "
                "median objective: %.6g\n",
                rows.size(), converged, flagged, failed, median);
}

struct SynthOpts {
    std::string spec_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replicates = 0;
    double noise = 0.0;
    bool noise_set = false;
    double b0_shift = 0.0;
    double b0_jitter = 0.0;
};

int run_synth(const SynthOpts& opt) {
    synth::PhantomSpec spec = opt.spec_path.empty() ? synth::PhantomSpec::defaults()
                                                    : synth::load_phantom_spec(opt.spec_path);
    if (opt.seed_set)
        spec.seed = opt.seed;
    if (opt.replicates > 0)
        spec.replicates = opt.replicates;
    if (opt.noise_set)
        spec.noise_sigma = opt.noise;
    spec.validate();
    synth::PhantomDataset data = synth::generate(spec);
    if (opt.b0_shift != 0.0 || opt.b0_jitter > 0.0)
        data = synth::inject_b0_shift(data, opt.b0_shift, opt.b0_jitter, spec.seed);
    ensure_output_dir(opt.out, {});
    synth::write_phantom_dataset(opt.out, data);
    if (!g_quiet)
        std::printf("phantoms: %zu combos x %d replicates = %zu sets, %zu B1 curves, "
                    "%zu offsets\n",
                    spec.combo_count(), spec.replicates, data.sets.size(), spec.b1_ut.size(),
                    spec.offsets_ppm.size());
    return 0;
}

struct FitOpts {
    std::string data;
    std::string model;
    std::string solver;
    std::string bounds;
    std::string checkpoint;
    std::string out;
    int jobs = 1;
    int max_iter = 2000;
    std::uint64_t seed = 0;
};

int run_fit(const FitOpts& opt) {
    const models::ModelKind kind = models::model_kind_from_string(opt.model);
    const json manifest = io::read_manifest(opt.data);
    const FieldContext ctx = context_of(manifest);
    const models::ModelBounds mb = resolve_bounds(opt.bounds, opt.model, opt.data, ctx);
    const std::vector<SpectrumSet> sets = io::read_dataset(opt.data);
    ensure_output_dir(opt.out, opt.data);

    solvers::SolverConfig scfg;
    scfg.max_iterations = opt.max_iter;
    scfg.validate();

    json sidecar = run_sidecar("fit", opt.solver, mb, ctx, opt.data, opt.seed);
    sidecar["jobs"] = opt.jobs;
    sidecar["max_iterations"] = opt.max_iter;
    sidecar["rows"] = sets.size();
    write_json_file(fs::path(opt.out) / "fit.json", sidecar);

    std::ofstream stream(fs::path(opt.out) / "fit.jsonl");
    if (!stream)
        throw IoError("cannot write " + (fs::path(opt.out) / "fit.jsonl").string());
    std::vector<json> rows;
    rows.reserve(sets.size());
    auto emit = [&](const json& row) {
        stream << row.dump() << '\n';
        stream.flush();
        rows.push_back(row);
    };

    if (opt.solver == "network") {
        if (opt.checkpoint.empty())
            throw ConfigError("--solver network requires --checkpoint");
        const neural::NetworkState state = neural::load_checkpoint(opt.checkpoint);
        std::vector<std::size_t> all(sets.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        for (const json& row : network_rows(state, sets, all, mb, ctx, -1))
            emit(row);
    } else {
        const solvers::SolverKind solver = solvers::solver_kind_from_string(opt.solver);
        fit_all(sets, kind, mb, solver, scfg, ctx, opt.jobs, emit);
    }
    print_fit_summary(rows);
    return 0;
}

struct TrainOpts {
    std::string data;
    std::string model;
    std::string bounds;
    std::string preset = "desk";
    std::string out;
    int epochs = 0;
    double lr = 0.0; // 0 picks the preset default
    int folds = 5;
    int batch = 32;
    std::uint64_t seed = 0;
};

int run_train(const TrainOpts& opt) {
    const models::ModelKind kind = models::model_kind_from_string(opt.model);
    const json manifest = io::read_manifest(opt.data);
    const FieldContext ctx = context_of(manifest);
    const models::ModelBounds mb = resolve_bounds(opt.bounds, opt.model, opt.data, ctx);
    const std::vector<SpectrumSet> sets = io::read_dataset(opt.data);
    ensure_output_dir(opt.out, opt.data);

    const neural::NetworkConfig net = opt.preset == "paper" ? neural::NetworkConfig::paper()
                                                            : neural::NetworkConfig::desk();
    neural::TrainConfig tcfg;
    tcfg.epochs = opt.epochs;
    tcfg.learning_rate = opt.lr > 0.0 ? opt.lr : (opt.preset == "paper" ? 1e-5 : 1e-3);
    tcfg.folds = opt.folds;
    tcfg.batch_size = opt.batch;
    tcfg.seed = opt.seed;

    const fs::path loss_path = fs::path(opt.out) / "loss.csv";
    std::ofstream loss(loss_path);
    if (!loss)
        throw IoError("cannot write " + loss_path.string());
    loss << "fold,epoch,train_loss,val_loss\n";
    loss.flush();
    const int epochs = tcfg.epochs_for(kind);
    const int stride = std::max(1, epochs / 10);
    tcfg.on_epoch = [&](const neural::EpochLoss& e) {
        loss << e.fold << ',' << e.epoch << ',' << fmt_double(e.train_loss) << ','
             << fmt_double(e.val_loss) << '\n';
        loss.flush();
        if (!g_quiet && (e.epoch == 1 || e.epoch % stride == 0 || e.epoch == epochs))
            std::printf("fold %d epoch %4d  train %.6g  val %.6g\n", e.fold, e.epoch,
                        e.train_loss, e.val_loss);
    };

    const std::vector<neural::FoldResult> folds = neural::train(kind, sets, mb, net, tcfg, ctx);

    json fold_info = json::array();
    for (const neural::FoldResult& fr : folds) {
        const std::string name = "fold_" + std::to_string(fr.fold) + ".ckpt";
        neural::save_checkpoint(fr.state, (fs::path(opt.out) / name).string());
        fold_info.push_back({{"fold", fr.fold},
                             {"checkpoint", name},
                             {"held_out", fr.held_out},
                             {"first_val_loss", fr.history.front().val_loss},
                             {"final_train_loss", fr.history.back().train_loss},
                             {"final_val_loss", fr.history.back().val_loss}});
    }
    json doc = run_sidecar("train", "network", mb, ctx, opt.data, opt.seed);
    doc["preset"] = opt.preset;
    doc["epochs"] = epochs;
    doc["learning_rate"] = tcfg.learning_rate;
    doc["folds"] = tcfg.folds;
    doc["batch_size"] = tcfg.batch_size;
    doc["folds_detail"] = fold_info;
    write_json_file(fs::path(opt.out) / "train.json", doc);
    return 0;
}

struct PredictOpts {
    std::string data;
    std::string checkpoint;
    std::string train_dir;
    std::string model;
    std::string bounds;
    std::string out;
};

int run_predict(const PredictOpts& opt) {
    if (opt.checkpoint.empty() == opt.train_dir.empty())
        throw ConfigError("pass exactly one of --checkpoint or --train");
    const json manifest = io::read_manifest(opt.data);
    const FieldContext ctx = context_of(manifest);
    const std::vector<SpectrumSet> sets = io::read_dataset(opt.data);
    ensure_output_dir(opt.out, opt.data);

    models::ModelBounds mb;
    std::vector<json> rows;
    if (!opt.checkpoint.empty()) {
        mb = resolve_bounds(opt.bounds, opt.model, opt.data, ctx);
        const neural::NetworkState state = neural::load_checkpoint(opt.checkpoint);
        std::vector<std::size_t> all(sets.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        rows = network_rows(state, sets, all, mb, ctx, -1);
    } else {
        // Held-out prediction: each fold's checkpoint scores only the sets
        // that fold never trained on.
        const json tr = read_json_file(fs::path(opt.train_dir) / "train.json");
        mb = models::model_bounds_from_json(tr.at("bounds"), ctx);
        for (const auto& fd : tr.at("folds_detail")) {
            const neural::NetworkState state = neural::load_checkpoint(
                (fs::path(opt.train_dir) / fd.at("checkpoint").get<std::string>()).string());
            const auto held = fd.at("held_out").get<std::vector<std::size_t>>();
            for (json& row : network_rows(state, sets, held, mb, ctx, fd.at("fold").get<int>()))
                rows.push_back(std::move(row));
        }
        std::sort(rows.begin(), rows.end(), [](const json& a, const json& b) {
            return a["index"].get<std::size_t>() < b["index"].get<std::size_t>();
        });
    }

    json sidecar = run_sidecar("predict", "network", mb, ctx, opt.data, 0);
    sidecar["checkpoint"] = opt.checkpoint.empty() ? opt.train_dir : opt.checkpoint;
    sidecar["rows"] = rows.size();
    write_json_file(fs::path(opt.out) / "predict.json", sidecar);

    std::ofstream stream(fs::path(opt.out) / "predict.jsonl");
    if (!stream)
        throw IoError("cannot write " + (fs::path(opt.out) / "predict.jsonl").string());
    double mse = 0.0;
    for (const json& row : rows) {
        stream << row.dump() << '\n';
        stream.flush();
        mse += row["objective"].get<double>();
    }
    if (!g_quiet && !rows.empty())
        std::printf("predicted %zu sets, mean reconstruction mse %.6g\n", rows.size(),
                    mse / static_cast<double>(rows.size()));
    return 0;
}

struct EvalOpts {
    std::string results;
    std::string data;
    std::string contrast = "amplitude";
    std::string out;
    int folds = 5;
    std::uint64_t seed = 0;
};

int run_eval(const EvalOpts& opt) {
    const fs::path results(opt.results);
    fs::path sidecar_path = results;
    sidecar_path.replace_extension(".json");
    const json sidecar = read_json_file(sidecar_path);
    const models::ModelKind kind =
        models::model_kind_from_string(sidecar.at("model").get<std::string>());
    const auto pool_names = sidecar.at("pool_names").get<std::vector<std::string>>();

    std::ifstream in(results);
    if (!in)
        throw IoError("cannot open " + results.string());
    std::vector<json> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw ConfigError(results.string() + ": " + e.what());
        }
    }
    if (rows.empty())
        throw InsufficientData("eval: no result rows in " + results.string());

    const std::vector<SpectrumSet> sets = io::read_dataset(opt.data);

    // Fold grouping: per-row folds from held-out prediction when present,
    // otherwise the same seeded partition the trainer would use.
    bool tagged = true, untagged = true;
    for (const json& row : rows) {
        const int f = row.value("fold", -1);
        tagged = tagged && f >= 0;
        untagged = untagged && f < 0;
    }
    if (!tagged && !untagged)
        throw ConfigError("eval: result rows mix tagged and untagged folds");
    std::vector<int> fold_of;
    fold_of.reserve(rows.size());
    int fold_count = opt.folds;
    if (tagged) {
        fold_count = 0;
        for (const json& row : rows) {
            fold_of.push_back(row["fold"].get<int>());
            fold_count = std::max(fold_count, fold_of.back() + 1);
        }
    } else {
        const std::vector<int> assign = kfold_assignments(sets.size(), opt.folds, opt.seed);
        for (const json& row : rows) {
            const std::size_t idx = row["index"].get<std::size_t>();
            if (idx >= sets.size())
                throw ConfigError("eval: row index outside dataset");
            fold_of.push_back(assign[idx]);
        }
    }

    std::size_t dropped = 0;
    for (const json& row : rows)
        dropped += !row["error"].is_null();

    const eval::LorentzianContrast mode = opt.contrast == "area"
                                              ? eval::LorentzianContrast::Area
                                              : eval::LorentzianContrast::Amplitude;
    eval::EvalReport report;
    report.method = sidecar.value("method", "unknown");
    report.model = sidecar.at("model").get<std::string>();
    for (std::size_t p = 0; p < pool_names.size(); ++p) {
        std::vector<std::vector<double>> truth(static_cast<std::size_t>(fold_count));
        std::vector<std::vector<double>> contrast(static_cast<std::size_t>(fold_count));
        bool labeled = false;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const json& row = rows[r];
            if (!row["error"].is_null())
                continue;
            const std::size_t idx = row["index"].get<std::size_t>();
            if (idx >= sets.size())
                throw ConfigError("eval: row index outside dataset");
            const auto& label = sets[idx].label();
            if (!label || !label->count(pool_names[p]))
                continue;
            labeled = true;
            const auto params = row["params"].get<std::vector<double>>();
            const std::size_t f = static_cast<std::size_t>(fold_of[r]);
            truth[f].push_back(label->at(pool_names[p]));
            contrast[f].push_back(eval::extract_contrast(params, kind, p, mode));
        }
        if (!labeled)
            continue;
        report.solutes.push_back(eval::evaluate_solute(pool_names[p], truth, contrast));
    }
    if (report.solutes.empty())
        throw ConfigError("eval: dataset labels share no solute with the fitted pools");

    std::fputs(eval::eval_report_table(report).c_str(), stdout);
    if (!g_quiet && dropped > 0)
        std::printf("dropped %zu rows with fit errors\n", dropped);
    if (!opt.out.empty()) {
        ensure_output_dir(opt.out, opt.data);
        write_json_file(fs::path(opt.out) / "report.json", eval_report_to_json(report));
    }
    return 0;
}

struct BenchOpts {
    std::string data;
    std::string model;
    std::string bounds;
    std::string checkpoint;
    std::string out;
    std::vector<std::string> solvers{"nelder-mead", "powell", "lbfgsb"};
    int repeats = 3;
    int warmups = 2;
    int max_iter = 2000;
    std::size_t limit = 0;
};

int run_bench(const BenchOpts& opt) {
    const models::ModelKind kind = models::model_kind_from_string(opt.model);
    const json manifest = io::read_manifest(opt.data);
    const FieldContext ctx = context_of(manifest);
    const models::ModelBounds mb = resolve_bounds(opt.bounds, opt.model, opt.data, ctx);
    std::vector<SpectrumSet> sets = io::read_dataset(opt.data);
    if (opt.limit > 0 && sets.size() > opt.limit)
        sets.erase(sets.begin() + static_cast<std::ptrdiff_t>(opt.limit), sets.end());
    if (sets.empty())
        throw InsufficientData("bench: dataset is empty");

    solvers::SolverConfig scfg;
    scfg.max_iterations = opt.max_iter;
    scfg.validate();

    struct MethodTime {
        std::string method;
        eval::RuntimeStats stats;
    };
    std::vector<MethodTime> table;
    for (const std::string& name : opt.solvers) {
        const solvers::SolverKind sk = solvers::solver_kind_from_string(name);
        table.push_back({name, eval::runtime_bench(
                                   [&] {
                                       for (const SpectrumSet& set : sets)
                                           (void)solvers::fit(kind, set, mb, sk, ctx, scfg);
                                   },
                                   sets.size(), opt.repeats, opt.warmups)});
    }
    if (!opt.checkpoint.empty()) {
        const neural::NetworkState state = neural::load_checkpoint(opt.checkpoint);
        table.push_back({"network", eval::runtime_bench(
                                        [&] { (void)neural::predict(state, sets, mb, ctx); },
                                        sets.size(), opt.repeats, opt.warmups)});
    }

    std::printf("%-12s %-10s %14s %12s %12s %12s\n", "method", "model", "ms/datapoint", "std",
                "total ms", "datapoints");
    for (const MethodTime& mt : table)
        std::printf("%-12s %-10s %14.4f %12.4f %12.1f %12zu\n", mt.method.c_str(),
                    opt.model.c_str(), mt.stats.mean_ms, mt.stats.std_ms,
                    mt.stats.total_mean_ms, mt.stats.datapoints);

    if (!opt.out.empty()) {
        ensure_output_dir(opt.out, opt.data);
        json doc{{"model", opt.model},
                 {"datapoints", sets.size()},
                 {"repeats", opt.repeats},
                 {"methods", json::array()}};
        for (const MethodTime& mt : table)
            doc["methods"].push_back({{"method", mt.method},
                                      {"ms_per_datapoint", mt.stats.mean_ms},
                                      {"std_ms", mt.stats.std_ms},
                                      {"total_mean_ms", mt.stats.total_mean_ms}});
        write_json_file(fs::path(opt.out) / "bench.json", doc);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CEST Z-spectrum quantification pipeline"};
    app.require_subcommand(1);
    app.add_flag("--quiet", g_quiet, "Suppress progress output");

    SynthOpts so;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic phantom dataset");
    synth_cmd->add_option("--spec", so.spec_path,
                          "Phantom spec JSON (defaults to the built-in two-solute batch)");
    auto* seed_opt = synth_cmd->add_option("--seed", so.seed, "Override the spec RNG seed");
    synth_cmd->add_option("--replicates", so.replicates, "Override replicates per phantom")
        ->check(CLI::PositiveNumber);
    auto* noise_opt = synth_cmd->add_option("--noise", so.noise, "Override noise sigma on Z")
                          ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--b0-shift", so.b0_shift, "Shift all spectra by this B0 offset, ppm");
    synth_cmd->add_option("--b0-jitter", so.b0_jitter, "Per-spectrum B0 jitter sigma, ppm")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--out", so.out, "Output dataset directory")->required();

    FitOpts fo;
    auto* fit_cmd = app.add_subcommand("fit", "Fit every spectrum set in a dataset");
    fit_cmd->add_option("--data", fo.data, "Dataset directory")->required();
    fit_cmd->add_option("--model", fo.model, "Signal model")
        ->required()
        ->check(CLI::IsMember({"lorentzian", "z", "mtrrex"}));
    fit_cmd->add_option("--solver", fo.solver, "Optimizer or 'network'")
        ->required()
        ->check(CLI::IsMember({"nelder-mead", "powell", "lbfgsb", "network"}));
    fit_cmd->add_option("--bounds", fo.bounds,
                        "Bounds JSON (defaults to presets from the dataset manifest)");
    fit_cmd->add_option("--checkpoint", fo.checkpoint, "Checkpoint for --solver network");
    fit_cmd->add_option("--jobs", fo.jobs, "Worker threads")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--max-iter", fo.max_iter, "Solver iteration cap")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--seed", fo.seed, "Recorded in the run metadata");
    fit_cmd->add_option("--out", fo.out, "Output directory")->required();

    TrainOpts to;
    auto* train_cmd = app.add_subcommand("train", "Self-supervised k-fold network training");
    train_cmd->add_option("--data", to.data, "Dataset directory")->required();
    train_cmd->add_option("--model", to.model, "Signal model")
        ->required()
        ->check(CLI::IsMember({"lorentzian", "z", "mtrrex"}));
    train_cmd->add_option("--bounds", to.bounds,
                          "Bounds JSON (defaults to presets from the dataset manifest)");
    train_cmd->add_option("--preset", to.preset, "Network size preset")
        ->check(CLI::IsMember({"desk", "paper"}));
    train_cmd->add_option("--epochs", to.epochs, "Epochs per fold (0 = model default)")
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--lr", to.lr, "Learning rate (0 = preset default)")
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--folds", to.folds, "Cross-validation folds")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", to.batch, "Batch size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", to.seed, "Training RNG seed");
    train_cmd->add_option("--out", to.out, "Output directory")->required();

    PredictOpts po;
    auto* predict_cmd = app.add_subcommand("predict", "Decode parameters with a trained network");
    predict_cmd->add_option("--data", po.data, "Dataset directory")->required();
    predict_cmd->add_option("--checkpoint", po.checkpoint, "Single checkpoint for all sets");
    predict_cmd->add_option("--train", po.train_dir,
                            "Training output directory for held-out per-fold prediction");
    predict_cmd->add_option("--model", po.model, "Signal model (with --checkpoint)")
        ->check(CLI::IsMember({"lorentzian", "z", "mtrrex"}));
    predict_cmd->add_option("--bounds", po.bounds, "Bounds JSON (with --checkpoint)");
    predict_cmd->add_option("--out", po.out, "Output directory")->required();

    EvalOpts eo;
    auto* eval_cmd = app.add_subcommand("eval", "Regress contrasts against labels per solute");
    eval_cmd->add_option("--results", eo.results, "fit.jsonl or predict.jsonl")->required();
    eval_cmd->add_option("--data", eo.data, "Dataset directory with labels")->required();
    eval_cmd->add_option("--contrast", eo.contrast, "Lorentzian contrast readout")
        ->check(CLI::IsMember({"amplitude", "area"}));
    eval_cmd->add_option("--folds", eo.folds, "Folds when rows carry none")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--seed", eo.seed, "Partition seed when rows carry no folds");
    eval_cmd->add_option("--out", eo.out, "Optional output directory for report.json");

    BenchOpts bo;
    auto* bench_cmd = app.add_subcommand("bench", "Time solvers and network on one dataset");
    bench_cmd->add_option("--data", bo.data, "Dataset directory")->required();
    bench_cmd->add_option("--model", bo.model, "Signal model")
        ->required()
        ->check(CLI::IsMember({"lorentzian", "z", "mtrrex"}));
    bench_cmd->add_option("--solvers", bo.solvers, "Solvers to time")
        ->check(CLI::IsMember({"nelder-mead", "powell", "lbfgsb"}));
    bench_cmd->add_option("--checkpoint", bo.checkpoint, "Also time this network checkpoint");
    bench_cmd->add_option("--bounds", bo.bounds,
                          "Bounds JSON (defaults to presets from the dataset manifest)");
    bench_cmd->add_option("--repeats", bo.repeats, "Timed repeats")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--warmups", bo.warmups, "Discarded warm-up runs")
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--max-iter", bo.max_iter, "Solver iteration cap")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--limit", bo.limit, "Use only the first N sets (0 = all)");
    bench_cmd->add_option("--out", bo.out, "Optional output directory for bench.json");

    for (CLI::App* sub : app.get_subcommands(nullptr))
        sub->fallthrough();

    int rc = 0;
    synth_cmd->callback([&] {
        so.seed_set = seed_opt->count() > 0;
        so.noise_set = noise_opt->count() > 0;
        rc = run_synth(so);
    });
    fit_cmd->callback([&] { rc = run_fit(fo); });
    train_cmd->callback([&] { rc = run_train(to); });
    predict_cmd->callback([&] { rc = run_predict(po); });
    eval_cmd->callback([&] { rc = run_eval(eo); });
    bench_cmd->callback([&] { rc = run_bench(bo); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return rc;
}
