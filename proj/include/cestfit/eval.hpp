#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cestfit/models/params.hpp"

namespace cestfit::eval {

// Which Lorentzian readout to regress against concentration; exchange models
// always use the pool fraction f/R1a.
enum class LorentzianContrast { Amplitude, Area };

// Per-sample contrast scalar from a flattened fitted parameter vector.
// pool_index is zero-based.
double extract_contrast(std::span<const double> params, models::ModelKind kind,
                        std::size_t pool_index,
                        LorentzianContrast mode = LorentzianContrast::Amplitude);

// Slope of y ~ s*x with the intercept forced to zero: s = sum(xy)/sum(x^2).
double ols_zero_intercept(std::span<const double> x, std::span<const double> y);

// Zero-intercept coefficient of determination: 1 - sum((y-yhat)^2)/sum(y^2).
// May be negative when the prediction is worse than predicting zero.
double r2_zero_intercept(std::span<const double> y, std::span<const double> y_hat);

struct SummaryStat {
    double mean = 0.0;
    double std = 0.0;
};

// Mean and standard deviation over folds (sample std by default, population
// on request). Values are summed in sorted order so the result is exactly
// permutation-invariant.
SummaryStat cross_val_summary(std::span<const double> values, bool sample_std = true);

struct RuntimeStats {
    double mean_ms = 0.0; // per datapoint
    double std_ms = 0.0;  // per datapoint, over repeats
    double total_mean_ms = 0.0;
    std::size_t datapoints = 0;
    int repeats = 0;
};

// Wall-clock timing of run_once (which must process the whole dataset),
// amortized per datapoint. Warm-up runs are discarded; single-threaded.
RuntimeStats runtime_bench(const std::function<void()>& run_once, std::size_t datapoints,
                           int repeats = 3, int warmups = 2);

// Per-solute regression of contrast against true concentration, one entry
// per cross-validation fold.
struct SoluteEval {
    std::string solute;
    std::vector<double> fold_slope;
    std::vector<double> fold_r2;
    SummaryStat slope;
    SummaryStat r2;
};

// fold_truth/fold_contrast: per fold, the true concentrations and extracted
// contrasts of that fold's samples. Fits the zero-intercept regression per
// fold and aggregates across folds.
SoluteEval evaluate_solute(const std::string& name,
                           const std::vector<std::vector<double>>& fold_truth,
                           const std::vector<std::vector<double>>& fold_contrast);

struct EvalReport {
    std::string method;
    std::string model;
    std::vector<SoluteEval> solutes;
    bool has_runtime = false;
    RuntimeStats runtime;
};

nlohmann::json eval_report_to_json(const EvalReport& report);

// Aligned text table: one row per solute, then a runtime line when present.
std::string eval_report_table(const EvalReport& report);

} // namespace cestfit::eval
