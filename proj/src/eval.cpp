#include "cestfit/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cestfit/errors.hpp"
#include "cestfit/models/forward.hpp"

namespace cestfit::eval {

double extract_contrast(std::span<const double> params, models::ModelKind kind,
                        std::size_t pool_index, LorentzianContrast mode) {
    if (kind == models::ModelKind::Lorentzian) {
        if (params.size() % 3 != 0 || params.empty())
            throw LengthMismatch("extract_contrast: malformed Lorentzian layout");
        const std::size_t pools = params.size() / 3;
        if (pool_index >= pools)
            throw IndexOutOfRange("extract_contrast: pool " + std::to_string(pool_index) +
                                  " of " + std::to_string(pools));
        if (mode == LorentzianContrast::Amplitude)
            return params[3 * pool_index];
        return models::area_under_curve(models::unflatten_lorentzian(params), pool_index);
    }
    if (params.size() < 5 || (params.size() - 1) % 4 != 0)
        throw LengthMismatch("extract_contrast: malformed exchange-model layout");
    const std::size_t pools = (params.size() - 1) / 4;
    if (pool_index >= pools)
        throw IndexOutOfRange("extract_contrast: pool " + std::to_string(pool_index) + " of " +
                              std::to_string(pools));
    return params[1 + 4 * pool_index];
}

double ols_zero_intercept(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw LengthMismatch("ols_zero_intercept: x and y lengths differ");
    if (x.size() < 2)
        throw DegenerateDesign("ols_zero_intercept: need at least 2 points");
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    if (sxx == 0.0)
        throw DegenerateDesign("ols_zero_intercept: all regressors are zero");
    return sxy / sxx;
}

double r2_zero_intercept(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size())
        throw LengthMismatch("r2_zero_intercept: lengths differ");
    if (y.size() < 2)
        throw DegenerateTarget("r2_zero_intercept: need at least 2 points");
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - y_hat[i];
        ss_res += r * r;
        ss_tot += y[i] * y[i];
    }
    if (ss_tot == 0.0)
        throw DegenerateTarget("r2_zero_intercept: target is identically zero");
    return 1.0 - ss_res / ss_tot;
}

SummaryStat cross_val_summary(std::span<const double> values, bool sample_std) {
    if (values.size() < 2)
        throw InsufficientData("cross_val_summary: need at least 2 folds");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted)
        sum += v;
    const double n = static_cast<double>(sorted.size());
    SummaryStat stat;
    stat.mean = sum / n;
    double ss = 0.0;
    for (double v : sorted)
        ss += (v - stat.mean) * (v - stat.mean);
    stat.std = std::sqrt(ss / (sample_std ? n - 1.0 : n));
    return stat;
}

RuntimeStats runtime_bench(const std::function<void()>& run_once, std::size_t datapoints,
                           int repeats, int warmups) {
    if (datapoints == 0)
        throw ConfigError("runtime_bench: dataset must be nonempty");
    if (repeats < 1)
        throw ConfigError("runtime_bench: need at least one repeat");
    using clock = std::chrono::steady_clock;
    for (int i = 0; i < warmups; ++i)
        run_once();
    std::vector<double> totals_ms;
    totals_ms.reserve(static_cast<std::size_t>(repeats));
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = clock::now();
        run_once();
        const auto t1 = clock::now();
        totals_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    RuntimeStats stats;
    stats.datapoints = datapoints;
    stats.repeats = repeats;
    double sum = 0.0;
    for (double t : totals_ms)
        sum += t;
    stats.total_mean_ms = sum / static_cast<double>(repeats);
    stats.mean_ms = stats.total_mean_ms / static_cast<double>(datapoints);
    if (repeats > 1) {
        double ss = 0.0;
        for (double t : totals_ms) {
            const double d = t / static_cast<double>(datapoints) - stats.mean_ms;
            ss += d * d;
        }
        stats.std_ms = std::sqrt(ss / static_cast<double>(repeats - 1));
    }
    return stats;
}

SoluteEval evaluate_solute(const std::string& name,
                           const std::vector<std::vector<double>>& fold_truth,
                           const std::vector<std::vector<double>>& fold_contrast) {
    if (fold_truth.size() != fold_contrast.size())
        throw LengthMismatch("evaluate_solute: fold counts differ");
    if (fold_truth.size() < 2)
        throw InsufficientData("evaluate_solute: need at least 2 folds");
    SoluteEval out;
    out.solute = name;
    for (std::size_t f = 0; f < fold_truth.size(); ++f) {
        const std::vector<double>& x = fold_truth[f];
        const std::vector<double>& y = fold_contrast[f];
        const double slope = ols_zero_intercept(x, y);
        std::vector<double> y_hat(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            y_hat[i] = slope * x[i];
        out.fold_slope.push_back(slope);
        out.fold_r2.push_back(r2_zero_intercept(y, y_hat));
    }
    out.slope = cross_val_summary(out.fold_slope);
    out.r2 = cross_val_summary(out.fold_r2);
    return out;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json solutes = nlohmann::json::array();
    for (const SoluteEval& s : report.solutes) {
        solutes.push_back({{"solute", s.solute},
                           {"slope_mean", s.slope.mean},
                           {"slope_std", s.slope.std},
                           {"slope_per_fold", s.fold_slope},
                           {"r2_mean", s.r2.mean},
                           {"r2_std", s.r2.std},
                           {"r2_per_fold", s.fold_r2}});
    }
    nlohmann::json doc = {{"method", report.method},
                          {"model", report.model},
                          {"solutes", solutes}};
    if (report.has_runtime) {
        doc["runtime"] = {{"mean_ms_per_datapoint", report.runtime.mean_ms},
                          {"std_ms_per_datapoint", report.runtime.std_ms},
                          {"total_mean_ms", report.runtime.total_mean_ms},
                          {"datapoints", report.runtime.datapoints},
                          {"repeats", report.runtime.repeats}};
    }
    return doc;
}

std::string eval_report_table(const EvalReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %-12s %-12s %12s %22s\n", "method", "model",
                  "solute", "slope", "R2 (mean +- std)");
    out << line;
    for (const SoluteEval& s : report.solutes) {
        char r2col[40];
        std::snprintf(r2col, sizeof(r2col), "%.4f +- %.4f", s.r2.mean, s.r2.std);
        std::snprintf(line, sizeof(line), "%-12s %-12s %-12s %12.4g %22s\n",
                      report.method.c_str(), report.model.c_str(), s.solute.c_str(),
                      s.slope.mean, r2col);
        out << line;
    }
    if (report.has_runtime) {
        std::snprintf(line, sizeof(line),
                      "runtime: %.4f ms/datapoint (std %.4f, %d repeats, %zu datapoints)\n",
                      report.runtime.mean_ms, report.runtime.std_ms, report.runtime.repeats,
                      report.runtime.datapoints);
        out << line;
    }
    return out.str();
}

} // namespace cestfit::eval
