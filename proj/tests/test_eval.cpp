#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cestfit/errors.hpp"
#include "cestfit/eval.hpp"
#include "cestfit/rng.hpp"

using namespace cestfit;
using namespace cestfit::eval;

TEST_CASE("contrast extraction reads the regression scalar per model") {
    SUBCASE("Lorentzian amplitude") {
        // [a, Gamma^2/4, d_omega] per pool.
        const std::vector<double> p = {0.3, 900.0, 8800.0, 0.1, 400.0, 2000.0};
        CHECK(extract_contrast(p, models::ModelKind::Lorentzian, 0) == 0.3);
        CHECK(extract_contrast(p, models::ModelKind::Lorentzian, 1) == 0.1);
        CHECK_THROWS_AS(extract_contrast(p, models::ModelKind::Lorentzian, 2), IndexOutOfRange);
    }
    SUBCASE("Lorentzian area a*pi*sqrt(Gamma^2/4)") {
        const std::vector<double> p = {1.0, 1.0, 0.0};
        const double area = extract_contrast(p, models::ModelKind::Lorentzian, 0,
                                             LorentzianContrast::Area);
        CHECK(area == doctest::Approx(std::numbers::pi).epsilon(1e-15));
        const std::vector<double> q = {0.2, 900.0, 0.0};
        CHECK(extract_contrast(q, models::ModelKind::Lorentzian, 0, LorentzianContrast::Area) ==
              doctest::Approx(0.2 * std::numbers::pi * 30.0).epsilon(1e-15));
    }
    SUBCASE("exchange models read f/R1a") {
        // [r2a/r1a, then f/r1a, k, r2, d_omega per pool].
        const std::vector<double> p = {0.5, 2e-4, 600.0, 40.0, 5280.0,
                                       7e-4, 500.0, 30.0, 2000.0};
        CHECK(extract_contrast(p, models::ModelKind::AnalyticalZ, 0) == 2e-4);
        CHECK(extract_contrast(p, models::ModelKind::MtrRex, 1) == 7e-4);
        CHECK_THROWS_AS(extract_contrast(p, models::ModelKind::AnalyticalZ, 2), IndexOutOfRange);
    }
    SUBCASE("malformed layouts") {
        const std::vector<double> bad = {1.0, 2.0};
        CHECK_THROWS_AS(extract_contrast(bad, models::ModelKind::Lorentzian, 0), LengthMismatch);
        CHECK_THROWS_AS(extract_contrast(bad, models::ModelKind::AnalyticalZ, 0), LengthMismatch);
    }
}

TEST_CASE("zero-intercept OLS slope") {
    SUBCASE("hand-checked slope") {
        const std::vector<double> x = {2.0, 4.0};
        const std::vector<double> y = {1.0, 2.0};
        CHECK(ols_zero_intercept(x, y) == 0.5);
    }
    SUBCASE("zero target gives zero slope") {
        const std::vector<double> x = {1.0, 2.0, 3.0};
        const std::vector<double> y = {0.0, 0.0, 0.0};
        CHECK(ols_zero_intercept(x, y) == 0.0);
    }
    SUBCASE("errors") {
        const std::vector<double> x = {0.0, 0.0};
        const std::vector<double> y = {1.0, 2.0};
        CHECK_THROWS_AS(ols_zero_intercept(x, y), DegenerateDesign);
        const std::vector<double> one = {1.0};
        CHECK_THROWS_AS(ols_zero_intercept(one, one), DegenerateDesign);
        const std::vector<double> three = {1.0, 2.0, 3.0};
        CHECK_THROWS_AS(ols_zero_intercept(three, y), LengthMismatch);
    }
    SUBCASE("matches root of the least-squares gradient") {
        // d/ds sum((y - s*x)^2) = -2 sum(x*(y - s*x)) is linear and strictly
        // decreasing in s, so bisection on its sign is an independent oracle.
        Rng rng(314);
        std::vector<double> x(40), y(40);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.uniform(0.1, 5.0);
            y[i] = 1.7 * x[i] + rng.normal(0.0, 0.3);
        }
        auto grad = [&](double s) {
            double g = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                g += x[i] * (y[i] - s * x[i]);
            return g;
        };
        double lo = -1e3, hi = 1e3;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (grad(mid) > 0.0 ? lo : hi) = mid;
        }
        CHECK(ols_zero_intercept(x, y) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
    }
}

TEST_CASE("zero-intercept R^2") {
    SUBCASE("exact endpoints") {
        const std::vector<double> y = {1.0, -2.0, 3.0};
        CHECK(r2_zero_intercept(y, y) == 1.0);
        const std::vector<double> zeros = {0.0, 0.0, 0.0};
        CHECK(r2_zero_intercept(y, zeros) == 0.0);
    }
    SUBCASE("worse than zero prediction goes negative") {
        const std::vector<double> y = {1.0, 1.0};
        const std::vector<double> y_hat = {3.0, 3.0};
        CHECK(r2_zero_intercept(y, y_hat) == -3.0);
    }
    SUBCASE("errors") {
        const std::vector<double> zeros = {0.0, 0.0};
        const std::vector<double> y_hat = {1.0, 2.0};
        CHECK_THROWS_AS(r2_zero_intercept(zeros, y_hat), DegenerateTarget);
        const std::vector<double> three = {1.0, 2.0, 3.0};
        CHECK_THROWS_AS(r2_zero_intercept(three, y_hat), LengthMismatch);
    }
    SUBCASE("invariant under positive rescaling of both arguments") {
        Rng rng(99);
        std::vector<double> y(25), y_hat(25);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = rng.uniform(-2.0, 2.0);
            y_hat[i] = y[i] + rng.normal(0.0, 0.4);
        }
        const double base = r2_zero_intercept(y, y_hat);
        for (double c : {1e-3, 7.0, 1e3}) {
            std::vector<double> ys(y.size()), yhs(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                ys[i] = c * y[i];
                yhs[i] = c * y_hat[i];
            }
            CHECK(r2_zero_intercept(ys, yhs) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("cross-validation summary statistics") {
    SUBCASE("constant folds") {
        const std::vector<double> v = {0.9, 0.9};
        const SummaryStat s = cross_val_summary(v);
        CHECK(s.mean == 0.9);
        CHECK(s.std == 0.0);
    }
    SUBCASE("two-fold sample and population std") {
        const std::vector<double> v = {0.8, 1.0};
        const SummaryStat sample = cross_val_summary(v);
        CHECK(sample.mean == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(sample.std == doctest::Approx(0.1414213562373095).epsilon(1e-15));
        const SummaryStat pop = cross_val_summary(v, false);
        CHECK(pop.std == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("bitwise permutation invariance") {
        Rng rng(7);
        std::vector<double> v(9);
        for (double& x : v)
            x = rng.uniform(-1.0, 1.0);
        const SummaryStat base = cross_val_summary(v);
        for (int trial = 0; trial < 10; ++trial) {
            rng.shuffle(v);
            const SummaryStat s = cross_val_summary(v);
            CHECK(s.mean == base.mean);
            CHECK(s.std == base.std);
        }
    }
    SUBCASE("matches a straightforward two-pass computation") {
        Rng rng(11);
        std::vector<double> v(17);
        for (double& x : v)
            x = rng.uniform(0.0, 3.0);
        double mean = 0.0;
        for (double x : v)
            mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v)
            ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
        const SummaryStat s = cross_val_summary(v);
        CHECK(s.mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(s.std == doctest::Approx(sd).epsilon(1e-12));
    }
    SUBCASE("needs at least two folds") {
        const std::vector<double> one = {0.5};
        CHECK_THROWS_AS(cross_val_summary(one), InsufficientData);
    }
}

namespace {

// Deterministic serial work proportional to n, opaque to the optimizer.
void busy_work(std::size_t n) {
    volatile double sink = 0.0;
    double acc = 1.0;
    for (std::size_t i = 0; i < n * 50000; ++i)
        acc = acc * 1.0000001 + 1e-9;
    sink = acc;
    (void)sink;
}

} // namespace

TEST_CASE("runtime benchmarking") {
    SUBCASE("field bookkeeping") {
        const RuntimeStats s = runtime_bench([] { busy_work(4); }, 4, 3, 1);
        CHECK(s.datapoints == 4);
        CHECK(s.repeats == 3);
        CHECK(s.mean_ms > 0.0);
        CHECK(s.std_ms >= 0.0);
        CHECK(s.total_mean_ms == doctest::Approx(s.mean_ms * 4.0).epsilon(1e-12));
    }
    SUBCASE("per-datapoint time is amortized across dataset sizes") {
        const RuntimeStats small = runtime_bench([] { busy_work(10); }, 10);
        const RuntimeStats large = runtime_bench([] { busy_work(100); }, 100);
        const double ratio = large.mean_ms / small.mean_ms;
        CHECK(ratio > 0.5);
        CHECK(ratio < 1.5);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(runtime_bench([] {}, 0), ConfigError);
        CHECK_THROWS_AS(runtime_bench([] {}, 1, 0), ConfigError);
    }
}

TEST_CASE("per-solute cross-validated regression") {
    SUBCASE("perfectly proportional contrast recovers the slope in every fold") {
        std::vector<std::vector<double>> truth, contrast;
        for (int f = 0; f < 3; ++f) {
            std::vector<double> x, y;
            for (int i = 1; i <= 5; ++i) {
                x.push_back(static_cast<double>(i + f));
                y.push_back(2.0 * static_cast<double>(i + f));
            }
            truth.push_back(x);
            contrast.push_back(y);
        }
        const SoluteEval s = evaluate_solute("glucose", truth, contrast);
        CHECK(s.solute == "glucose");
        REQUIRE(s.fold_slope.size() == 3);
        for (double slope : s.fold_slope)
            CHECK(slope == 2.0);
        for (double r2 : s.fold_r2)
            CHECK(r2 == 1.0);
        CHECK(s.slope.mean == 2.0);
        CHECK(s.slope.std == 0.0);
        CHECK(s.r2.mean == 1.0);
        CHECK(s.r2.std == 0.0);
    }
    SUBCASE("noisy contrast keeps slope near truth with r2 below one") {
        Rng rng(21);
        std::vector<std::vector<double>> truth, contrast;
        for (int f = 0; f < 5; ++f) {
            std::vector<double> x, y;
            for (int i = 0; i < 20; ++i) {
                const double c = rng.uniform(1.0, 30.0);
                x.push_back(c);
                y.push_back(3e-4 * c + rng.normal(0.0, 2e-4));
            }
            truth.push_back(x);
            contrast.push_back(y);
        }
        const SoluteEval s = evaluate_solute("lactate", truth, contrast);
        CHECK(s.slope.mean == doctest::Approx(3e-4).epsilon(0.05));
        CHECK(s.r2.mean > 0.9);
        CHECK(s.r2.mean < 1.0);
    }
    SUBCASE("errors") {
        const std::vector<std::vector<double>> two = {{1.0, 2.0}, {1.0, 2.0}};
        const std::vector<std::vector<double>> three = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
        CHECK_THROWS_AS(evaluate_solute("x", two, three), LengthMismatch);
        const std::vector<std::vector<double>> one = {{1.0, 2.0}};
        CHECK_THROWS_AS(evaluate_solute("x", one, one), InsufficientData);
    }
}

TEST_CASE("evaluation report serialization") {
    EvalReport report;
    report.method = "lbfgsb";
    report.model = "mtrrex";
    SoluteEval s;
    s.solute = "glucose";
    s.fold_slope = {1.8, 2.05};
    s.fold_r2 = {0.96, 0.98};
    s.slope = cross_val_summary(s.fold_slope);
    s.r2 = cross_val_summary(s.fold_r2);
    report.solutes.push_back(s);

    SUBCASE("json fields") {
        nlohmann::json doc = eval_report_to_json(report);
        CHECK(doc["method"] == "lbfgsb");
        CHECK(doc["model"] == "mtrrex");
        REQUIRE(doc["solutes"].size() == 1);
        CHECK(doc["solutes"][0]["solute"] == "glucose");
        CHECK(doc["solutes"][0]["slope_mean"].get<double>() == doctest::Approx(1.925));
        CHECK(doc["solutes"][0]["r2_mean"].get<double>() == doctest::Approx(0.97));
        CHECK(doc["solutes"][0]["slope_per_fold"].size() == 2);
        CHECK_FALSE(doc.contains("runtime"));

        report.has_runtime = true;
        report.runtime.mean_ms = 0.25;
        report.runtime.datapoints = 400;
        report.runtime.repeats = 3;
        doc = eval_report_to_json(report);
        REQUIRE(doc.contains("runtime"));
        CHECK(doc["runtime"]["mean_ms_per_datapoint"].get<double>() == 0.25);
        CHECK(doc["runtime"]["datapoints"].get<std::size_t>() == 400);
    }
    SUBCASE("text table") {
        report.has_runtime = true;
        report.runtime.mean_ms = 0.25;
        report.runtime.datapoints = 400;
        report.runtime.repeats = 3;
        const std::string table = eval_report_table(report);
        CHECK(table.find("method") != std::string::npos);
        CHECK(table.find("lbfgsb") != std::string::npos);
        CHECK(table.find("mtrrex") != std::string::npos);
        CHECK(table.find("glucose") != std::string::npos);
        CHECK(table.find("1.925") != std::string::npos);
        CHECK(table.find("runtime:") != std::string::npos);
        CHECK(std::count(table.begin(), table.end(), '\n') == 3);
    }
}
