#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "perdiv/dividend_ops.hpp"
#include "perdiv/fixed_point.hpp"
#include "perdiv/mc_oracle.hpp"
#include "perdiv/model.hpp"
#include "perdiv/reference_continuous.hpp"

namespace perdiv {

// Comma-separated, header row, full double precision; NaN prints as "nan".
void write_csv(const std::filesystem::path& file,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Per-node relative loss in percent, 100 (V_c - V_d) / V_c; NaN where the
// continuous value sits below 1e-12.
std::vector<double> loss_analysis(const ValueFn1D& v_discrete,
                                  const ValueFn1D& v_continuous);

// Fixed point of the map with the payout optimization replaced by the fixed
// barrier rule; the value of running the continuous-model policy.
ValueFn1D suboptimal_discrete_value(const ModelParams& p,
                                    const SchemeConfig& cfg, double barrier_c,
                                    const ReserveGrid& g, double tol = 1e-8,
                                    int max_iter = 2000);

struct Setup1D {
    ModelParams params;
    ReserveGrid grid{0.2, 2001};
    SchemeConfig scheme;
    bool issuance = false;
    double tol = 1e-8;
    int max_iter = 2000;
};

struct Fig1Result {
    ClosedForm1D closed_form;
    ValueFn1D v_continuous;
    ValueFn1D v_discrete;
    ValueFn1D v_wrong;
    double xbar_c = 0.0;
    double xbar_d = 0.0;
    double loss_at_xbar_c = 0.0;       // percent
    double losswrong_at_xbar_c = 0.0;  // percent
    IterationDiagnostics diagnostics;
    bool barrier_near_edge = false;  // computed barrier above x_max / 2
};

Fig1Result run_fig1(const Setup1D& setup);
void write_fig1_csv(const Fig1Result& r, const std::filesystem::path& out_dir);

enum class SweepParam { mu, sigma, period };

struct SweepRow {
    double value = 0.0;
    double xbarchange_pct = 0.0;
    double loss_pct = 0.0;
    bool ok = false;
};

std::vector<SweepRow> run_sweep(SweepParam which, double lo, double hi,
                                int n_points, const Setup1D& base);
void write_sweep_csv(SweepParam which, const std::vector<SweepRow>& rows,
                     const std::filesystem::path& out_dir);

// Issuance model: fixed point, barrier, and the captured final march
// (value surface plus the issuance target at x = 0 per time layer).
struct Fig4Result {
    ValueFn1D v;
    double barrier = 0.0;
    bool interior_issuance = false;
    IterationDiagnostics diagnostics;
    std::vector<double> layer_times;    // calendar time within the period
    std::vector<double> surface_x;
    std::vector<std::vector<double>> surface_v;  // one row per captured layer
    Policy policy;                      // issuance schedule attached
};

Fig4Result run_fig4(const Setup1D& setup, double surface_x_max = 0.05,
                    int surface_cols = 51, int layer_stride = 4);
void write_fig4_csv(const Fig4Result& r, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Random-profitability experiments

struct Window2D {
    double mu_lo = -0.9;
    double mu_hi = 1.0;
    double x_hi = 2.2;
};

struct Setup2D {
    ModelParams params;
    OUParams ou;
    StateGrid2D grid{{3.0, 241}, -1.6, 1.3, 117};
    SchemeConfig scheme;
    double tol = 1e-8;
    int max_iter = 5000;
    int j0 = 4;
    int n_halvings = 3;
    double cont_tol = 1e-8;
};

// Calibration used throughout the random-profitability runs.
Setup2D default_setup_2d();

struct Model2D {
    ValueFn2D v_discrete;
    ValueFn2D v_continuous;
    Policy pol_discrete;
    Policy pol_continuous;
    IterationDiagnostics diagnostics;
    std::vector<double> cont_gaps;
    bool cont_gaps_decreasing = true;
    bool converged = true;
};

Model2D solve_model_2d(const Setup2D& setup, bool issuance_enabled);

struct BoundaryComparison {
    int upper_common = 0;
    int upper_below = 0;  // discrete dividend boundary strictly below continuous
    int lower_common = 0;
    int lower_above = 0;  // discrete liquidation boundary at or above continuous
};

BoundaryComparison compare_boundaries(const Policy& disc, const Policy& cont,
                                      const Window2D& w);

struct HeatmapStats {
    double peak_pct = 0.0;
    double mean_pct = 0.0;
    long n_defined = 0;
};

HeatmapStats heatmap_stats(const ValueFn2D& v_d, const ValueFn2D& v_c,
                           const Window2D& w);

void write_boundary_csv(const Policy& pol, const Window2D& w,
                        const std::filesystem::path& file);
void write_heatmap_csv(const ValueFn2D& v_d, const ValueFn2D& v_c,
                       const Window2D& w, const std::filesystem::path& file);

}  // namespace perdiv
