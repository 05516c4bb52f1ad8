#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ctxsep/core.hpp"
#include "ctxsep/solver.hpp"

namespace ctxsep {

// End-to-end energy disaggregation: ingest hourly meter and temperature
// CSVs, align them, assemble the four-category model, solve, and report
// hourly/weekly breakdowns.
//
// The model (one source per category, all constrained nonnegative):
//   base     hour-of-day indicators, L1 loss, ||D y||_2^2 regularizer (weight 1)
//   cooling  RBFs over temperatures > 70F, L1 loss composed with a
//            2-superdiagonal smoothing band, 0.1 ||D y||_1 regularizer
//   heating  RBFs over temperatures < 50F, same loss shape, 0.1 ||D y||_1
//   other    featureless, L1 loss, 0.05 ||D y||_1
// RBF centers are every 5F across (72.5..97.5) / (22.5..47.5) with a 5F
// bandwidth.

inline constexpr int kEnergyCategories = 4;
inline const std::array<std::string, kEnergyCategories> kCategoryNames = {
    "base", "cooling", "heating", "other"};

inline constexpr double kCoolingThresholdF = 70.0;
inline constexpr double kHeatingThresholdF = 50.0;
inline constexpr double kRbfBandwidthF = 5.0;

struct MeterSeries {
    std::vector<std::int64_t> timestamps;  // strictly increasing, hour-aligned
    Vector kwh;                            // >= 0, finite
};

struct TemperatureSeries {
    std::vector<std::int64_t> timestamps;
    Vector temp_f;  // plausibility-checked to (-50, 150)
};

// CSV schema: header "timestamp,kwh" / "timestamp,temp_f", ISO-8601 local
// timestamps on exact hour boundaries.
MeterSeries load_meter_csv(const std::string& path);
TemperatureSeries load_weather_csv(const std::string& path);

void write_meter_csv(const std::string& path, const MeterSeries& meter);
void write_weather_csv(const std::string& path, const TemperatureSeries& weather);

struct DroppedSpan {
    std::int64_t start = 0;  // first dropped hour
    std::int64_t end = 0;    // last dropped hour (inclusive)
    std::string reason;
};

struct GapReport {
    int interpolated_hours = 0;  // temperature gaps <= 3 hours, filled linearly
    int dropped_hours = 0;
    std::vector<DroppedSpan> dropped;
};

// One maximal run of contiguous covered hours. Separation operators (Diff,
// smoothing) never bridge a gap: each segment is solved independently.
struct AlignedSegment {
    std::vector<std::int64_t> timestamps;
    Vector kwh;
    Vector temp_f;
};

struct AlignedSeries {
    std::vector<AlignedSegment> segments;  // in time order
    GapReport gaps;

    int total_hours() const;
};

// Intersects the two series onto the common hourly grid. Temperature gaps
// of at most 3 hours are linearly interpolated; longer temperature gaps,
// any meter gap, and segments shorter than 24 hours are dropped and
// reported. Throws NoOverlap when the ranges do not intersect.
AlignedSeries align_series(const MeterSeries& meter, const TemperatureSeries& weather);

// The four-source problem for one contiguous segment.
SeparationProblem build_energy_problem(const AlignedSegment& segment);

struct WeeklyRow {
    std::int64_t week_start = 0;  // Monday 00:00
    double value = 0.0;
    bool partial = false;  // fewer than 168 covered hours in the week
};

// Calendar-week sums of an hourly series (timestamps may have gaps).
std::vector<WeeklyRow> weekly_aggregate(const Vector& hourly,
                                        const std::vector<std::int64_t>& timestamps);

struct SegmentDiagnostics {
    std::int64_t start = 0;
    std::int64_t end = 0;
    int hours = 0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

struct WeeklyBreakdown {
    std::int64_t week_start = 0;
    std::array<double, kEnergyCategories> category{};
    double total = 0.0;
    bool partial = false;
};

struct DisaggReport {
    std::vector<std::int64_t> timestamps;  // covered hours, ascending
    Matrix categories;                     // rows align with timestamps, 4 columns
    Vector meter;                          // aligned usage
    std::array<double, kEnergyCategories> shares{};  // sum(category)/sum(meter)
    bool shares_defined = false;  // false (shares NaN) when total usage is 0
    std::vector<WeeklyBreakdown> weekly;
    std::vector<std::vector<Vector>> theta;  // per segment, per category
    std::vector<SegmentDiagnostics> segments;
    GapReport gaps;
    bool all_converged = false;
};

DisaggReport disaggregate(const MeterSeries& meter, const TemperatureSeries& weather,
                          const SolverConfig& config = {});

void write_components_csv(const std::string& path, const DisaggReport& report);
void save_disagg_report_json(const std::string& path, const DisaggReport& report);

// Reads back a components.csv (round-trip check and downstream tooling).
struct ComponentsTable {
    std::vector<std::int64_t> timestamps;
    Matrix categories;  // 4 columns
    Vector total;
};
ComponentsTable load_components_csv(const std::string& path);

// Synthetic single-home generator for end-to-end validation: temperature
// with diurnal + day-to-day structure, a smooth daily base profile, RBF-
// driven cooling/heating responses, and an on/off "other" load. The
// cooling series is rescaled so its share of total usage is exactly
// cooling_share (when the climate produces any cooling at all).
struct SyntheticHomeConfig {
    int days = 56;
    std::int64_t start_epoch = 0;  // 0 = default summer Monday start
    double cooling_share = 0.20;
    bool cool_climate = false;  // temperatures capped below the cooling threshold
    std::uint64_t seed = 0;
};

struct SyntheticHome {
    MeterSeries meter;
    TemperatureSeries weather;
    Matrix true_categories;  // T x 4
    std::array<double, kEnergyCategories> true_shares{};
};

SyntheticHome gen_synthetic_home(const SyntheticHomeConfig& config);

}  // namespace ctxsep
