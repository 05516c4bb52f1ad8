#include "ctxsep/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "ctxsep/errors.hpp"
#include "ctxsep/linops.hpp"
#include "ctxsep/log.hpp"
#include "ctxsep/problem_io.hpp"
#include "ctxsep/rng.hpp"
#include "ctxsep/timeutil.hpp"

namespace ctxsep {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxInterpolatedGapHours = 3;
constexpr int kMinSegmentHours = 24;

Vector cooling_centers() {
    Vector c(6);
    for (int j = 0; j < 6; ++j) c[j] = 72.5 + 5.0 * j;
    return c;
}

Vector heating_centers() {
    Vector c(6);
    for (int j = 0; j < 6; ++j) c[j] = 22.5 + 5.0 * j;
    return c;
}

// Shared loader for the two-column hourly CSVs.
struct RawSeries {
    std::vector<std::int64_t> timestamps;
    Vector values;
};

RawSeries load_hourly_csv(const std::string& path, const std::string& value_column) {
    const std::string text = read_text_file(path);
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    bool have_header = false;
    std::vector<std::int64_t> timestamps;
    std::vector<double> values;
    const std::string expected_header = "timestamp," + value_column;
    while (std::getline(lines, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header) {
            if (line != expected_header) {
                throw ParseError(path + ":1: expected header '" + expected_header +
                                 "', found '" + line + "'");
            }
            have_header = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 2 columns");
        }
        if (line.find(',', comma + 1) != std::string::npos) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 2 columns");
        }
        std::int64_t ts;
        try {
            ts = parse_iso8601(line.substr(0, comma));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": column 1: " + e.what());
        }
        if (ts % kSecondsPerHour != 0) {
            throw NonHourly(path + ":" + std::to_string(lineno) +
                            ": timestamp is not on an hour boundary");
        }
        const std::string cell = line.substr(comma + 1);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') {
            throw ParseError(path + ":" + std::to_string(lineno) + ": column 2: bad number '" +
                             cell + "'");
        }
        if (!std::isfinite(v)) {
            throw NonFinite(path + ":" + std::to_string(lineno) + ": non-finite " + value_column);
        }
        if (!timestamps.empty() && ts <= timestamps.back()) {
            throw NonMonotoneTimestamps(path + ":" + std::to_string(lineno) +
                                        ": timestamp does not increase");
        }
        timestamps.push_back(ts);
        values.push_back(v);
    }
    if (!have_header) throw ParseError(path + ": empty file (missing header)");
    RawSeries out;
    out.timestamps = std::move(timestamps);
    out.values = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return out;
}

std::string write_hourly_csv_text(const std::vector<std::int64_t>& timestamps,
                                  const Vector& values, const std::string& value_column) {
    std::string out = "timestamp," + value_column + "\n";
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        out += format_iso8601(timestamps[i]);
        out += ",";
        out += format_double(values[static_cast<Eigen::Index>(i)]);
        out += "\n";
    }
    return out;
}

enum class HourState { Covered, MeterGap, WeatherGap };

const char* state_reason(HourState s) {
    return s == HourState::MeterGap ? "meter gap" : "temperature gap > 3h";
}

}  // namespace

MeterSeries load_meter_csv(const std::string& path) {
    RawSeries raw = load_hourly_csv(path, "kwh");
    for (Eigen::Index i = 0; i < raw.values.size(); ++i) {
        if (raw.values[i] < 0.0) {
            throw NegativeUsage(path + ": negative usage " + format_double(raw.values[i]) +
                                " at " + format_iso8601(raw.timestamps[static_cast<std::size_t>(i)]));
        }
    }
    return MeterSeries{std::move(raw.timestamps), std::move(raw.values)};
}

TemperatureSeries load_weather_csv(const std::string& path) {
    RawSeries raw = load_hourly_csv(path, "temp_f");
    for (Eigen::Index i = 0; i < raw.values.size(); ++i) {
        if (raw.values[i] <= -50.0 || raw.values[i] >= 150.0) {
            throw DomainError(path + ": implausible temperature " + format_double(raw.values[i]) +
                              "F at " + format_iso8601(raw.timestamps[static_cast<std::size_t>(i)]));
        }
    }
    return TemperatureSeries{std::move(raw.timestamps), std::move(raw.values)};
}

void write_meter_csv(const std::string& path, const MeterSeries& meter) {
    write_text_file(path, write_hourly_csv_text(meter.timestamps, meter.kwh, "kwh"));
}

void write_weather_csv(const std::string& path, const TemperatureSeries& weather) {
    write_text_file(path, write_hourly_csv_text(weather.timestamps, weather.temp_f, "temp_f"));
}

int AlignedSeries::total_hours() const {
    int n = 0;
    for (const AlignedSegment& s : segments) n += static_cast<int>(s.timestamps.size());
    return n;
}

AlignedSeries align_series(const MeterSeries& meter, const TemperatureSeries& weather) {
    if (meter.timestamps.empty() || weather.timestamps.empty()) {
        throw NoOverlap("meter and weather series do not overlap (one is empty)");
    }
    const std::int64_t lo = std::max(meter.timestamps.front(), weather.timestamps.front());
    const std::int64_t hi = std::min(meter.timestamps.back(), weather.timestamps.back());
    if (lo > hi) {
        throw NoOverlap("meter (" + format_iso8601(meter.timestamps.front()) + ".." +
                        format_iso8601(meter.timestamps.back()) + ") and weather (" +
                        format_iso8601(weather.timestamps.front()) + ".." +
                        format_iso8601(weather.timestamps.back()) + ") do not overlap");
    }
    const int hours = static_cast<int>((hi - lo) / kSecondsPerHour) + 1;
    const auto index_of = [lo](std::int64_t ts) {
        return static_cast<int>((ts - lo) / kSecondsPerHour);
    };

    std::vector<HourState> state(static_cast<std::size_t>(hours), HourState::MeterGap);
    std::vector<double> kwh(static_cast<std::size_t>(hours), 0.0);
    std::vector<double> temp(static_cast<std::size_t>(hours),
                             std::numeric_limits<double>::quiet_NaN());

    for (std::size_t i = 0; i < meter.timestamps.size(); ++i) {
        const std::int64_t ts = meter.timestamps[i];
        if (ts < lo || ts > hi) continue;
        state[static_cast<std::size_t>(index_of(ts))] = HourState::Covered;
        kwh[static_cast<std::size_t>(index_of(ts))] = meter.kwh[static_cast<Eigen::Index>(i)];
    }

    // Temperatures: fill observations, then walk consecutive observation
    // pairs interpolating short gaps. Hours in the aligned range always lie
    // between two observations, because the range is intersected.
    GapReport gaps;
    for (std::size_t i = 0; i < weather.timestamps.size(); ++i) {
        const std::int64_t ts = weather.timestamps[i];
        if (ts < lo || ts > hi) continue;
        temp[static_cast<std::size_t>(index_of(ts))] =
            weather.temp_f[static_cast<Eigen::Index>(i)];
    }
    for (std::size_t i = 0; i + 1 < weather.timestamps.size(); ++i) {
        const std::int64_t a = weather.timestamps[i];
        const std::int64_t b = weather.timestamps[i + 1];
        const std::int64_t missing = (b - a) / kSecondsPerHour - 1;
        if (missing <= 0 || b < lo || a > hi) continue;
        const bool fill = missing <= kMaxInterpolatedGapHours;
        const double va = weather.temp_f[static_cast<Eigen::Index>(i)];
        const double vb = weather.temp_f[static_cast<Eigen::Index>(i + 1)];
        for (std::int64_t m = 1; m <= missing; ++m) {
            const std::int64_t ts = a + m * kSecondsPerHour;
            if (ts < lo || ts > hi) continue;
            const std::size_t idx = static_cast<std::size_t>(index_of(ts));
            if (fill) {
                const double frac = static_cast<double>(m) / static_cast<double>(missing + 1);
                temp[idx] = va + frac * (vb - va);
                if (state[idx] == HourState::Covered) ++gaps.interpolated_hours;
            } else if (state[idx] == HourState::Covered) {
                state[idx] = HourState::WeatherGap;
            }
        }
    }

    // Assemble covered runs; short runs are demoted to dropped spans.
    AlignedSeries out;
    std::vector<std::pair<int, int>> runs;  // [first, last] hour indices
    for (int h = 0; h < hours;) {
        if (state[static_cast<std::size_t>(h)] != HourState::Covered) {
            ++h;
            continue;
        }
        int end = h;
        while (end + 1 < hours && state[static_cast<std::size_t>(end + 1)] == HourState::Covered) {
            ++end;
        }
        runs.emplace_back(h, end);
        h = end + 1;
    }
    std::vector<bool> short_run(static_cast<std::size_t>(hours), false);
    for (const auto& [first, last] : runs) {
        const int len = last - first + 1;
        if (len < kMinSegmentHours) {
            for (int h = first; h <= last; ++h) short_run[static_cast<std::size_t>(h)] = true;
            continue;
        }
        AlignedSegment seg;
        seg.timestamps.reserve(static_cast<std::size_t>(len));
        seg.kwh.resize(len);
        seg.temp_f.resize(len);
        for (int h = first; h <= last; ++h) {
            seg.timestamps.push_back(lo + static_cast<std::int64_t>(h) * kSecondsPerHour);
            seg.kwh[h - first] = kwh[static_cast<std::size_t>(h)];
            seg.temp_f[h - first] = temp[static_cast<std::size_t>(h)];
        }
        out.segments.push_back(std::move(seg));
    }

    // Dropped spans, grouped by contiguous hours sharing a reason.
    for (int h = 0; h < hours;) {
        const HourState s = state[static_cast<std::size_t>(h)];
        const bool dropped = s != HourState::Covered || short_run[static_cast<std::size_t>(h)];
        if (!dropped) {
            ++h;
            continue;
        }
        const std::string reason =
            short_run[static_cast<std::size_t>(h)] ? "segment shorter than 24h" : state_reason(s);
        int end = h;
        while (end + 1 < hours) {
            const HourState sn = state[static_cast<std::size_t>(end + 1)];
            const bool dn = sn != HourState::Covered || short_run[static_cast<std::size_t>(end + 1)];
            if (!dn) break;
            const std::string rn = short_run[static_cast<std::size_t>(end + 1)]
                                       ? "segment shorter than 24h"
                                       : state_reason(sn);
            if (rn != reason) break;
            ++end;
        }
        DroppedSpan span;
        span.start = lo + static_cast<std::int64_t>(h) * kSecondsPerHour;
        span.end = lo + static_cast<std::int64_t>(end) * kSecondsPerHour;
        span.reason = reason;
        gaps.dropped.push_back(std::move(span));
        gaps.dropped_hours += end - h + 1;
        h = end + 1;
    }
    out.gaps = std::move(gaps);

    if (out.segments.empty()) {
        throw NoOverlap("no usable hours remain after alignment (" +
                        std::to_string(out.gaps.dropped_hours) + " dropped)");
    }
    if (out.gaps.dropped_hours > 0 || out.gaps.interpolated_hours > 0) {
        log_info("alignment: %d hours covered, %d interpolated, %d dropped",
                 out.total_hours(), out.gaps.interpolated_hours, out.gaps.dropped_hours);
    }
    return out;
}

SeparationProblem build_energy_problem(const AlignedSegment& segment) {
    const int t_len = static_cast<int>(segment.timestamps.size());

    FeatureBlock base_block{kCategoryNames[0], hour_features(segment.timestamps)};
    FeatureBlock cooling_block{
        kCategoryNames[1],
        rbf_features(segment.temp_f, TemperatureSide::above(kCoolingThresholdF),
                     cooling_centers(), kRbfBandwidthF)};
    FeatureBlock heating_block{
        kCategoryNames[2],
        rbf_features(segment.temp_f, TemperatureSide::below(kHeatingThresholdF),
                     heating_centers(), kRbfBandwidthF)};
    FeatureBlock other_block{kCategoryNames[3], Matrix(t_len, 0)};

    SourceModelSpec base;
    base.loss_norm = Norm::L1;
    base.reg_norm = Norm::SquaredL2;
    base.reg_operator = LinearOperatorDescriptor::diff();
    base.reg_weight = 1.0;
    base.nonneg = true;

    SourceModelSpec cooling;
    cooling.loss_norm = Norm::L1;
    cooling.loss_operator = LinearOperatorDescriptor::smoothing_band(2);
    cooling.reg_norm = Norm::L1;
    cooling.reg_operator = LinearOperatorDescriptor::diff();
    cooling.reg_weight = 0.1;
    cooling.nonneg = true;

    SourceModelSpec heating = cooling;

    SourceModelSpec other;
    other.loss_norm = Norm::L1;
    other.reg_norm = Norm::L1;
    other.reg_operator = LinearOperatorDescriptor::diff();
    other.reg_weight = 0.05;
    other.nonneg = true;

    std::vector<std::pair<FeatureBlock, SourceModelSpec>> sources;
    sources.emplace_back(std::move(base_block), base);
    sources.emplace_back(std::move(cooling_block), cooling);
    sources.emplace_back(std::move(heating_block), heating);
    sources.emplace_back(std::move(other_block), other);
    return build_problem(AggregateSignal{segment.kwh}, std::move(sources));
}

std::vector<WeeklyRow> weekly_aggregate(const Vector& hourly,
                                        const std::vector<std::int64_t>& timestamps) {
    if (static_cast<std::size_t>(hourly.size()) != timestamps.size()) {
        throw DimensionMismatch("weekly_aggregate: series and timestamps differ in length");
    }
    std::map<std::int64_t, std::pair<double, int>> weeks;  // start -> (sum, hours)
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        auto& slot = weeks[week_start(timestamps[i])];
        slot.first += hourly[static_cast<Eigen::Index>(i)];
        slot.second += 1;
    }
    std::vector<WeeklyRow> rows;
    rows.reserve(weeks.size());
    for (const auto& [start, sum_hours] : weeks) {
        rows.push_back(WeeklyRow{start, sum_hours.first, sum_hours.second < kHoursPerWeek});
    }
    return rows;
}

DisaggReport disaggregate(const MeterSeries& meter, const TemperatureSeries& weather,
                          const SolverConfig& config) {
    const AlignedSeries aligned = align_series(meter, weather);
    const int total = aligned.total_hours();

    DisaggReport report;
    report.gaps = aligned.gaps;
    report.timestamps.reserve(static_cast<std::size_t>(total));
    report.categories.resize(total, kEnergyCategories);
    report.meter.resize(total);
    report.all_converged = true;

    int row = 0;
    for (const AlignedSegment& segment : aligned.segments) {
        const SeparationProblem problem = build_energy_problem(segment);
        const SeparationResult result = solve_problem(problem, config);
        const int seg_len = static_cast<int>(segment.timestamps.size());
        report.categories.block(row, 0, seg_len, kEnergyCategories) = result.y_hat;
        report.meter.segment(row, seg_len) = segment.kwh;
        report.timestamps.insert(report.timestamps.end(), segment.timestamps.begin(),
                                 segment.timestamps.end());
        report.theta.push_back(result.theta_hat);
        SegmentDiagnostics diag;
        diag.start = segment.timestamps.front();
        diag.end = segment.timestamps.back();
        diag.hours = seg_len;
        diag.iterations = result.iterations;
        diag.converged = result.converged;
        diag.objective = result.objective;
        diag.primal_residual = result.primal_residual;
        diag.dual_residual = result.dual_residual;
        report.segments.push_back(diag);
        report.all_converged = report.all_converged && result.converged;
        row += seg_len;
    }

    const double meter_total = report.meter.sum();
    if (meter_total > 0.0) {
        report.shares_defined = true;
        for (int i = 0; i < kEnergyCategories; ++i) {
            report.shares[static_cast<std::size_t>(i)] =
                report.categories.col(i).sum() / meter_total;
        }
    } else {
        report.shares_defined = false;
        report.shares.fill(std::numeric_limits<double>::quiet_NaN());
        log_warn("total usage is zero; category shares are undefined");
    }

    // Weekly breakdowns, categories and total in one table.
    std::map<std::int64_t, std::pair<std::array<double, kEnergyCategories + 1>, int>> weeks;
    for (std::size_t i = 0; i < report.timestamps.size(); ++i) {
        auto& slot = weeks[week_start(report.timestamps[i])];
        for (int c = 0; c < kEnergyCategories; ++c) {
            slot.first[static_cast<std::size_t>(c)] +=
                report.categories(static_cast<Eigen::Index>(i), c);
        }
        slot.first[kEnergyCategories] += report.meter[static_cast<Eigen::Index>(i)];
        slot.second += 1;
    }
    for (const auto& [start, acc] : weeks) {
        WeeklyBreakdown wk;
        wk.week_start = start;
        for (int c = 0; c < kEnergyCategories; ++c) {
            wk.category[static_cast<std::size_t>(c)] = acc.first[static_cast<std::size_t>(c)];
        }
        wk.total = acc.first[kEnergyCategories];
        wk.partial = acc.second < kHoursPerWeek;
        report.weekly.push_back(wk);
    }
    return report;
}

void write_components_csv(const std::string& path, const DisaggReport& report) {
    std::string out = "timestamp";
    for (const std::string& name : kCategoryNames) out += "," + name;
    out += ",total\n";
    for (std::size_t i = 0; i < report.timestamps.size(); ++i) {
        out += format_iso8601(report.timestamps[i]);
        for (int c = 0; c < kEnergyCategories; ++c) {
            out += ",";
            out += format_double(report.categories(static_cast<Eigen::Index>(i), c));
        }
        out += ",";
        out += format_double(report.meter[static_cast<Eigen::Index>(i)]);
        out += "\n";
    }
    write_text_file(path, out);
}

ComponentsTable load_components_csv(const std::string& path) {
    const CsvTable table = load_csv_table(path);
    std::vector<std::string> expected = {"timestamp"};
    for (const std::string& name : kCategoryNames) expected.push_back(name);
    expected.push_back("total");
    if (table.header != expected) {
        throw ParseError(path + ": unexpected header for a components file");
    }
    ComponentsTable out;
    const int rows = static_cast<int>(table.rows.size());
    out.categories.resize(rows, kEnergyCategories);
    out.total.resize(rows);
    out.timestamps.reserve(table.rows.size());
    for (int r = 0; r < rows; ++r) {
        const auto& cells = table.rows[static_cast<std::size_t>(r)];
        out.timestamps.push_back(parse_iso8601(cells[0]));
        for (int c = 0; c < kEnergyCategories; ++c) {
            out.categories(r, c) = std::stod(cells[static_cast<std::size_t>(c + 1)]);
        }
        out.total[r] = std::stod(cells[kEnergyCategories + 1]);
    }
    return out;
}

void save_disagg_report_json(const std::string& path, const DisaggReport& report) {
    using nlohmann::json;
    json doc;
    json shares = json::object();
    for (int c = 0; c < kEnergyCategories; ++c) {
        const double v = report.shares[static_cast<std::size_t>(c)];
        if (std::isfinite(v)) {
            shares[kCategoryNames[static_cast<std::size_t>(c)]] = v;
        } else {
            shares[kCategoryNames[static_cast<std::size_t>(c)]] = nullptr;
        }
    }
    doc["shares"] = std::move(shares);
    doc["shares_defined"] = report.shares_defined;
    doc["all_converged"] = report.all_converged;

    json segments = json::array();
    for (std::size_t s = 0; s < report.segments.size(); ++s) {
        const SegmentDiagnostics& d = report.segments[s];
        json seg;
        seg["start"] = format_iso8601(d.start);
        seg["end"] = format_iso8601(d.end);
        seg["hours"] = d.hours;
        seg["iterations"] = d.iterations;
        seg["converged"] = d.converged;
        seg["objective"] = d.objective;
        seg["primal_residual"] = d.primal_residual;
        seg["dual_residual"] = d.dual_residual;
        json theta = json::object();
        if (s < report.theta.size()) {
            for (int c = 0; c < kEnergyCategories && c < static_cast<int>(report.theta[s].size());
                 ++c) {
                json arr = json::array();
                const Vector& th = report.theta[s][static_cast<std::size_t>(c)];
                for (Eigen::Index j = 0; j < th.size(); ++j) arr.push_back(th[j]);
                theta[kCategoryNames[static_cast<std::size_t>(c)]] = std::move(arr);
            }
        }
        seg["theta"] = std::move(theta);
        segments.push_back(std::move(seg));
    }
    doc["segments"] = std::move(segments);

    json weekly = json::array();
    for (const WeeklyBreakdown& wk : report.weekly) {
        json row;
        row["week_start"] = format_iso8601(wk.week_start);
        for (int c = 0; c < kEnergyCategories; ++c) {
            row[kCategoryNames[static_cast<std::size_t>(c)]] =
                wk.category[static_cast<std::size_t>(c)];
        }
        row["total"] = wk.total;
        row["partial"] = wk.partial;
        weekly.push_back(std::move(row));
    }
    doc["weekly"] = std::move(weekly);

    json gaps;
    gaps["interpolated_hours"] = report.gaps.interpolated_hours;
    gaps["dropped_hours"] = report.gaps.dropped_hours;
    json dropped = json::array();
    for (const DroppedSpan& span : report.gaps.dropped) {
        json row;
        row["start"] = format_iso8601(span.start);
        row["end"] = format_iso8601(span.end);
        row["reason"] = span.reason;
        dropped.push_back(std::move(row));
    }
    gaps["dropped"] = std::move(dropped);
    doc["gaps"] = std::move(gaps);

    write_text_file(path, doc.dump(2) + "\n");
}

SyntheticHome gen_synthetic_home(const SyntheticHomeConfig& config) {
    if (config.days < 2) throw DomainError("synthetic home needs at least 2 days");
    if (config.cooling_share < 0.0 || config.cooling_share >= 1.0) {
        throw DomainError("cooling_share must be in [0, 1)");
    }
    const std::int64_t start = config.start_epoch != 0
                                   ? config.start_epoch
                                   : days_from_civil(2010, 6, 7) * kSecondsPerDay;
    if (start % kSecondsPerHour != 0) {
        throw DomainError("synthetic home start must be on an hour boundary");
    }
    const int t_len = config.days * 24;
    SplitMix64 rng(config.seed);

    SyntheticHome home;
    home.weather.timestamps.reserve(static_cast<std::size_t>(t_len));
    home.meter.timestamps.reserve(static_cast<std::size_t>(t_len));
    for (int t = 0; t < t_len; ++t) {
        const std::int64_t ts = start + static_cast<std::int64_t>(t) * kSecondsPerHour;
        home.weather.timestamps.push_back(ts);
        home.meter.timestamps.push_back(ts);
    }

    // Temperatures: diurnal cycle plus day-to-day drift. The drift is what
    // makes cooling identifiable against the hour-of-day base features.
    Vector day_offset(config.days);
    for (int d = 0; d < config.days; ++d) {
        day_offset[d] = 7.0 * std::sin(2.0 * kPi * d / 14.0) + 3.0 * rng.next_gaussian();
    }
    home.weather.temp_f.resize(t_len);
    for (int t = 0; t < t_len; ++t) {
        const int d = t / 24;
        const int hour = t % 24;
        const double diurnal = std::sin(2.0 * kPi * (hour - 9) / 24.0);
        double temp;
        if (config.cool_climate) {
            temp = 52.0 + 0.7 * day_offset[d] + 8.0 * diurnal + rng.next_gaussian();
            temp = std::min(temp, kCoolingThresholdF - 0.5);
        } else {
            temp = 74.0 + day_offset[d] + 11.0 * diurnal + rng.next_gaussian();
        }
        home.weather.temp_f[t] = std::clamp(temp, -45.0, 145.0);
    }

    // Base: a smooth daily profile reproduced every day with small noise.
    Vector base(t_len);
    for (int t = 0; t < t_len; ++t) {
        const int hour = t % 24;
        const double shape = 0.55 + 0.25 * std::sin(2.0 * kPi * (hour - 13) / 24.0) +
                             0.08 * std::sin(4.0 * kPi * hour / 24.0 + 0.9);
        base[t] = std::max(shape + 0.02 * rng.next_gaussian(), 0.02);
    }

    // Cooling / heating: responses through the same RBF families the model
    // fits, so the synthetic signal lies in the model span.
    const Matrix cool_phi = rbf_features(home.weather.temp_f,
                                         TemperatureSide::above(kCoolingThresholdF),
                                         cooling_centers(), kRbfBandwidthF);
    const Matrix heat_phi = rbf_features(home.weather.temp_f,
                                         TemperatureSide::below(kHeatingThresholdF),
                                         heating_centers(), kRbfBandwidthF);
    Vector cool_coeff(6), heat_coeff(6);
    cool_coeff << 0.15, 0.40, 0.80, 1.30, 1.90, 2.60;
    heat_coeff << 1.50, 1.00, 0.60, 0.35, 0.20, 0.10;
    Vector cooling = cool_phi * cool_coeff;
    Vector heating = heat_phi * heat_coeff;
    for (int t = 0; t < t_len; ++t) {
        if (cooling[t] > 0.0) cooling[t] = std::max(cooling[t] + 0.03 * rng.next_gaussian(), 0.0);
        if (heating[t] > 0.0) heating[t] = std::max(heating[t] + 0.03 * rng.next_gaussian(), 0.0);
    }

    // Other: on/off appliance events, piecewise constant.
    Vector other = Vector::Constant(t_len, 0.08);
    for (int d = 0; d < config.days; ++d) {
        const int events = 1 + (rng.next_double() < 0.5 ? 1 : 0);
        for (int e = 0; e < events; ++e) {
            const int start_hour = static_cast<int>(rng.next_double() * 24.0);
            const int duration = 2 + static_cast<int>(rng.next_double() * 5.0);
            const double level = 0.3 + 0.4 * rng.next_double();
            for (int h = start_hour; h < start_hour + duration; ++h) {
                const int t = d * 24 + h;
                if (t < t_len) other[t] += level;
            }
        }
    }

    // Rescale cooling so its share of the total is exactly the target.
    const double rest = base.sum() + heating.sum() + other.sum();
    const double cool_sum = cooling.sum();
    if (cool_sum > 0.0 && config.cooling_share > 0.0) {
        cooling *= config.cooling_share * rest / ((1.0 - config.cooling_share) * cool_sum);
    } else {
        cooling.setZero();
    }

    home.true_categories.resize(t_len, kEnergyCategories);
    home.true_categories.col(0) = base;
    home.true_categories.col(1) = cooling;
    home.true_categories.col(2) = heating;
    home.true_categories.col(3) = other;
    home.meter.kwh = home.true_categories.rowwise().sum();

    const double total = home.meter.kwh.sum();
    for (int c = 0; c < kEnergyCategories; ++c) {
        home.true_shares[static_cast<std::size_t>(c)] =
            total > 0.0 ? home.true_categories.col(c).sum() / total
                        : std::numeric_limits<double>::quiet_NaN();
    }
    return home;
}

}  // namespace ctxsep
