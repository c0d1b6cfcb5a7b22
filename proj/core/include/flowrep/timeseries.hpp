#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowrep/batch.hpp"

namespace flowrep {

/// Fixed-resolution series with epoch-aligned bins. values[i] covers
/// [t0 + i*resolution, t0 + (i+1)*resolution).
struct TimeSeries {
    double t0 = 0.0;
    double resolution = 1.0;
    std::vector<double> values;
    std::string unit;

    size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double bin_start(size_t i) const { return t0 + static_cast<double>(i) * resolution; }
    double end_time() const { return t0 + static_cast<double>(values.size()) * resolution; }
    /// Bin index containing timestamp t; caller guarantees coverage.
    size_t bin_of(double t) const {
        auto idx = static_cast<long long>((t - t0) / resolution);
        if (idx < 0) idx = 0;
        if (idx >= static_cast<long long>(values.size()) && !values.empty())
            idx = static_cast<long long>(values.size()) - 1;
        return static_cast<size_t>(idx);
    }
};

struct FlowImpulse {
    double ts_start = 0.0;
    double ts_end = 0.0;
    int64_t bytes = 0;
};

/// Rebuilds a bits-per-second series from flow volumetry. Every flow spreads
/// its bytes uniformly over its lifetime; bins get the rate weighted by
/// fractional overlap, via an impulse difference array plus cumulative sum.
/// Zero-duration flows deposit everything into the bin holding ts_start.
/// Throws std::invalid_argument on a negative-duration flow, citing its index.
TimeSeries reconstruct(const std::vector<FlowImpulse>& flows, double resolution,
                       std::string unit = "bits/s");

/// Mean-of-covered-bins downsampling; new_resolution must be a positive
/// multiple of the input resolution. A trailing partial bin averages only
/// the bins it covers, so the series keeps rate semantics.
TimeSeries resample(const TimeSeries& series, double new_resolution);

/// Rolling centered coefficient of variation: stddev(window)/mean(window),
/// population stddev, windows truncated at the edges, 0 where the window
/// mean is 0. window_bins must be odd and >= 1.
TimeSeries rolling_variability(const TimeSeries& series, size_t window_bins);

enum class SeriesValue { event_count, column_sum };

/// Bins batch rows by a timestamp column: per-bin event counts, or sums of
/// value_column. Rows with an absent timestamp (or absent value when
/// summing) are ignored. With explicit t0/bins the series is clipped and
/// padded to that frame; rows outside it are dropped.
TimeSeries series_from_batch(const RecordBatch& batch, std::string_view ts_column,
                             SeriesValue semantics, std::string_view value_column,
                             double resolution);
TimeSeries series_from_batch(const RecordBatch& batch, std::string_view ts_column,
                             SeriesValue semantics, std::string_view value_column,
                             double resolution, double t0, size_t bins);

/// Elementwise a/b over a shared frame, 0 where the denominator is 0.
TimeSeries series_ratio(const TimeSeries& a, const TimeSeries& b, std::string unit);
TimeSeries series_add(const TimeSeries& a, const TimeSeries& b, std::string unit);

/// Two-column CSV (timestamp,value) used as chart data source.
void write_series_csv(const TimeSeries& series, const std::filesystem::path& path);

}  // namespace flowrep
