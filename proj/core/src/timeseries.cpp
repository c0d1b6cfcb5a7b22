#include "flowrep/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "flowrep/errors.hpp"
#include "flowrep/text.hpp"

namespace flowrep {

namespace {

double aligned_floor(double t, double resolution) {
    return std::floor(t / resolution) * resolution;
}

}  // namespace

TimeSeries reconstruct(const std::vector<FlowImpulse>& flows, double resolution,
                       std::string unit) {
    if (resolution <= 0) throw std::invalid_argument("resolution must be positive");
    TimeSeries out;
    out.resolution = resolution;
    out.unit = std::move(unit);
    if (flows.empty()) return out;

    double min_start = flows[0].ts_start;
    double max_end = flows[0].ts_end;
    for (size_t i = 0; i < flows.size(); ++i) {
        const FlowImpulse& f = flows[i];
        if (f.ts_end < f.ts_start)
            throw std::invalid_argument("flow " + std::to_string(i) +
                                        " has negative duration (ts_start=" +
                                        format_f64(f.ts_start) + ", ts_end=" +
                                        format_f64(f.ts_end) + ")");
        min_start = std::min(min_start, f.ts_start);
        max_end = std::max(max_end, f.ts_end);
    }

    out.t0 = aligned_floor(min_start, resolution);
    size_t bins = static_cast<size_t>(std::ceil((max_end - out.t0) / resolution));
    if (bins == 0) bins = 1;  // all flows zero-duration at the origin

    std::vector<double> diff(bins + 1, 0.0);
    std::vector<double> edge(bins, 0.0);

    for (const FlowImpulse& f : flows) {
        double bits = 8.0 * static_cast<double>(f.bytes);
        if (f.ts_end == f.ts_start) {
            size_t b = static_cast<size_t>((f.ts_start - out.t0) / resolution);
            if (b >= bins) b = bins - 1;
            edge[b] += bits / resolution;
            continue;
        }
        double rate = bits / (f.ts_end - f.ts_start);
        auto first = static_cast<size_t>((f.ts_start - out.t0) / resolution);
        // Last bin with any coverage; an end on a bin boundary stays in the
        // previous bin (end-exclusive).
        auto last = static_cast<size_t>(std::ceil((f.ts_end - out.t0) / resolution)) - 1;
        if (last >= bins) last = bins - 1;
        if (first > last) first = last;

        diff[first] += rate;
        diff[last + 1] -= rate;
        // Subtract the uncovered head and tail of the two edge bins.
        double head = (f.ts_start - (out.t0 + static_cast<double>(first) * resolution));
        double tail = ((out.t0 + static_cast<double>(last + 1) * resolution) - f.ts_end);
        if (head > 0) edge[first] -= rate * head / resolution;
        if (tail > 0) edge[last] -= rate * tail / resolution;
    }

    out.values.resize(bins);
    double acc = 0.0;
    for (size_t i = 0; i < bins; ++i) {
        acc += diff[i];
        double v = acc + edge[i];
        out.values[i] = v < 0 ? 0.0 : v;  // guard tiny negative rounding
    }
    return out;
}

TimeSeries resample(const TimeSeries& series, double new_resolution) {
    if (new_resolution <= 0) throw std::invalid_argument("resolution must be positive");
    double ratio = new_resolution / series.resolution;
    auto factor = static_cast<size_t>(std::llround(ratio));
    if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9)
        throw std::invalid_argument("new resolution must be a positive multiple of " +
                                    format_f64(series.resolution));
    if (factor == 1) return series;

    TimeSeries out;
    out.t0 = series.t0;
    out.resolution = new_resolution;
    out.unit = series.unit;
    size_t n = series.values.size();
    out.values.reserve((n + factor - 1) / factor);
    for (size_t i = 0; i < n; i += factor) {
        size_t covered = std::min(factor, n - i);
        double sum = 0.0;
        for (size_t j = 0; j < covered; ++j) sum += series.values[i + j];
        out.values.push_back(sum / static_cast<double>(covered));
    }
    return out;
}

TimeSeries rolling_variability(const TimeSeries& series, size_t window_bins) {
    if (window_bins < 1 || window_bins % 2 == 0)
        throw std::invalid_argument("window_bins must be odd and >= 1");

    TimeSeries out;
    out.t0 = series.t0;
    out.resolution = series.resolution;
    out.unit = "cv";
    size_t n = series.values.size();
    out.values.resize(n, 0.0);
    if (n == 0) return out;

    // Prefix sums of x and x^2 give O(1) window statistics. The shortest
    // half-window at the edges truncates instead of padding.
    std::vector<double> sx(n + 1, 0.0), sxx(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double v = series.values[i];
        sx[i + 1] = sx[i] + v;
        sxx[i + 1] = sxx[i] + v * v;
    }
    size_t half = window_bins / 2;
    for (size_t i = 0; i < n; ++i) {
        size_t lo = i > half ? i - half : 0;
        size_t hi = std::min(n, i + half + 1);
        if (hi - lo == 1) continue;  // single value: stddev is exactly 0
        double w = static_cast<double>(hi - lo);
        double sum = sx[hi] - sx[lo];
        if (sum <= 0.0) continue;  // mean 0 -> 0 by convention
        double sumsq = sxx[hi] - sxx[lo];
        double num = w * sumsq - sum * sum;
        if (num < 0) num = 0;  // cancellation guard for near-constant windows
        out.values[i] = std::sqrt(num) / sum;
    }
    return out;
}

namespace {

TimeSeries bin_batch(const RecordBatch& batch, std::string_view ts_column,
                     SeriesValue semantics, std::string_view value_column, double resolution,
                     bool framed, double frame_t0, size_t frame_bins) {
    if (resolution <= 0) throw std::invalid_argument("resolution must be positive");
    const Column* ts = batch.find(ts_column);
    if (!ts) throw DatasetError("no timestamp column '" + std::string(ts_column) + "'");
    const Column* val = nullptr;
    if (semantics == SeriesValue::column_sum) {
        val = batch.find(value_column);
        if (!val) throw DatasetError("no value column '" + std::string(value_column) + "'");
    }

    TimeSeries out;
    out.resolution = resolution;
    out.unit = semantics == SeriesValue::event_count ? "events" : std::string(value_column);

    if (framed) {
        out.t0 = frame_t0;
        out.values.assign(frame_bins, 0.0);
    } else {
        double min_ts = 0.0, max_ts = 0.0;
        bool any = false;
        for (size_t r = 0; r < batch.rows; ++r) {
            if (!ts->is_present(r)) continue;
            double t = ts->as_f64(r);
            if (!any) { min_ts = max_ts = t; any = true; }
            min_ts = std::min(min_ts, t);
            max_ts = std::max(max_ts, t);
        }
        if (!any) return out;
        out.t0 = aligned_floor(min_ts, resolution);
        size_t bins = static_cast<size_t>((max_ts - out.t0) / resolution) + 1;
        out.values.assign(bins, 0.0);
    }

    for (size_t r = 0; r < batch.rows; ++r) {
        if (!ts->is_present(r)) continue;
        double t = ts->as_f64(r);
        double off = (t - out.t0) / resolution;
        if (off < 0) continue;
        auto b = static_cast<size_t>(off);
        if (b >= out.values.size()) continue;
        if (semantics == SeriesValue::event_count) {
            out.values[b] += 1.0;
        } else {
            if (!val->is_present(r)) continue;
            out.values[b] += val->as_f64(r);
        }
    }
    return out;
}

}  // namespace

TimeSeries series_from_batch(const RecordBatch& batch, std::string_view ts_column,
                             SeriesValue semantics, std::string_view value_column,
                             double resolution) {
    return bin_batch(batch, ts_column, semantics, value_column, resolution, false, 0.0, 0);
}

TimeSeries series_from_batch(const RecordBatch& batch, std::string_view ts_column,
                             SeriesValue semantics, std::string_view value_column,
                             double resolution, double t0, size_t bins) {
    return bin_batch(batch, ts_column, semantics, value_column, resolution, true, t0, bins);
}

TimeSeries series_ratio(const TimeSeries& a, const TimeSeries& b, std::string unit) {
    TimeSeries out;
    out.t0 = a.t0;
    out.resolution = a.resolution;
    out.unit = std::move(unit);
    size_t n = std::min(a.values.size(), b.values.size());
    out.values.resize(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        out.values[i] = b.values[i] != 0.0 ? a.values[i] / b.values[i] : 0.0;
    return out;
}

TimeSeries series_add(const TimeSeries& a, const TimeSeries& b, std::string unit) {
    TimeSeries out;
    out.t0 = a.t0;
    out.resolution = a.resolution;
    out.unit = std::move(unit);
    size_t n = std::max(a.values.size(), b.values.size());
    out.values.resize(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double v = 0.0;
        if (i < a.values.size()) v += a.values[i];
        if (i < b.values.size()) v += b.values[i];
        out.values[i] = v;
    }
    return out;
}

void write_series_csv(const TimeSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "timestamp,value\n";
    for (size_t i = 0; i < series.values.size(); ++i)
        out << format_fixed(series.bin_start(i), 3) << ',' << format_f64(series.values[i])
            << '\n';
}

}  // namespace flowrep
