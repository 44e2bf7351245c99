#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stockcast/linalg.hpp"

namespace stockcast {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 `YYYY-MM-DD` calendar date. Throws DataError.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

enum class Column { open, high, low, close };

std::string_view column_name(Column c);
Column parse_column(std::string_view name);
std::vector<Column> parse_column_list(std::string_view comma_separated);

struct OhlcRecord {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;

    double value(Column c) const;
    double& value(Column c);
};

/// Dated OHLC quotes for one index, one record per trade day.
struct TimeSeriesFrame {
    std::string index_name;
    std::vector<OhlcRecord> records;

    std::size_t size() const { return records.size(); }
    std::vector<double> column(Column c) const;
};

/// Enforces the raw-quote invariants: strictly increasing dates,
/// high >= max(open, close) >= min(open, close) >= low, every value finite
/// and > 0. Throws DataError citing the first offending record.
void validate_ohlc(const TimeSeriesFrame& frame);

/// Reads `date,open,high,low,close` CSV (LF or CRLF). Column order in the
/// header is free; every one of the five columns must be present.
TimeSeriesFrame load_ohlc_csv(std::istream& in, std::string index_name = {});
TimeSeriesFrame load_ohlc_csv_file(const std::string& path);

/// Writes the frame in the same format `load_ohlc_csv` reads.
void write_ohlc_csv(std::ostream& out, const TimeSeriesFrame& frame);

struct ColumnRange {
    double min = 0.0;
    double max = 1.0;
};

/// Per-column min/max for min-max scaling to [0, 1].
struct ScalerParams {
    std::map<Column, ColumnRange> ranges;

    const ColumnRange& range(Column c) const;
    double scale(Column c, double v) const;
    double unscale(Column c, double v) const;
};

ScalerParams fit_scaler(const TimeSeriesFrame& frame, std::span<const Column> columns);

/// Scales the fitted columns with (v - min) / (max - min); other columns are
/// copied unchanged. Values outside the fitted range extrapolate linearly.
/// The result no longer satisfies the raw-quote invariants.
TimeSeriesFrame apply_scale(const TimeSeriesFrame& frame, const ScalerParams& params);

std::vector<double> invert_scale(std::span<const double> values, const ScalerParams& params,
                                 Column column);

/// Feature rows x_i paired with targets t_i taken `horizon` trade days later.
struct SupervisedDataset {
    Matrix x;                             // n x d
    Vector t;                             // n
    std::vector<std::string> feature_names;
    std::size_t horizon = 1;
    std::vector<Date> feature_dates;      // day the features were observed
    std::vector<Date> target_dates;       // day the target was observed

    std::size_t size() const { return static_cast<std::size_t>(t.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }

    /// Rows [first, first + count).
    SupervisedDataset slice(std::size_t first, std::size_t count) const;
};

SupervisedDataset make_supervised(const TimeSeriesFrame& frame,
                                  std::span<const Column> feature_columns, Column target_column,
                                  std::size_t horizon = 1);

/// Number of leading rows that `chrono_split` assigns to training:
/// ceil(fraction * n). Throws InvalidArgument when either side would be empty.
std::size_t train_row_count(std::size_t n, double train_fraction);

/// Chronological split; no shuffling.
std::pair<SupervisedDataset, SupervisedDataset> chrono_split(const SupervisedDataset& dataset,
                                                             double train_fraction);

} // namespace stockcast
