#include "stockcast/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "stockcast/error.hpp"

namespace stockcast {

namespace {

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_real(std::string_view text, std::size_t line_no, std::string_view column)
{
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty())
        throw DataError("line " + std::to_string(line_no) + ": cannot parse " +
                        std::string(column) + " value '" + std::string(text) + "'");
    return v;
}

int parse_int(std::string_view text)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw DataError("bad date component '" + std::string(text) + "'");
    return v;
}

constexpr Column kAllColumns[] = {Column::open, Column::high, Column::low, Column::close};

} // namespace

Date parse_date(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw DataError("date '" + std::string(text) + "' is not in YYYY-MM-DD form");
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (text[i] < '0' || text[i] > '9')
            throw DataError("date '" + std::string(text) + "' is not in YYYY-MM-DD form");
    const Date d{std::chrono::year{parse_int(text.substr(0, 4))},
                 std::chrono::month{static_cast<unsigned>(parse_int(text.substr(5, 2)))},
                 std::chrono::day{static_cast<unsigned>(parse_int(text.substr(8, 2)))}};
    if (!d.ok())
        throw DataError("date '" + std::string(text) + "' is not a valid calendar date");
    return d;
}

std::string format_date(const Date& d)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::string_view column_name(Column c)
{
    switch (c) {
    case Column::open: return "open";
    case Column::high: return "high";
    case Column::low: return "low";
    case Column::close: return "close";
    }
    return "?";
}

Column parse_column(std::string_view name)
{
    for (Column c : kAllColumns)
        if (column_name(c) == name)
            return c;
    throw InvalidArgument("unknown column '" + std::string(name) + "'");
}

std::vector<Column> parse_column_list(std::string_view comma_separated)
{
    std::vector<Column> out;
    for (auto part : split_commas(comma_separated)) {
        while (!part.empty() && part.front() == ' ')
            part.remove_prefix(1);
        while (!part.empty() && part.back() == ' ')
            part.remove_suffix(1);
        out.push_back(parse_column(part));
    }
    return out;
}

double OhlcRecord::value(Column c) const
{
    switch (c) {
    case Column::open: return open;
    case Column::high: return high;
    case Column::low: return low;
    case Column::close: return close;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double& OhlcRecord::value(Column c)
{
    switch (c) {
    case Column::open: return open;
    case Column::high: return high;
    case Column::low: return low;
    case Column::close: break;
    }
    return close;
}

std::vector<double> TimeSeriesFrame::column(Column c) const
{
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.push_back(r.value(c));
    return out;
}

void validate_ohlc(const TimeSeriesFrame& frame)
{
    for (std::size_t i = 0; i < frame.records.size(); ++i) {
        const auto& r = frame.records[i];
        const std::string where = "record " + std::to_string(i) + " (" + format_date(r.date) + ")";
        for (Column c : kAllColumns) {
            const double v = r.value(c);
            if (!std::isfinite(v) || v <= 0.0)
                throw DataError(where + ": " + std::string(column_name(c)) +
                                " must be finite and positive");
        }
        if (r.high < std::max(r.open, r.close) || std::min(r.open, r.close) < r.low)
            throw DataError(where + ": quotes violate low <= open/close <= high");
        if (i > 0 && !(frame.records[i - 1].date < r.date))
            throw DataError(where + ": date " + format_date(r.date) +
                            " does not follow " + format_date(frame.records[i - 1].date));
    }
}

TimeSeriesFrame load_ohlc_csv(std::istream& in, std::string index_name)
{
    TimeSeriesFrame frame;
    frame.index_name = std::move(index_name);

    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line))
            return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return true;
    };

    if (!next_line())
        throw DataError("CSV is empty: missing header line");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0)
        line.erase(0, 3);

    // Column positions in header order.
    int date_pos = -1;
    int pos[4] = {-1, -1, -1, -1};
    const auto header = split_commas(line);
    std::vector<std::string> unknown;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto name = header[i];
        if (name == "date") {
            date_pos = static_cast<int>(i);
            continue;
        }
        bool known = false;
        for (Column c : kAllColumns)
            if (column_name(c) == name) {
                pos[static_cast<int>(c)] = static_cast<int>(i);
                known = true;
            }
        if (!known)
            unknown.emplace_back(name);
    }
    std::string missing;
    if (date_pos < 0)
        missing += " date";
    for (Column c : kAllColumns)
        if (pos[static_cast<int>(c)] < 0)
            missing += " " + std::string(column_name(c));
    if (!missing.empty())
        throw DataError("CSV header is missing columns:" + missing);
    if (!unknown.empty())
        throw DataError("CSV header has unknown column '" + unknown.front() + "'");

    while (next_line()) {
        if (line.empty())
            continue;
        const auto cells = split_commas(line);
        if (cells.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
        OhlcRecord rec;
        try {
            rec.date = parse_date(cells[static_cast<std::size_t>(date_pos)]);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        for (Column c : kAllColumns)
            rec.value(c) = parse_real(cells[static_cast<std::size_t>(pos[static_cast<int>(c)])],
                                      line_no, column_name(c));
        if (!frame.records.empty() && !(frame.records.back().date < rec.date))
            throw DataError("line " + std::to_string(line_no) + ": date " +
                            format_date(rec.date) + " is not after previous date " +
                            format_date(frame.records.back().date));
        frame.records.push_back(rec);
    }
    if (frame.records.empty())
        throw DataError("CSV has a header but no data lines");
    validate_ohlc(frame);
    return frame;
}

TimeSeriesFrame load_ohlc_csv_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    auto name = path;
    if (auto slash = name.find_last_of("/\\"); slash != std::string::npos)
        name.erase(0, slash + 1);
    if (auto dot = name.rfind('.'); dot != std::string::npos && dot > 0)
        name.erase(dot);
    try {
        return load_ohlc_csv(in, name);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_ohlc_csv(std::ostream& out, const TimeSeriesFrame& frame)
{
    out << "date,open,high,low,close\n";
    char buf[64];
    auto put = [&](double v) {
        auto r = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, r.ptr - buf);
    };
    for (const auto& r : frame.records) {
        out << format_date(r.date);
        for (double v : {r.open, r.high, r.low, r.close}) {
            out << ',';
            put(v);
        }
        out << '\n';
    }
}

const ColumnRange& ScalerParams::range(Column c) const
{
    auto it = ranges.find(c);
    if (it == ranges.end())
        throw InvalidArgument("scaler has no parameters for column '" +
                              std::string(column_name(c)) + "'");
    return it->second;
}

double ScalerParams::scale(Column c, double v) const
{
    const auto& r = range(c);
    return (v - r.min) / (r.max - r.min);
}

double ScalerParams::unscale(Column c, double v) const
{
    const auto& r = range(c);
    return r.min + v * (r.max - r.min);
}

ScalerParams fit_scaler(const TimeSeriesFrame& frame, std::span<const Column> columns)
{
    if (frame.records.empty())
        throw InvalidArgument("fit_scaler: frame is empty");
    ScalerParams params;
    for (Column c : columns) {
        const auto values = frame.column(c);
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (!(*hi > *lo))
            throw DataError("fit_scaler: column '" + std::string(column_name(c)) +
                            "' is constant; cannot scale");
        params.ranges[c] = ColumnRange{*lo, *hi};
    }
    return params;
}

TimeSeriesFrame apply_scale(const TimeSeriesFrame& frame, const ScalerParams& params)
{
    TimeSeriesFrame out = frame;
    for (auto& r : out.records)
        for (const auto& [c, range] : params.ranges)
            r.value(c) = (r.value(c) - range.min) / (range.max - range.min);
    return out;
}

std::vector<double> invert_scale(std::span<const double> values, const ScalerParams& params,
                                 Column column)
{
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values)
        out.push_back(params.unscale(column, v));
    return out;
}

SupervisedDataset SupervisedDataset::slice(std::size_t first, std::size_t count) const
{
    if (first + count > size())
        throw InvalidArgument("SupervisedDataset::slice: range out of bounds");
    const auto f = static_cast<Eigen::Index>(first);
    const auto n = static_cast<Eigen::Index>(count);
    SupervisedDataset out;
    out.x = x.middleRows(f, n);
    out.t = t.segment(f, n);
    out.feature_names = feature_names;
    out.horizon = horizon;
    if (!feature_dates.empty())
        out.feature_dates.assign(feature_dates.begin() + f, feature_dates.begin() + f + n);
    if (!target_dates.empty())
        out.target_dates.assign(target_dates.begin() + f, target_dates.begin() + f + n);
    return out;
}

SupervisedDataset make_supervised(const TimeSeriesFrame& frame,
                                  std::span<const Column> feature_columns, Column target_column,
                                  std::size_t horizon)
{
    if (feature_columns.empty())
        throw InvalidArgument("make_supervised: at least one feature column is required");
    if (horizon == 0)
        throw InvalidArgument("make_supervised: horizon must be >= 1");
    const std::size_t records = frame.records.size();
    if (horizon >= records)
        throw InvalidArgument("make_supervised: horizon " + std::to_string(horizon) +
                              " needs more than " + std::to_string(records) + " records");

    const std::size_t n = records - horizon;
    const auto d = static_cast<Eigen::Index>(feature_columns.size());
    SupervisedDataset ds;
    ds.x.resize(static_cast<Eigen::Index>(n), d);
    ds.t.resize(static_cast<Eigen::Index>(n));
    ds.horizon = horizon;
    for (Column c : feature_columns)
        ds.feature_names.emplace_back(column_name(c));
    ds.feature_dates.reserve(n);
    ds.target_dates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& today = frame.records[i];
        const auto& later = frame.records[i + horizon];
        for (Eigen::Index j = 0; j < d; ++j)
            ds.x(static_cast<Eigen::Index>(i), j) = today.value(feature_columns[static_cast<std::size_t>(j)]);
        ds.t(static_cast<Eigen::Index>(i)) = later.value(target_column);
        ds.feature_dates.push_back(today.date);
        ds.target_dates.push_back(later.date);
    }
    return ds;
}

std::size_t train_row_count(std::size_t n, double train_fraction)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidArgument("train fraction must lie in (0, 1)");
    // The small offset keeps products like 0.7 * 10 = 7.000000000000001 at 7.
    const double raw = train_fraction * static_cast<double>(n);
    const auto n_train = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    if (n_train == 0 || n_train >= n)
        throw InvalidArgument("train fraction " + std::to_string(train_fraction) + " on " +
                              std::to_string(n) + " rows leaves an empty split");
    return n_train;
}

std::pair<SupervisedDataset, SupervisedDataset> chrono_split(const SupervisedDataset& dataset,
                                                             double train_fraction)
{
    const std::size_t n = dataset.size();
    if (n < 2)
        throw InvalidArgument("chrono_split: need at least 2 rows");
    const std::size_t n_train = train_row_count(n, train_fraction);
    return {dataset.slice(0, n_train), dataset.slice(n_train, n - n_train)};
}

} // namespace stockcast
