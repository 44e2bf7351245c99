#include "stockcast/synth.hpp"

#include <algorithm>
#include <random>

#include "stockcast/error.hpp"

namespace stockcast {

namespace {

std::chrono::sys_days next_weekday(std::chrono::sys_days d)
{
    using namespace std::chrono;
    do {
        d += days{1};
    } while (weekday{d} == Saturday || weekday{d} == Sunday);
    return d;
}

} // namespace

TimeSeriesFrame synth_logistic_ohlc(std::size_t n_days, std::uint64_t seed, const SynthOptions& o)
{
    if (n_days == 0)
        throw InvalidArgument("synth: need at least one day");
    if (!(o.r > 0.0 && o.r <= 4.0))
        throw InvalidArgument("synth: r must lie in (0, 4]");
    if (!(o.base > 0.0) || !(o.amplitude >= 0.0) || !(o.jitter >= 0.0 && o.jitter < 0.5))
        throw InvalidArgument("synth: need base > 0, amplitude >= 0, jitter in [0, 0.5)");
    if (!o.start.ok())
        throw InvalidArgument("synth: invalid start date");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> start_dist(0.1, 0.9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TimeSeriesFrame frame;
    frame.index_name = "synthetic";
    frame.records.reserve(n_days);

    double x = start_dist(rng);
    std::chrono::sys_days day{o.start};
    {
        using namespace std::chrono;
        if (weekday{day} == Saturday || weekday{day} == Sunday)
            day = next_weekday(day);
    }
    double prev_close = o.base + o.amplitude * x;
    for (std::size_t i = 0; i < n_days; ++i) {
        if (i > 0) {
            x = o.r * x * (1.0 - x);
            day = next_weekday(day);
        }
        OhlcRecord rec;
        rec.date = std::chrono::year_month_day{day};
        rec.close = o.base + o.amplitude * x;
        rec.open = prev_close * (1.0 + o.jitter * (2.0 * unit(rng) - 1.0));
        rec.high = std::max(rec.open, rec.close) * (1.0 + o.jitter * unit(rng));
        rec.low = std::min(rec.open, rec.close) * (1.0 - o.jitter * unit(rng));
        prev_close = rec.close;
        frame.records.push_back(rec);
    }
    return frame;
}

} // namespace stockcast
