#pragma once

#include <cstdint>

#include "stockcast/dataio.hpp"

namespace stockcast {

struct SynthOptions {
    double r = 3.9;            // logistic-map parameter
    double base = 1000.0;      // close = base + amplitude * x_n
    double amplitude = 1000.0;
    double jitter = 0.002;     // relative spread of open and of the high/low envelope
    Date start{std::chrono::year{2000}, std::chrono::January, std::chrono::day{3}};
};

/// Chaotic OHLC series on consecutive weekdays. The close follows the
/// logistic map x_{n+1} = r x_n (1 - x_n) from a seeded x_0; open, high and
/// low are jittered around it so every record satisfies the OHLC ordering.
TimeSeriesFrame synth_logistic_ohlc(std::size_t n_days, std::uint64_t seed, const SynthOptions& options = {});

} // namespace stockcast
