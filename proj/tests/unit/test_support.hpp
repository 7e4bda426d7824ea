#pragma once

#include "lsq/market_data.hpp"
#include "lsq/matrix.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace lsq::testing {

struct FuzzBars {
    std::vector<double> open, high, low, close, volume;
};

// Random walk with occasional flat bars and gaps in range; always satisfies the Bar invariants.
inline FuzzBars fuzz_bars(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, 0.02);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FuzzBars b;
    double prev = 50.0;
    for (std::size_t i = 0; i < n; ++i) {
        double o = prev * std::exp(step(rng) * 0.3);
        double c = u(rng) < 0.05 ? o : o * std::exp(step(rng));
        double h = std::max(o, c) * (1.0 + 0.01 * u(rng));
        double l = std::min(o, c) * (1.0 - 0.01 * u(rng));
        if (u(rng) < 0.03) h = l = o = std::max(o, c); // flat bar, close may differ
        const double close = std::clamp(c, l, h);
        b.open.push_back(std::clamp(o, l, h));
        b.high.push_back(h);
        b.low.push_back(l);
        b.close.push_back(close);
        b.volume.push_back(std::floor(1000.0 + 9000.0 * u(rng)));
        prev = close;
    }
    return b;
}

inline std::vector<Date> business_days(Date start, std::size_t n) {
    std::vector<Date> out;
    Date d = start;
    while (out.size() < n) {
        if (d.iso_weekday() <= 5) out.push_back(d);
        d = d.plus_days(1);
    }
    return out;
}

inline std::vector<std::string> symbol_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "S%03zu", i);
        out.emplace_back(buf);
    }
    return out;
}

struct Labeled {
    Matrix X;
    std::vector<int> y;
};

// Gaussian blobs in `dims` dimensions, class c centered at `separation` along
// axis c (mod dims), labels taken from `labels` in turn.
inline Labeled blobs(std::size_t n, std::vector<int> labels, std::uint64_t seed, double separation = 8.0,
                     double sd = 1.0, std::size_t dims = 2) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    Labeled out{Matrix(n, dims), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % labels.size();
        out.y[i] = labels[c];
        for (std::size_t j = 0; j < dims; ++j) {
            const double center = (j == c % dims) ? separation * (c < dims ? 1.0 : -1.0) : 0.0;
            out.X(i, j) = center + noise(rng);
        }
    }
    return out;
}

} // namespace lsq::testing
