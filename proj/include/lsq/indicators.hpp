#pragma once

// Per-symbol technical indicators over daily sequences.
//
// Every function is causal: output[i] depends on inputs at indices <= i only.
// NaN marks a missing input or an undefined output. A rolling window that
// touches a missing value yields NaN, and recursive smoothers restart their
// seed after a gap, so prepending k missing values shifts the output by k.

#include <span>
#include <vector>

namespace lsq::ta {

using Series = std::vector<double>;
using View = std::span<const double>;

// alpha = 2/(n+1), seeded with the simple mean of the first n values.
Series ema(View x, int n);

// Wilder's smoother: seeded with the mean of the first n values,
// then s_t = (s_{t-1} * (n-1) + x_t) / n.
Series wilder(View x, int n);

// Simple n-period mean / sum; NaN until n consecutive defined values exist.
Series rolling_mean(View x, int n);
Series rolling_sum(View x, int n);

// max(H-L, |H-C_prev|, |L-C_prev|); undefined on the first bar.
Series true_range(View high, View low, View close);

// n-period simple mean of the true range.
Series atr(View high, View low, View close, int n = 14);

struct AdxLines {
    Series plus_di;
    Series minus_di;
    Series dx;
    Series adx;
};

// Directional movement system with Wilder smoothing. DX is 0 when +DI + -DI = 0.
AdxLines adx(View high, View low, View close, int n = 14);

struct OscillatorLines {
    Series apo;  // fast EMA - slow EMA
    Series ppo;  // 100 * (fast - slow) / slow
    Series macd; // identical to apo
    Series macd_signal;
    Series ppo_signal;
};

// Throws std::invalid_argument unless 1 <= fast < slow and signal >= 1.
OscillatorLines apo_ppo_macd(View close, int fast = 12, int slow = 26, int signal = 9);

// 100 * (sum up-moves - sum down-moves) / (sum of both) over n close-to-close moves; flat window -> 0.
Series cmo(View close, int n = 14);

// -100 * (HH - C) / (HH - LL) over n bars, in [-100, 0]; HH == LL -> 0.
Series williams_r(View high, View low, View close, int n = 10);

// Money flow index over n typical-price changes, in [0, 100].
// No negative flow -> 100, no positive flow -> 0, neither -> 50.
Series mfi(View high, View low, View close, View volume, int n = 14);

// Chaikin money flow volume per bar; H == L -> 0.
Series money_flow_multiplier_volume(View high, View low, View close, View volume);

// Running sum of the money flow volume; a missing bar yields NaN and the sum
// resumes from the last defined value.
Series accumulation_distribution(View high, View low, View close, View volume);

// Rolling covariance / variance over n paired observations; zero market variance -> NaN.
Series rolling_beta(View asset_returns, View market_returns, int n);

Series medprice(View high, View low);

// 100 * (P_t - P_{t-w}) / P_{t-w}
Series rate_of_return(View close, int w);

// 100 * (P_t - P_{t-offset}) / P_t
Series returns_over_offset(View close, int offset = 215);

// Least-squares slope of the last w closes against 0..w-1.
Series trendline(View close, int w);

// (P_t - P_{t-1}) / P_{t-1}
Series simple_returns(View close);

} // namespace lsq::ta
