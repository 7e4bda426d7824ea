#include "lsq/indicators.hpp"

#include "lsq/panel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lsq::ta {

namespace {

void require_period(int n, const char* what) {
    if (n < 1) throw std::invalid_argument(std::string(what) + ": period must be >= 1");
}

void require_same_length(std::initializer_list<std::size_t> sizes) {
    const std::size_t first = *sizes.begin();
    for (std::size_t s : sizes) {
        if (s != first) throw std::invalid_argument("indicator inputs have mismatched lengths");
    }
}

// Number of consecutive defined values ending at each index.
std::vector<std::size_t> defined_run(View x) {
    std::vector<std::size_t> run(x.size(), 0);
    std::size_t r = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r = is_missing(x[i]) ? 0 : r + 1;
        run[i] = r;
    }
    return run;
}

// Smoother with mean seed and a per-step update rule.
template <typename Update>
Series seeded_smoother(View x, int n, Update update) {
    Series out(x.size(), kMissing);
    const auto period = static_cast<std::size_t>(n);
    std::size_t count = 0;
    double sum = 0.0;
    double state = 0.0;
    bool seeded = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (is_missing(x[i])) {
            count = 0;
            sum = 0.0;
            seeded = false;
            continue;
        }
        if (!seeded) {
            sum += x[i];
            if (++count == period) {
                state = sum / static_cast<double>(period);
                seeded = true;
                out[i] = state;
            }
        } else {
            state = update(state, x[i]);
            out[i] = state;
        }
    }
    return out;
}

} // namespace

Series ema(View x, int n) {
    require_period(n, "ema");
    const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
    return seeded_smoother(x, n, [alpha](double prev, double v) { return prev + alpha * (v - prev); });
}

Series wilder(View x, int n) {
    require_period(n, "wilder");
    const double nn = static_cast<double>(n);
    return seeded_smoother(x, n, [nn](double prev, double v) { return (prev * (nn - 1.0) + v) / nn; });
}

Series rolling_sum(View x, int n) {
    require_period(n, "rolling_sum");
    const auto period = static_cast<std::size_t>(n);
    const auto run = defined_run(x);
    Series out(x.size(), kMissing);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (run[i] < period) continue;
        double s = 0.0;
        for (std::size_t k = i + 1 - period; k <= i; ++k) s += x[k];
        out[i] = s;
    }
    return out;
}

Series rolling_mean(View x, int n) {
    auto out = rolling_sum(x, n);
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

Series true_range(View high, View low, View close) {
    require_same_length({high.size(), low.size(), close.size()});
    Series tr(high.size(), kMissing);
    for (std::size_t i = 1; i < high.size(); ++i) {
        const double h = high[i], l = low[i], cp = close[i - 1];
        if (is_missing(h) || is_missing(l) || is_missing(cp)) continue;
        tr[i] = std::max({h - l, std::abs(h - cp), std::abs(l - cp)});
    }
    return tr;
}

Series atr(View high, View low, View close, int n) {
    require_period(n, "atr");
    const auto tr = true_range(high, low, close);
    return rolling_mean(tr, n);
}

AdxLines adx(View high, View low, View close, int n) {
    require_period(n, "adx");
    require_same_length({high.size(), low.size(), close.size()});
    const std::size_t len = high.size();
    Series plus_dm(len, kMissing), minus_dm(len, kMissing);
    for (std::size_t i = 1; i < len; ++i) {
        if (is_missing(high[i]) || is_missing(high[i - 1]) || is_missing(low[i]) || is_missing(low[i - 1])) continue;
        const double up = high[i] - high[i - 1];
        const double down = low[i - 1] - low[i];
        plus_dm[i] = (up > down && up > 0.0) ? up : 0.0;
        minus_dm[i] = (down > up && down > 0.0) ? down : 0.0;
    }
    const auto tr = true_range(high, low, close);
    const auto s_plus = wilder(plus_dm, n);
    const auto s_minus = wilder(minus_dm, n);
    const auto s_tr = wilder(tr, n);

    AdxLines out{Series(len, kMissing), Series(len, kMissing), Series(len, kMissing), {}};
    for (std::size_t i = 0; i < len; ++i) {
        if (is_missing(s_plus[i]) || is_missing(s_minus[i]) || is_missing(s_tr[i])) continue;
        const double pdi = s_tr[i] > 0.0 ? 100.0 * s_plus[i] / s_tr[i] : 0.0;
        const double mdi = s_tr[i] > 0.0 ? 100.0 * s_minus[i] / s_tr[i] : 0.0;
        out.plus_di[i] = pdi;
        out.minus_di[i] = mdi;
        const double denom = std::abs(pdi + mdi);
        out.dx[i] = denom > 0.0 ? 100.0 * std::abs(pdi - mdi) / denom : 0.0;
    }
    out.adx = wilder(out.dx, n);
    return out;
}

OscillatorLines apo_ppo_macd(View close, int fast, int slow, int signal) {
    require_period(fast, "apo_ppo_macd");
    require_period(signal, "apo_ppo_macd");
    if (fast >= slow) throw std::invalid_argument("apo_ppo_macd: fast period must be shorter than slow period");
    const auto f = ema(close, fast);
    const auto s = ema(close, slow);
    OscillatorLines out;
    out.apo.assign(close.size(), kMissing);
    out.ppo.assign(close.size(), kMissing);
    for (std::size_t i = 0; i < close.size(); ++i) {
        if (is_missing(f[i]) || is_missing(s[i])) continue;
        out.apo[i] = f[i] - s[i];
        if (s[i] != 0.0) out.ppo[i] = 100.0 * (f[i] - s[i]) / s[i];
    }
    out.macd = out.apo;
    out.macd_signal = ema(out.macd, signal);
    out.ppo_signal = ema(out.ppo, signal);
    return out;
}

Series cmo(View close, int n) {
    require_period(n, "cmo");
    const auto period = static_cast<std::size_t>(n);
    Series moves(close.size(), kMissing);
    for (std::size_t i = 1; i < close.size(); ++i) moves[i] = close[i] - close[i - 1];
    const auto run = defined_run(moves);
    Series out(close.size(), kMissing);
    for (std::size_t i = 0; i < close.size(); ++i) {
        if (run[i] < period) continue;
        double up = 0.0, down = 0.0;
        for (std::size_t k = i + 1 - period; k <= i; ++k) {
            if (moves[k] > 0.0) up += moves[k];
            else down -= moves[k];
        }
        out[i] = (up + down) > 0.0 ? 100.0 * (up - down) / (up + down) : 0.0;
    }
    return out;
}

Series williams_r(View high, View low, View close, int n) {
    require_period(n, "williams_r");
    require_same_length({high.size(), low.size(), close.size()});
    const auto period = static_cast<std::size_t>(n);
    Series joint(high.size(), kMissing);
    for (std::size_t i = 0; i < high.size(); ++i) {
        if (!is_missing(high[i]) && !is_missing(low[i]) && !is_missing(close[i])) joint[i] = 0.0;
    }
    const auto run = defined_run(joint);
    Series out(high.size(), kMissing);
    for (std::size_t i = 0; i < high.size(); ++i) {
        if (run[i] < period) continue;
        double hh = high[i], ll = low[i];
        for (std::size_t k = i + 1 - period; k <= i; ++k) {
            hh = std::max(hh, high[k]);
            ll = std::min(ll, low[k]);
        }
        out[i] = hh > ll ? std::clamp(-100.0 * (hh - close[i]) / (hh - ll), -100.0, 0.0) : 0.0;
    }
    return out;
}

Series mfi(View high, View low, View close, View volume, int n) {
    require_period(n, "mfi");
    require_same_length({high.size(), low.size(), close.size(), volume.size()});
    const std::size_t len = high.size();
    const auto period = static_cast<std::size_t>(n);
    Series tp(len, kMissing);
    for (std::size_t i = 0; i < len; ++i) {
        if (is_missing(volume[i])) continue;
        tp[i] = (high[i] + low[i] + close[i]) / 3.0;
    }
    const auto run = defined_run(tp);
    Series out(len, kMissing);
    for (std::size_t i = 0; i < len; ++i) {
        // n changes need n + 1 typical prices
        if (run[i] < period + 1) continue;
        double pos = 0.0, neg = 0.0;
        for (std::size_t k = i + 1 - period; k <= i; ++k) {
            const double flow = tp[k] * volume[k];
            if (tp[k] > tp[k - 1]) pos += flow;
            else if (tp[k] < tp[k - 1]) neg += flow;
        }
        if (neg == 0.0) out[i] = pos == 0.0 ? 50.0 : 100.0;
        else if (pos == 0.0) out[i] = 0.0;
        else out[i] = 100.0 - 100.0 / (1.0 + pos / neg);
    }
    return out;
}

Series money_flow_multiplier_volume(View high, View low, View close, View volume) {
    require_same_length({high.size(), low.size(), close.size(), volume.size()});
    Series out(high.size(), kMissing);
    for (std::size_t i = 0; i < high.size(); ++i) {
        const double h = high[i], l = low[i], c = close[i], v = volume[i];
        if (is_missing(h) || is_missing(l) || is_missing(c) || is_missing(v)) continue;
        out[i] = h > l ? ((c - l) - (h - c)) / (h - l) * v : 0.0;
    }
    return out;
}

Series accumulation_distribution(View high, View low, View close, View volume) {
    const auto cmfv = money_flow_multiplier_volume(high, low, close, volume);
    Series out(cmfv.size(), kMissing);
    double running = 0.0;
    for (std::size_t i = 0; i < cmfv.size(); ++i) {
        if (is_missing(cmfv[i])) continue;
        running += cmfv[i];
        out[i] = running;
    }
    return out;
}

Series rolling_beta(View asset_returns, View market_returns, int n) {
    if (n < 2) throw std::invalid_argument("rolling_beta: window must be >= 2");
    require_same_length({asset_returns.size(), market_returns.size()});
    const auto period = static_cast<std::size_t>(n);
    Series joint(asset_returns.size(), kMissing);
    for (std::size_t i = 0; i < joint.size(); ++i) {
        if (!is_missing(asset_returns[i]) && !is_missing(market_returns[i])) joint[i] = 0.0;
    }
    const auto run = defined_run(joint);
    Series out(joint.size(), kMissing);
    for (std::size_t i = 0; i < joint.size(); ++i) {
        if (run[i] < period) continue;
        double ma = 0.0, mm = 0.0;
        for (std::size_t k = i + 1 - period; k <= i; ++k) {
            ma += asset_returns[k];
            mm += market_returns[k];
        }
        ma /= static_cast<double>(period);
        mm /= static_cast<double>(period);
        double cov = 0.0, var = 0.0, sq = 0.0;
        for (std::size_t k = i + 1 - period; k <= i; ++k) {
            cov += (asset_returns[k] - ma) * (market_returns[k] - mm);
            var += (market_returns[k] - mm) * (market_returns[k] - mm);
            sq += market_returns[k] * market_returns[k];
        }
        // rounding residue of a constant window counts as zero variance
        if (var > 1e-20 * sq) out[i] = cov / var;
    }
    return out;
}

Series medprice(View high, View low) {
    require_same_length({high.size(), low.size()});
    Series out(high.size());
    for (std::size_t i = 0; i < high.size(); ++i) out[i] = (high[i] + low[i]) / 2.0;
    return out;
}

Series rate_of_return(View close, int w) {
    require_period(w, "rate_of_return");
    const auto lag = static_cast<std::size_t>(w);
    Series out(close.size(), kMissing);
    for (std::size_t i = lag; i < close.size(); ++i) {
        const double prior = close[i - lag];
        if (is_missing(prior) || is_missing(close[i]) || prior == 0.0) continue;
        out[i] = (close[i] - prior) / prior * 100.0;
    }
    return out;
}

Series returns_over_offset(View close, int offset) {
    require_period(offset, "returns_over_offset");
    const auto lag = static_cast<std::size_t>(offset);
    Series out(close.size(), kMissing);
    for (std::size_t i = lag; i < close.size(); ++i) {
        const double prior = close[i - lag];
        if (is_missing(prior) || is_missing(close[i]) || close[i] == 0.0) continue;
        out[i] = (close[i] - prior) / close[i] * 100.0;
    }
    return out;
}

Series trendline(View close, int w) {
    if (w < 2) throw std::invalid_argument("trendline: window must be >= 2");
    const auto period = static_cast<std::size_t>(w);
    const auto run = defined_run(close);
    const double x_mean = (static_cast<double>(w) - 1.0) / 2.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < period; ++k) sxx += (static_cast<double>(k) - x_mean) * (static_cast<double>(k) - x_mean);
    Series out(close.size(), kMissing);
    for (std::size_t i = 0; i < close.size(); ++i) {
        if (run[i] < period) continue;
        const std::size_t start = i + 1 - period;
        double y_mean = 0.0;
        for (std::size_t k = 0; k < period; ++k) y_mean += close[start + k];
        y_mean /= static_cast<double>(period);
        double sxy = 0.0;
        for (std::size_t k = 0; k < period; ++k) sxy += (static_cast<double>(k) - x_mean) * (close[start + k] - y_mean);
        out[i] = sxy / sxx;
    }
    return out;
}

Series simple_returns(View close) {
    Series out(close.size(), kMissing);
    for (std::size_t i = 1; i < close.size(); ++i) {
        if (is_missing(close[i]) || is_missing(close[i - 1]) || close[i - 1] == 0.0) continue;
        out[i] = (close[i] - close[i - 1]) / close[i - 1];
    }
    return out;
}

} // namespace lsq::ta
