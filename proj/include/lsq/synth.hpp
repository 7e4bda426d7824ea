#pragma once

#include "lsq/market_data.hpp"

#include <cstdint>
#include <filesystem>

namespace lsq {

// Seeded market with a planted cross-sectional signal.
//
// Each symbol carries a latent AR(1) score z. The close-to-close log return
// from t to t+1 is beta * market + idio_vol * (signal_scale * strength * z_t + e),
// so z_t is known at t and drives the following sessions. Fundamentals are
// republished every `publish_every` sessions with ROIC, cash-flow and margin
// lines that are noisy views of z; momentum factors see z through the prices.
struct SynthConfig {
    std::size_t n_symbols = 100;
    std::size_t n_days = 750;
    double signal_strength = 0.5;
    std::uint64_t seed = 1;
    Date start{2015, 1, 2};

    double persistence = 0.95;  // AR(1) coefficient of z
    double signal_scale = 0.2;  // daily signal loading per unit strength
    double idio_vol = 0.02;
    double market_vol = 0.01;
    double market_drift = 0.0003;
    double overnight_vol = 0.003; // open gap around the previous close
    double view_noise = 1.0;      // noise sd of the fundamental views
    int publish_every = 5;

    void validate() const; // n_symbols >= 10, n_days >= 300
};

struct SynthMarket {
    MarketData market;
    FundamentalsTable fundamentals;
    Panel latent; // z on the market axis
};

SynthMarket generate_synthetic_market(const SynthConfig& config);

// bars.csv, fundamentals.csv, latent.csv (`date,symbol,latent`).
void write_synthetic_market(const SynthMarket& m, const std::filesystem::path& dir);

// Reads a latent.csv back onto the given axis; cells not in the file stay missing.
Panel read_latent_csv(const std::filesystem::path& path, const std::vector<Date>& dates,
                      const std::vector<std::string>& symbols);

} // namespace lsq
