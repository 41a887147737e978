#ifndef WEB3DB_TESTS_SUPPORT_STATS_HPP
#define WEB3DB_TESTS_SUPPORT_STATS_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace test_support {

// Deterministic RNG helpers. uniform_int_distribution is not portable
// across standard library implementations, so tests roll their own.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) {
            throw std::invalid_argument("next_below: zero bound");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::vector<std::uint8_t> next_bytes(std::size_t n) {
        std::vector<std::uint8_t> out(n);
        for (auto& b : out) {
            b = static_cast<std::uint8_t>(next_below(256));
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

// Pearson chi-square statistic with tail-bin merging: adjacent bins are
// collapsed until every expected count is >= 5, the usual validity rule.
// Returns the statistic and the resulting degrees of freedom.
struct ChiSquare {
    double statistic;
    std::size_t degrees_of_freedom;
};

inline ChiSquare chi_square(const std::vector<double>& observed,
                            const std::vector<double>& expected) {
    if (observed.size() != expected.size() || observed.empty()) {
        throw std::invalid_argument("chi_square: mismatched bins");
    }
    std::vector<double> obs_merged;
    std::vector<double> exp_merged;
    double obs_acc = 0.0;
    double exp_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        obs_acc += observed[i];
        exp_acc += expected[i];
        if (exp_acc >= 5.0) {
            obs_merged.push_back(obs_acc);
            exp_merged.push_back(exp_acc);
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if (exp_acc > 0.0) {
        if (exp_merged.empty()) {
            obs_merged.push_back(obs_acc);
            exp_merged.push_back(exp_acc);
        } else {
            obs_merged.back() += obs_acc;
            exp_merged.back() += exp_acc;
        }
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < obs_merged.size(); ++i) {
        const double diff = obs_merged[i] - exp_merged[i];
        stat += diff * diff / exp_merged[i];
    }
    std::size_t df = obs_merged.size() > 1 ? obs_merged.size() - 1 : 1;
    return ChiSquare{stat, df};
}

// Upper 0.99 quantiles of the chi-square distribution (significance 0.01).
inline double chi_square_critical_99(std::size_t df) {
    static const double table[] = {
        0.0,      6.634897, 9.210340, 11.344867, 13.276704, 15.086272,
        16.811894, 18.475307, 20.090235, 21.665994, 23.209251, 24.724970,
        26.216967, 27.688250, 29.141238, 30.577914, 31.999927, 33.408664,
        34.805306, 36.190869, 37.566235,
    };
    if (df == 0 || df >= sizeof(table) / sizeof(table[0])) {
        throw std::invalid_argument("chi_square_critical_99: df out of table range");
    }
    return table[df];
}

}  // namespace test_support

#endif
