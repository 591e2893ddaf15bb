#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "rsid/matrix.hpp"

namespace rsid {

/// Deterministic xoshiro256++ generator seeded through splitmix64.
///
/// Stream discipline: every logical unit of work (trajectory, corruption
/// pass, trial) runs on its own generator obtained via child(), so results
/// do not depend on scheduling. Within one generator, draws are consumed
/// strictly in call order. Identical seeds produce bitwise-identical
/// streams on any platform with IEEE-754 doubles.
class SeededRng {
  public:
    explicit SeededRng(uint64_t root_seed);

    uint64_t root_seed() const { return root_seed_; }

    /// Independent substream derived from (root_seed, stream_index).
    SeededRng child(uint64_t stream_index) const;

    uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on (0, 1]; safe under log().
    double uniform_pos();

    /// Standard normal by the Marsaglia polar method. The rejection loop
    /// consumes a variable number of words, which is fine because streams
    /// are never shared across work units.
    double normal();

    /// Student t with nu degrees of freedom (Bailey's polar algorithm).
    double student_t(double nu);

  private:
    uint64_t state_[4];
    uint64_t root_seed_;
};

enum class NoiseKind { Gaussian, SpikeScale, StudentLike };

/// Zero-mean noise distribution with analytically known per-coordinate
/// variance and fourth moment. Coordinates of sampled vectors are mutually
/// independent. The three families:
///   Gaussian(sigma)       light tail, kurtosis 3
///   SpikeScale(q, b)      +-b with probability q/2 each, else 0;
///                         bounded support, kurtosis 1/q
///   StudentLike(nu, scale) standardized t (nu > 4 so the fourth moment
///                         exists), kurtosis 3 + 6/(nu-4)
class NoiseSpec {
  public:
    static NoiseSpec gaussian(double sigma);
    static NoiseSpec spike_scale(double q, double b);
    static NoiseSpec student_like(double nu, double scale);

    NoiseKind kind() const { return kind_; }
    std::string kind_name() const;

    double variance() const;       // sigma^2
    double fourth_moment() const;  // per-coordinate E[w(i)^4]
    double kurtosis() const { return fourth_moment() / (variance() * variance()); }

    double sample_scalar(SeededRng& rng) const;
    void sample_into(std::span<double> out, SeededRng& rng) const;
    Vec sample_vector(int d, SeededRng& rng) const;

    double param_a() const { return a_; }  // sigma | q | nu
    double param_b() const { return b_; }  // unused | b | scale

  private:
    NoiseSpec(NoiseKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
    NoiseKind kind_;
    double a_;
    double b_;
};

}  // namespace rsid
