#include "rsid/noise.hpp"

#include <cmath>

#include "rsid/errors.hpp"

namespace rsid {

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(uint64_t root_seed) : root_seed_(root_seed) {
    uint64_t s = root_seed;
    for (auto& word : state_) word = splitmix64(s);
}

SeededRng SeededRng::child(uint64_t stream_index) const {
    // Two mixing rounds keep sibling streams decorrelated even for
    // consecutive indices.
    uint64_t s = root_seed_ ^ (0x8e9805d5b3a655d7ull + stream_index * 0xd1342543de82ef95ull);
    uint64_t derived = splitmix64(s);
    derived ^= splitmix64(s);
    return SeededRng(derived);
}

uint64_t SeededRng::next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SeededRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SeededRng::uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double SeededRng::normal() {
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0) continue;
        return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

double SeededRng::student_t(double nu) {
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double w = u * u + v * v;
        if (w >= 1.0 || w == 0.0) continue;
        return u * std::sqrt(nu * (std::pow(w, -2.0 / nu) - 1.0) / w);
    }
}

NoiseSpec NoiseSpec::gaussian(double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("gaussian noise requires sigma > 0");
    return NoiseSpec(NoiseKind::Gaussian, sigma, 0.0);
}

NoiseSpec NoiseSpec::spike_scale(double q, double b) {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("spike noise requires q in (0,1]");
    if (!(b > 0.0)) throw ConfigError("spike noise requires b > 0");
    return NoiseSpec(NoiseKind::SpikeScale, q, b);
}

NoiseSpec NoiseSpec::student_like(double nu, double scale) {
    if (!(nu > 4.0)) throw ConfigError("student noise requires nu > 4 for a finite fourth moment");
    if (!(scale > 0.0)) throw ConfigError("student noise requires scale > 0");
    return NoiseSpec(NoiseKind::StudentLike, nu, scale);
}

std::string NoiseSpec::kind_name() const {
    switch (kind_) {
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::SpikeScale: return "spike";
        case NoiseKind::StudentLike: return "student";
    }
    return "unknown";
}

double NoiseSpec::variance() const {
    switch (kind_) {
        case NoiseKind::Gaussian: return a_ * a_;
        case NoiseKind::SpikeScale: return a_ * b_ * b_;
        case NoiseKind::StudentLike: return b_ * b_;
    }
    return 0.0;
}

double NoiseSpec::fourth_moment() const {
    switch (kind_) {
        case NoiseKind::Gaussian: {
            const double s2 = a_ * a_;
            return 3.0 * s2 * s2;
        }
        case NoiseKind::SpikeScale: return a_ * b_ * b_ * b_ * b_;
        case NoiseKind::StudentLike: {
            const double s2 = b_ * b_;
            return s2 * s2 * (3.0 + 6.0 / (a_ - 4.0));
        }
    }
    return 0.0;
}

double NoiseSpec::sample_scalar(SeededRng& rng) const {
    switch (kind_) {
        case NoiseKind::Gaussian: return a_ * rng.normal();
        case NoiseKind::SpikeScale: {
            const double u = rng.uniform();
            if (u < a_ / 2.0) return b_;
            if (u < a_) return -b_;
            return 0.0;
        }
        case NoiseKind::StudentLike:
            // Scaled by sqrt((nu-2)/nu) so the variance is exactly scale^2.
            return b_ * std::sqrt((a_ - 2.0) / a_) * rng.student_t(a_);
    }
    return 0.0;
}

void NoiseSpec::sample_into(std::span<double> out, SeededRng& rng) const {
    if (kind_ == NoiseKind::Gaussian) {
        // Polar pairs: both accepted coordinates are used.
        size_t i = 0;
        while (i + 1 < out.size()) {
            for (;;) {
                const double u = 2.0 * rng.uniform() - 1.0;
                const double v = 2.0 * rng.uniform() - 1.0;
                const double s = u * u + v * v;
                if (s >= 1.0 || s == 0.0) continue;
                const double f = std::sqrt(-2.0 * std::log(s) / s);
                out[i] = a_ * u * f;
                out[i + 1] = a_ * v * f;
                break;
            }
            i += 2;
        }
        if (i < out.size()) out[i] = a_ * rng.normal();
        return;
    }
    for (double& x : out) x = sample_scalar(rng);
}

Vec NoiseSpec::sample_vector(int d, SeededRng& rng) const {
    Vec out(d);
    sample_into(out.entries(), rng);
    return out;
}

}  // namespace rsid
