#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>

// Seeded randomness is part of the public contract: identical seeds must
// produce identical draws on every run. std::normal_distribution leaves
// the mapping from engine output to variates implementation-defined, so
// the Gaussian transform is spelled out here instead.

namespace mgbeam {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // circularly-symmetric complex normal, unit variance (E|z|^2 = 1)
    std::complex<double> cnormal() {
        static constexpr double inv_sqrt2 = 0.70710678118654752440;
        const double re = normal();
        const double im = normal();
        return {re * inv_sqrt2, im * inv_sqrt2};
    }

    Eigen::VectorXcd cnormal_vector(int n) {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v[i] = cnormal();
        return v;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mgbeam
