#pragma once

#include <string>
#include <vector>

#include "fnolab/grid.hpp"

namespace fnolab {

// Pointwise nonlinearity.  The analytic variant is a finite Taylor series
// sigma(x) = sum_{k>=1} sigma_k x^k / k! passing through the origin; the
// scale-invariant variant is alpha x for x >= 0 and beta x for x < 0.
struct ActivationSpec {
    enum class Kind { identity, analytic, scale_invariant };

    Kind kind = Kind::identity;
    std::vector<double> sigma;  // sigma[k], index k = 0..order; sigma[0] unused (= 0)
    double alpha = 1.0;
    double beta = 1.0;

    static ActivationSpec identity();
    static ActivationSpec analytic(std::vector<double> sigma_k);  // sigma_k[0] must be 0
    static ActivationSpec scale_invariant(double alpha, double beta);

    // Named activations used throughout the experiments.
    static ActivationSpec quadratic();        // x^2 + x
    static ActivationSpec cubic();            // x^3
    static ActivationSpec cubic_quadratic();  // x^3 + x^2
    static ActivationSpec tanh_taylor(int order = 7);
    static ActivationSpec relu();             // scale-invariant (1, 0)

    int max_order() const { return kind == Kind::analytic ? static_cast<int>(sigma.size()) - 1 : 1; }
    bool is_scale_invariant() const { return kind == Kind::scale_invariant; }

    double evaluate(double x) const;
    void apply(std::vector<double>& values) const;

    // Ablation helper: zero the given Taylor order (analytic variant only).
    ActivationSpec without_order(int k) const;

    std::string describe() const;
    void validate() const;
};

// Gaussian moments of the series under Z ~ N(0, v):
//   a[j] = E[sigma^(j)(Z)]   (derivative moments of sigma)
//   b[j] = E[phi^(j)(Z)] with phi(z) = z sigma'(z), i.e. phi_k = k sigma_k.
// Only meaningful for identity/analytic variants.
struct GaussianMoments {
    std::vector<double> a;
    std::vector<double> b;
};
GaussianMoments gaussian_moments(const ActivationSpec& act, double variance);

}  // namespace fnolab
