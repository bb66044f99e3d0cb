#include "fnolab/activation.hpp"

#include <cmath>
#include <stdexcept>

namespace fnolab {

namespace {
double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}
}  // namespace

ActivationSpec ActivationSpec::identity() {
    ActivationSpec a;
    a.kind = Kind::identity;
    a.sigma = {0.0, 1.0};
    return a;
}

ActivationSpec ActivationSpec::analytic(std::vector<double> sigma_k) {
    ActivationSpec a;
    a.kind = Kind::analytic;
    a.sigma = std::move(sigma_k);
    a.validate();
    return a;
}

ActivationSpec ActivationSpec::scale_invariant(double alpha, double beta) {
    ActivationSpec a;
    a.kind = Kind::scale_invariant;
    a.alpha = alpha;
    a.beta = beta;
    return a;
}

ActivationSpec ActivationSpec::quadratic() { return analytic({0.0, 1.0, 2.0}); }
ActivationSpec ActivationSpec::cubic() { return analytic({0.0, 0.0, 0.0, 6.0}); }
ActivationSpec ActivationSpec::cubic_quadratic() { return analytic({0.0, 0.0, 2.0, 6.0}); }

ActivationSpec ActivationSpec::tanh_taylor(int order) {
    // k!-scaled odd Taylor coefficients of tanh: 1, -2, 16, -272, ...
    static const double coeff[] = {1.0, -2.0, 16.0, -272.0, 7936.0};
    if (order < 1 || order > 9 || order % 2 == 0)
        throw std::invalid_argument("tanh_taylor: order must be odd and <= 9");
    std::vector<double> s(order + 1, 0.0);
    for (int k = 1, i = 0; k <= order; k += 2, ++i) s[k] = coeff[i];
    return analytic(std::move(s));
}

ActivationSpec ActivationSpec::relu() { return scale_invariant(1.0, 0.0); }

void ActivationSpec::validate() const {
    if (kind == Kind::analytic) {
        if (sigma.size() < 2) throw std::invalid_argument("analytic activation needs an order >= 1");
        if (sigma[0] != 0.0)
            throw std::invalid_argument("analytic activation must pass through the origin");
    }
}

double ActivationSpec::evaluate(double x) const {
    switch (kind) {
        case Kind::identity:
            return x;
        case Kind::scale_invariant:
            return x >= 0.0 ? alpha * x : beta * x;
        case Kind::analytic: {
            // Horner evaluation of sum_k sigma_k x^k / k!
            double y = 0.0;
            for (int k = static_cast<int>(sigma.size()) - 1; k >= 1; --k)
                y = (y + sigma[k] / factorial(k)) * x;
            return y;
        }
    }
    return x;
}

void ActivationSpec::apply(std::vector<double>& values) const {
    if (kind == Kind::identity) return;
    for (auto& v : values) v = evaluate(v);
}

ActivationSpec ActivationSpec::without_order(int k) const {
    if (kind != Kind::analytic)
        throw std::invalid_argument("without_order: only analytic activations can be ablated");
    ActivationSpec a = *this;
    if (k >= 1 && k < static_cast<int>(a.sigma.size())) a.sigma[k] = 0.0;
    return a;
}

std::string ActivationSpec::describe() const {
    switch (kind) {
        case Kind::identity:
            return "identity";
        case Kind::scale_invariant:
            return "scale_invariant(" + std::to_string(alpha) + "," + std::to_string(beta) + ")";
        case Kind::analytic: {
            std::string s = "analytic[";
            for (std::size_t k = 1; k < sigma.size(); ++k) {
                if (k > 1) s += ",";
                s += std::to_string(sigma[k]);
            }
            return s + "]";
        }
    }
    return "?";
}

GaussianMoments gaussian_moments(const ActivationSpec& act, double variance) {
    if (act.kind == ActivationSpec::Kind::scale_invariant)
        throw std::invalid_argument("gaussian_moments: analytic/identity only");
    const auto& sig = act.sigma;
    const int kmax = static_cast<int>(sig.size()) - 1;
    GaussianMoments m;
    m.a.assign(kmax + 1, 0.0);
    m.b.assign(kmax + 1, 0.0);
    // E[sigma^(j)(Z)] = sum_p sigma_{j+2p} V^p / (2^p p!), finite for a series.
    for (int j = 0; j <= kmax; ++j) {
        double va = 0.0, vb = 0.0, c = 1.0;
        for (int p = 0; j + 2 * p <= kmax; ++p) {
            const int k = j + 2 * p;
            if (p > 0) c *= variance / (2.0 * p);
            if (k >= 1) {
                va += sig[k] * c;
                vb += k * sig[k] * c;
            }
        }
        m.a[j] = va;
        m.b[j] = vb;
    }
    return m;
}

}  // namespace fnolab
