#include "fnolab/eft_theory.hpp"

#include <cmath>
#include <functional>

#include "fnolab/spectral.hpp"

namespace fnolab {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Autocovariance rho_c(tau) = sum_sym K(n) e^{2 pi i n tau / L} sampled on an
// ngrid-point grid (band-limited synthesis of the kernel's symmetric form).
std::vector<double> autocovariance(const std::vector<double>& kernel, int ngrid) {
    std::vector<cplx> c(kernel.size());
    for (std::size_t i = 0; i < kernel.size(); ++i) c[i] = cplx{kernel[i], 0.0};
    return synthesize(c, ngrid);
}

// FS coefficients of sum_j coeff[j] * rho^j on the given grid.
std::vector<double> series_spectrum(const std::vector<double>& rho,
                                    const std::vector<double>& coeff) {
    std::vector<double> g(rho.size(), 0.0);
    std::vector<double> p(rho.size(), 1.0);
    for (std::size_t j = 0; j < coeff.size(); ++j) {
        if (j > 0)
            for (std::size_t x = 0; x < rho.size(); ++x) p[x] *= rho[x];
        if (coeff[j] != 0.0)
            for (std::size_t x = 0; x < rho.size(); ++x) g[x] += coeff[j] * p[x];
    }
    std::vector<cplx> spec = forward_half(g);
    std::vector<double> out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i].real();
    return out;
}

// Taylor list truncated at k_stop so the series control bounds every sum.
ActivationSpec truncated(const ActivationSpec& act, int k_stop) {
    if (act.kind != ActivationSpec::Kind::analytic) return act;
    if (static_cast<int>(act.sigma.size()) - 1 <= k_stop) return act;
    ActivationSpec a = act;
    a.sigma.resize(k_stop + 1);
    return a;
}

// Ordered compositions of k into positive parts.
void compositions(int k, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (k == 0) {
        out.push_back(cur);
        return;
    }
    for (int first = 1; first <= k; ++first) {
        cur.push_back(first);
        compositions(k - first, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> compositions(int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    compositions(k, cur, out);
    return out;
}

struct LiteralTerms {
    std::vector<double> reduced;  // literal reduced-kernel prediction
};

// The printed series, transcribed as-is: bare sigma_k^2 weights, the whole
// order-k term damped by width^(k-1), multi-part compositions as pointwise
// products of 1/L-normalized convolution powers of H = C_R * K, and the
// overall 1/L of the compact-domain corollary.
std::vector<double> literal_reduced(const TheoryState& state, const SeriesControl& ctrl,
                                    int ngrid) {
    const ActivationSpec act = truncated(state.activation, ctrl.k_stop);
    const int kmax_order = static_cast<int>(act.sigma.size()) - 1;
    GridSpec mg = state.grid;
    mg.num_points = ngrid;
    mg.k_max = mg.nyquist();
    const int nh = mg.half_size();
    std::vector<double> h(nh, 0.0);
    for (std::size_t n = 0; n < state.kernel.size(); ++n)
        h[n] = state.next_profile.values[n] * state.kernel[n];
    std::vector<std::vector<double>> powers(kmax_order + 1);
    powers[1] = h;
    for (int j = 2; j <= kmax_order; ++j) powers[j] = circular_convolve(powers[j - 1], h, mg);
    std::vector<double> out(nh, 0.0);
    for (int k = 1; k <= kmax_order; ++k) {
        if (act.sigma[k] == 0.0) continue;
        std::vector<double> tot(nh, 0.0);
        for (const auto& comp : compositions(k)) {
            double coeff = 1.0 / factorial(k);
            for (int part : comp) coeff *= factorial(part);
            std::vector<double> term(nh, 1.0);
            for (int part : comp)
                for (int n = 0; n < nh; ++n) term[n] *= powers[part][n];
            for (int n = 0; n < nh; ++n) tot[n] += coeff * term[n];
        }
        const double w = act.sigma[k] * act.sigma[k] / std::pow(state.width, k - 1);
        for (int n = 0; n < nh; ++n) out[n] += w * tot[n];
    }
    for (auto& v : out) v /= state.grid.length;
    return out;
}

}  // namespace

TheoryStep kernel_step_analytic(const TheoryState& state, const SeriesControl& ctrl,
                                int oversample) {
    if (state.activation.kind == ActivationSpec::Kind::scale_invariant)
        throw std::invalid_argument("kernel_step_analytic: analytic/identity activation required");
    const int n = state.grid.num_points;
    const int nm = std::max(1, oversample) * n;
    TheoryStep step;
    if (ctrl.interpretation == SeriesControl::Interpretation::pointwise_product) {
        step.reduced = literal_reduced(state, ctrl, nm);
        const std::vector<double> nat = literal_reduced(state, ctrl, n);
        step.next = state;
        step.next.layer += 1;
        step.next.kernel.assign(state.grid.half_size(), 0.0);
        for (int m = 0; m < state.grid.half_size(); ++m)
            step.next.kernel[m] = state.next_profile.values[m] * nat[m];
        return step;
    }
    const ActivationSpec act = truncated(state.activation, ctrl.k_stop);
    const double variance = sym_sum(state.kernel);
    const GaussianMoments mom = gaussian_moments(act, variance);
    std::vector<double> coeff(mom.a.size());
    for (std::size_t j = 0; j < mom.a.size(); ++j)
        coeff[j] = mom.a[j] * mom.a[j] / factorial(static_cast<int>(j));

    const std::vector<double> rho_meas = autocovariance(state.kernel, nm);
    step.reduced = series_spectrum(rho_meas, coeff);
    const std::vector<double> rho_nat =
        (nm == n) ? rho_meas : autocovariance(state.kernel, n);
    const std::vector<double> reduced_nat =
        (nm == n) ? step.reduced : series_spectrum(rho_nat, coeff);

    step.next = state;
    step.next.layer += 1;
    step.next.kernel.assign(state.grid.half_size(), 0.0);
    for (int m = 0; m < state.grid.half_size(); ++m)
        step.next.kernel[m] = state.next_profile.values[m] * reduced_nat[m];
    return step;
}

TheoryStep kernel_step_scale_invariant(const TheoryState& state, int oversample) {
    if (!state.activation.is_scale_invariant())
        throw std::invalid_argument("kernel_step_scale_invariant: scale-invariant activation required");
    const double al = state.activation.alpha;
    const double be = state.activation.beta;
    const int n = state.grid.num_points;
    const int nm = std::max(1, oversample) * n;
    const double variance = sym_sum(state.kernel);
    if (!(variance > 0.0))
        throw std::invalid_argument("kernel_step_scale_invariant: zero-variance state");

    auto g_of = [&](int ngrid) {
        std::vector<double> rho = autocovariance(state.kernel, ngrid);
        std::vector<double> g(ngrid);
        for (int x = 0; x < ngrid; ++x) {
            double r = rho[x] / variance;
            if (r > 1.0 || r < -1.0) {
                if (std::abs(r) > 1.0 + 1e-9)
                    throw std::runtime_error("kernel_step_scale_invariant: |rho| > 1");
                r = std::clamp(r, -1.0, 1.0);
            }
            // E[sigma(X) sigma(Y)] for bivariate normals: the arcsin kernel.
            g[x] = 0.25 * (al + be) * (al + be) * variance * r +
                   0.25 * (al - be) * (al - be) * (2.0 * variance / std::numbers::pi) *
                       (std::sqrt(1.0 - r * r) + r * std::asin(r));
        }
        std::vector<cplx> spec = forward_half(g);
        std::vector<double> out(spec.size());
        for (std::size_t i = 0; i < spec.size(); ++i) out[i] = spec[i].real();
        return out;
    };

    TheoryStep step;
    step.reduced = g_of(nm);
    const std::vector<double> reduced_nat = (nm == n) ? step.reduced : g_of(n);
    step.next = state;
    step.next.layer += 1;
    step.next.kernel.assign(state.grid.half_size(), 0.0);
    for (int m = 0; m < state.grid.half_size(); ++m)
        step.next.kernel[m] = state.next_profile.values[m] * reduced_nat[m];
    return step;
}

TheoryStep kernel_step_residual(const TheoryState& state, const SeriesControl& ctrl,
                                int oversample) {
    if (!(state.gamma >= 0.0 && state.gamma < 1.0))
        throw std::invalid_argument("kernel_step_residual: gamma in [0,1) required");
    TheoryStep step = kernel_step_analytic(state, ctrl, oversample);
    for (std::size_t m = 0; m < step.next.kernel.size(); ++m)
        step.next.kernel[m] += state.gamma * state.kernel[m];
    return step;
}

ChiParallel chi_parallel(const TheoryState& state, const SeriesControl& ctrl) {
    const int nh = state.grid.half_size();
    ChiParallel chi;
    chi.values.assign(nh, 0.0);
    std::vector<double> numer(nh, 0.0);
    if (state.activation.is_scale_invariant()) {
        // chi_par = K^(l+1) / K^(l): the susceptibility equals the kernel ratio.
        TheoryState s = state;
        s.gamma = 0.0;
        numer = kernel_step_scale_invariant(s, 1).next.kernel;
    } else if (ctrl.interpretation == SeriesControl::Interpretation::pointwise_product) {
        // Literal transcription: k/(k-1)! weighting replaces the kernel's 1/k!.
        const ActivationSpec act = truncated(state.activation, ctrl.k_stop);
        const int kmax_order = static_cast<int>(act.sigma.size()) - 1;
        GridSpec g = state.grid;
        std::vector<double> h(nh, 0.0);
        for (int n = 0; n < nh; ++n) h[n] = state.next_profile.values[n] * state.kernel[n];
        std::vector<std::vector<double>> powers(kmax_order + 1);
        if (kmax_order >= 1) powers[1] = h;
        for (int j = 2; j <= kmax_order; ++j) powers[j] = circular_convolve(powers[j - 1], h, g);
        for (int k = 1; k <= kmax_order; ++k) {
            if (act.sigma[k] == 0.0) continue;
            std::vector<double> tot(nh, 0.0);
            for (const auto& comp : compositions(k)) {
                double coeff = 1.0 / factorial(k - 1);
                if (state.gamma > 0.0) coeff *= k;  // residual display's extra k
                for (int part : comp) coeff *= factorial(part);
                std::vector<double> term(nh, 1.0);
                for (int part : comp)
                    for (int n = 0; n < nh; ++n) term[n] *= powers[part][n];
                for (int n = 0; n < nh; ++n) tot[n] += coeff * term[n];
            }
            const double w = act.sigma[k] * act.sigma[k] / std::pow(state.width, k - 1);
            for (int n = 0; n < nh; ++n) numer[n] += w * tot[n] / state.grid.length;
        }
        for (int n = 0; n < nh; ++n) {
            if (state.kernel[n] < 1e-14) {
                chi.excluded.push_back(n);
                continue;
            }
            chi.values[n] = numer[n] / state.kernel[n] + state.gamma;
        }
        return chi;
    } else {
        // Exact Gaussian response: FS of E[Z0 sigma'(Z0) sigma(Ztau)] scaled by
        // the next profile, divided by the current kernel.
        const ActivationSpec act = truncated(state.activation, ctrl.k_stop);
        const double variance = sym_sum(state.kernel);
        const GaussianMoments mom = gaussian_moments(act, variance);
        std::vector<double> coeff(mom.a.size());
        for (std::size_t j = 0; j < mom.a.size(); ++j)
            coeff[j] = mom.a[j] * mom.b[j] / factorial(static_cast<int>(j));
        const std::vector<double> rho = autocovariance(state.kernel, state.grid.num_points);
        const std::vector<double> hspec = series_spectrum(rho, coeff);
        for (int n = 0; n < nh; ++n) numer[n] = state.next_profile.values[n] * hspec[n];
    }
    for (int n = 0; n < nh; ++n) {
        if (state.kernel[n] < 1e-14) {
            chi.excluded.push_back(n);
            continue;
        }
        chi.values[n] = numer[n] / state.kernel[n] + state.gamma;
    }
    return chi;
}

ChiPerp chi_perp_reduced(const TheoryState& state, const SeriesControl& ctrl) {
    const int nh = state.grid.half_size();
    ChiPerp out;
    out.per_mode.assign(nh, 0.0);
    if (state.activation.is_scale_invariant()) {
        const double al = state.activation.alpha;
        const double be = state.activation.beta;
        const double variance = sym_sum(state.kernel);
        const std::vector<double> rho = autocovariance(state.kernel, state.grid.num_points);
        std::vector<double> gp(state.grid.num_points);
        for (int x = 0; x < state.grid.num_points; ++x) {
            double r = std::clamp(rho[x] / variance, -1.0, 1.0);
            gp[x] = 0.25 * (al - be) * (al - be) *
                        (1.0 + 2.0 / std::numbers::pi * std::asin(r)) +
                    al * be;
        }
        std::vector<cplx> spec = forward_half(gp);
        for (int n = 0; n < nh; ++n) out.per_mode[n] = spec[n].real();
    } else if (ctrl.interpretation == SeriesControl::Interpretation::pointwise_product) {
        // Literal transcription; the order-k term carries compositions of k-1
        // and the k=1 term is the constant sigma_1^2 on every mode.
        const ActivationSpec act = truncated(state.activation, ctrl.k_stop);
        const int kmax_order = static_cast<int>(act.sigma.size()) - 1;
        std::vector<double> h(nh, 0.0);
        for (int n = 0; n < nh; ++n) h[n] = state.next_profile.values[n] * state.kernel[n];
        std::vector<std::vector<double>> powers(std::max(2, kmax_order + 1));
        powers[1] = h;
        for (int j = 2; j <= kmax_order; ++j)
            powers[j] = circular_convolve(powers[j - 1], h, state.grid);
        for (int k = 1; k <= kmax_order; ++k) {
            if (act.sigma[k] == 0.0) continue;
            std::vector<double> tot(nh, k == 1 ? 1.0 : 0.0);
            if (k >= 2) {
                for (const auto& comp : compositions(k - 1)) {
                    double coeff = 1.0 / factorial(k - 1);
                    for (int part : comp) coeff *= factorial(part);
                    std::vector<double> term(nh, 1.0);
                    for (int part : comp)
                        for (int n = 0; n < nh; ++n) term[n] *= powers[part][n];
                    for (int n = 0; n < nh; ++n) tot[n] += coeff * term[n];
                }
            }
            const double w = act.sigma[k] * act.sigma[k] / std::pow(state.width, k - 1);
            for (int n = 0; n < nh; ++n) out.per_mode[n] += w * tot[n];
        }
    } else {
        const ActivationSpec act = truncated(state.activation, ctrl.k_stop);
        const double variance = sym_sum(state.kernel);
        const GaussianMoments mom = gaussian_moments(act, variance);
        // g'(tau) = sum_j (a_{j+1}^2 / j!) rho^j; the constant part lands in DC.
        std::vector<double> coeff(mom.a.size() > 1 ? mom.a.size() - 1 : 0);
        for (std::size_t j = 0; j + 1 < mom.a.size(); ++j)
            coeff[j] = mom.a[j + 1] * mom.a[j + 1] / factorial(static_cast<int>(j));
        const std::vector<double> rho = autocovariance(state.kernel, state.grid.num_points);
        out.per_mode = series_spectrum(rho, coeff);
    }
    double global = 0.0;
    for (int n = 0; n < nh; ++n)
        global += sym_weight(n, nh) * state.next_profile.values[n] * out.per_mode[n];
    out.global = global + state.gamma;
    return out;
}

double chi_perp_smeared(const TheoryState& state, const SeriesControl& ctrl,
                        const std::vector<double>& perturbation_spectrum) {
    const ChiPerp base = chi_perp_reduced(state, ctrl);
    // Plain symmetric-range convolution of the per-mode susceptibility with
    // the perturbation's spectral density (circular_convolve carries 1/L).
    std::vector<double> conv =
        circular_convolve(base.per_mode, perturbation_spectrum, state.grid);
    for (auto& v : conv) v *= state.grid.length;
    const int nh = state.grid.half_size();
    double num = 0.0, den = 0.0;
    for (int n = 0; n < nh; ++n) {
        num += sym_weight(n, nh) * state.next_profile.values[n] * conv[n];
        den += sym_weight(n, nh) * perturbation_spectrum[n];
    }
    return num / den + state.gamma;
}

std::vector<std::vector<double>> evolve(TheoryState state, const SeriesControl& ctrl,
                                        int steps, int oversample) {
    std::vector<std::vector<double>> reduced;
    reduced.reserve(steps);
    for (int i = 0; i < steps; ++i) {
        TheoryStep step;
        if (state.activation.is_scale_invariant())
            step = kernel_step_scale_invariant(state, oversample);
        else if (state.gamma > 0.0)
            step = kernel_step_residual(state, ctrl, oversample);
        else
            step = kernel_step_analytic(state, ctrl, oversample);
        reduced.push_back(step.reduced);
        state = std::move(step.next);
    }
    return reduced;
}

CriticalityReport solve_criticality(const CriticalityProblem& problem,
                                    const std::string& target,
                                    const SeriesControl& ctrl) {
    if (target != "local" && target != "global")
        throw std::invalid_argument("solve_criticality: target must be local or global");
    const bool solve_gamma = problem.fixed_cr_level.has_value();

    auto condition = [&](double x) {
        const double level = solve_gamma ? *problem.fixed_cr_level : x;
        const double gamma = solve_gamma ? x : 0.0;
        TheoryState st;
        st.grid = problem.grid;
        st.width = problem.width;
        st.activation = problem.activation;
        st.gamma = gamma;
        const WeightVarianceProfile base = step_profile(level, problem.k_max, problem.grid);
        st.kernel.assign(problem.grid.half_size(), 0.0);
        for (int n = 0; n < problem.grid.half_size(); ++n)
            st.kernel[n] = base.values[n] * problem.input_kernel[n];
        // The gamma family keeps C_R fixed; only the level family rescales it.
        st.next_profile = base;
        if (target == "global") return chi_perp_reduced(st, ctrl).global;
        // Local condition: depth-wise energy preservation of the kernel.
        TheoryStep step;
        if (st.activation.is_scale_invariant())
            step = kernel_step_scale_invariant(st, 1);
        else if (gamma > 0.0)
            step = kernel_step_residual(st, ctrl, 1);
        else
            step = kernel_step_analytic(st, ctrl, 1);
        return sym_sum(step.next.kernel) / sym_sum(st.kernel);
    };

    CriticalityReport rep;
    rep.target = target;
    rep.parameter = solve_gamma ? "gamma" : "cr_level";
    double lo = problem.bracket_lo, hi = problem.bracket_hi;
    if (solve_gamma) hi = std::min(hi, 1.0 - 1e-9);
    rep.bracket_lo = lo;
    rep.bracket_hi = hi;
    double flo = condition(lo) - 1.0;
    double fhi = condition(hi) - 1.0;
    if (flo * fhi > 0.0) {
        rep.converged = false;
        rep.message = "no sign change on bracket: f(lo)=" + std::to_string(flo + 1.0) +
                      ", f(hi)=" + std::to_string(fhi + 1.0);
        return rep;
    }
    double mid = 0.5 * (lo + hi), fmid = 0.0;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        fmid = condition(mid) - 1.0;
        ++rep.iterations;
        if (std::abs(fmid) < 1e-8) break;
        if (flo * fmid <= 0.0) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    rep.recommended = mid;
    rep.condition_value = fmid + 1.0;
    rep.converged = std::abs(fmid) < 1e-8;
    if (!rep.converged) rep.message = "bisection did not reach tolerance";
    return rep;
}

}  // namespace fnolab
