#include "fnolab/empirical_stats.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "fnolab/spectral.hpp"

namespace fnolab {

EnsembleSummary summarize(const std::vector<std::vector<double>>& per_replica, bool retain) {
    EnsembleSummary s;
    s.replicas = static_cast<int>(per_replica.size());
    if (per_replica.empty()) throw std::invalid_argument("summarize: empty ensemble");
    const std::size_t n = per_replica[0].size();
    s.mean.assign(n, 0.0);
    s.stddev.assign(n, 0.0);
    for (const auto& row : per_replica)
        for (std::size_t i = 0; i < n; ++i) s.mean[i] += row[i];
    for (auto& m : s.mean) m /= s.replicas;
    if (s.replicas >= 2) {
        for (const auto& row : per_replica)
            for (std::size_t i = 0; i < n; ++i) {
                const double d = row[i] - s.mean[i];
                s.stddev[i] += d * d;
            }
        for (auto& v : s.stddev) v = std::sqrt(v / (s.replicas - 1));
    }
    if (retain) s.per_replica = per_replica;
    return s;
}

std::vector<double> replica_reduced_kernel(const LayerTrace& trace, int depth,
                                           int oversample) {
    const int ell = depth + 1;
    if (ell < 1 || ell >= static_cast<int>(trace.layers.size()))
        throw std::invalid_argument("replica_reduced_kernel: depth outside trace");
    const auto& rec = trace.layers[ell];
    const int width = static_cast<int>(rec.pre.size());
    if (oversample <= 1) {
        const std::size_t nh = rec.post[0].size();
        std::vector<double> k(nh, 0.0);
        for (const auto& ch : rec.post)
            for (std::size_t n = 0; n < nh; ++n) k[n] += std::norm(ch[n]);
        for (auto& v : k) v /= width;
        return k;
    }
    const int nf = oversample * trace.config.grid.num_points;
    std::vector<double> k(nf / 2 + 1, 0.0);
    for (const auto& ch : rec.pre) {
        std::vector<double> z = synthesize(ch, nf);
        trace.config.activation.apply(z);
        const std::vector<cplx> sh = forward_half(z);
        for (std::size_t n = 0; n < sh.size(); ++n) k[n] += std::norm(sh[n]);
    }
    for (auto& v : k) v /= width;
    return k;
}

std::vector<double> replica_pre_kernel(const LayerTrace& trace, int depth) {
    const int ell = depth + 1;
    if (ell < 0 || ell >= static_cast<int>(trace.layers.size()))
        throw std::invalid_argument("replica_pre_kernel: depth outside trace");
    const auto& rec = trace.layers[ell];
    const std::size_t nh = rec.pre[0].size();
    std::vector<double> k(nh, 0.0);
    for (const auto& ch : rec.pre)
        for (std::size_t n = 0; n < nh; ++n) k[n] += std::norm(ch[n]);
    for (auto& v : k) v /= rec.pre.size();
    return k;
}

EnsembleSummary reduced_kernel(const std::vector<LayerTrace>& traces, int depth,
                               int oversample) {
    if (traces.empty()) throw std::invalid_argument("reduced_kernel: empty ensemble");
    std::vector<std::vector<double>> rows;
    rows.reserve(traces.size());
    for (const auto& t : traces) rows.push_back(replica_reduced_kernel(t, depth, oversample));
    return summarize(rows);
}

EnsembleSummary pre_kernel(const std::vector<LayerTrace>& traces, int depth) {
    if (traces.empty()) throw std::invalid_argument("pre_kernel: empty ensemble");
    std::vector<std::vector<double>> rows;
    rows.reserve(traces.size());
    for (const auto& t : traces) rows.push_back(replica_pre_kernel(t, depth));
    return summarize(rows);
}

VertexEstimate vertex_estimate(const std::vector<LayerTrace>& traces, int depth, int mode) {
    if (static_cast<int>(traces.size()) < 50)
        throw std::invalid_argument("vertex_estimate: need at least 50 replicas");
    const auto& cfg = traces[0].config;
    if (mode < 0 || mode >= cfg.grid.half_size())
        throw std::invalid_argument("vertex_estimate: mode outside half spectrum");
    // Stochastic metric diagonal of layer depth+1: C_R(n) * mean_j |F(S^(l-1))_j|^2,
    // built from the measured layer's input side (its post-activations feed the
    // next multiplication, so the reduced kernel at `depth` carries the metric).
    const double cr = cfg.effective_profile(depth + 2).values[mode];
    std::vector<double> vals;
    vals.reserve(traces.size());
    for (const auto& t : traces) vals.push_back(cr * replica_reduced_kernel(t, depth)[mode]);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= (vals.size() - 1);
    VertexEstimate e;
    e.depth = depth;
    e.mode = mode;
    e.width = cfg.width;
    e.value = cfg.width * var;
    if (!std::isfinite(e.value)) throw std::runtime_error("vertex_estimate: non-finite value");
    return e;
}

namespace {

// Shared worker-pool runner with deterministic per-replica slots.
template <typename Fn>
void parallel_replicas(int replicas, int workers, Fn&& fn) {
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    workers = std::min(workers, replicas);
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto body = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= replicas) return;
            try {
                fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

SusceptibilityMeasurement parallel_susceptibility(const OperatorConfig& config,
                                                  const std::vector<SpatialField>& input,
                                                  double epsilon, std::uint64_t root_seed,
                                                  int replicas, int workers,
                                                  double denom_floor) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("parallel_susceptibility: epsilon > 0");
    OperatorConfig cfg = config;
    cfg.depth = 1;
    cfg.validate();
    const int nh = cfg.grid.half_size();
    const int n = cfg.grid.num_points;
    const auto next_profile = cfg.effective_profile(2);
    const double gamma = cfg.residual_gamma_tilde ? cfg.gamma() : 0.0;

    std::vector<std::vector<double>> chi_rows(replicas), kemp_rows(replicas);
    parallel_replicas(replicas, workers, [&](int r) {
        const LayerTrace t = run_replica(cfg, input, derive_seed(root_seed, 0, r, 0));
        const auto& pre = t.layers[1].pre;
        std::vector<double> kt_plus(nh, 0.0), kt_minus(nh, 0.0), kemp(nh, 0.0);
        for (const auto& ch : pre) {
            // Input scaling commutes with the linear pipeline up to the first
            // pre-activation, so u0(1 +- eps) rescales the stored spectra.
            std::vector<double> z = inverse_half(ch, n);
            std::vector<double> zp(z), zm(z);
            for (auto& v : zp) v *= (1.0 + epsilon);
            for (auto& v : zm) v *= (1.0 - epsilon);
            cfg.activation.apply(zp);
            cfg.activation.apply(zm);
            const auto sp = forward_half(zp);
            const auto sm = forward_half(zm);
            for (int m = 0; m < nh; ++m) {
                kt_plus[m] += std::norm(sp[m]);
                kt_minus[m] += std::norm(sm[m]);
                kemp[m] += std::norm(ch[m]);
            }
        }
        std::vector<double> chi(nh, 0.0);
        for (int m = 0; m < nh; ++m) {
            kt_plus[m] /= cfg.width;
            kt_minus[m] /= cfg.width;
            kemp[m] /= cfg.width;
            if (kemp[m] > denom_floor)
                chi[m] = next_profile.values[m] * (kt_plus[m] - kt_minus[m]) /
                             (4.0 * epsilon * kemp[m]) +
                         gamma;
        }
        chi_rows[r] = std::move(chi);
        kemp_rows[r] = std::move(kemp);
    });

    SusceptibilityMeasurement out;
    out.kind = SusceptibilityMeasurement::Kind::parallel;
    out.epsilon = epsilon;
    out.per_mode = summarize(chi_rows);
    out.replica_pre_kernels = std::move(kemp_rows);
    for (int m = 0; m < nh; ++m) {
        bool excluded = false;
        for (const auto& row : out.replica_pre_kernels)
            if (row[m] <= denom_floor) excluded = true;
        if (excluded) out.excluded_modes.push_back(m);
    }
    return out;
}

SusceptibilityMeasurement perpendicular_susceptibility(
    const OperatorConfig& config, const std::vector<SpatialField>& input,
    const GrfSpec& perturbation_spec, double epsilon, std::uint64_t root_seed,
    int replicas, int workers) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("perpendicular_susceptibility: epsilon > 0");
    if (input.size() != 1)
        throw std::invalid_argument("perpendicular_susceptibility: single input channel only");
    OperatorConfig cfg = config;
    cfg.depth = 1;
    cfg.validate();
    const int nh = cfg.grid.half_size();
    const int n = cfg.grid.num_points;
    const auto next_profile = cfg.effective_profile(2);
    const double gamma = cfg.residual_gamma_tilde ? cfg.gamma() : 0.0;
    const auto& u0 = input[0].values;
    double u0_norm2 = 0.0;
    for (double v : u0) u0_norm2 += v * v;

    std::vector<std::vector<double>> integrand_rows(replicas), scalar_rows(replicas);
    std::vector<std::vector<double>> kemp_rows(replicas), pert_rows(replicas);
    parallel_replicas(replicas, workers, [&](int r) {
        const std::uint64_t rs = derive_seed(root_seed, 0, r, 0);
        // Orthogonal perturbation: fresh GRF, project out u0, RMS-normalize.
        SpatialField eta = sample_grf(perturbation_spec, derive_seed(rs, 0, 0, 7));
        double dot = 0.0;
        for (int x = 0; x < n; ++x) dot += eta.values[x] * u0[x];
        const double c = dot / u0_norm2;
        for (int x = 0; x < n; ++x) eta.values[x] -= c * u0[x];
        double rms = 0.0, check = 0.0;
        for (int x = 0; x < n; ++x) rms += eta.values[x] * eta.values[x];
        rms = std::sqrt(rms / n);
        if (rms == 0.0) throw std::runtime_error("perpendicular_susceptibility: degenerate eta");
        for (int x = 0; x < n; ++x) eta.values[x] *= epsilon / rms;
        for (int x = 0; x < n; ++x) check += eta.values[x] * u0[x];
        if (std::abs(check) > 1e-10 * std::sqrt(u0_norm2) * epsilon * std::sqrt(static_cast<double>(n)))
            throw std::runtime_error("perpendicular_susceptibility: projection failed");

        // Common random numbers: same lift and multiplier as the u0 run.
        const auto w = sample_lift_matrix(cfg.width, 1, cfg.c_w, derive_seed(rs, 0, 0, 1));
        const auto rw = sample_weights(cfg.effective_profile(1), cfg.width, cfg.width,
                                       cfg.grid, derive_seed(rs, 1, 0, 2));
        const auto lifted0 = lift(input, w, cfg.width);
        const auto lifted_eta = lift({eta}, w, cfg.width);
        ChannelSpectra z0(cfg.width), dz(cfg.width);
        for (int i = 0; i < cfg.width; ++i) {
            z0[i] = forward_half(lifted0[i].values);
            dz[i] = forward_half(lifted_eta[i].values);
        }
        auto mult = [&](const ChannelSpectra& in) {
            ChannelSpectra out(cfg.width, std::vector<cplx>(nh, cplx{0.0, 0.0}));
            for (int i = 0; i < cfg.width; ++i)
                for (int j = 0; j < cfg.width; ++j) {
                    const cplx* rij = &rw.entries[(static_cast<std::size_t>(i) * cfg.width + j) * nh];
                    for (int m = 0; m <= cfg.grid.k_max; ++m) out[i][m] += rij[m] * in[j][m];
                }
            return out;
        };
        const ChannelSpectra zp = mult(z0);
        const ChannelSpectra zd = mult(dz);

        std::vector<double> num(nh, 0.0), den(nh, 0.0), kemp(nh, 0.0);
        for (int i = 0; i < cfg.width; ++i) {
            std::vector<double> zplus = inverse_half(zp[i], n);
            std::vector<double> zdelta = inverse_half(zd[i], n);
            std::vector<double> sp(n), sm(n);
            for (int x = 0; x < n; ++x) {
                sp[x] = cfg.activation.evaluate(zplus[x] + zdelta[x]);
                sm[x] = cfg.activation.evaluate(zplus[x] - zdelta[x]);
            }
            std::vector<double> diff(n);
            for (int x = 0; x < n; ++x) diff[x] = sp[x] - sm[x];
            const auto dh = forward_half(diff);
            for (int m = 0; m < nh; ++m) {
                num[m] += std::norm(dh[m]) / 4.0;
                den[m] += std::norm(zd[i][m]);
                kemp[m] += std::norm(zp[i][m]);
            }
        }
        double num_sum = 0.0, den_sum = 0.0;
        std::vector<double> integrand(nh, 0.0);
        for (int m = 0; m < nh; ++m) {
            num[m] /= cfg.width;
            den[m] /= cfg.width;
            kemp[m] /= cfg.width;
            integrand[m] = next_profile.values[m] * num[m];
            num_sum += sym_weight(m, nh) * integrand[m];
            den_sum += sym_weight(m, nh) * den[m];
        }
        scalar_rows[r] = {num_sum / den_sum + gamma};
        for (auto& v : integrand) v /= den_sum;
        integrand_rows[r] = std::move(integrand);
        kemp_rows[r] = std::move(kemp);
        pert_rows[r] = std::move(den);
    });

    SusceptibilityMeasurement out;
    out.kind = SusceptibilityMeasurement::Kind::perpendicular;
    out.epsilon = epsilon;
    out.per_mode = summarize(integrand_rows);
    out.integrated = summarize(scalar_rows);
    out.replica_pre_kernels = std::move(kemp_rows);
    out.replica_perturbation_spectra = std::move(pert_rows);
    return out;
}

}  // namespace fnolab
