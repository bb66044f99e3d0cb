#include "fnolab/operator_ensemble.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "fnolab/spectral.hpp"

namespace fnolab {

namespace {
// Seed roles within one replica stream.
constexpr std::uint64_t kRoleLift = 1;
constexpr std::uint64_t kRoleFourier = 2;
}  // namespace

void OperatorConfig::validate() const {
    grid.validate();
    activation.validate();
    profile.validate();
    if (width < 1) throw std::invalid_argument("OperatorConfig: width must be >= 1");
    if (depth < 0) throw std::invalid_argument("OperatorConfig: depth must be >= 0");
    if (input_channels < 1) throw std::invalid_argument("OperatorConfig: input_channels >= 1");
    if (static_cast<int>(profile.values.size()) != grid.half_size())
        throw std::invalid_argument("OperatorConfig: profile length != N/2+1");
    if (residual_gamma_tilde) {
        const double g = gamma();
        if (!(g >= 0.0 && g < 1.0))
            throw std::invalid_argument("OperatorConfig: need gamma_tilde^2 in [0,1)");
    }
}

std::vector<SpatialField> lift(const std::vector<SpatialField>& inputs,
                               const std::vector<double>& weights, int n_out) {
    if (inputs.empty()) throw std::invalid_argument("lift: no input channels");
    const int n_in = static_cast<int>(inputs.size());
    if (static_cast<int>(weights.size()) != n_out * n_in)
        throw std::invalid_argument("lift: weight matrix dimension mismatch");
    const int n = inputs[0].grid.num_points;
    std::vector<SpatialField> out(n_out);
    for (int i = 0; i < n_out; ++i) {
        out[i].grid = inputs[0].grid;
        out[i].values.assign(n, 0.0);
        for (int j = 0; j < n_in; ++j) {
            const double w = weights[static_cast<std::size_t>(i) * n_in + j];
            for (int x = 0; x < n; ++x) out[i].values[x] += w * inputs[j].values[x];
        }
    }
    return out;
}

LayerRecord fourier_layer(const ChannelSpectra& in, const SpectralWeightTensor& r,
                          const ActivationSpec& act, int k_max,
                          const ChannelSpectra* residual_pre, double gamma_tilde) {
    const int n_in = static_cast<int>(in.size());
    if (n_in != r.n_in) throw std::invalid_argument("fourier_layer: channel count mismatch");
    const int nh = r.grid.half_size();
    const int n = r.grid.num_points;
    LayerRecord rec;
    rec.pre.assign(r.n_out, std::vector<cplx>(nh, cplx{0.0, 0.0}));
    for (int i = 0; i < r.n_out; ++i) {
        auto& pre = rec.pre[i];
        for (int j = 0; j < n_in; ++j) {
            const cplx* rij = &r.entries[(static_cast<std::size_t>(i) * n_in + j) * nh];
            const auto& uj = in[j];
            for (int m = 0; m <= k_max; ++m) pre[m] += rij[m] * uj[m];
        }
        if (residual_pre) {
            if (static_cast<int>(residual_pre->size()) != r.n_out)
                throw std::invalid_argument("fourier_layer: residual channel mismatch");
            const auto& prev = (*residual_pre)[i];
            for (int m = 0; m < nh; ++m) pre[m] += gamma_tilde * prev[m];
        }
    }
    rec.post.assign(r.n_out, {});
    for (int i = 0; i < r.n_out; ++i) {
        std::vector<double> z = inverse_half(rec.pre[i], n);
        act.apply(z);
        rec.post[i] = forward_half(z);
    }
    return rec;
}

LayerTrace run_replica(const OperatorConfig& config,
                       const std::vector<SpatialField>& input, std::uint64_t seed) {
    config.validate();
    if (static_cast<int>(input.size()) != config.input_channels)
        throw std::invalid_argument("run_replica: input channel count mismatch");

    LayerTrace trace;
    trace.config = config;
    trace.layers.reserve(config.depth + 1);

    const auto w = sample_lift_matrix(config.width, config.input_channels, config.c_w,
                                      derive_seed(seed, 0, 0, kRoleLift));
    const auto lifted = lift(input, w, config.width);
    LayerRecord layer0;
    layer0.pre.reserve(config.width);
    for (const auto& f : lifted) layer0.pre.push_back(forward_half(f.values));
    layer0.post = layer0.pre;  // no activation on the lift output
    trace.layers.push_back(std::move(layer0));

    const double gt = config.residual_gamma_tilde.value_or(0.0);
    for (int ell = 1; ell <= config.depth; ++ell) {
        const auto r = sample_weights(config.effective_profile(ell), config.width,
                                      config.width, config.grid,
                                      derive_seed(seed, static_cast<std::uint64_t>(ell), 0,
                                                  kRoleFourier));
        const ChannelSpectra* res = nullptr;
        if (config.residual_gamma_tilde && ell >= 2) res = &trace.layers[ell - 1].pre;
        trace.layers.push_back(fourier_layer(trace.layers[ell - 1].post, r,
                                             config.activation, config.grid.k_max, res, gt));
    }
    return trace;
}

std::vector<LayerTrace> run_ensemble(const OperatorConfig& config,
                                     const std::vector<SpatialField>& input,
                                     std::uint64_t root_seed, int replicas,
                                     int workers) {
    if (replicas < 1) throw std::invalid_argument("run_ensemble: replicas must be >= 1");
    std::vector<LayerTrace> traces(replicas);
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    workers = std::min(workers, replicas);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    auto body = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= replicas) return;
            try {
                traces[r] = run_replica(config, input, derive_seed(root_seed, 0, r, 0));
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
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return traces;
}

}  // namespace fnolab
