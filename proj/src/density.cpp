#include "pac/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pac/error.hpp"

namespace pac {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

std::size_t head_outputs(HeadKind head) { return head == HeadKind::Gaussian ? 2 : 1; }

// Activations of one forward pass; acts[0] is the standardized input, acts[l+1]
// the output of layer l (tanh applied except for the last layer).
struct Trace {
    std::vector<std::vector<double>> acts;
};

void standardize_into(const Mechanism& mech, std::span<const double> raw, std::vector<double>& out) {
    const std::size_t dim = mech.input_dim();
    if (raw.size() != dim) {
        throw Error(ErrorCode::DimensionMismatch, mech.node + ": expected " + std::to_string(dim) +
                                                      " inputs, got " + std::to_string(raw.size()));
    }
    out.resize(dim);
    const auto& st = mech.standardization;
    for (std::size_t i = 0; i < dim; ++i) {
        const double mean = st.mean.empty() ? 0.0 : st.mean[i];
        const double scale = st.scale.empty() ? 1.0 : st.scale[i];
        out[i] = (raw[i] - mean) / scale;
    }
}

void run_layers(const MlpParams& params, Trace& trace) {
    const std::size_t n_layers = params.layers.size();
    trace.acts.resize(n_layers + 1);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const DenseLayer& layer = params.layers[l];
        const auto& in = trace.acts[l];
        auto& out = trace.acts[l + 1];
        out.resize(layer.outputs);
        const bool hidden = l + 1 < n_layers;
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            const double* row = layer.weights.data() + o * layer.inputs;
            double z = layer.bias[o];
            for (std::size_t i = 0; i < layer.inputs; ++i) z += row[i] * in[i];
            out[o] = hidden ? std::tanh(z) : z;
        }
    }
}

DistributionParams head_params(HeadKind head, std::span<const double> raw) {
    if (head == HeadKind::Gaussian) {
        return GaussianParams{raw[0], softplus(raw[1]) + kSigmaFloor};
    }
    const double logit = std::clamp(raw[0], -kLogitClamp, kLogitClamp);
    return BernoulliParams{logistic(logit), logit};
}

// Loss of one row and its gradient w.r.t. the raw head outputs.
double head_loss(HeadKind head, std::span<const double> raw, double y, double* d_raw) {
    if (head == HeadKind::Gaussian) {
        const double mu = raw[0];
        const double sigma = softplus(raw[1]) + kSigmaFloor;
        const double r = (y - mu) / sigma;
        if (d_raw != nullptr) {
            d_raw[0] = -r / sigma;
            d_raw[1] = (1.0 - r * r) / sigma * logistic(raw[1]);
        }
        return 0.5 * r * r + std::log(sigma) + kHalfLog2Pi;
    }
    const double logit = std::clamp(raw[0], -kLogitClamp, kLogitClamp);
    if (d_raw != nullptr) {
        d_raw[0] = std::abs(raw[0]) < kLogitClamp ? logistic(logit) - y : 0.0;
    }
    return softplus(logit) - y * logit;
}

MlpParams zeros_like(const MlpParams& params) {
    MlpParams out = params;
    for (auto& layer : out.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    return out;
}

Standardization column_standardization(const TrainingSet& set, bool is_root) {
    Standardization st;
    st.mean.assign(set.input_dim, 0.0);
    st.scale.assign(set.input_dim, 1.0);
    if (is_root || set.size() == 0) return st;
    const double n = static_cast<double>(set.size());
    for (std::size_t d = 0; d < set.input_dim; ++d) {
        double sum = 0.0;
        for (std::size_t r = 0; r < set.size(); ++r) sum += set.inputs[r * set.input_dim + d];
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t r = 0; r < set.size(); ++r) {
            const double dx = set.inputs[r * set.input_dim + d] - mean;
            ss += dx * dx;
        }
        const double sd = std::sqrt(ss / n);
        st.mean[d] = mean;
        st.scale[d] = sd > 0.0 ? sd : 1.0;
    }
    return st;
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weights.size() + layer.bias.size();
    return n;
}

std::vector<double> MlpParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& layer : layers) {
        out.insert(out.end(), layer.weights.begin(), layer.weights.end());
        out.insert(out.end(), layer.bias.begin(), layer.bias.end());
    }
    return out;
}

void MlpParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw Error(ErrorCode::DimensionMismatch, "flat parameter vector size");
    std::size_t k = 0;
    for (auto& layer : layers) {
        for (double& w : layer.weights) w = flat[k++];
        for (double& b : layer.bias) b = flat[k++];
    }
}

Mechanism make_mechanism(std::string node, std::vector<std::string> parents, HeadKind head,
                         std::span<const std::size_t> hidden, std::uint64_t seed) {
    Mechanism mech;
    mech.node = std::move(node);
    mech.parents = std::move(parents);
    mech.head = head;
    const std::size_t dim = mech.input_dim();
    mech.standardization.mean.assign(dim, 0.0);
    mech.standardization.scale.assign(dim, 1.0);

    Rng rng(seed);
    std::size_t fan_in = dim;
    std::vector<std::size_t> widths(hidden.begin(), hidden.end());
    widths.push_back(head_outputs(head));
    for (std::size_t width : widths) {
        DenseLayer layer;
        layer.inputs = fan_in;
        layer.outputs = width;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> init(-bound, bound);
        layer.weights.resize(fan_in * width);
        layer.bias.resize(width);
        for (double& w : layer.weights) w = init(rng);
        for (double& b : layer.bias) b = init(rng);
        mech.params.layers.push_back(std::move(layer));
        fan_in = width;
    }
    return mech;
}

DistributionParams forward(const Mechanism& mech, std::span<const double> parent_values) {
    thread_local Trace trace;
    trace.acts.resize(mech.params.layers.size() + 1);
    standardize_into(mech, parent_values, trace.acts[0]);
    run_layers(mech.params, trace);
    return head_params(mech.head, trace.acts.back());
}

double sample_from(const DistributionParams& params, Rng& rng) {
    if (const auto* g = std::get_if<GaussianParams>(&params)) {
        return std::normal_distribution<double>(g->mu, g->sigma)(rng);
    }
    const auto& b = std::get<BernoulliParams>(params);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < b.p ? 1.0 : 0.0;
}

double sample(const Mechanism& mech, std::span<const double> parent_values, Rng& rng) {
    return sample_from(forward(mech, parent_values), rng);
}

TrainingSet make_training_set(const Dataset& data, const std::string& node, const std::vector<std::string>& parents) {
    std::vector<std::string> required = parents;
    required.push_back(node);
    data.require_columns(required);

    TrainingSet set;
    set.input_dim = parents.empty() ? 1 : parents.size();
    const std::size_t n = data.rows();
    set.targets.assign(data.column(node).begin(), data.column(node).end());
    set.inputs.resize(n * set.input_dim, 1.0);
    for (std::size_t p = 0; p < parents.size(); ++p) {
        const auto col = data.column(parents[p]);
        for (std::size_t r = 0; r < n; ++r) set.inputs[r * set.input_dim + p] = col[r];
    }
    return set;
}

double negative_log_likelihood(const Mechanism& mech, const TrainingSet& batch) {
    if (batch.size() == 0) throw Error(ErrorCode::InsufficientData, "empty batch");
    thread_local Trace trace;
    trace.acts.resize(mech.params.layers.size() + 1);
    double total = 0.0;
    for (std::size_t r = 0; r < batch.size(); ++r) {
        standardize_into(mech, batch.row(r), trace.acts[0]);
        run_layers(mech.params, trace);
        total += head_loss(mech.head, trace.acts.back(), batch.targets[r], nullptr);
    }
    const double mean = total / static_cast<double>(batch.size());
    if (!std::isfinite(mean)) throw Error(ErrorCode::NonFiniteLoss, mech.node);
    return mean;
}

GradientResult gradients(const Mechanism& mech, const TrainingSet& batch, std::span<const std::size_t> rows) {
    const std::size_t count = rows.empty() ? batch.size() : rows.size();
    if (count == 0) throw Error(ErrorCode::InsufficientData, "empty batch");

    GradientResult result;
    result.gradient = zeros_like(mech.params);
    const std::size_t n_layers = mech.params.layers.size();

    Trace trace;
    trace.acts.resize(n_layers + 1);
    std::vector<double> delta;
    std::vector<double> delta_prev;
    double total = 0.0;

    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t r = rows.empty() ? k : rows[k];
        standardize_into(mech, batch.row(r), trace.acts[0]);
        run_layers(mech.params, trace);

        delta.assign(head_outputs(mech.head), 0.0);
        total += head_loss(mech.head, trace.acts.back(), batch.targets[r], delta.data());

        for (std::size_t l = n_layers; l-- > 0;) {
            const DenseLayer& layer = mech.params.layers[l];
            DenseLayer& grad = result.gradient.layers[l];
            const auto& in = trace.acts[l];
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                grad.bias[o] += delta[o];
                double* grow = grad.weights.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) grow[i] += delta[o] * in[i];
            }
            if (l == 0) break;
            delta_prev.assign(layer.inputs, 0.0);
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double* row = layer.weights.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) delta_prev[i] += row[i] * delta[o];
            }
            for (std::size_t i = 0; i < layer.inputs; ++i) delta_prev[i] *= 1.0 - in[i] * in[i];
            delta.swap(delta_prev);
        }
    }

    const double inv = 1.0 / static_cast<double>(count);
    result.loss = total * inv;
    if (!std::isfinite(result.loss)) throw Error(ErrorCode::NonFiniteLoss, mech.node);
    for (auto& layer : result.gradient.layers) {
        for (double& w : layer.weights) w *= inv;
        for (double& b : layer.bias) b *= inv;
        const bool finite = std::all_of(layer.weights.begin(), layer.weights.end(), [](double v) { return std::isfinite(v); }) &&
                            std::all_of(layer.bias.begin(), layer.bias.end(), [](double v) { return std::isfinite(v); });
        if (!finite) throw Error(ErrorCode::NonFiniteGradient, mech.node);
    }
    return result;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
    if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
    if (!(rms_decay >= 0.0 && rms_decay < 1.0)) throw Error(ErrorCode::InvalidConfig, "rms_decay must be in [0,1)");
    if (!(rms_epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "rms_epsilon must be > 0");
}

Mechanism fit(const Dataset& data, const Node& node, const std::vector<std::string>& parents,
              const TrainConfig& config, FitReport* report) {
    config.validate();
    const TrainingSet set = make_training_set(data, node.name, parents);
    if (set.size() < kMinTrainingRows) {
        throw Error(ErrorCode::InsufficientData, node.name + ": " + std::to_string(set.size()) + " rows, need " +
                                                     std::to_string(kMinTrainingRows));
    }

    Mechanism mech = make_mechanism(node.name, parents, head_for(node.kind), config.hidden, config.seed);
    mech.standardization = column_standardization(set, parents.empty());

    FitReport local;
    FitReport& rep = report != nullptr ? *report : local;
    rep = FitReport{};

    const auto evaluate = [&](const Mechanism& m) {
        try {
            return negative_log_likelihood(m, set);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NonFiniteLoss) throw Error(ErrorCode::Diverged, node.name);
            throw;
        }
    };

    rep.initial_nll = evaluate(mech);
    double best_nll = rep.initial_nll;
    MlpParams best = mech.params;

    std::vector<double> theta = mech.params.flatten();
    std::vector<double> mean_square(theta.size(), 0.0);
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(config.seed, 1));

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            GradientResult g;
            try {
                g = gradients(mech, set, std::span<const std::size_t>(order.data() + start, len));
            } catch (const Error& e) {
                if (e.code() == ErrorCode::NonFiniteLoss || e.code() == ErrorCode::NonFiniteGradient) {
                    throw Error(ErrorCode::Diverged, node.name + " at epoch " + std::to_string(epoch));
                }
                throw;
            }
            const std::vector<double> grad = g.gradient.flatten();
            for (std::size_t k = 0; k < theta.size(); ++k) {
                mean_square[k] = config.rms_decay * mean_square[k] + (1.0 - config.rms_decay) * grad[k] * grad[k];
                theta[k] -= config.learning_rate * grad[k] / (std::sqrt(mean_square[k]) + config.rms_epsilon);
            }
            mech.params.assign(theta);
        }
        const double nll = evaluate(mech);
        rep.epoch_nll.push_back(nll);
        if (nll < best_nll) {
            best_nll = nll;
            best = mech.params;
            rep.best_epoch = epoch;
        }
    }
    mech.params = std::move(best);
    rep.final_nll = best_nll;
    return mech;
}

}  // namespace pac
